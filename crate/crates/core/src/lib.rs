//! Exact counting of Eulerian circuits and spanning trees in simple even
//! graphs, a closed-form estimate of the circuit count, and numerical checks
//! of the Laplacian inequalities and integral identities behind it.
//!
//! Counting convention: an Eulerian circuit is a closed directed edge
//! sequence up to rotation, so a circuit and its reversal are distinct.

pub mod counting;
pub mod estimator;
pub mod exact;
pub mod graph;
pub mod lemmalab;
pub mod probe;
pub mod spectral;

pub use counting::{eul_backtrack, eul_exact, eulerian_orientations, CountError, EulCountResult, Orientation};
pub use exact::{BigCount, IntMatrix};
pub use graph::{classify, gen_even_graph, parse_graph, Graph, GraphClassReport, GraphError, ParseError};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Base-2 logarithm of a big integer; `-inf` for zero.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::NAN, f64::log2);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit head");
    top.log2() + shift as f64
}
