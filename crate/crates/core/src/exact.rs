//! Exact integer linear algebra: Laplacians, fraction-free determinants and
//! Matrix-Tree counts.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::counting::Orientation;
use crate::graph::Graph;

/// Exact nonnegative count (spanning trees, arborescences, circuits).
pub type BigCount = BigUint;

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows of machine integers. Panics on ragged input.
    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flat_map(|row| row.iter().map(|&x| x.into())).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.data[i * self.cols + j] = value;
    }

    /// The matrix with row `i` and column `j` removed.
    pub fn minor(&self, i: usize, j: usize) -> IntMatrix {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for r in (0..self.rows).filter(|&r| r != i) {
            for c in (0..self.cols).filter(|&c| c != j) {
                data.push(self.get(r, c).clone());
            }
        }
        IntMatrix {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }

    /// Entries as `f64`, row-major. Panics if an entry does not fit.
    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).to_f64().expect("entry representable as f64")
        })
    }

    fn to_small(&self) -> Option<Vec<i64>> {
        self.data.iter().map(ToPrimitive::to_i64).collect()
    }
}

/// Laplacian `Q`: degrees on the diagonal, `-1` on edges.
pub fn laplacian(g: &Graph) -> IntMatrix {
    let n = g.n();
    let mut m = IntMatrix::zeros(n, n);
    for (v, &d) in g.degrees().iter().enumerate() {
        m.set(v, v, BigInt::from(d));
    }
    for &(u, v) in g.edges() {
        m.set(u, v, BigInt::from(-1));
        m.set(v, u, BigInt::from(-1));
    }
    m
}

/// `Q + J`, where `J` is the all-ones matrix.
pub fn q_hat(q: &IntMatrix) -> IntMatrix {
    let mut m = q.clone();
    for x in &mut m.data {
        *x += 1;
    }
    m
}

/// Exact determinant by Bareiss fraction-free elimination.
///
/// Runs in checked `i128` arithmetic when the entries fit in `i64` and falls
/// back to big integers on overflow. Panics on non-square input.
pub fn det_exact(m: &IntMatrix) -> BigInt {
    assert!(m.is_square(), "determinant of a {}x{} matrix", m.rows, m.cols);
    if let Some(small) = m.to_small() {
        if let Some(d) = det_small(&small, m.rows) {
            return BigInt::from(d);
        }
    }
    det_bareiss_big(m.data.clone(), m.rows)
}

/// Checked-`i128` Bareiss. `None` means an intermediate overflowed.
pub(crate) fn det_small(entries: &[i64], n: usize) -> Option<i128> {
    if n == 0 {
        return Some(1);
    }
    let mut a: Vec<i128> = entries.iter().map(|&x| x as i128).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k * n + k] == 0 {
            let swap = (k + 1..n).find(|&r| a[r * n + k] != 0)?;
            for c in 0..n {
                a.swap(k * n + c, swap * n + c);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let lead = a[i * n + k];
            for j in k + 1..n {
                let num = pivot
                    .checked_mul(a[i * n + j])?
                    .checked_sub(lead.checked_mul(a[k * n + j])?)?;
                a[i * n + j] = num / prev;
            }
            a[i * n + k] = 0;
        }
        prev = pivot;
    }
    Some(sign * a[n * n - 1])
}

// `None` from the zero-pivot search above means a zero column below the
// diagonal, i.e. a singular matrix; only the overflow case should fall back.
fn det_bareiss_big(mut a: Vec<BigInt>, n: usize) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k * n + k].is_zero() {
            match (k + 1..n).find(|&r| !a[r * n + k].is_zero()) {
                Some(swap) => {
                    for c in 0..n {
                        a.swap(k * n + c, swap * n + c);
                    }
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k * n + k] * &a[i * n + j] - &a[i * n + k] * &a[k * n + j];
                a[i * n + j] = num / &prev;
            }
            a[i * n + k] = BigInt::zero();
        }
        prev = a[k * n + k].clone();
    }
    let d = a[n * n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

fn small_det_or_big(entries: Vec<i64>, n: usize) -> BigInt {
    match det_small(&entries, n) {
        Some(d) => BigInt::from(d),
        None if is_singular_column(&entries, n) => BigInt::zero(),
        None => det_bareiss_big(entries.into_iter().map(BigInt::from).collect(), n),
    }
}

// Cheap pre-check only used to short-circuit the big-integer fallback.
fn is_singular_column(entries: &[i64], n: usize) -> bool {
    (0..n).any(|c| (0..n).all(|r| entries[r * n + c] == 0))
}

fn to_count(d: BigInt) -> BigCount {
    match d.sign() {
        Sign::Minus => panic!("negative count {d}"),
        _ => d.abs().to_biguint().expect("nonnegative"),
    }
}

/// Number of spanning trees: the cofactor of `Q` at `(0, 0)`. Zero when the
/// graph is disconnected.
pub fn spanning_tree_count(g: &Graph) -> BigCount {
    let n = g.n();
    if n == 1 {
        return BigCount::one();
    }
    let m = n - 1;
    let mut entries = vec![0i64; m * m];
    for v in 1..n {
        entries[(v - 1) * m + (v - 1)] = g.degree(v) as i64;
    }
    for &(u, v) in g.edges() {
        if u > 0 && v > 0 {
            entries[(u - 1) * m + (v - 1)] = -1;
            entries[(v - 1) * m + (u - 1)] = -1;
        }
    }
    to_count(small_det_or_big(entries, m))
}

/// `det(Q + J)`, which equals `n^2 t(G)`.
pub fn det_q_hat(g: &Graph) -> BigInt {
    det_exact(&q_hat(&laplacian(g)))
}

/// Number of spanning arborescences of `d` with every edge directed toward
/// `root`, via the out-degree Laplacian with row and column `root` removed.
pub fn arborescence_count(d: &Orientation<'_>, root: usize) -> BigCount {
    let n = d.base().n();
    assert!(root < n, "root {root} out of range");
    if n == 1 {
        return BigCount::one();
    }
    let m = n - 1;
    let shrink = |v: usize| if v > root { v - 1 } else { v };
    let mut entries = vec![0i64; m * m];
    for (tail, head) in d.arcs() {
        if tail == root {
            continue;
        }
        let t = shrink(tail);
        entries[t * m + t] += 1;
        if head != root {
            entries[t * m + shrink(head)] -= 1;
        }
    }
    to_count(small_det_or_big(entries, m))
}
