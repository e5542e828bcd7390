//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eulerian_core::counting::{eul_backtrack, eul_exact, integral_s_from_count};
use eulerian_core::estimator::{kn_asymptotic, run_experiment, ExperimentConfig};
use eulerian_core::exact::spanning_tree_count;
use eulerian_core::graph::gen_even_graph;
use eulerian_core::lemmalab::{default_corpus, ids, run_suite, summarize, SuiteConfig, VerdictStatus};
use eulerian_core::probe::{
    gaussian_reference, mc_gaussian_on_l, mc_s0, sample_theta, tree_sum_brute, tree_sum_det, v0_half_width, ThetaPoint,
};
use eulerian_core::spectral::{eigen_tolerance, graph_spectrum};
use eulerian_core::{log2_big, Graph};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let mut classes = Vec::new();
    for (n, expected) in [(3, 1), (4, 1), (5, 4), (6, 8)] {
        let c = common::even_connected_classes(n);
        if c.len() != expected {
            return Err(format!("{} classes on {n} vertices, expected {expected}", c.len()));
        }
        classes.extend(c);
    }
    let mut random = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut seed = 0u64;
    while random.len() < 200 {
        seed += 1;
        let n = rng.gen_range(3..=9);
        let p = [0.3, 0.5, 0.7][rng.gen_range(0..3)];
        if let Ok(g) = gen_even_graph(n, p, seed) {
            if g.edge_count() <= 16 {
                random.push(g);
            }
        }
    }
    for g in classes.iter().chain(&random) {
        let exact = eul_exact(g).map_err(|e| e.to_string())?.eul;
        let back = eul_backtrack(g).map_err(|e| e.to_string())?;
        if exact != back {
            return Err(format!("mismatch {exact} vs {back} on {:?}", g.edges()));
        }
    }
    Ok(format!(
        "{} isomorphism classes + {} random graphs agree",
        classes.len(),
        random.len()
    ))
}

fn matrix_tree() -> Outcome {
    for n in 3..=8u32 {
        let t = spanning_tree_count(&Graph::complete(n as usize));
        if t != BigUint::from(n).pow(n - 2) {
            return Err(format!("t(K{n}) = {t}"));
        }
    }
    Ok("t(K_n) = n^(n-2) for n = 3..8".into())
}

fn spectral() -> Outcome {
    for n in 4..=12 {
        let l1 = graph_spectrum(&Graph::complete(n)).lambda1;
        if (l1 - n as f64).abs() > eigen_tolerance(n) {
            return Err(format!("lambda1(K{n}) = {l1}"));
        }
    }
    let mut worst = f64::NEG_INFINITY;
    let corpus = default_corpus();
    for e in &corpus {
        let g = e.graph.as_ref().ok_or(format!("{} failed to generate", e.id))?;
        let s = graph_spectrum(g);
        let n = g.n() as f64;
        worst = worst.max(s.lambda_max - n);
        if s.lambda_max > n + eigen_tolerance(g.n()) {
            return Err(format!("{}: lambda_max {} > n = {n}", e.id, s.lambda_max));
        }
    }
    Ok(format!(
        "K4..K12 exact; max(lambda_max - n) = {worst:.3e} over {} graphs",
        corpus.len()
    ))
}

fn ratio_band() -> Outcome {
    let exp = run_experiment(&ExperimentConfig::default()).map_err(|e| e.to_string())?;
    let s = &exp.summary;
    let ratios: Vec<f64> = exp.rows.iter().filter_map(|r| r.ratio).collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    check(
        s.instances >= 20 && s.in_band as f64 >= 0.9 * s.instances as f64,
        format!(
            "{}/{} in [0.70, 1.30], ratios in [{lo:.4}, {hi:.4}], {} redrawn below sigma 0.5",
            s.in_band, s.instances, s.redrawn
        ),
    )
}

fn complete_graph_trend() -> Outcome {
    let mut ratios = Vec::new();
    for n in [5, 7] {
        let exact = eul_exact(&Graph::complete(n)).map_err(|e| e.to_string())?.eul;
        let asym = kn_asymptotic(n).map_err(|e| e.to_string())?;
        ratios.push((log2_big(&exact) - asym).exp2());
    }
    let (r5, r7) = (ratios[0], ratios[1]);
    check(
        (r7 - 1.0).abs() < (r5 - 1.0).abs() && [r5, r7].iter().all(|r| (0.5..=2.0).contains(r)),
        format!("exact/asymptotic: K5 {r5:.5}, K7 {r7:.5}"),
    )
}

fn determinant_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut graphs = 0;
    for n in 3..=6 {
        for g in common::even_connected_classes(n) {
            graphs += 1;
            let h = v0_half_width(n, 0.1);
            for _ in 0..20 {
                let theta = ThetaPoint::new(&g, sample_theta(n, h, &mut rng)).map_err(|e| e.to_string())?;
                let brute = tree_sum_brute(&g, &theta).map_err(|e| e.to_string())?;
                let det = tree_sum_det(&g, &theta);
                worst = worst.max((det - brute).norm() / brute.norm());
            }
        }
    }
    check(
        worst <= 1e-9,
        format!("{graphs} graphs x 20 points, max relative error {worst:.3e}"),
    )
}

fn gaussian_calibration() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (n, seed) in [(2, 71), (3, 72)] {
        let g = Graph::complete(n);
        let est = mc_gaussian_on_l(&g, 0.5, 5.0, 1_000_000, seed).map_err(|e| e.to_string())?;
        let truth = gaussian_reference(&g, 0.5);
        let z = (est.mean_re - truth) / est.std_error;
        ok &= z.abs() <= 3.0;
        details.push(format!("K{n}: {:.5} vs {truth:.5} (z = {z:+.2})", est.mean_re));
    }
    check(ok, details.join(", "))
}

fn lemma_suite() -> Outcome {
    let verdicts = run_suite(&default_corpus(), &SuiteConfig::default()).map_err(|e| e.to_string())?;
    let required = [
        ids::FIEDLER_UPPER,
        ids::FIEDLER_LOWER,
        ids::FIEDLER_DELETION,
        ids::LOG_DET_REMAINDER,
        ids::DET_LOWER_BOUND,
        ids::LEVEL_FUNCTION,
    ];
    let summary = summarize(&verdicts);
    let mut parts = Vec::new();
    let mut ok = true;
    for id in required {
        let s = summary
            .iter()
            .find(|s| s.lemma == id)
            .ok_or(format!("no verdicts for {id}"))?;
        ok &= s.violations == 0 && s.asserted > 0;
        parts.push(format!("{id} {}/{}", s.holds, s.asserted));
    }
    let contractions = verdicts
        .iter()
        .filter(|v| v.lemma == ids::LOG_DET_REMAINDER && v.status == VerdictStatus::Asserted)
        .count();
    ok &= contractions == 1000;
    let violations = verdicts.iter().filter(|v| v.is_violation()).count();
    ok &= violations == 0;
    parts.push(format!("{violations} violations overall"));
    check(ok, parts.join(", "))
}

fn dominant_region() -> Outcome {
    let g = Graph::complete(5);
    let eul = eul_exact(&g).map_err(|e| e.to_string())?.eul;
    let s = integral_s_from_count(&g, &eul);
    let est = mc_s0(&g, 0.1, 1_000_000, 9).map_err(|e| e.to_string())?;
    let ratio = est.mean_re / s;
    check(
        (0.2..=5.0).contains(&ratio),
        format!(
            "S0 = {:.2} +- {:.2}, S = {s:.2} (Eul = {}), ratio {ratio:.4}",
            est.mean_re,
            est.std_error,
            eul.to_u64().unwrap_or(0)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("matrix-tree exactness", matrix_tree),
        ("spectral bounds", spectral),
        ("estimate/exact band", ratio_band),
        ("complete-graph trend", complete_graph_trend),
        ("determinant identity", determinant_identity),
        ("gaussian calibration", gaussian_calibration),
        ("lemma suite", lemma_suite),
        ("dominant-region integral", dominant_region),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {} {name}: PASS ({secs:.1}s) {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
