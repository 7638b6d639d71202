//! The ten acceptance criteria, each checked at its stated tolerance and
//! runtime budget. Every criterion prints one `[PASS]` or `[FAIL]` line.

use std::time::{Duration, Instant};

use aaqpt::catalog::{bit_flip_channel, horodecki, max_entangled, pauli, probe_states, sigma_e};
use aaqpt::channel::{schur_channel, vectorize};
use aaqpt::extraction::{demonstrate_unfaithfulness, extract, ExtractionError, ExtractionMode};
use aaqpt::qstate::{
    hermitian_eigenvalues, max_abs, tensor, trace_distance, BipartiteState, ComplexMatrix, C64,
};
use aaqpt::random::{random_bipartite, random_channel, random_density, random_separable};
use aaqpt::realignment::{ccnr_sum, ppt_min_eigenvalue, realign, realign_check, singular_spectrum, ThresholdPolicy};
use aaqpt::tomography::{run_experiment, ExperimentConfig, NoiseModel, Shots};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    descending(m.clone().singular_values().iter().copied().collect())
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sigma_e_regression() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let expected = descending(vec![0.5, p / 2.0, (1.0 - p) / 2.0, p / 2.0, p / 2.0, 0.0, (1.0 - p) / 2.0, 0.0, (1.0 - p) / 2.0]);
        let spectrum = singular_spectrum(&realign(&sigma_e(p).unwrap()), ThresholdPolicy::Scaled { dim_a: 3 }).unwrap();
        worst = worst.max(max_gap(&spectrum.values, &expected));
    }
    outcome(worst < 1e-12, format!("max singular value deviation {worst:.3e}"))
}

fn horodecki_sweep() -> Outcome {
    let mut failures = Vec::new();
    for k in 1..=9 {
        let a = k as f64 / 10.0;
        let s = horodecki(a).unwrap();
        let min_eig = hermitian_eigenvalues(s.matrix())[0];
        let trace_dev = (s.matrix().trace().re - 1.0).abs();
        let ppt = ppt_min_eigenvalue(&s);
        let zeros = singular_spectrum(&realign(&s), ThresholdPolicy::Scaled { dim_a: 3 }).unwrap().zero_count();
        if min_eig < -1e-12 || trace_dev > 1e-12 || ppt < -1e-10 || zeros != 1 {
            failures.push(format!("a={a}: min_eig={min_eig:.2e} trace_dev={trace_dev:.2e} ppt={ppt:.2e} zeros={zeros}"));
        }
    }
    if failures.is_empty() {
        outcome(true, "9 states PSD, unit trace, PPT, one zero singular value")
    } else {
        outcome(false, failures.join("; "))
    }
}

fn bit_flip_reproduction() -> Outcome {
    let bell = max_entangled(2);
    let out = bit_flip_channel().apply_extended(&bell).unwrap();
    let x = pauli('X');
    let expected = (ComplexMatrix::identity(4, 4) + tensor(&x, &x)).scale(0.5);
    match extract(&bell, &out, ExtractionMode::Strict, None) {
        Ok(res) => {
            let dev = max_abs(&(res.m.matrix() - expected));
            outcome(dev < 1e-10, format!("max entry deviation {dev:.3e}"))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn swap_form_spectrum() -> Outcome {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    let mut transpose_exact = true;
    for d in [2, 3] {
        for _ in 0..100 {
            let s = random_bipartite(d, d, &mut r);
            let check = realign_check(&s).unwrap();
            let direct = realign(&s);
            worst = worst.max(max_gap(&singular_values(&check), &singular_values(&direct)));
            transpose_exact &= check.transpose() == direct;
        }
    }
    outcome(
        worst < 1e-10 && transpose_exact,
        format!("200 states, max spectrum gap {worst:.3e}, transpose identity exact: {transpose_exact}"),
    )
}

fn choi_round_trip() -> Outcome {
    let mut r = rng(202);
    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        for i in 0..25 {
            let ch = random_channel(d, 1 + i % 4, &mut r);
            let choi = ch.choi_state();
            for _ in 0..5 {
                let rho = random_density(d, &mut r);
                let via_choi = choi.apply(&rho).unwrap();
                worst = worst.max(max_abs(&(via_choi.matrix() - ch.apply(&rho).unwrap().matrix())));
            }
        }
    }
    outcome(worst < 1e-10, format!("50 channels x 5 states, max deviation {worst:.3e}"))
}

fn extraction_round_trip() -> Outcome {
    let mut r = rng(303);
    let (mut worst_m, mut worst_td): (f64, f64) = (0.0, 0.0);
    for d in [2, 3] {
        let probes = probe_states(d).unwrap();
        for i in 0..25 {
            let input = random_bipartite(d, d, &mut r);
            let ch = random_channel(d, 1 + i % 4, &mut r);
            let out = ch.apply_extended(&input).unwrap();
            let res = match extract(&input, &out, ExtractionMode::Strict, None) {
                Ok(res) => res,
                Err(e) => return outcome(false, format!("d={d} pair {i}: {e}")),
            };
            worst_m = worst_m.max(max_abs(&(res.m.matrix() - ch.superoperator().matrix())));
            for probe in &probes {
                let predicted = res.m.apply_matrix(probe.matrix()).unwrap();
                let direct = ch.apply(probe).unwrap();
                worst_td = worst_td.max(trace_distance(&predicted, direct.matrix()));
            }
        }
    }
    outcome(
        worst_m < 1e-9 && worst_td < 1e-9,
        format!("50 pairs, max |M - sum K(x)K*| {worst_m:.3e}, max probe trace distance {worst_td:.3e}"),
    )
}

/// Schur channels with Gram vectors differing only on the `|1><2|`
/// coherence, which sigma_E(1/2) never probes.
fn kernel_witness() -> Outcome {
    let s = 0.5f64.sqrt();
    let c = |re: f64| C64::new(re, 0.0);
    let e0 = DVector::from_vec(vec![c(1.0), c(0.0)]);
    let plus = DVector::from_vec(vec![c(s), c(s)]);
    let minus = DVector::from_vec(vec![c(s), c(-s)]);
    let ch_a = schur_channel(&[e0.clone(), plus.clone(), plus.clone()]).unwrap();
    let ch_b = schur_channel(&[e0, plus, minus]).unwrap();
    let input = sigma_e(0.5).unwrap();
    let report = demonstrate_unfaithfulness(&input, &ch_a, &ch_b).unwrap();
    let out = ch_b.apply_extended(&input).unwrap();
    let strict = extract(&input, &out, ExtractionMode::Strict, None);
    let rejected = matches!(strict, Err(ExtractionError::NotFaithful { kernel_dimension: 2, .. }));
    outcome(
        report.output_distance < 1e-9 && report.channel_distance > 0.01 && rejected,
        format!(
            "output distance {:.3e}, channel distance {:.4}, strict extraction NotFaithful: {rejected}",
            report.output_distance, report.channel_distance
        ),
    )
}

fn ccnr_soundness() -> Outcome {
    let mut r = rng(404);
    let mut worst = f64::NEG_INFINITY;
    for d in [2, 3] {
        for i in 0..100 {
            let s = random_separable(d, d, 1 + i % 8, &mut r);
            worst = worst.max(ccnr_sum(&s).unwrap());
        }
    }
    let mut entangled: Vec<(String, f64)> = vec![("bell".into(), ccnr_sum(&max_entangled(2)).unwrap())];
    for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
        entangled.push((format!("sigmaE({p})"), ccnr_sum(&sigma_e(p).unwrap()).unwrap()));
    }
    let off = entangled.iter().map(|(_, v)| (v - 2.0).abs()).fold(0.0, f64::max);
    outcome(
        worst <= 1.0 + 1e-9 && off < 1e-10,
        format!("200 separable mixtures max sum {worst:.12}; Bell and sigmaE max |sum - 2| {off:.3e}"),
    )
}

fn experiment_pipeline() -> Outcome {
    let exact = run_experiment(&ExperimentConfig {
        shots: Shots::Exact,
        batches: 1,
        seed: 0,
        noise: NoiseModel::noiseless(),
    })
    .unwrap();
    let exact_dev = std::iter::once(exact.fidelity_in.mean)
        .chain(std::iter::once(exact.fidelity_out.mean))
        .chain(exact.probes.values().map(|p| p.mean))
        .map(|f| (f - 1.0).abs())
        .fold(0.0, f64::max);
    let exact_ok = exact_dev < 1e-9 && exact.probes.len() == 6;

    let cfg = ExperimentConfig {
        shots: Shots::Finite(10_240),
        batches: 10,
        seed: 7,
        noise: NoiseModel::noiseless(),
    };
    let first = run_experiment(&cfg).unwrap();
    let second = run_experiment(&cfg).unwrap();
    let identical = serde_json::to_string(&first).unwrap() == serde_json::to_string(&second).unwrap();
    let (f_in, f_out) = (first.fidelity_in.mean, first.fidelity_out.mean);
    outcome(
        exact_ok && identical && f_in >= 0.99 && f_out >= 0.99,
        format!(
            "exact max |F - 1| {exact_dev:.3e}; 10240 shots: F_in {f_in:.6}, F_out {f_out:.6}, reruns identical: {identical}"
        ),
    )
}

fn product_rank_one() -> Outcome {
    let mut r = rng(505);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let (da, db) = [(2, 2), (3, 3), (2, 3)][i % 3];
        let a = random_density(da, &mut r);
        let b = random_density(db, &mut r);
        let s = BipartiteState::product(&a, &b);
        let va = vectorize(a.matrix()).unwrap().vector().clone();
        let vb = vectorize(b.matrix()).unwrap().vector().clone();
        worst = worst.max(max_abs(&(realign(&s) - va * vb.transpose())));
    }
    outcome(worst < 1e-12, format!("50 product states, max deviation {worst:.3e}"))
}

fn main() {
    type Criterion = (&'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("1 sigma_E singular values", 1, sigma_e_regression),
        ("2 Horodecki sweep", 1, horodecki_sweep),
        ("3 bit-flip superoperator", 1, bit_flip_reproduction),
        ("4 swap-form spectrum", 10, swap_form_spectrum),
        ("5 Choi round trip", 10, choi_round_trip),
        ("6 extraction round trip", 30, extraction_round_trip),
        ("7 unfaithfulness witness", 5, kernel_witness),
        ("8 CCNR soundness", 10, ccnr_soundness),
        ("9 experiment pipeline", 60, experiment_pipeline),
        ("10 product realignment", 5, product_rank_one),
    ];
    let mut failed = Vec::new();
    for (name, budget_s, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(budget_s);
        let passed = result.passed && in_time;
        println!(
            "[{}] {name}: {} ({:.3} s, budget {budget_s} s)",
            if passed { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
        if !passed {
            failed.push(name);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
