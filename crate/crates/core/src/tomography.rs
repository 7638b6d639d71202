//! Simulation of the three-qubit process-tomography experiment: density
//! matrix circuit evolution with gate-local depolarizing noise, seeded Pauli
//! measurement sampling, linear-inversion state tomography, and the fidelity
//! report of the extracted channel.
//!
//! Qubit `q0` is the most significant bit of the computational-basis index,
//! so keeping `(q0, q1)` yields states in the `A (x) B` convention of
//! [`crate::qstate`].

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{bit_flip_channel, max_entangled, pauli, probe_names, probe_states};
use crate::channel::Superoperator;
use crate::extraction::{extract, ExtractionMode};
use crate::io::{matrix_to_json, MatrixJson};
use crate::qstate::{fidelity, project_to_density, BipartiteState, ComplexMatrix, DensityMatrix, C64};

/// Name of the generator behind every sampled count.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha), seed_from_u64";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TomographyError {
    #[error("gate {gate:?} is invalid for a {qubits}-qubit circuit")]
    InvalidGate { gate: Gate, qubits: usize },

    #[error("depolarizing probability {0} outside [0, 1]")]
    InvalidNoise(f64),

    #[error("missing measurement setting {0:?}")]
    MissingBasis((Pauli, Pauli)),

    #[error("{shots} shots cannot be split evenly into {batches} batches")]
    IndivisibleShots { shots: u64, batches: usize },

    #[error("need at least one batch and one shot per batch")]
    EmptyExperiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gate {
    H(usize),
    I(usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::I(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    qubit_count: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubit_count: usize, gates: Vec<Gate>) -> Result<Self, TomographyError> {
        for &gate in &gates {
            let qs = gate.qubits();
            let distinct = qs.len() < 2 || qs[0] != qs[1];
            if qs.iter().any(|&q| q >= qubit_count) || !distinct {
                return Err(TomographyError::InvalidGate {
                    gate,
                    qubits: qubit_count,
                });
            }
        }
        Ok(Self { qubit_count, gates })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }
}

/// Depolarizing strength applied after every one- and two-qubit gate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NoiseModel {
    pub depolarizing_1q: f64,
    pub depolarizing_2q: f64,
}

impl NoiseModel {
    pub fn new(depolarizing_1q: f64, depolarizing_2q: f64) -> Result<Self, TomographyError> {
        for p in [depolarizing_1q, depolarizing_2q] {
            if !(0.0..=1.0).contains(&p) {
                return Err(TomographyError::InvalidNoise(p));
            }
        }
        Ok(Self {
            depolarizing_1q,
            depolarizing_2q,
        })
    }

    pub fn noiseless() -> Self {
        Self::default()
    }
}

/// Number of idle layers between state preparation and measurement.
const IDLE_LAYERS: usize = 2;

/// The state-preparation circuit (H on q0, CNOT q0 -> q1, idle identity
/// layers on q0 and q1) and the full circuit, which additionally puts q2 in
/// `|+>` and applies CNOT q2 -> q0. Tracing out q2 leaves the bit-flip
/// channel `{I/sqrt 2, X/sqrt 2}` applied to q0.
pub fn experiment_circuits() -> (Circuit, Circuit) {
    let mut prep = vec![Gate::H(0), Gate::Cnot { control: 0, target: 1 }];
    for _ in 0..IDLE_LAYERS {
        prep.push(Gate::I(0));
        prep.push(Gate::I(1));
    }
    let mut full = prep.clone();
    full.push(Gate::H(2));
    full.push(Gate::Cnot { control: 2, target: 0 });
    (
        Circuit::new(3, prep).expect("valid by construction"),
        Circuit::new(3, full).expect("valid by construction"),
    )
}

fn bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

fn gate_unitary(gate: Gate, n: usize) -> ComplexMatrix {
    let dim = 1 << n;
    match gate {
        Gate::I(_) => ComplexMatrix::identity(dim, dim),
        Gate::H(q) => {
            let h = (pauli('X') + pauli('Z')).scale(std::f64::consts::FRAC_1_SQRT_2);
            (0..n).fold(ComplexMatrix::identity(1, 1), |acc, k| {
                acc.kronecker(&if k == q { h.clone() } else { ComplexMatrix::identity(2, 2) })
            })
        }
        Gate::Cnot { control, target } => {
            let mut u = ComplexMatrix::zeros(dim, dim);
            for x in 0..dim {
                let y = if bit(x, control, n) == 1 { x ^ (1 << (n - 1 - target)) } else { x };
                u[(y, x)] = C64::new(1.0, 0.0);
            }
            u
        }
    }
}

/// `rho -> (1 - p) rho + p (I / 2^k)_T (x) Tr_T rho` on the qubit set `T`.
fn depolarize(rho: &ComplexMatrix, n: usize, touched: &[usize], p: f64) -> ComplexMatrix {
    if p == 0.0 {
        return rho.clone();
    }
    let dim = 1 << n;
    let mask: usize = touched.iter().map(|&q| 1 << (n - 1 - q)).sum();
    let k = touched.len();
    let assignments: Vec<usize> = (0..dim).filter(|x| x & !mask == 0).collect();
    let mut out = rho.scale(1.0 - p);
    for r in 0..dim {
        for c in 0..dim {
            if r & mask != c & mask {
                continue;
            }
            let (r_rest, c_rest) = (r & !mask, c & !mask);
            let traced: C64 = assignments.iter().map(|&t| rho[(r_rest | t, c_rest | t)]).sum();
            out[(r, c)] += traced * (p / (1 << k) as f64);
        }
    }
    out
}

/// Reduced state on `keep` (in the given order) of an `n`-qubit matrix.
fn reduce(rho: &ComplexMatrix, n: usize, keep: &[usize]) -> ComplexMatrix {
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let compose = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut x = 0;
        for (pos, &q) in keep.iter().enumerate() {
            x |= bit(kept_bits, pos, keep.len()) << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            x |= bit(traced_bits, pos, traced.len()) << (n - 1 - q);
        }
        x
    };
    let kd = 1 << keep.len();
    let td = 1 << traced.len();
    ComplexMatrix::from_fn(kd, kd, |r, c| (0..td).map(|t| rho[(compose(r, t), compose(c, t))]).sum())
}

/// Evolves `|0...0>` through `circuit`, depolarizing the touched qubits after
/// each gate, and returns the reduced state on `keep`.
pub fn run_exact(circuit: &Circuit, noise: &NoiseModel, keep: &[usize]) -> DensityMatrix {
    let n = circuit.qubit_count;
    let dim = 1 << n;
    let mut rho = ComplexMatrix::zeros(dim, dim);
    rho[(0, 0)] = C64::new(1.0, 0.0);
    for &gate in &circuit.gates {
        let u = gate_unitary(gate, n);
        rho = &u * rho * u.adjoint();
        let touched = gate.qubits();
        let p = if touched.len() == 1 {
            noise.depolarizing_1q
        } else {
            noise.depolarizing_2q
        };
        rho = depolarize(&rho, n, &touched, p);
    }
    DensityMatrix::new_unchecked(reduce(&rho, n, keep))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Eigenvectors for the `+1` and `-1` outcomes.
    fn eigenvectors(self) -> [[C64; 2]; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| C64::new(re, im);
        match self {
            Pauli::X => [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
            Pauli::Y => [[c(s, 0.0), c(0.0, s)], [c(s, 0.0), c(0.0, -s)]],
            Pauli::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        }
    }

    fn matrix(self) -> ComplexMatrix {
        pauli(match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        })
    }
}

pub type Setting = (Pauli, Pauli);

/// The nine two-qubit Pauli measurement settings in lexicographic order.
pub fn all_settings() -> Vec<Setting> {
    Pauli::ALL
        .iter()
        .flat_map(|&a| Pauli::ALL.iter().map(move |&b| (a, b)))
        .collect()
}

/// Born probabilities of the outcomes `(+,+), (+,-), (-,+), (-,-)`.
pub fn outcome_probabilities(rho: &DensityMatrix, setting: Setting) -> [f64; 4] {
    let ea = setting.0.eigenvectors();
    let eb = setting.1.eigenvectors();
    let m = rho.matrix();
    let mut probs = [0.0; 4];
    for (a, va) in ea.iter().enumerate() {
        for (b, vb) in eb.iter().enumerate() {
            let ket: Vec<C64> = (0..4).map(|idx| va[idx / 2] * vb[idx % 2]).collect();
            let mut p = C64::new(0.0, 0.0);
            for r in 0..4 {
                for c in 0..4 {
                    p += ket[r].conj() * m[(r, c)] * ket[c];
                }
            }
            probs[a * 2 + b] = p.re.max(0.0);
        }
    }
    probs
}

/// Multinomial sample of `shots` joint outcomes, deterministic in `seed`.
pub fn sample_pauli_counts(rho: &DensityMatrix, setting: Setting, shots: u64, seed: u64) -> [u64; 4] {
    let probs = outcome_probabilities(rho, setting);
    let dist = WeightedIndex::new(probs).expect("probabilities of a valid state are not all zero");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 4];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    counts
}

/// Linear-inversion estimate from outcome frequencies of all nine settings,
/// projected onto the density matrices.
///
/// Single-qubit expectations average the marginals of the three settings
/// that measure that qubit in the given basis.
pub fn linear_inversion_from_frequencies(freqs: &BTreeMap<Setting, [f64; 4]>) -> Result<DensityMatrix, TomographyError> {
    for setting in all_settings() {
        if !freqs.contains_key(&setting) {
            return Err(TomographyError::MissingBasis(setting));
        }
    }
    const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let expect = |setting: &Setting, f: &dyn Fn(f64, f64) -> f64| -> f64 {
        let p = freqs[setting];
        let total: f64 = p.iter().sum();
        p.iter().zip(SIGNS).map(|(w, (sa, sb))| w * f(sa, sb)).sum::<f64>() / total
    };

    let i2 = ComplexMatrix::identity(2, 2);
    let mut rho = ComplexMatrix::identity(4, 4);
    for &a in &Pauli::ALL {
        let marginal: f64 = Pauli::ALL.iter().map(|&b| expect(&(a, b), &|sa, _| sa)).sum::<f64>() / 3.0;
        rho += a.matrix().kronecker(&i2).scale(marginal);
    }
    for &b in &Pauli::ALL {
        let marginal: f64 = Pauli::ALL.iter().map(|&a| expect(&(a, b), &|_, sb| sb)).sum::<f64>() / 3.0;
        rho += i2.kronecker(&b.matrix()).scale(marginal);
    }
    for setting in all_settings() {
        let corr = expect(&setting, &|sa, sb| sa * sb);
        rho += setting.0.matrix().kronecker(&setting.1.matrix()).scale(corr);
    }
    Ok(project_to_density(&rho.scale(0.25)))
}

pub fn linear_inversion(counts: &BTreeMap<Setting, [u64; 4]>) -> Result<DensityMatrix, TomographyError> {
    let freqs = counts
        .iter()
        .map(|(&s, c)| (s, c.map(|x| x as f64)))
        .collect();
    linear_inversion_from_frequencies(&freqs)
}

/// Shots per measurement setting in each batch, or exact expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    /// Total shots per setting, split evenly over the batches.
    Finite(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub shots: Shots,
    pub batches: usize,
    pub seed: u64,
    pub noise: NoiseModel,
}

impl ExperimentConfig {
    /// 10,240 shots split into 10 batches.
    pub fn reference(seed: u64) -> Self {
        Self {
            shots: Shots::Finite(10_240),
            batches: 10,
            seed,
            noise: NoiseModel::noiseless(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityStat {
    pub mean: f64,
    /// Three times the sample standard deviation over batches.
    pub band: f64,
}

impl FidelityStat {
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { mean: f64::NAN, band: f64::NAN };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            band: 3.0 * var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchDetail {
    pub index: usize,
    pub seed: u64,
    pub fidelity_in: f64,
    pub fidelity_out: f64,
    pub probes: BTreeMap<String, f64>,
    pub residual: f64,
    pub truncated_count: usize,
    pub rho_in: MatrixJson,
    pub rho_out: MatrixJson,
    pub m: MatrixJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub shots: Option<u64>,
    pub shots_per_batch: Option<u64>,
    pub batches: usize,
    pub seed: u64,
    pub generator: &'static str,
    pub noise: NoiseModel,
    pub fidelity_in: FidelityStat,
    pub fidelity_out: FidelityStat,
    pub probes: BTreeMap<String, FidelityStat>,
    pub failed_batches: Vec<usize>,
    pub batch_details: Vec<BatchDetail>,
}

impl ExperimentReport {
    /// Per-batch tomographic estimates of the input state.
    pub fn rho_in_estimates(&self) -> Vec<DensityMatrix> {
        self.batch_details.iter().map(|b| from_json_unchecked(&b.rho_in)).collect()
    }

    pub fn rho_out_estimates(&self) -> Vec<DensityMatrix> {
        self.batch_details.iter().map(|b| from_json_unchecked(&b.rho_out)).collect()
    }
}

fn from_json_unchecked(m: &MatrixJson) -> DensityMatrix {
    DensityMatrix::new_unchecked(crate::io::matrix_from_json(m).expect("written by matrix_to_json"))
}

fn tomograph(rho: &DensityMatrix, shots: Option<u64>, seeds: &[u64]) -> DensityMatrix {
    let freqs: BTreeMap<Setting, [f64; 4]> = all_settings()
        .into_iter()
        .zip(seeds)
        .map(|(setting, &seed)| {
            let f = match shots {
                None => outcome_probabilities(rho, setting),
                Some(n) => sample_pauli_counts(rho, setting, n, seed).map(|c| c as f64),
            };
            (setting, f)
        })
        .collect();
    linear_inversion_from_frequencies(&freqs).expect("all nine settings present")
}

struct Theory {
    rho_in: DensityMatrix,
    rho_out: DensityMatrix,
    m: Superoperator,
}

fn theory() -> Theory {
    let bell = max_entangled(2);
    let flip = bit_flip_channel();
    let out = flip.apply_extended(&bell).expect("qubit channel on qubit factor");
    Theory {
        rho_in: bell.state().clone(),
        rho_out: out.state().clone(),
        m: flip.superoperator(),
    }
}

fn run_batch(
    index: usize,
    config: &ExperimentConfig,
    shots_per_batch: Option<u64>,
    exact_in: &DensityMatrix,
    exact_out: &DensityMatrix,
    theory: &Theory,
) -> BatchDetail {
    let seed = config.seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..18).map(|_| rng.next_u64()).collect();
    let rho_in = tomograph(exact_in, shots_per_batch, &seeds[..9]);
    let rho_out = tomograph(exact_out, shots_per_batch, &seeds[9..]);

    let fidelity_in = fidelity(&theory.rho_in, &rho_in).expect("both 4x4");
    let fidelity_out = fidelity(&theory.rho_out, &rho_out).expect("both 4x4");
    let mut detail = BatchDetail {
        index,
        seed,
        fidelity_in,
        fidelity_out,
        probes: BTreeMap::new(),
        residual: f64::NAN,
        truncated_count: 0,
        rho_in: matrix_to_json(rho_in.matrix()),
        rho_out: matrix_to_json(rho_out.matrix()),
        m: Vec::new(),
        failure: None,
    };

    let input = BipartiteState::new(rho_in, 2, 2).expect("4 = 2*2");
    let output = BipartiteState::new(rho_out, 2, 2).expect("4 = 2*2");
    match extract(&input, &output, ExtractionMode::Pseudo, None) {
        Ok(res) => {
            detail.residual = res.residual;
            detail.truncated_count = res.truncated_count;
            detail.m = matrix_to_json(res.m.matrix());
            let names = probe_names(2).expect("qubit frame");
            let probes = probe_states(2).expect("qubit frame");
            for (name, probe) in names.into_iter().zip(&probes) {
                let predicted = project_to_density(&res.m.apply_matrix(probe.matrix()).expect("qubit map"));
                let expected = theory.m.predict_output(probe).expect("exact channel is physical");
                detail.probes.insert(name, fidelity(&predicted, &expected).expect("both 2x2"));
            }
        }
        Err(err) => detail.failure = Some(err.to_string()),
    }
    detail
}

/// Runs the simulated experiment: per batch, tomograph the prepared and
/// channel-output states, extract the superoperator (pseudo-inverse mode),
/// and score input, output, and predicted probe outputs by fidelity.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, TomographyError> {
    if config.batches == 0 {
        return Err(TomographyError::EmptyExperiment);
    }
    let (shots, shots_per_batch) = match config.shots {
        Shots::Exact => (None, None),
        Shots::Finite(total) => {
            if total % config.batches as u64 != 0 {
                return Err(TomographyError::IndivisibleShots {
                    shots: total,
                    batches: config.batches,
                });
            }
            let per = total / config.batches as u64;
            if per == 0 {
                return Err(TomographyError::EmptyExperiment);
            }
            (Some(total), Some(per))
        }
    };

    let (prep, full) = experiment_circuits();
    let exact_in = run_exact(&prep, &config.noise, &[0, 1]);
    let exact_out = run_exact(&full, &config.noise, &[0, 1]);
    let theory = theory();

    let batch_details: Vec<BatchDetail> = (0..config.batches)
        .map(|b| run_batch(b, config, shots_per_batch, &exact_in, &exact_out, &theory))
        .collect();

    let ok: Vec<&BatchDetail> = batch_details.iter().filter(|b| b.failure.is_none()).collect();
    let failed_batches = batch_details.iter().filter(|b| b.failure.is_some()).map(|b| b.index).collect();
    let stat = |f: &dyn Fn(&BatchDetail) -> f64| FidelityStat::from_samples(&ok.iter().map(|b| f(b)).collect::<Vec<_>>());
    let probes = probe_names(2)
        .expect("qubit frame")
        .into_iter()
        .map(|name| {
            let s = stat(&|b| b.probes[&name]);
            (name, s)
        })
        .collect();

    Ok(ExperimentReport {
        shots,
        shots_per_batch,
        batches: config.batches,
        seed: config.seed,
        generator: GENERATOR,
        noise: config.noise,
        fidelity_in: FidelityStat::from_samples(&batch_details.iter().map(|b| b.fidelity_in).collect::<Vec<_>>()),
        fidelity_out: FidelityStat::from_samples(&batch_details.iter().map(|b| b.fidelity_out).collect::<Vec<_>>()),
        probes,
        failed_batches,
        batch_details,
    })
}
