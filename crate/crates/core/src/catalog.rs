//! Named states, probe frames, operator bases, and channels used by the
//! tests and the CLI.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use thiserror::Error;

use crate::channel::KrausChannel;
use crate::qstate::{real_matrix, BipartiteState, ComplexMatrix, DensityMatrix, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("parameter {name} = {value} outside {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("no probe frame for dimension {0} (supported: 2, 3)")]
    UnsupportedDimension(usize),

    #[error("unknown catalog entry {0:?}")]
    UnknownName(String),

    #[error("missing parameter {0}")]
    MissingParameter(&'static str),
}

/// A catalog state together with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct NamedState {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub state: BipartiteState,
}

/// Catalog entry description: name, parameters, and their admissible ranges.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub parameters: &'static [(&'static str, &'static str)],
    pub description: &'static str,
}

pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "bell2",
        parameters: &[],
        description: "two-qubit Bell state (|00> + |11>)/sqrt(2)",
    },
    CatalogEntry {
        name: "maxent",
        parameters: &[("d", "integer in [2, 16]")],
        description: "maximally entangled two-qudit state",
    },
    CatalogEntry {
        name: "sigmaE",
        parameters: &[("p", "[0, 1]")],
        description: "two-qutrit mixture of Bell states on {|00>,|11>} and {|00>,|22>}",
    },
    CatalogEntry {
        name: "horodecki",
        parameters: &[("a", "(0, 1)")],
        description: "3x3 PPT bound entangled family",
    },
    CatalogEntry {
        name: "product00",
        parameters: &[],
        description: "two-qubit product state |00>",
    },
];

/// Builds a catalog state by name.
pub fn by_name(name: &str, parameters: &BTreeMap<String, f64>) -> Result<NamedState, CatalogError> {
    let param = |key: &'static str| parameters.get(key).copied().ok_or(CatalogError::MissingParameter(key));
    let state = match name {
        "bell2" => max_entangled(2),
        "maxent" => {
            let d = param("d")?;
            if d < 2.0 || d.fract() != 0.0 || d > 16.0 {
                return Err(CatalogError::ParameterOutOfRange {
                    name: "d",
                    value: d,
                    range: "integer in [2, 16]",
                });
            }
            max_entangled(d as usize)
        }
        "sigmaE" => sigma_e(param("p")?)?,
        "horodecki" => horodecki(param("a")?)?,
        "product00" => {
            let zero = DensityMatrix::from_pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
            BipartiteState::product(&zero, &zero)
        }
        other => return Err(CatalogError::UnknownName(other.to_string())),
    };
    Ok(NamedState {
        name: name.to_string(),
        parameters: parameters.clone(),
        state,
    })
}

/// `sum_i |ii>` as an unnormalized projector (trace `d`).
pub fn max_entangled_unnormalized(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = C64::new(1.0, 0.0);
        }
    }
    m
}

/// `(sum_i |ii>) / sqrt(d)` as a bipartite state.
pub fn max_entangled(d: usize) -> BipartiteState {
    let state = DensityMatrix::new_unchecked(max_entangled_unnormalized(d).unscale(d as f64));
    BipartiteState::new(state, d, d).expect("d*d square")
}

/// Two-qutrit state `p |a><a| + (1-p) |b><b|` with
/// `|a> = (|00> + |11>)/sqrt(2)` and `|b> = (|00> + |22>)/sqrt(2)`.
pub fn sigma_e(p: f64) -> Result<BipartiteState, CatalogError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CatalogError::ParameterOutOfRange {
            name: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    let mut m = ComplexMatrix::zeros(9, 9);
    let (i00, i11, i22) = (0, 4, 8);
    for (weight, other) in [(p, i11), (1.0 - p, i22)] {
        for r in [i00, other] {
            for c in [i00, other] {
                m[(r, c)] += C64::new(weight / 2.0, 0.0);
            }
        }
    }
    let state = DensityMatrix::new_unchecked(m);
    Ok(BipartiteState::new(state, 3, 3).expect("9 = 3*3"))
}

/// The 3x3 PPT entangled family with `b = (1+a)/2`, `c = sqrt(1-a^2)/2`,
/// normalized by `1/(8a+1)`.
pub fn horodecki(a: f64) -> Result<BipartiteState, CatalogError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(CatalogError::ParameterOutOfRange {
            name: "a",
            value: a,
            range: "(0, 1)",
        });
    }
    let b = (1.0 + a) / 2.0;
    let c = (1.0 - a * a).sqrt() / 2.0;
    #[rustfmt::skip]
    let entries = [
        a,   0.0, 0.0, 0.0, a,   0.0, 0.0, 0.0, a,
        0.0, a,   0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, a,   0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, a,   0.0, 0.0, 0.0, 0.0, 0.0,
        a,   0.0, 0.0, 0.0, a,   0.0, 0.0, 0.0, a,
        0.0, 0.0, 0.0, 0.0, 0.0, a,   0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, b,   0.0, c,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, a,   0.0,
        a,   0.0, 0.0, 0.0, a,   0.0, c,   0.0, b,
    ];
    let m = real_matrix(9, 9, &entries).unscale(8.0 * a + 1.0);
    let state = DensityMatrix::new_unchecked(m);
    Ok(BipartiteState::new(state, 3, 3).expect("9 = 3*3"))
}

/// Labels of [`probe_states`] in order.
pub fn probe_names(d: usize) -> Result<Vec<String>, CatalogError> {
    match d {
        2 => Ok(["0", "1", "plus", "minus", "L", "R"].iter().map(|s| s.to_string()).collect()),
        3 => Ok((0..4)
            .flat_map(|basis| (0..3).map(move |k| format!("mub{basis}_{k}")))
            .collect()),
        other => Err(CatalogError::UnsupportedDimension(other)),
    }
}

/// Pure probe states.
///
/// `d = 2`: `|0>, |1>, |+>, |->, |L>, |R>` with `|L/R> = (|0> +- i|1>)/sqrt(2)`.
/// `d = 3`: the 12 vectors of the four mutually unbiased bases of `C^3`,
/// the computational basis followed by `(1/sqrt 3) sum_j w^(b j^2 + k j) |j>`
/// for `b = 0, 1, 2` and `w = exp(2 pi i / 3)`.
pub fn probe_states(d: usize) -> Result<Vec<DensityMatrix>, CatalogError> {
    let c = |re: f64, im: f64| C64::new(re, im);
    match d {
        2 => {
            let kets = [
                [c(1.0, 0.0), c(0.0, 0.0)],
                [c(0.0, 0.0), c(1.0, 0.0)],
                [c(1.0, 0.0), c(1.0, 0.0)],
                [c(1.0, 0.0), c(-1.0, 0.0)],
                [c(1.0, 0.0), c(0.0, 1.0)],
                [c(1.0, 0.0), c(0.0, -1.0)],
            ];
            Ok(kets.iter().map(|k| DensityMatrix::from_pure(k)).collect())
        }
        3 => {
            let mut out = Vec::with_capacity(12);
            for k in 0..3 {
                let mut ket = [c(0.0, 0.0); 3];
                ket[k] = c(1.0, 0.0);
                out.push(DensityMatrix::from_pure(&ket));
            }
            for b in 0..3 {
                for k in 0..3 {
                    let ket: Vec<C64> = (0..3)
                        .map(|j| C64::from_polar(1.0, 2.0 * PI * ((b * j * j + k * j) % 3) as f64 / 3.0))
                        .collect();
                    out.push(DensityMatrix::from_pure(&ket));
                }
            }
            Ok(out)
        }
        other => Err(CatalogError::UnsupportedDimension(other)),
    }
}

/// Hilbert-Schmidt orthonormal Hermitian basis of `d x d` matrices:
/// `I/sqrt(d)`, then for each pair `j < k` the symmetric and antisymmetric
/// generalized Gell-Mann matrices, then the diagonal ones, all scaled to
/// unit norm. For `d = 2` this is `{I, X, Y, Z}/sqrt(2)`.
pub fn loo_basis(d: usize) -> Vec<ComplexMatrix> {
    let s = 0.5f64.sqrt();
    let mut basis = vec![ComplexMatrix::identity(d, d).unscale((d as f64).sqrt())];
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = C64::new(s, 0.0);
            sym[(k, j)] = C64::new(s, 0.0);
            basis.push(sym);
            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(j, k)] = C64::new(0.0, -s);
            anti[(k, j)] = C64::new(0.0, s);
            basis.push(anti);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            diag[(j, j)] = C64::new(norm, 0.0);
        }
        diag[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        basis.push(diag);
    }
    basis
}

/// Pauli matrix by letter: `I`, `X`, `Y`, or `Z`.
pub fn pauli(which: char) -> ComplexMatrix {
    let c = |re: f64, im: f64| C64::new(re, im);
    let z = c(0.0, 0.0);
    let entries = match which {
        'I' => [c(1.0, 0.0), z, z, c(1.0, 0.0)],
        'X' => [z, c(1.0, 0.0), c(1.0, 0.0), z],
        'Y' => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        'Z' => [c(1.0, 0.0), z, z, c(-1.0, 0.0)],
        other => panic!("unknown Pauli {other:?}"),
    };
    ComplexMatrix::from_row_slice(2, 2, &entries)
}

/// Equal mixture of identity and `X`: Kraus `{I/sqrt 2, X/sqrt 2}`.
pub fn bit_flip_channel() -> KrausChannel {
    let s = 0.5f64.sqrt();
    KrausChannel::new(vec![pauli('I').scale(s), pauli('X').scale(s)], 1e-12).expect("complete by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{max_abs, partial_trace, purity, Subsystem, DEFAULT_TOL};
    use approx::assert_abs_diff_eq;

    #[test]
    fn bell_matches_explicit_projector() {
        let expected = real_matrix(
            4,
            4,
            &[
                0.5, 0.0, 0.0, 0.5, //
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.5, 0.0, 0.0, 0.5,
            ],
        );
        assert_eq!(max_entangled(2).matrix(), &expected);
        assert_abs_diff_eq!(max_entangled_unnormalized(3).trace().re, 3.0);
    }

    #[test]
    fn qutrit_max_entangled_marginal() {
        let m = partial_trace(&max_entangled(3), Subsystem::B);
        assert!(max_abs(&(m.matrix() - ComplexMatrix::identity(3, 3).unscale(3.0))) < 1e-15);
    }

    #[test]
    fn sigma_e_marginal_and_purity() {
        // explicit index sum over the nine nonzero entries of the p = 1/2 state:
        // rho[00,00] = 1/2, rho[11,11] = rho[22,22] = 1/4, coherences only between
        // |00>,|11> and |00>,|22>, so Tr_A keeps the B diagonal (1/2, 1/4, 1/4).
        let s = sigma_e(0.5).unwrap();
        let tr_a = partial_trace(&s, Subsystem::A);
        let expected = real_matrix(3, 3, &[0.5, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.25]);
        assert!(max_abs(&(tr_a.matrix() - expected)) < 1e-15);

        assert_abs_diff_eq!(purity(sigma_e(1.0).unwrap().state()), 1.0, epsilon = 1e-15);
        assert!(sigma_e(1.5).is_err());
        assert!(sigma_e(-0.1).is_err());
        for p in [0.0, 0.3, 1.0] {
            assert!(DensityMatrix::new(sigma_e(p).unwrap().matrix().clone(), DEFAULT_TOL).is_ok());
        }
    }

    #[test]
    fn horodecki_is_a_state() {
        for a in [0.05, 0.5, 0.95] {
            let h = horodecki(a).unwrap();
            assert_abs_diff_eq!(h.matrix().trace().re, 1.0, epsilon = 1e-15);
            assert!(DensityMatrix::new(h.matrix().clone(), 1e-12).is_ok());
        }
        assert!(horodecki(0.0).is_err());
        assert!(horodecki(1.0).is_err());
    }

    #[test]
    fn probe_examples() {
        let probes = probe_states(2).unwrap();
        assert_eq!(probes.len(), 6);
        let plus = DensityMatrix::from_pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert_eq!(probes[2], plus);
        let l = (pauli('I') + pauli('Y')).scale(0.5);
        assert!(max_abs(&(probes[4].matrix() - l)) < 1e-15);
        let r = (pauli('I') - pauli('Y')).scale(0.5);
        assert!(max_abs(&(probes[5].matrix() - r)) < 1e-15);

        for d in [2, 3] {
            let probes = probe_states(d).unwrap();
            assert_eq!(probes.len(), probe_names(d).unwrap().len());
            for p in &probes {
                assert_abs_diff_eq!(purity(p), 1.0, epsilon = 1e-12);
            }
        }
        assert_eq!(probe_states(4).unwrap_err(), CatalogError::UnsupportedDimension(4));
    }

    #[test]
    fn qutrit_frame_is_mutually_unbiased_and_complete() {
        let probes = probe_states(3).unwrap();
        for (i, p) in probes.iter().enumerate() {
            for (j, q) in probes.iter().enumerate() {
                let overlap = (p.matrix() * q.matrix()).trace().re;
                let expected = if i == j {
                    1.0
                } else if i / 3 == j / 3 {
                    0.0
                } else {
                    1.0 / 3.0
                };
                assert_abs_diff_eq!(overlap, expected, epsilon = 1e-12);
            }
        }
        // informational completeness: the 12 projectors span all 9 dimensions
        let stacked = ComplexMatrix::from_fn(12, 9, |r, c| probes[r].matrix()[(c / 3, c % 3)]);
        assert_eq!(stacked.rank(1e-10), 9);
    }

    #[test]
    fn loo_basis_is_orthonormal() {
        let b2 = loo_basis(2);
        let s = 0.5f64.sqrt();
        for (got, p) in b2.iter().zip(['I', 'X', 'Y', 'Z']) {
            assert!(max_abs(&(got - pauli(p).scale(s))) < 1e-15);
        }
        for d in 2..6 {
            let basis = loo_basis(d);
            assert_eq!(basis.len(), d * d);
            for (i, g) in basis.iter().enumerate() {
                assert!(max_abs(&(g - g.adjoint())) < 1e-15);
                for (j, h) in basis.iter().enumerate() {
                    let ip = (g * h).trace();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - C64::new(expected, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn by_name_builds_and_rejects() {
        let mut params = BTreeMap::new();
        params.insert("p".to_string(), 0.5);
        let named = by_name("sigmaE", &params).unwrap();
        assert_eq!(named.state.dims(), (3, 3));
        assert!(matches!(by_name("sigmaE", &BTreeMap::new()), Err(CatalogError::MissingParameter("p"))));
        assert!(matches!(by_name("nope", &BTreeMap::new()), Err(CatalogError::UnknownName(_))));
        for entry in ENTRIES {
            let mut params = BTreeMap::new();
            for (key, _) in entry.parameters {
                params.insert(key.to_string(), if *key == "d" { 3.0 } else { 0.5 });
            }
            assert!(by_name(entry.name, &params).is_ok(), "{}", entry.name);
        }
    }
}
