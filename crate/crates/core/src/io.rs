//! JSON file formats.
//!
//! A complex scalar is `[re, im]`, a matrix is a row-major array of rows.
//! - state: `{"dims": [dA, dB], "matrix": [[[re, im], ...], ...]}`
//! - single-system state: `{"dim": d, "matrix": ...}`
//! - channel: `{"dim": d, "kraus": [matrix, ...]}`
//! - superoperator: `{"dim": d, "matrix": ...}`
//! - extraction result: `{"m": superoperator, "mode", "residual", "truncatedCount", "input_spectrum"}`

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, KrausChannel, Superoperator};
use crate::extraction::{ExtractionMode, ExtractionResult};
use crate::qstate::{BipartiteState, ComplexMatrix, DensityMatrix, StateError, C64};
use crate::realignment::SingularSpectrum;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("matrix rows have unequal lengths")]
    Ragged,

    #[error(transparent)]
    State(#[from] StateError),

    #[error(transparent)]
    Channel(#[from] ChannelError),
}

impl FormatError {
    /// Whether the failure happened before any content validation (file
    /// access or JSON syntax/shape).
    pub fn is_io(&self) -> bool {
        matches!(self, FormatError::Io { .. } | FormatError::Parse(_) | FormatError::Ragged)
    }
}

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    m.row_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix, FormatError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(FormatError::Ragged);
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |r, c| {
        let [re, im] = rows[r][c];
        C64::new(re, im)
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub matrix: MatrixJson,
}

impl StateFile {
    pub fn from_state(s: &BipartiteState) -> Self {
        Self {
            dims: [s.dim_a(), s.dim_b()],
            matrix: matrix_to_json(s.matrix()),
        }
    }

    pub fn to_state(&self, tol: f64) -> Result<BipartiteState, FormatError> {
        let m = matrix_from_json(&self.matrix)?;
        Ok(BipartiteState::from_matrix(m, self.dims[0], self.dims[1], tol)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityFile {
    pub dim: usize,
    pub matrix: MatrixJson,
}

impl DensityFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            dim: rho.dim(),
            matrix: matrix_to_json(rho.matrix()),
        }
    }

    pub fn to_density(&self, tol: f64) -> Result<DensityMatrix, FormatError> {
        let m = matrix_from_json(&self.matrix)?;
        if m.nrows() != self.dim {
            return Err(StateError::DimensionMismatch {
                expected: self.dim,
                found: m.nrows(),
            }
            .into());
        }
        Ok(DensityMatrix::new(m, tol)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelFile {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            dim: ch.dim(),
            kraus: ch.kraus().iter().map(matrix_to_json).collect(),
        }
    }

    pub fn to_channel(&self, tol: f64) -> Result<KrausChannel, FormatError> {
        let kraus = self.kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>, _>>()?;
        let ch = KrausChannel::new(kraus, tol)?;
        if ch.dim() != self.dim {
            return Err(ChannelError::DimensionMismatch {
                expected: self.dim,
                found: ch.dim(),
            }
            .into());
        }
        Ok(ch)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuperoperatorFile {
    pub dim: usize,
    pub matrix: MatrixJson,
}

impl SuperoperatorFile {
    pub fn from_superoperator(m: &Superoperator) -> Self {
        Self {
            dim: m.dim(),
            matrix: matrix_to_json(m.matrix()),
        }
    }

    pub fn to_superoperator(&self) -> Result<Superoperator, FormatError> {
        Ok(Superoperator::new(self.dim, matrix_from_json(&self.matrix)?)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionFile {
    pub m: SuperoperatorFile,
    pub mode: ExtractionMode,
    pub residual: f64,
    #[serde(rename = "truncatedCount")]
    pub truncated_count: usize,
    pub input_spectrum: SingularSpectrum,
}

impl From<&ExtractionResult> for ExtractionFile {
    fn from(r: &ExtractionResult) -> Self {
        Self {
            m: SuperoperatorFile::from_superoperator(&r.m),
            mode: r.mode,
            residual: r.residual,
            truncated_count: r.truncated_count,
            input_spectrum: r.input_spectrum.clone(),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}
