//! Normalised pure states with a subsystem annotation.

use crate::error::{Error, Result};
use crate::linalg::{c, kron_vec, phase_normalize, CVec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PureStateRepr", into = "PureStateRepr")]
pub struct PureState {
    amplitudes: CVec,
    dims: Vec<usize>,
}

impl PureState {
    /// Wraps an already-normalised vector.
    pub fn new(amplitudes: CVec, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalises `v`; fails only for the zero vector.
    pub fn normalized(v: CVec, dims: Vec<usize>) -> Result<Self> {
        check_dims(v.len(), &dims)?;
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: v / c(norm, 0.0),
            dims,
        })
    }

    /// Single-system state of dimension `v.len()`.
    pub fn single(v: CVec) -> Result<Self> {
        let d = v.len();
        Self::normalized(v, vec![d])
    }

    pub fn basis(d: usize, i: usize) -> Self {
        Self {
            amplitudes: crate::linalg::basis_vector(d, i),
            dims: vec![d],
        }
    }

    pub fn product(a: &PureState, b: &PureState) -> Self {
        let mut dims = a.dims.clone();
        dims.extend_from_slice(&b.dims);
        Self {
            amplitudes: kron_vec(&a.amplitudes, &b.amplitudes),
            dims,
        }
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVec {
        self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Same state with the leading non-negligible amplitude made real positive.
    pub fn phase_normalized(&self) -> Self {
        Self {
            amplitudes: phase_normalize(&self.amplitudes),
            dims: self.dims.clone(),
        }
    }

    /// Collapses the subsystem list into a single system.
    pub fn flattened(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.clone(),
            dims: vec![self.dim()],
        }
    }

    /// Regroups the first `split` subsystems into system A and the rest into B.
    pub fn as_bipartite(&self, split: usize) -> Result<Self> {
        if split == 0 || split >= self.dims.len() {
            return Err(Error::NotBipartite {
                parts: self.dims.len(),
            });
        }
        let da: usize = self.dims[..split].iter().product();
        let db: usize = self.dims[split..].iter().product();
        Ok(Self {
            amplitudes: self.amplitudes.clone(),
            dims: vec![da, db],
        })
    }

    pub(crate) fn from_parts_unchecked(amplitudes: CVec, dims: Vec<usize>) -> Self {
        Self { amplitudes, dims }
    }
}

/// JSON form: `{"dims": [...], "amplitudes": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct PureStateRepr {
    dims: Vec<usize>,
    amplitudes: Vec<[f64; 2]>,
}

impl From<PureState> for PureStateRepr {
    fn from(s: PureState) -> Self {
        Self {
            dims: s.dims,
            amplitudes: s.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<PureStateRepr> for PureState {
    type Error = Error;

    fn try_from(r: PureStateRepr) -> Result<Self> {
        let v = CVec::from_iterator(
            r.amplitudes.len(),
            r.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)),
        );
        check_dims(v.len(), &r.dims)?;
        Ok(Self {
            amplitudes: v,
            dims: r.dims,
        })
    }
}

fn check_dims(len: usize, dims: &[usize]) -> Result<()> {
    let product: usize = dims.iter().product();
    if dims.is_empty() || product != len {
        return Err(Error::DimensionMismatch {
            expected: product,
            found: len,
        });
    }
    Ok(())
}
