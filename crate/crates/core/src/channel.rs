//! Completely positive maps in Kraus form.
//!
//! A [`Channel`] is any non-empty list of equally shaped Kraus operators;
//! complete positivity is structural. Trace preservation is recorded as a
//! flag at construction time because duals and compositions such as `E*∘E`
//! are CP but usually not trace preserving.

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, frobenius, hermitian_eigh, hermiticity_defect, identity, kron, CMat,
};
use crate::state::PureState;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `‖Σ K†K − I‖_F` threshold for the trace-preservation flag.
pub const TP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    kraus: Vec<CMat>,
    d_in: usize,
    d_out: usize,
    tp_residual: f64,
    trace_preserving: bool,
}

/// Not every CP map is trace preserving; the flag on [`Channel`] says which.
pub type CpMap = Channel;

impl Channel {
    /// Validates shapes and computes the trace-preservation flag.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyKrausList)?;
        let shape = first.shape();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(Error::ShapeMismatch {
                index: 0,
                expected: (1, 1),
                found: shape,
            });
        }
        for (index, k) in kraus.iter().enumerate() {
            if k.shape() != shape {
                return Err(Error::ShapeMismatch {
                    index,
                    expected: shape,
                    found: k.shape(),
                });
            }
        }
        let (d_out, d_in) = shape;
        let tp_residual = tp_residual(&kraus, d_in);
        Ok(Self {
            kraus,
            d_in,
            d_out,
            tp_residual,
            trace_preserving: tp_residual <= TP_TOL,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![identity(d)]).expect("identity is valid")
    }

    /// The completely depolarizing channel `ρ ↦ Tr(ρ) I/d`, Kraus `{|i⟩⟨j|/√d}`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let kraus = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| linalg::matrix_unit(d, i, j) * c(s, 0.0))
            .collect();
        Self::new(kraus).expect("depolarizing is valid")
    }

    /// `p·E + (1−p)·depolarizing`, realised by concatenating scaled Kraus sets.
    pub fn mix_with_depolarizing(&self, noise: f64) -> Result<Self> {
        if self.d_in != self.d_out {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                found: self.d_out,
            });
        }
        let keep = c((1.0 - noise).sqrt(), 0.0);
        let mut kraus: Vec<CMat> = self.kraus.iter().map(|k| k * keep).collect();
        let dep = Self::completely_depolarizing(self.d_in);
        let add = c(noise.sqrt(), 0.0);
        kraus.extend(dep.kraus.iter().map(|k| k * add));
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `‖Σ K†K − I‖_F` as measured at construction.
    pub fn tp_residual(&self) -> f64 {
        self.tp_residual
    }

    pub fn require_trace_preserving(&self) -> Result<()> {
        if self.trace_preserving {
            Ok(())
        } else {
            Err(Error::NotTracePreserving {
                residual: self.tp_residual,
            })
        }
    }

    /// `Σ_k K_k X K_k†` for an arbitrary `d_in × d_in` matrix.
    pub fn apply_matrix(&self, x: &CMat) -> Result<CMat> {
        if x.nrows() != self.d_in || x.ncols() != self.d_in {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                found: x.nrows().max(x.ncols()),
            });
        }
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let out = self.apply_matrix(&rho.matrix)?;
        Ok(DensityOperator::from_matrix_unchecked(out))
    }

    /// Output for the pure input `|ψ⟩⟨ψ|`.
    pub fn apply_pure(&self, psi: &PureState) -> Result<CMat> {
        let v = psi.amplitudes();
        if v.len() != self.d_in {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                found: v.len(),
            });
        }
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            let w = k * v;
            out += &w * w.adjoint();
        }
        Ok(out)
    }

    /// Adjoint under the Hilbert-Schmidt inner product: Kraus `{K_k†}`.
    pub fn dual(&self) -> Self {
        Self::new(self.kraus.iter().map(|k| k.adjoint()).collect()).expect("dual of a valid map")
    }

    /// `self ∘ inner`, Kraus `{F_i G_j}` ordered with `i` outer.
    pub fn compose(&self, inner: &Channel) -> Result<Self> {
        if inner.d_out != self.d_in {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                found: inner.d_out,
            });
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|f| inner.kraus.iter().map(move |g| f * g))
            .collect();
        Self::new(kraus)
    }

    /// `self ⊗ other` with `self`'s system most significant.
    pub fn tensor(&self, other: &Channel) -> Self {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|f| other.kraus.iter().map(move |g| kron(f, g)))
            .collect();
        Self::new(kraus).expect("tensor of valid maps")
    }

    /// Tensor product of a non-empty list, first channel most significant.
    pub fn tensor_all(channels: &[Channel]) -> Result<Self> {
        let (first, rest) = channels.split_first().ok_or(Error::NoChannels)?;
        Ok(rest.iter().fold(first.clone(), |acc, ch| acc.tensor(ch)))
    }

    /// Haar-random Stinespring isometry `V: C^d_in → C^env_dim ⊗ C^d_in`,
    /// sliced into Kraus operators `K_k = (⟨k|_env ⊗ I) V`.
    pub fn random(d_in: usize, env_dim: usize, seed: u64) -> Result<Self> {
        if d_in == 0 || env_dim == 0 {
            return Err(Error::Config("random channel needs d_in ≥ 1 and env_dim ≥ 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::random_with(&mut rng, d_in, env_dim))
    }

    pub fn random_with<R: rand::Rng + ?Sized>(rng: &mut R, d_in: usize, env_dim: usize) -> Self {
        let v = linalg::random_isometry(rng, d_in * env_dim, d_in);
        let kraus = (0..env_dim)
            .map(|k| v.rows(k * d_in, d_in).into_owned())
            .collect();
        Self::new(kraus).expect("isometry slices share a shape")
    }
}

fn tp_residual(kraus: &[CMat], d_in: usize) -> f64 {
    let mut sum = CMat::zeros(d_in, d_in);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    frobenius(&(sum - identity(d_in)))
}

/// Hermitian PSD matrix with positive trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMat,
}

impl DensityOperator {
    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > 1e-12 {
            return Err(Error::NotHermitian { defect });
        }
        let (vals, _) = hermitian_eigh(&matrix);
        let max = vals.last().copied().unwrap_or(0.0).abs();
        let min = vals.first().copied().unwrap_or(0.0);
        if min < -1e-10 * max {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let tr = linalg::trace(&matrix).re;
        if tr <= 0.0 {
            return Err(Error::NonPositiveTrace { trace: tr });
        }
        Ok(Self { matrix })
    }

    pub fn pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMat) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn tensor(&self, other: &DensityOperator) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }
}
