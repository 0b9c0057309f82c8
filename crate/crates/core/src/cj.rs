//! Choi-Jamiołkowski matrices, supports, complements and subsystem permutations.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{self, c, columns, hermitian_eigh, kron_vec, matrix_unit, CMat, CVec};
use crate::state::PureState;
use serde::{Deserialize, Serialize};

/// Default relative eigenvalue threshold for supports.
pub const SUPPORT_TOL: f64 = 1e-10;

/// `σ = Σ_{ij} |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, i.e. `(I ⊗ E)(|ω⟩⟨ω|)` with the
/// unnormalised `|ω⟩ = Σ_j |j⟩|j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CjMatrix {
    matrix: CMat,
    d_in: usize,
    d_out: usize,
}

impl CjMatrix {
    pub fn of(map: &Channel) -> Self {
        let (d_in, d_out) = (map.d_in(), map.d_out());
        let mut matrix = CMat::zeros(d_in * d_out, d_in * d_out);
        for i in 0..d_in {
            for j in 0..d_in {
                let block = map
                    .apply_matrix(&matrix_unit(d_in, i, j))
                    .expect("matrix unit has the input dimension");
                matrix
                    .view_mut((i * d_out, j * d_out), (d_out, d_out))
                    .copy_from(&block);
            }
        }
        Self { matrix, d_in, d_out }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigh(&self.matrix).0
    }
}

/// Eigenvalues that landed close to the rank cut-off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionWarning {
    /// Offending eigenvalues divided by `λ_max`.
    pub relative_eigenvalues: Vec<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub subspace: Subspace,
    pub warning: Option<ConditionWarning>,
}

/// Eigenvectors of `m` with eigenvalue above `tol · λ_max`.
///
/// Eigenvalues with relative size in `[tol, 100·tol]` are reported in the
/// returned warning.
pub fn support(m: &CjMatrix, tol: f64) -> Result<Support> {
    support_of_matrix(&m.matrix, vec![m.d_in, m.d_out], tol)
}

pub(crate) fn support_of_matrix(m: &CMat, dims: Vec<usize>, tol: f64) -> Result<Support> {
    let (vals, vecs) = hermitian_eigh(m);
    let lmax = vals.last().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let cut = tol * lmax;
    let kept: Vec<CVec> = vals
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > cut)
        .map(|(i, _)| vecs.column(i).into_owned())
        .collect();
    let band: Vec<f64> = vals
        .iter()
        .map(|v| v / lmax)
        .filter(|r| *r >= tol && *r <= 100.0 * tol)
        .collect();
    let basis = linalg::orthonormalize(&kept, 1e-8);
    Ok(Support {
        subspace: Subspace { basis, dims },
        warning: (!band.is_empty()).then_some(ConditionWarning {
            relative_eigenvalues: band,
            tol,
        }),
    })
}

/// A subspace of `C^{d_1} ⊗ … ⊗ C^{d_r}` held as an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Vec<CVec>,
    dims: Vec<usize>,
}

impl Subspace {
    /// Checks that `basis` is orthonormal within `1e-10` and matches `dims`.
    pub fn new(basis: Vec<CVec>, dims: Vec<usize>) -> Result<Self> {
        let ambient: usize = dims.iter().product();
        if let Some(v) = basis.iter().find(|v| v.len() != ambient) {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                found: v.len(),
            });
        }
        let s = Self { basis, dims };
        let defect = s.gram_defect();
        if defect > 1e-10 {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(s)
    }

    /// Span of arbitrary vectors; near-dependent vectors are dropped.
    pub fn span(vectors: &[CVec], dims: Vec<usize>) -> Result<Self> {
        let ambient: usize = dims.iter().product();
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient) {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                found: v.len(),
            });
        }
        Ok(Self {
            basis: linalg::orthonormalize(vectors, 1e-10),
            dims,
        })
    }

    pub fn full(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self {
            basis: (0..d).map(|i| linalg::basis_vector(d, i)).collect(),
            dims,
        }
    }

    pub fn zero(dims: Vec<usize>) -> Self {
        Self {
            basis: Vec::new(),
            dims,
        }
    }

    pub fn basis(&self) -> &[CVec] {
        &self.basis
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.dims.iter().product()
    }

    /// Basis vectors as the columns of a matrix.
    pub fn basis_matrix(&self) -> CMat {
        columns(&self.basis, self.ambient())
    }

    pub fn projector(&self) -> CMat {
        let u = self.basis_matrix();
        &u * u.adjoint()
    }

    pub fn gram_defect(&self) -> f64 {
        let u = self.basis_matrix();
        linalg::frobenius(&(u.adjoint() * &u - linalg::identity(self.dim())))
    }

    pub fn project(&self, v: &CVec) -> CVec {
        let mut out = CVec::zeros(v.len());
        for q in &self.basis {
            out += q * q.dotc(v);
        }
        out
    }

    /// `‖Π v‖²`.
    pub fn overlap(&self, v: &CVec) -> f64 {
        self.basis.iter().map(|q| q.dotc(v).norm_sqr()).sum()
    }

    /// Orthogonal complement in the ambient space.
    pub fn orthogonal_complement(&self) -> Subspace {
        let d = self.ambient();
        if self.dim() == 0 {
            return Self::full(self.dims.clone());
        }
        if self.dim() >= d {
            return Self::zero(self.dims.clone());
        }
        let (vals, vecs) = hermitian_eigh(&self.projector());
        let raw: Vec<CVec> = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < 0.5)
            .map(|(i, _)| vecs.column(i).into_owned())
            .collect();
        // One more pass against the original basis keeps the two halves
        // orthogonal to working precision.
        let cleaned: Vec<CVec> = raw
            .iter()
            .map(|v| v - self.project(v))
            .collect();
        Self {
            basis: linalg::orthonormalize(&cleaned, 1e-6),
            dims: self.dims.clone(),
        }
    }

    /// `self ⊗ other`, subsystem lists concatenated.
    pub fn tensor(&self, other: &Subspace) -> Subspace {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let basis = self
            .basis
            .iter()
            .flat_map(|u| other.basis.iter().map(move |w| kron_vec(u, w)))
            .collect();
        Subspace { basis, dims }
    }

    /// Direct sum of two mutually orthogonal subspaces with the same dims.
    pub(crate) fn direct_sum_unchecked(mut self, other: Subspace) -> Subspace {
        debug_assert_eq!(self.dims, other.dims);
        self.basis.extend(other.basis);
        self
    }

    /// Groups the first `split` subsystems into one party and the rest into another.
    pub fn as_bipartite(&self, split: usize) -> Result<Subspace> {
        if split == 0 || split >= self.dims.len() {
            return Err(Error::NotBipartite {
                parts: self.dims.len(),
            });
        }
        let da = self.dims[..split].iter().product();
        let db = self.dims[split..].iter().product();
        Ok(Subspace {
            basis: self.basis.clone(),
            dims: vec![da, db],
        })
    }

    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Subspace> {
        let ambient: usize = dims.iter().product();
        if ambient != self.ambient() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient(),
                found: ambient,
            });
        }
        Ok(Subspace {
            basis: self.basis.clone(),
            dims,
        })
    }
}

/// `S = supp(CJ(E* ∘ E))` on `A ⊗ A′`.
pub fn capacity_subspace(ch: &Channel, tol: f64) -> Result<Support> {
    ch.require_trace_preserving()?;
    let f = ch.dual().compose(ch)?;
    support(&CjMatrix::of(&f), tol)
}

/// Reorders tensor factors: output subsystem `j` is input subsystem `perm[j]`.
pub trait PermuteSubsystems: Sized {
    fn permute_subsystems(&self, perm: &[usize]) -> Result<Self>;
}

/// Core index shuffle shared by states and subspaces. Returns the permuted
/// vector and the permuted dimension list.
pub fn permute_vector(v: &CVec, dims: &[usize], perm: &[usize]) -> Result<(CVec, Vec<usize>)> {
    let ambient: usize = dims.iter().product();
    if v.len() != ambient {
        return Err(Error::DimensionMismatch {
            expected: ambient,
            found: v.len(),
        });
    }
    check_permutation(perm, dims.len())?;
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let r = dims.len();
    let mut out_strides = vec![1usize; r];
    for j in (0..r.saturating_sub(1)).rev() {
        out_strides[j] = out_strides[j + 1] * new_dims[j + 1];
    }
    // stride in the output for each input subsystem
    let mut stride_of_input = vec![0usize; r];
    for (j, &p) in perm.iter().enumerate() {
        stride_of_input[p] = out_strides[j];
    }
    let mut out = CVec::zeros(ambient);
    let mut digits = vec![0usize; r];
    for idx in 0..ambient {
        let mut rem = idx;
        for k in (0..r).rev() {
            digits[k] = rem % dims[k];
            rem /= dims[k];
        }
        let target: usize = digits
            .iter()
            .zip(&stride_of_input)
            .map(|(d, s)| d * s)
            .sum();
        out[target] = v[idx];
    }
    Ok((out, new_dims))
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (j, &p) in perm.iter().enumerate() {
        inv[p] = j;
    }
    inv
}

fn check_permutation(perm: &[usize], parts: usize) -> Result<()> {
    let mut seen = vec![false; parts];
    let ok = perm.len() == parts
        && perm.iter().all(|&p| {
            if p >= parts || seen[p] {
                false
            } else {
                seen[p] = true;
                true
            }
        });
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidPermutation {
            perm: perm.to_vec(),
            parts,
        })
    }
}

impl PermuteSubsystems for PureState {
    fn permute_subsystems(&self, perm: &[usize]) -> Result<Self> {
        let (v, dims) = permute_vector(self.amplitudes(), self.dims(), perm)?;
        Ok(PureState::from_parts_unchecked(v, dims))
    }
}

impl PermuteSubsystems for Subspace {
    fn permute_subsystems(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.dims.len())?;
        let mut new_dims = perm.iter().map(|&p| self.dims[p]).collect();
        let mut basis = Vec::with_capacity(self.dim());
        for b in &self.basis {
            let (v, d) = permute_vector(b, &self.dims, perm)?;
            new_dims = d;
            basis.push(v);
        }
        Ok(Subspace {
            basis,
            dims: new_dims,
        })
    }
}

/// Normalised `|ω⟩ = Σ_j |jj⟩ / √d`.
pub fn maximally_entangled(d: usize) -> CVec {
    let mut v = CVec::zeros(d * d);
    for j in 0..d {
        v[j * d + j] = c(1.0 / (d as f64).sqrt(), 0.0);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, identity, numerical_rank, random_unit_vector, ONE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cj_identity_channel_is_omega() {
        let cj = CjMatrix::of(&Channel::identity(2));
        let w = maximally_entangled(2) * c(2f64.sqrt(), 0.0);
        assert!(frobenius(&(cj.matrix() - &w * w.adjoint())) < 1e-14);
        assert!((linalg::trace(cj.matrix()).re - 2.0).abs() < 1e-14);
        assert_eq!(numerical_rank(cj.matrix(), 1e-10), 1);
    }

    #[test]
    fn cj_depolarizing() {
        let cj = CjMatrix::of(&Channel::completely_depolarizing(2));
        assert!(frobenius(&(cj.matrix() - identity(4) * c(0.5, 0.0))) < 1e-14);
        let dep = Channel::completely_depolarizing(2);
        let ff = dep.dual().compose(&dep).unwrap();
        let cj = CjMatrix::of(&ff);
        assert!(frobenius(&(cj.matrix() - identity(4) * c(0.5, 0.0))) < 1e-14);
    }

    #[test]
    fn support_examples() {
        let half = CjMatrix {
            matrix: identity(4) * c(0.5, 0.0),
            d_in: 2,
            d_out: 2,
        };
        let s = support(&half, SUPPORT_TOL).unwrap();
        assert_eq!(s.subspace.dim(), 4);
        assert!(s.warning.is_none());

        let cj = CjMatrix::of(&Channel::identity(2));
        let s = support(&cj, SUPPORT_TOL).unwrap().subspace;
        assert_eq!(s.dim(), 1);
        assert!((s.overlap(&maximally_entangled(2)) - 1.0).abs() < 1e-12);

        let zero = CjMatrix {
            matrix: CMat::zeros(4, 4),
            d_in: 2,
            d_out: 2,
        };
        assert_eq!(support(&zero, SUPPORT_TOL), Err(Error::ZeroMatrix));
    }

    #[test]
    fn support_dim_matches_independent_rank() {
        for seed in 0..20 {
            let ch = Channel::random(2 + seed as usize % 2, 1 + seed as usize % 3, seed).unwrap();
            let cj = CjMatrix::of(&ch);
            let s = support(&cj, SUPPORT_TOL).unwrap();
            assert_eq!(s.subspace.dim(), numerical_rank(cj.matrix(), 1e-10));
            // for a random isometry channel the CJ rank is the Kraus count
            assert_eq!(s.subspace.dim(), ch.kraus().len());
        }
    }

    #[test]
    fn gray_band_is_reported() {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(1, 1)] = c(5e-10, 0.0);
        let s = support_of_matrix(&m, vec![2, 2], SUPPORT_TOL).unwrap();
        assert_eq!(s.subspace.dim(), 2);
        assert_eq!(s.warning.unwrap().relative_eigenvalues.len(), 1);
    }

    #[test]
    fn complement_examples() {
        let full = Subspace::full(vec![2, 2]);
        assert_eq!(full.orthogonal_complement().dim(), 0);

        let phi = Subspace::span(&[maximally_entangled(2)], vec![2, 2]).unwrap();
        let comp = phi.orthogonal_complement();
        assert_eq!(comp.dim(), 3);
        assert!((comp.overlap(&linalg::basis_vector(4, 1)) - 1.0).abs() < 1e-12);

        let back = comp.orthogonal_complement();
        assert!(frobenius(&(back.projector() - phi.projector())) < 1e-10);
        assert!(frobenius(&(comp.projector() + phi.projector() - identity(4))) < 1e-10);
        assert!(comp.gram_defect() < 1e-10);
    }

    #[test]
    fn capacity_subspace_examples() {
        let s = capacity_subspace(&Channel::completely_depolarizing(2), SUPPORT_TOL).unwrap();
        assert_eq!(s.subspace.dim(), 4);
        let s = capacity_subspace(&Channel::identity(2), SUPPORT_TOL).unwrap().subspace;
        assert_eq!(s.dim(), 1);
        assert_eq!(s.dims(), &[2, 2]);
        assert_eq!(s.orthogonal_complement().dim(), 3);
        assert!((s.overlap(&maximally_entangled(2)) - 1.0).abs() < 1e-12);

        let half = Channel::new(vec![identity(2) * c(0.5, 0.0)]).unwrap();
        assert!(matches!(
            capacity_subspace(&half, SUPPORT_TOL),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn permute_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dims = [2usize, 3, 2, 2];
        let parts: Vec<CVec> = dims.iter().map(|&d| random_unit_vector(&mut rng, d)).collect();
        let v = kron_vec(&kron_vec(&kron_vec(&parts[0], &parts[1]), &parts[2]), &parts[3]);
        let (p, nd) = permute_vector(&v, &dims, &[0, 2, 1, 3]).unwrap();
        let expected = kron_vec(&kron_vec(&kron_vec(&parts[0], &parts[2]), &parts[1]), &parts[3]);
        assert_eq!(nd, vec![2, 2, 3, 2]);
        assert!((p - expected).norm() < 1e-15);

        let (same, _) = permute_vector(&v, &dims, &[0, 1, 2, 3]).unwrap();
        assert_eq!(same, v);

        let perm = [3, 0, 2, 1];
        let (q, qd) = permute_vector(&v, &dims, &perm).unwrap();
        let (back, bd) = permute_vector(&q, &qd, &inverse_permutation(&perm)).unwrap();
        assert_eq!(back, v);
        assert_eq!(bd, dims.to_vec());

        assert!(matches!(
            permute_vector(&v, &dims, &[0, 0, 1, 2]),
            Err(Error::InvalidPermutation { .. })
        ));
        assert!(matches!(
            permute_vector(&v, &[2, 2], &[1, 0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cj_of_tensor_is_permuted_tensor_of_cjs() {
        let e = Channel::random(2, 2, 1).unwrap();
        let f = Channel::random(3, 2, 2).unwrap();
        let s1 = capacity_subspace(&e, SUPPORT_TOL).unwrap().subspace;
        let s2 = capacity_subspace(&f, SUPPORT_TOL).unwrap().subspace;
        let joint = capacity_subspace(&e.tensor(&f), SUPPORT_TOL).unwrap().subspace;
        let built = s1
            .tensor(&s2)
            .permute_subsystems(&[0, 2, 1, 3])
            .unwrap();
        assert_eq!(joint.dim(), built.dim());
        assert!(frobenius(&(joint.projector() - built.projector())) < 1e-9);
    }
}
