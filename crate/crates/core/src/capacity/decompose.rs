use crate::cj::Subspace;
use crate::error::{Error, Result};
use crate::linalg::{conj_vec, CVec};
use crate::product::vector_to_matrix;
use crate::state::PureState;

/// Splits `v ∈ (S1 ⊗ S2)⊥` into at most `k + 1` product terms, `k = dim S2⊥`.
///
/// With `{ψ_1}` spanning `S1⊥`, `{ψ_i}` the basis of `S1` and `{φ_j}` the
/// bases of `S2⊥` then `S2`, the terms are `(Σ_i b_ij ψ_i, φ_j)` for each
/// `φ_j ∈ S2⊥` followed by `(ψ_1, Σ_{j>k} a_j φ_j)`. Terms whose product
/// vanishes are dropped. Vectors are returned unnormalised.
pub fn decompose_orthocomplement_state(
    v: &PureState,
    s1: &Subspace,
    s2: &Subspace,
) -> Result<Vec<(CVec, CVec)>> {
    let d1 = s1.ambient();
    let d2 = s2.ambient();
    if v.dim() != d1 * d2 {
        return Err(Error::DimensionMismatch {
            expected: d1 * d2,
            found: v.dim(),
        });
    }
    let c1 = s1.orthogonal_complement();
    if c1.dim() >= 2 {
        return Err(Error::ComplementTooLarge { dim: c1.dim() });
    }
    let c2 = s2.orthogonal_complement();
    let k = c2.dim();

    let first: Vec<&CVec> = c1.basis().iter().chain(s1.basis()).collect();
    let second: Vec<&CVec> = c2.basis().iter().chain(s2.basis()).collect();
    let vm = vector_to_matrix(v.amplitudes(), d1, d2);
    // coef[i][j] = ⟨ψ_i ⊗ φ_j | v⟩ = ψ_i† V conj(φ_j)
    let coef: Vec<Vec<_>> = first
        .iter()
        .map(|psi| {
            let row = psi.adjoint() * &vm;
            second
                .iter()
                .map(|phi| (&row * conj_vec(phi))[(0, 0)])
                .collect()
        })
        .collect();

    let offset1 = c1.dim();
    let residual: f64 = coef[offset1..]
        .iter()
        .flat_map(|row| row[k..].iter())
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > 1e-10 {
        return Err(Error::NotInComplement { residual });
    }

    let keep = |a: &CVec, b: &CVec| a.norm() * b.norm() > 1e-14;
    let mut pairs = Vec::with_capacity(k + 1);
    for j in 0..k {
        let mut psi_t = CVec::zeros(d1);
        for (i, psi) in first.iter().enumerate() {
            psi_t += *psi * coef[i][j];
        }
        let phi_t = second[j].clone();
        if keep(&psi_t, &phi_t) {
            pairs.push((psi_t, phi_t));
        }
    }
    if offset1 == 1 {
        let mut phi_t = CVec::zeros(d2);
        for (j, phi) in second.iter().enumerate().skip(k) {
            phi_t += *phi * coef[0][j];
        }
        let psi_t = first[0].clone();
        if keep(&psi_t, &phi_t) {
            pairs.push((psi_t, phi_t));
        }
    }
    Ok(pairs)
}
