//! Numerical verifier for the rank-one lemma behind the non-superactivation
//! theorem: if `P = span{A¹}` has no rank-one matrix, `Q = span{B², …, B^{k+1}}`
//! has no rank-one matrix and `B¹ ⊥ Q`, then `M = Σ_i A^i ⊗ B^i` is never
//! of rank one.

use crate::cj::Subspace;
use crate::error::{Error, Result};
use crate::linalg::{self, frobenius, hs_inner, kron, numerical_rank, CMat};
use crate::product::{find_product_in_subspace, matrix_to_vector, ProductSearchOptions, SearchStatus};
use serde::{Deserialize, Serialize};

/// Relative singular-value cut-off used for every rank decision here.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaInstance {
    /// `A¹, …, A^{k+1}`, each `n × n`.
    pub a: Vec<CMat>,
    /// `B¹, …, B^{k+1}`, each `m × m`.
    pub b: Vec<CMat>,
}

impl LemmaInstance {
    pub fn n(&self) -> usize {
        self.a[0].nrows()
    }

    pub fn m(&self) -> usize {
        self.b[0].nrows()
    }

    /// `dim Q`.
    pub fn k(&self) -> usize {
        self.b.len() - 1
    }

    pub fn p_basis(&self) -> &CMat {
        &self.a[0]
    }

    pub fn q_basis(&self) -> &[CMat] {
        &self.b[1..]
    }

    /// `Q` as a subspace of `C^m ⊗ C^m` via the state ↔ matrix isomorphism.
    pub fn q_subspace(&self) -> Subspace {
        let vs: Vec<_> = self.q_basis().iter().map(matrix_to_vector).collect();
        let m = self.m();
        Subspace::span(&vs, vec![m, m]).expect("matrices are m × m")
    }

    pub fn m_matrix(&self) -> CMat {
        let (n, m) = (self.n(), self.m());
        let mut out = CMat::zeros(n * m, n * m);
        for (a, b) in self.a.iter().zip(&self.b) {
            out += kron(a, b);
        }
        out
    }

    fn check_shapes(&self) -> Result<()> {
        if self.a.is_empty() || self.a.len() != self.b.len() {
            return Err(Error::HypothesisViolation(format!(
                "need matching non-empty A and B lists, got {} and {}",
                self.a.len(),
                self.b.len()
            )));
        }
        let n = self.a[0].nrows();
        let m = self.b[0].nrows();
        if self.a.iter().any(|x| x.shape() != (n, n)) || self.b.iter().any(|x| x.shape() != (m, m)) {
            return Err(Error::HypothesisViolation("A^i must be n × n and B^i m × m".into()));
        }
        Ok(())
    }
}

/// `R_st = Σ_i (A^i)_{st} B^i`, the `(s, t)` block of `M`.
pub fn submatrix_r(inst: &LemmaInstance, s: usize, t: usize) -> Result<CMat> {
    let n = inst.n();
    if s >= n || t >= n {
        return Err(Error::IndexOutOfRange { s, t, n });
    }
    Ok(block_combination(&inst.a, &inst.b, s, t))
}

fn block_combination(a: &[CMat], b: &[CMat], s: usize, t: usize) -> CMat {
    let m = b[0].nrows();
    a.iter()
        .zip(b)
        .fold(CMat::zeros(m, m), |acc, (ai, bi)| acc + bi * ai[(s, t)])
}

/// Checkpoints of the proof, evaluated after rotating `A¹` to diagonal form
/// by its SVD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaTrace {
    /// Diagonal of the rotated `A¹`.
    pub a1_singular_values: Vec<f64>,
    /// Largest `‖R_st − Π_Q R_st‖_F` over `s ≠ t`, scaled by `max(1, ‖R_st‖_F)`.
    pub offdiag_q_residual: f64,
    pub offdiag_blocks_checked: usize,
    pub b1_is_zero: bool,
    /// Ranks of `R_ss` for every `s` with a nonzero diagonal entry of `A¹`.
    pub diag_block_ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LemmaCheck {
    RankNotOne { rank: usize, trace: LemmaTrace },
    /// `M` came out rank one. Never expected; carries the instance for inspection.
    Violation {
        trace: LemmaTrace,
        instance: Box<LemmaInstance>,
    },
}

impl LemmaCheck {
    pub fn trace(&self) -> &LemmaTrace {
        match self {
            LemmaCheck::RankNotOne { trace, .. } | LemmaCheck::Violation { trace, .. } => trace,
        }
    }

    pub fn is_violation(&self) -> bool {
        matches!(self, LemmaCheck::Violation { .. })
    }
}

pub fn lemma_instance_check(inst: &LemmaInstance, search: &ProductSearchOptions) -> Result<LemmaCheck> {
    inst.check_shapes()?;
    let a1 = inst.p_basis();
    let a1_rank = numerical_rank(a1, RANK_TOL);
    if a1_rank < 2 {
        return Err(Error::HypothesisViolation(format!("A¹ has rank {a1_rank}, need ≥ 2")));
    }
    let q = inst.q_subspace();
    if q.dim() != inst.k() {
        return Err(Error::HypothesisViolation(format!(
            "Q basis is linearly dependent: spans {} of {}",
            q.dim(),
            inst.k()
        )));
    }
    let found = find_product_in_subspace(&q, search)?;
    if found.status != SearchStatus::NotFound {
        return Err(Error::HypothesisViolation(format!(
            "Q may contain a rank-one matrix ({:?}, objective {:.12})",
            found.status, found.objective
        )));
    }
    let b1 = &inst.b[0];
    let b1_vec = matrix_to_vector(b1);
    let leak = q.project(&b1_vec).norm();
    if leak > 1e-10 * frobenius(b1).max(1.0) {
        return Err(Error::HypothesisViolation(format!("B¹ is not orthogonal to Q ({leak:.3e})")));
    }

    let rank = numerical_rank(&inst.m_matrix(), RANK_TOL);
    let trace = proof_trace(inst, &q);
    Ok(if rank == 1 {
        LemmaCheck::Violation {
            trace,
            instance: Box::new(inst.clone()),
        }
    } else {
        LemmaCheck::RankNotOne { rank, trace }
    })
}

fn proof_trace(inst: &LemmaInstance, q: &Subspace) -> LemmaTrace {
    let n = inst.n();
    // A¹ = U D V†; (U† ⊗ I) M (V ⊗ I) = Σ (U† A^i V) ⊗ B^i has the same rank.
    let (u, s, v) = linalg::svd_sorted(inst.p_basis());
    let rotated: Vec<CMat> = inst.a.iter().map(|a| u.adjoint() * a * &v).collect();
    let mut offdiag_q_residual: f64 = 0.0;
    let mut checked = 0;
    for si in 0..n {
        for ti in 0..n {
            if si == ti {
                continue;
            }
            let r = block_combination(&rotated, &inst.b, si, ti);
            let rv = matrix_to_vector(&r);
            let resid = (&rv - q.project(&rv)).norm() / frobenius(&r).max(1.0);
            offdiag_q_residual = offdiag_q_residual.max(resid);
            checked += 1;
        }
    }
    let b1_is_zero = frobenius(&inst.b[0]) <= 1e-14;
    let top = s.first().copied().unwrap_or(0.0);
    let diag_block_ranks = (0..n)
        .filter(|&i| s[i] > RANK_TOL * top)
        .map(|i| numerical_rank(&block_combination(&rotated, &inst.b, i, i), RANK_TOL))
        .collect();
    LemmaTrace {
        a1_singular_values: s,
        offdiag_q_residual,
        offdiag_blocks_checked: checked,
        b1_is_zero,
        diag_block_ranks,
    }
}

/// Projects `b` onto the Hilbert-Schmidt complement of `Q`.
pub(crate) fn remove_q_component(b: &CMat, q_basis: &[CMat]) -> CMat {
    let vs: Vec<_> = q_basis.iter().map(matrix_to_vector).collect();
    let ortho = linalg::orthonormalize(&vs, 1e-12);
    let mut out = b.clone();
    let m = b.nrows();
    for w in ortho {
        let wm = crate::product::vector_to_matrix(&w, m, m);
        let coef = hs_inner(&wm, &out);
        out -= wm * coef;
    }
    out
}
