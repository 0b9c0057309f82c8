//! One-shot zero-error capacity decisions.
//!
//! Two independent routes decide whether `Tr[E(ψ)†E(φ)] = 0` for some pure
//! inputs:
//!
//! * the subspace criterion: search `S⊥ = supp(CJ(E*∘E))⊥` for a product
//!   vector `α ⊗ β`, then map it back to the inputs `ψ = β`, `φ = conj(α)`;
//! * direct minimisation of the overlap by alternating minimal-eigenvector
//!   updates.
//!
//! With `v_l = Σ_i |i⟩ ⊗ L_l|i⟩` spanning `S` (`L_l` the Kraus operators of
//! `E*∘E`), `⟨v_l|α⊗β⟩ = conj(⟨β|L_l|ᾱ⟩)`. The conjugation therefore sits on
//! the first tensor factor, and [`one_shot_zero_error_positive`] checks it on
//! every call by evaluating the overlap of the mapped witness.

mod decompose;
pub(crate) mod lemma;
mod superactivation;

pub use decompose::decompose_orthocomplement_state;
pub use lemma::{
    lemma_instance_check, submatrix_r, LemmaCheck, LemmaInstance, LemmaTrace,
};
pub use superactivation::{
    joint_complement, superactivation_analysis, Conclusion, SuperactivationOptions,
    SuperactivationReport,
};

use crate::bilinear;
use crate::channel::Channel;
use crate::cj::{capacity_subspace, ConditionWarning, Subspace, SUPPORT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, conj_vec, hermitian_eigh, hs_inner, CVec};
use crate::par::{map_indexed, Exec};
use crate::product::{find_product_in_subspace, ProductSearchOptions, SearchStatus};
use crate::state::PureState;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Overlaps at or below this count as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// `Tr[E(|ψ⟩⟨ψ|)† E(|φ⟩⟨φ|)]`, clamped at zero.
pub fn trace_overlap(ch: &Channel, psi: &PureState, phi: &PureState) -> Result<f64> {
    let a = ch.apply_pure(psi)?;
    let b = ch.apply_pure(phi)?;
    Ok(hs_inner(&a, &b).re.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapSearchOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop a restart once one sweep improves the value by less than this
    /// fraction of itself.
    pub rel_conv_tol: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for OverlapSearchOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iter: 500,
            rel_conv_tol: 1e-12,
            seed: 0,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSearchResult {
    pub psi: PureState,
    pub phi: PureState,
    pub value: f64,
    /// Largest increase between consecutive iterates of any restart.
    pub max_ascent: f64,
    pub restarts_used: usize,
}

struct Descent {
    psi: CVec,
    phi: CVec,
    value: f64,
    max_ascent: f64,
    history: Vec<f64>,
}

/// `E*(E(|v⟩⟨v|))`, whose quadratic form in `φ` is the overlap with `v`.
fn overlap_operator(ch: &Channel, dual: &Channel, v: &CVec) -> linalg::CMat {
    let out = ch
        .apply_matrix(&(v * v.adjoint()))
        .expect("state has the input dimension");
    dual.apply_matrix(&out).expect("dual input matches output")
}

fn min_eigvec(h: &linalg::CMat) -> (f64, CVec) {
    let (vals, vecs) = hermitian_eigh(h);
    (vals[0], vecs.column(0).into_owned())
}

/// `K_b† K_a` for all pairs: `Tr[E(ψ)E(φ)] = Σ_ab |conj(φ)ᵀ K_b†K_a ψ|²`.
fn pair_operators(ch: &Channel) -> Vec<linalg::CMat> {
    let ks = ch.kraus();
    ks.iter()
        .flat_map(|ka| ks.iter().map(move |kb| kb.adjoint() * ka))
        .collect()
}

const POLISH_ITERS: usize = 100;

fn descend(
    ch: &Channel,
    dual: &Channel,
    pairs: &[linalg::CMat],
    start: CVec,
    opts: &OverlapSearchOptions,
    keep: bool,
) -> Descent {
    let mut psi = start;
    let (mut value, mut phi) = min_eigvec(&overlap_operator(ch, dual, &psi));
    let mut max_ascent: f64 = 0.0;
    let mut history = Vec::new();
    if keep {
        history.push(value);
    }
    for _ in 0..opts.max_iter {
        let (_, psi_new) = min_eigvec(&overlap_operator(ch, dual, &phi));
        psi = psi_new;
        let (val, phi_new) = min_eigvec(&overlap_operator(ch, dual, &psi));
        phi = phi_new;
        max_ascent = max_ascent.max(val - value);
        let gain = value - val;
        value = val;
        if keep {
            history.push(value);
        }
        if value <= 1e-300 || gain <= opts.rel_conv_tol * value.abs() {
            break;
        }
    }
    // Alternation can crawl linearly into an exact zero; finish with
    // damped Gauss-Newton on the residuals, which only ever lowers the value.
    if value > 1e-300 {
        let p = bilinear::polish(pairs, conj_vec(&phi), psi.clone(), POLISH_ITERS);
        if p.value < value {
            psi = p.y;
            phi = conj_vec(&p.x);
            value = p.value;
            if keep {
                history.push(value);
            }
        }
    }
    Descent {
        psi,
        phi,
        value: value.max(0.0),
        max_ascent,
        history,
    }
}

/// Multistart alternating minimisation of `Tr[E(ψ)E(φ)]`.
pub fn min_overlap_search(ch: &Channel, opts: &OverlapSearchOptions) -> Result<OverlapSearchResult> {
    ch.require_trace_preserving()?;
    let dual = ch.dual();
    let pairs = pair_operators(ch);
    let d = ch.d_in();
    let runs = map_indexed(opts.exec, opts.restarts.max(1), |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(linalg::mix_seed(opts.seed ^ 0x5EED_0F0F, i as u64));
        let start = linalg::random_unit_vector(&mut rng, d);
        descend(ch, &dual, &pairs, start, opts, false)
    });
    let max_ascent = runs.iter().map(|r| r.max_ascent).fold(0.0, f64::max);
    let best = runs
        .iter()
        .enumerate()
        .fold(0usize, |best, (i, r)| if r.value < runs[best].value { i } else { best });
    let best = &runs[best];
    Ok(OverlapSearchResult {
        psi: PureState::normalized(linalg::phase_normalize(&best.psi), vec![d])?,
        phi: PureState::normalized(linalg::phase_normalize(&best.phi), vec![d])?,
        value: best.value,
        max_ascent,
        restarts_used: runs.len(),
    })
}

/// Value trace of one restart of [`min_overlap_search`].
pub fn overlap_descent_history(ch: &Channel, opts: &OverlapSearchOptions, restart: usize) -> Result<Vec<f64>> {
    ch.require_trace_preserving()?;
    let dual = ch.dual();
    let pairs = pair_operators(ch);
    let mut rng = ChaCha8Rng::seed_from_u64(linalg::mix_seed(opts.seed ^ 0x5EED_0F0F, restart as u64));
    let start = linalg::random_unit_vector(&mut rng, ch.d_in());
    Ok(descend(ch, &dual, &pairs, start, opts, true).history)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictStatus {
    Positive,
    Zero,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    SubspaceCriterion,
    DirectMinimization,
    Both,
    /// Joint verdict implied by the non-superactivation theorem, no search run.
    Theorem,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityOptions {
    pub support_tol: f64,
    pub zero_tol: f64,
    pub search: ProductSearchOptions,
    pub overlap: OverlapSearchOptions,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self {
            support_tol: SUPPORT_TOL,
            zero_tol: ZERO_TOL,
            search: ProductSearchOptions::default(),
            overlap: OverlapSearchOptions::default(),
        }
    }
}

impl CapacityOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.search.seed = seed;
        self.overlap.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.search.restarts = restarts;
        self.overlap.restarts = restarts;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.search.max_iter = max_iter;
        self.overlap.max_iter = max_iter;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.search.exec = exec;
        self.overlap.exec = exec;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityVerdict {
    pub status: VerdictStatus,
    /// Input pair `(ψ, φ)` with vanishing overlap, present iff `Positive`.
    pub witness: Option<(PureState, PureState)>,
    /// Smallest overlap reached over every evaluated pair.
    pub margin: f64,
    pub method: Method,
    pub agreement: bool,
    pub subspace_dim: usize,
    pub complement_dim: usize,
    pub subspace_status: SearchStatus,
    /// Best `‖Π_{S⊥}(α⊗β)‖²` from the subspace route.
    pub subspace_objective: f64,
    /// Overlap of the mapped subspace witness, when one was found.
    pub subspace_witness_overlap: Option<f64>,
    pub direct_value: f64,
    pub warnings: Vec<ConditionWarning>,
}

impl CapacityVerdict {
    pub fn is_positive(&self) -> bool {
        self.status == VerdictStatus::Positive
    }

    pub fn is_zero(&self) -> bool {
        self.status == VerdictStatus::Zero
    }
}

/// Capacity verdict plus the support it was derived from.
#[derive(Debug, Clone)]
pub struct ChannelAnalysis {
    pub verdict: CapacityVerdict,
    pub subspace: Subspace,
    pub complement: Subspace,
}

/// Decides positivity of the one-shot zero-error capacity by both routes.
pub fn one_shot_zero_error_positive(ch: &Channel, opts: &CapacityOptions) -> Result<CapacityVerdict> {
    Ok(analyze_channel(ch, opts)?.verdict)
}

pub fn analyze_channel(ch: &Channel, opts: &CapacityOptions) -> Result<ChannelAnalysis> {
    ch.require_trace_preserving()?;
    let support = capacity_subspace(ch, opts.support_tol)?;
    let complement = support.subspace.orthogonal_complement();
    let warnings = support.warning.into_iter().collect();
    let verdict = verdict_from_complement(ch, &complement, warnings, opts)?;
    Ok(ChannelAnalysis {
        verdict,
        subspace: support.subspace,
        complement,
    })
}

/// Runs both routes given `S⊥` on the bipartite grouping `A`-`A′`.
pub(crate) fn verdict_from_complement(
    ch: &Channel,
    complement: &Subspace,
    warnings: Vec<ConditionWarning>,
    opts: &CapacityOptions,
) -> Result<CapacityVerdict> {
    let d = ch.d_in();
    if complement.dims() != [d, d] {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: complement.ambient(),
        });
    }
    let search = find_product_in_subspace(complement, &opts.search)?;
    let mut best_pair: Option<(PureState, PureState, f64)> = None;
    let mut subspace_witness_overlap = None;
    let sub_status = match search.status {
        SearchStatus::Found => {
            let (alpha, beta) = search.witness.as_ref().expect("Found carries a witness");
            let psi = PureState::new(beta.amplitudes().clone(), vec![d])?;
            let phi = PureState::new(conj_vec(alpha.amplitudes()), vec![d])?;
            let ov = trace_overlap(ch, &psi, &phi)?;
            subspace_witness_overlap = Some(ov);
            best_pair = Some((psi, phi, ov));
            if ov <= opts.zero_tol {
                VerdictStatus::Positive
            } else {
                VerdictStatus::Unknown
            }
        }
        SearchStatus::NotFound => VerdictStatus::Zero,
        SearchStatus::Inconclusive => VerdictStatus::Unknown,
    };

    let direct = min_overlap_search(ch, &opts.overlap)?;
    let direct_status = if direct.value <= opts.zero_tol {
        VerdictStatus::Positive
    } else {
        VerdictStatus::Zero
    };
    if best_pair.as_ref().is_none_or(|(_, _, ov)| direct.value < *ov) {
        best_pair = Some((direct.psi.clone(), direct.phi.clone(), direct.value));
    }
    let (psi, phi, margin) = best_pair.expect("direct search always yields a pair");

    let agreement = sub_status != VerdictStatus::Unknown && sub_status == direct_status;
    let status = if agreement {
        sub_status
    } else {
        VerdictStatus::Unknown
    };
    let witness = (status == VerdictStatus::Positive).then_some((psi, phi));
    Ok(CapacityVerdict {
        status,
        witness,
        margin,
        method: Method::Both,
        agreement,
        subspace_dim: complement.ambient() - complement.dim(),
        complement_dim: complement.dim(),
        subspace_status: search.status,
        subspace_objective: search.objective,
        subspace_witness_overlap,
        direct_value: direct.value,
        warnings,
    })
}
