//! The state ↔ matrix isomorphism, Schmidt analysis, and product-state
//! search inside bipartite subspaces.

use crate::bilinear;
use crate::cj::Subspace;
use crate::error::{Error, Result};
use crate::linalg::{self, conj_vec, hermitian_eigh, phase_normalize, CMat, CVec};
use crate::par::{map_indexed, Exec};
use crate::state::PureState;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default ratio `s_2 / s_1` below which a state counts as product.
pub const PRODUCT_TOL: f64 = 1e-7;

/// `M_ij` is the amplitude of `|i⟩_A |j⟩_B`.
pub fn state_to_matrix(v: &PureState) -> Result<CMat> {
    let (da, db) = bipartite_dims(v.dims())?;
    Ok(vector_to_matrix(v.amplitudes(), da, db))
}

pub fn matrix_to_state(m: &CMat) -> Result<PureState> {
    let (da, db) = m.shape();
    PureState::normalized(matrix_to_vector(m), vec![da, db])
}

pub(crate) fn vector_to_matrix(v: &CVec, da: usize, db: usize) -> CMat {
    CMat::from_fn(da, db, |i, j| v[i * db + j])
}

pub(crate) fn matrix_to_vector(m: &CMat) -> CVec {
    let (da, db) = m.shape();
    CVec::from_fn(da * db, |k, _| m[(k / db, k % db)])
}

fn bipartite_dims(dims: &[usize]) -> Result<(usize, usize)> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::NotBipartite { parts: dims.len() }),
    }
}

/// Schmidt coefficients, descending.
pub fn schmidt_values(v: &PureState) -> Result<Vec<f64>> {
    Ok(linalg::singular_values(&state_to_matrix(v)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductTest {
    pub is_product: bool,
    /// `s_2 / s_1`, zero when there is a single Schmidt coefficient.
    pub ratio: f64,
    pub witness: Option<(PureState, PureState)>,
}

pub fn is_product(v: &PureState, tol: f64) -> Result<ProductTest> {
    let m = state_to_matrix(v)?;
    Ok(product_test_matrix(&m, tol))
}

fn product_test_matrix(m: &CMat, tol: f64) -> ProductTest {
    let (u, s, vv) = linalg::svd_sorted(m);
    let top = s.first().copied().unwrap_or(0.0);
    let ratio = if top > 0.0 {
        s.get(1).copied().unwrap_or(0.0) / top
    } else {
        f64::INFINITY
    };
    let is_product = top > 0.0 && ratio <= tol;
    let witness = is_product.then(|| {
        let a = phase_normalize(&u.column(0).into_owned());
        let b = phase_normalize(&conj_vec(&vv.column(0).into_owned()));
        (
            PureState::normalized(a, vec![m.nrows()]).expect("singular vector is nonzero"),
            PureState::normalized(b, vec![m.ncols()]).expect("singular vector is nonzero"),
        )
    });
    ProductTest {
        is_product,
        ratio,
        witness,
    }
}

/// Largest dimension of a subspace of `C^d_a ⊗ C^d_b` whose states all
/// have Schmidt number at least `r`.
pub fn max_entangled_subspace_dim(d_a: usize, d_b: usize, r: usize) -> Result<usize> {
    let max = d_a.min(d_b);
    if r == 0 || r > max {
        return Err(Error::InvalidSchmidtNumber { r, max });
    }
    Ok((d_a - r + 1) * (d_b - r + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStatus {
    Found,
    NotFound,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductSearchOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub found_tol: f64,
    /// Objectives in `(1 − gray_tol, 1 − found_tol)` are reported as inconclusive.
    pub gray_tol: f64,
    pub conv_tol: f64,
    /// Only used for one-dimensional subspaces, which are decided exactly.
    pub product_tol: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for ProductSearchOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iter: 500,
            found_tol: 1e-9,
            gray_tol: 1e-4,
            conv_tol: 1e-12,
            product_tol: PRODUCT_TOL,
            seed: 0,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductSearchResult {
    pub status: SearchStatus,
    pub witness: Option<(PureState, PureState)>,
    /// Best `‖Π_S(a ⊗ b)‖²` reached.
    pub objective: f64,
    pub restarts_used: usize,
    /// Largest decrease seen between consecutive iterates of any restart.
    /// Alternating maximisation is monotone, so this should be round-off.
    pub max_descent: f64,
}

/// Best product approximation of a single restart.
#[derive(Debug, Clone)]
struct Ascent {
    a: CVec,
    b: CVec,
    objective: f64,
    max_descent: f64,
    history: Vec<f64>,
}

/// Searches `s` for a product vector `a ⊗ b`.
///
/// One-dimensional subspaces are decided exactly through the Schmidt
/// decomposition of the spanning vector. Otherwise `f(a,b) = ‖Π_S(a⊗b)‖²`
/// is maximised by alternating top-eigenvector updates from random starts.
pub fn find_product_in_subspace(s: &Subspace, opts: &ProductSearchOptions) -> Result<ProductSearchResult> {
    let (da, db) = bipartite_dims(s.dims())?;
    match s.dim() {
        0 => Ok(ProductSearchResult {
            status: SearchStatus::NotFound,
            witness: None,
            objective: 0.0,
            restarts_used: 0,
            max_descent: 0.0,
        }),
        1 => {
            let m = vector_to_matrix(&s.basis()[0], da, db);
            let test = product_test_matrix(&m, opts.product_tol);
            let top = linalg::singular_values(&m)[0];
            Ok(ProductSearchResult {
                status: if test.is_product {
                    SearchStatus::Found
                } else {
                    SearchStatus::NotFound
                },
                witness: test.witness,
                objective: top * top,
                restarts_used: 0,
                max_descent: 0.0,
            })
        }
        _ => {
            let mats: Vec<CMat> = s
                .basis()
                .iter()
                .map(|u| vector_to_matrix(u, da, db))
                .collect();
            let defect = defect_operators(s, da, db);
            let runs = map_indexed(opts.exec, opts.restarts.max(1), |i| {
                let mut rng = ChaCha8Rng::seed_from_u64(linalg::mix_seed(opts.seed, i as u64));
                let a0 = linalg::random_unit_vector(&mut rng, da);
                ascend(&mats, &defect, a0, opts.max_iter, opts.conv_tol, false)
            });
            let max_descent = runs.iter().map(|r| r.max_descent).fold(0.0, f64::max);
            // ties go to the lowest restart index
            let best = runs
                .iter()
                .enumerate()
                .fold(0usize, |best, (i, r)| if r.objective > runs[best].objective { i } else { best });
            let best = &runs[best];
            let status = classify(best.objective, opts);
            let witness = (status == SearchStatus::Found).then(|| {
                (
                    PureState::normalized(phase_normalize(&best.a), vec![da]).expect("unit vector"),
                    PureState::normalized(phase_normalize(&best.b), vec![db]).expect("unit vector"),
                )
            });
            Ok(ProductSearchResult {
                status,
                witness,
                objective: best.objective.min(1.0),
                restarts_used: runs.len(),
                max_descent,
            })
        }
    }
}

fn classify(objective: f64, opts: &ProductSearchOptions) -> SearchStatus {
    if objective >= 1.0 - opts.found_tol {
        SearchStatus::Found
    } else if objective > 1.0 - opts.gray_tol {
        SearchStatus::Inconclusive
    } else {
        SearchStatus::NotFound
    }
}

/// Top eigenpair of `Σ_k x_k x_k†`.
fn top_eigvec(xs: &[CVec]) -> (f64, CVec) {
    let d = xs[0].len();
    let mut h = CMat::zeros(d, d);
    for x in xs {
        h += x * x.adjoint();
    }
    let (vals, vecs) = hermitian_eigh(&h);
    (vals[d - 1], vecs.column(d - 1).into_owned())
}

/// `conj(W_k)` for a basis `w_k` of `S⊥`, so that `1 − ‖Π_S(a⊗b)‖² = Σ_k |aᵀ conj(W_k) b|²`.
fn defect_operators(s: &Subspace, da: usize, db: usize) -> Vec<CMat> {
    s.orthogonal_complement()
        .basis()
        .iter()
        .map(|w| vector_to_matrix(&conj_vec(w), da, db))
        .collect()
}

/// Restarts ending above this are refined by Gauss-Newton.
const POLISH_FROM: f64 = 0.99;
const POLISH_ITERS: usize = 100;

fn ascend(
    mats: &[CMat],
    defect: &[CMat],
    a0: CVec,
    max_iter: usize,
    conv_tol: f64,
    keep_history: bool,
) -> Ascent {
    let mut a = a0;
    // best b for the starting a
    let xs: Vec<CVec> = mats.iter().map(|m| m.transpose() * conj_vec(&a)).collect();
    let (mut objective, mut b) = top_eigvec(&xs);
    let mut max_descent: f64 = 0.0;
    let mut history = Vec::new();
    if keep_history {
        history.push(objective);
    }
    for _ in 0..max_iter {
        let ys: Vec<CVec> = mats.iter().map(|m| m * conj_vec(&b)).collect();
        let (_, a_new) = top_eigvec(&ys);
        a = a_new;
        let xs: Vec<CVec> = mats.iter().map(|m| m.transpose() * conj_vec(&a)).collect();
        let (val, b_new) = top_eigvec(&xs);
        b = b_new;
        max_descent = max_descent.max(objective - val);
        let change = (val - objective).abs();
        objective = val;
        if keep_history {
            history.push(objective);
        }
        if change < conv_tol {
            break;
        }
    }
    if !defect.is_empty() && (POLISH_FROM..1.0).contains(&objective) {
        let p = bilinear::polish(defect, a.clone(), b.clone(), POLISH_ITERS);
        let val = 1.0 - p.value;
        if val > objective {
            a = p.x;
            b = p.y;
            objective = val;
            if keep_history {
                history.push(objective);
            }
        }
    }
    Ascent {
        a,
        b,
        objective,
        max_descent,
        history,
    }
}

/// Objective trace of a single restart, for monotonicity checks.
pub fn ascent_history(s: &Subspace, opts: &ProductSearchOptions, restart: usize) -> Result<Vec<f64>> {
    let (da, db) = bipartite_dims(s.dims())?;
    if s.dim() == 0 {
        return Ok(vec![0.0]);
    }
    let mats: Vec<CMat> = s
        .basis()
        .iter()
        .map(|u| vector_to_matrix(u, da, db))
        .collect();
    let defect = defect_operators(s, da, db);
    let mut rng = ChaCha8Rng::seed_from_u64(linalg::mix_seed(opts.seed, restart as u64));
    let a0 = linalg::random_unit_vector(&mut rng, da);
    Ok(ascend(&mats, &defect, a0, opts.max_iter, opts.conv_tol, true).history)
}
