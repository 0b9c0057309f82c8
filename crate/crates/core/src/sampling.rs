//! Seeded samplers for randomized campaigns.

use crate::capacity::{
    analyze_channel, lemma::remove_q_component, CapacityOptions, ChannelAnalysis, LemmaInstance,
    VerdictStatus,
};
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{self, c, hermitian_eigh, random_gaussian_matrix, CMat, CVec};
use crate::product::{find_product_in_subspace, ProductSearchOptions, SearchStatus};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelFamily {
    /// Haar-random Stinespring isometry with environment dimension `2..=env_dim`.
    Isometry,
    /// Rank-one real POVM measured, outcome written to orthogonal output states.
    MeasurePrepare,
    /// Even split between the two families above.
    #[default]
    Mixed,
}

/// `ρ ↦ Σ_a ⟨u_a|ρ|u_a⟩ |a⟩⟨a|` for a random real rank-one POVM `{u_a u_aᵀ}`.
///
/// With `outcomes ≥ d(d+1)/2` the POVM elements generically span all real
/// symmetric matrices, so `S⊥` is the antisymmetric part, of dimension
/// `d(d−1)/2`, and contains no product vector.
pub fn measure_prepare_real<R: Rng + ?Sized>(rng: &mut R, d: usize, outcomes: usize) -> Channel {
    let ws: Vec<CVec> = (0..outcomes)
        .map(|_| CVec::from_fn(d, |_, _| c(rng.sample::<f64, _>(StandardNormal), 0.0)))
        .collect();
    let mut g = CMat::zeros(d, d);
    for w in &ws {
        g += w * w.adjoint();
    }
    let (vals, vecs) = hermitian_eigh(&g);
    let inv_sqrt = CMat::from_diagonal(&CVec::from_iterator(
        d,
        vals.iter().map(|&v| c(1.0 / v.max(1e-300).sqrt(), 0.0)),
    ));
    let g_inv_sqrt = &vecs * inv_sqrt * vecs.adjoint();
    let kraus = ws
        .iter()
        .enumerate()
        .map(|(a, w)| {
            let u = &g_inv_sqrt * w;
            linalg::basis_vector(outcomes, a) * u.adjoint()
        })
        .collect();
    Channel::new(kraus).expect("Kraus operators share one shape")
}

pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, family: ChannelFamily, d: usize, env_dim: usize) -> Channel {
    let family = match family {
        ChannelFamily::Mixed => {
            if rng.random_bool(0.5) {
                ChannelFamily::Isometry
            } else {
                ChannelFamily::MeasurePrepare
            }
        }
        f => f,
    };
    match family {
        ChannelFamily::Isometry => {
            let env = if env_dim <= 2 { env_dim.max(1) } else { rng.random_range(2..=env_dim) };
            Channel::random_with(rng, d, env)
        }
        _ => {
            let base = d * (d + 1) / 2;
            let outcomes = base + rng.random_range(0..=1);
            measure_prepare_real(rng, d, outcomes)
        }
    }
}

/// Rejection-samples a channel whose verdict is `Zero` with margin above
/// `margin_filter`. Returns the analysis and the number of draws used.
pub fn sample_zero_capacity<R: Rng + ?Sized>(
    rng: &mut R,
    family: ChannelFamily,
    d: usize,
    env_dim: usize,
    margin_filter: f64,
    opts: &CapacityOptions,
    max_attempts: usize,
) -> Result<(Channel, ChannelAnalysis, usize)> {
    for attempt in 1..=max_attempts {
        let ch = sample_channel(rng, family, d, env_dim);
        let analysis = analyze_channel(&ch, opts)?;
        if analysis.verdict.status == VerdictStatus::Zero && analysis.verdict.margin > margin_filter {
            return Ok((ch, analysis, attempt));
        }
    }
    Err(Error::Config(format!(
        "no zero-capacity channel (d={d}, margin > {margin_filter}) in {max_attempts} draws"
    )))
}

/// Random instance satisfying the rank-one lemma's hypotheses.
///
/// `Q` is drawn by rejection: a random `k`-dimensional span of `m × m`
/// matrices is kept only if the product search finds no rank-one element.
/// Structured draws (diagonal `A¹`, vanishing `B¹`, zero or diagonal `A^j`)
/// are mixed in so every branch of the proof gets exercised.
pub fn random_lemma_instance<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    k: usize,
    search: &ProductSearchOptions,
) -> Result<LemmaInstance> {
    if k == 0 || k > (m - 1) * (m - 1) {
        return Err(Error::Config(format!(
            "a product-free subspace of {m}×{m} matrices has dimension 1..={}",
            (m - 1) * (m - 1)
        )));
    }
    let q = loop {
        let q: Vec<CMat> = (0..k).map(|_| random_gaussian_matrix(rng, m, m)).collect();
        let inst = LemmaInstance {
            a: vec![CMat::identity(1, 1); k + 1],
            b: std::iter::once(CMat::zeros(m, m)).chain(q.iter().cloned()).collect(),
        };
        let sub = inst.q_subspace();
        if sub.dim() == k && find_product_in_subspace(&sub, search)?.status == SearchStatus::NotFound {
            break q;
        }
    };

    let a1 = loop {
        let mut a = random_gaussian_matrix(rng, n, n);
        for i in 0..n {
            a[(i, i)] += c(2.0 + rng.random::<f64>(), 0.0);
        }
        if rng.random_bool(0.3) {
            a = CMat::from_diagonal(&a.diagonal());
        }
        if linalg::numerical_rank(&a, 1e-6) >= 2 {
            break a;
        }
    };

    let b1 = if rng.random_bool(0.2) {
        CMat::zeros(m, m)
    } else {
        remove_q_component(&random_gaussian_matrix(rng, m, m), &q)
    };

    let mut a = vec![a1];
    for _ in 0..k {
        let roll: f64 = rng.random();
        let aj = if roll < 0.15 {
            CMat::zeros(n, n)
        } else if roll < 0.3 {
            CMat::from_diagonal(&random_gaussian_matrix(rng, n, n).diagonal())
        } else {
            random_gaussian_matrix(rng, n, n)
        };
        a.push(aj);
    }
    let mut b = vec![b1];
    b.extend(q);
    Ok(LemmaInstance { a, b })
}
