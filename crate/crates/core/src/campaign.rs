//! Seeded randomized campaigns over the capacity routines.
//!
//! Every trial derives its own seed from the campaign seed and its index, so
//! trials run in any order (or concurrently) and the report is still
//! byte-identical for a given configuration.

use crate::capacity::{
    analyze_channel, lemma_instance_check, superactivation_analysis, CapacityOptions, Conclusion,
    LemmaCheck, SuperactivationOptions, SuperactivationReport, VerdictStatus,
};
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{c, mix_seed, random_isometry};
use crate::par::{map_indexed, Exec};
use crate::product::{ProductSearchOptions, SearchStatus};
use crate::sampling::{
    measure_prepare_real, random_lemma_instance, sample_channel, sample_zero_capacity, ChannelFamily,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Off-diagonal blocks of the rotated `M` must lie in `Q` to this accuracy.
pub const LEMMA_RESIDUAL_TOL: f64 = 1e-10;
/// Campaigns fail above this fraction of `Unknown` trials.
pub const MAX_UNKNOWN_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignMode {
    /// Random channels; the subspace and direct routes must not contradict.
    Oracle,
    /// Random qubit channels (including unitaries, two-outcome measurements
    /// and two-unitary mixtures); a product-free `S⊥` must have dimension ≤ 1.
    LemmaDim,
    /// Pairs (zero-capacity qubit, zero-capacity qudit) must not superactivate.
    Theorem,
    /// `arity`-tuples of zero-capacity qubit channels must not superactivate.
    Corollary,
    /// Random instances of the rank-one lemma must have `rank M ≠ 1`.
    LemmaFuzz,
}

/// Overrides for the analysis defaults; `None` keeps the module default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub support_tol: Option<f64>,
    pub zero_tol: Option<f64>,
    pub found_tol: Option<f64>,
    pub gray_tol: Option<f64>,
    pub product_tol: Option<f64>,
    pub restarts: Option<usize>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub mode: CampaignMode,
    pub trials: usize,
    /// Input dimensions to draw from (the partner channel in `theorem`).
    pub dims: Vec<usize>,
    /// Isometry channels get an environment of dimension `2..=env_dim`.
    pub env_dim: usize,
    pub seed: u64,
    /// Zero-capacity channels are kept only with margin above this.
    pub margin_filter: f64,
    pub family: ChannelFamily,
    pub fast_path: bool,
    /// Also run the joint search with the fast path disabled.
    pub explicit_joint: bool,
    /// Number of channels per tuple in `corollary` mode.
    pub arity: usize,
    /// Draw budget for each rejection-sampled channel.
    pub max_attempts: usize,
    pub tolerances: Tolerances,
    pub record_wall_time: bool,
    /// Execution of the trial loop; has no effect on results.
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            mode: CampaignMode::Theorem,
            trials: 100,
            dims: vec![2, 3],
            env_dim: 4,
            seed: 7,
            margin_filter: 1e-3,
            family: ChannelFamily::Mixed,
            fast_path: true,
            explicit_joint: true,
            arity: 3,
            max_attempts: 500,
            tolerances: Tolerances::default(),
            record_wall_time: false,
            exec: Exec::Parallel,
        }
    }
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return bad(format!("dims must be non-empty and all ≥ 2, got {:?}", self.dims));
        }
        if self.env_dim == 0 {
            return bad("env_dim must be positive".into());
        }
        if self.margin_filter.is_nan() || self.margin_filter < 0.0 {
            return bad(format!("margin_filter must be ≥ 0, got {}", self.margin_filter));
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive".into());
        }
        match self.mode {
            CampaignMode::Theorem if self.dims.iter().any(|&d| 2 * d > 64) => {
                bad(format!("joint input dimension exceeds 64 for dims {:?}", self.dims))
            }
            CampaignMode::Corollary if !(2..=6).contains(&self.arity) => {
                bad(format!("arity must be in 2..=6, got {}", self.arity))
            }
            CampaignMode::LemmaFuzz if self.dims.iter().any(|&d| d > 4) => {
                bad(format!("lemma-fuzz dims must be ≤ 4, got {:?}", self.dims))
            }
            _ => Ok(()),
        }
    }

    pub fn capacity_options(&self) -> CapacityOptions {
        let t = &self.tolerances;
        let mut o = CapacityOptions::default().with_exec(Exec::Sequential);
        if let Some(v) = t.support_tol {
            o.support_tol = v;
        }
        if let Some(v) = t.zero_tol {
            o.zero_tol = v;
        }
        if let Some(v) = t.found_tol {
            o.search.found_tol = v;
        }
        if let Some(v) = t.gray_tol {
            o.search.gray_tol = v;
        }
        if let Some(v) = t.product_tol {
            o.search.product_tol = v;
        }
        if let Some(v) = t.restarts {
            o = o.with_restarts(v);
        }
        if let Some(v) = t.max_iter {
            o = o.with_max_iter(v);
        }
        o
    }
}

/// Exclusive per-trial outcome classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialClass {
    Positive,
    Zero,
    Unknown,
    Superactivated,
    Fastpath,
    Violation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub positive: usize,
    pub zero: usize,
    pub unknown: usize,
    pub superactivated: usize,
    pub fastpath: usize,
    pub violation: usize,
}

impl Counts {
    fn add(&mut self, class: TrialClass) {
        match class {
            TrialClass::Positive => self.positive += 1,
            TrialClass::Zero => self.zero += 1,
            TrialClass::Unknown => self.unknown += 1,
            TrialClass::Superactivated => self.superactivated += 1,
            TrialClass::Fastpath => self.fastpath += 1,
            TrialClass::Violation => self.violation += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.positive + self.zero + self.unknown + self.superactivated + self.fastpath + self.violation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRecord {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub rank: Option<usize>,
    pub offdiag_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub class: TrialClass,
    /// Input dimension of each sampled channel.
    pub dims: Vec<usize>,
    pub complement_dims: Vec<usize>,
    /// Individual margins, then the joint margin when a joint search ran.
    pub margins: Vec<f64>,
    pub conclusion: Option<Conclusion>,
    pub explicit_class: Option<TrialClass>,
    pub explicit_conclusion: Option<Conclusion>,
    pub lemma: Option<LemmaRecord>,
    pub note: Option<String>,
}

impl TrialRecord {
    fn new(trial: usize, seed: u64, class: TrialClass) -> Self {
        Self {
            trial,
            seed,
            class,
            dims: Vec::new(),
            complement_dims: Vec::new(),
            margins: Vec::new(),
            conclusion: None,
            explicit_class: None,
            explicit_conclusion: None,
            lemma: None,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub command: String,
    pub config: CampaignConfig,
    pub effective: CapacityOptions,
    pub counts: Counts,
    /// Outcomes of the fast-path-disabled joint searches, when run.
    pub explicit_counts: Option<Counts>,
    pub unknown_rate: f64,
    pub passed: bool,
    pub records: Vec<TrialRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_s: Option<f64>,
}

impl CampaignReport {
    /// `0` when the campaign passed, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

fn class_of(conclusion: Conclusion) -> TrialClass {
    match conclusion {
        Conclusion::Superactivated => TrialClass::Superactivated,
        Conclusion::NotSuperactivated => TrialClass::Zero,
        Conclusion::NotApplicable => TrialClass::Positive,
        Conclusion::TheoremFastPath => TrialClass::Fastpath,
        Conclusion::Undetermined => TrialClass::Unknown,
    }
}

fn class_of_status(s: VerdictStatus) -> TrialClass {
    match s {
        VerdictStatus::Positive => TrialClass::Positive,
        VerdictStatus::Zero => TrialClass::Zero,
        VerdictStatus::Unknown => TrialClass::Unknown,
    }
}

fn pick<R: Rng>(rng: &mut R, xs: &[usize]) -> usize {
    xs[rng.random_range(0..xs.len())]
}

fn oracle_trial(cfg: &CampaignConfig, opts: &CapacityOptions, rng: &mut ChaCha8Rng, rec: &mut TrialRecord) -> Result<()> {
    let d = pick(rng, &cfg.dims);
    let ch = sample_channel(rng, cfg.family, d, cfg.env_dim);
    let a = analyze_channel(&ch, opts)?;
    let v = &a.verdict;
    rec.dims = vec![d];
    rec.complement_dims = vec![v.complement_dim];
    rec.margins = vec![v.margin];
    let direct_positive = v.direct_value <= opts.zero_tol;
    let subspace_positive = v.subspace_witness_overlap.is_some_and(|ov| ov <= opts.zero_tol);
    // a definite answer from each route, and they differ
    let contradiction = (v.subspace_status == SearchStatus::NotFound && direct_positive)
        || (subspace_positive && !direct_positive)
        || (v.subspace_status == SearchStatus::Found && !subspace_positive);
    rec.class = if contradiction {
        rec.note = Some(format!(
            "subspace route {:?} (witness overlap {:?}), direct minimum {:e}",
            v.subspace_status, v.subspace_witness_overlap, v.direct_value
        ));
        TrialClass::Violation
    } else {
        class_of_status(v.status)
    };
    Ok(())
}

fn lemma_dim_trial(cfg: &CampaignConfig, opts: &CapacityOptions, rng: &mut ChaCha8Rng, rec: &mut TrialRecord) -> Result<()> {
    let ch = match rng.random_range(0..4) {
        0 => sample_channel(rng, cfg.family, 2, cfg.env_dim),
        // dim S⊥ = 3
        1 => Channel::random_with(rng, 2, 1),
        // S spanned by two rank-one projectors: dim S⊥ = 2
        2 => measure_prepare_real(rng, 2, 2),
        // S = span{I, W, W†} for W = U†V: dim S⊥ = 1, product or not
        _ => {
            let p: f64 = rng.random_range(0.05..0.95);
            let u = random_isometry(rng, 2, 2);
            let w = random_isometry(rng, 2, 2);
            Channel::new(vec![u * c(p.sqrt(), 0.0), w * c((1.0 - p).sqrt(), 0.0)])?
        }
    };
    let a = analyze_channel(&ch, opts)?;
    let v = &a.verdict;
    rec.dims = vec![2];
    rec.complement_dims = vec![v.complement_dim];
    rec.margins = vec![v.margin];
    rec.class = if v.subspace_status == SearchStatus::NotFound && v.complement_dim > 1 {
        rec.note = Some(format!(
            "product-free complement of dimension {} (best objective {})",
            v.complement_dim, v.subspace_objective
        ));
        TrialClass::Violation
    } else {
        class_of_status(v.status)
    };
    Ok(())
}

fn joint_trial(
    cfg: &CampaignConfig,
    opts: &CapacityOptions,
    rng: &mut ChaCha8Rng,
    dims: Vec<usize>,
    rec: &mut TrialRecord,
) -> Result<()> {
    let mut channels = Vec::with_capacity(dims.len());
    for &d in &dims {
        let (ch, _, _) = sample_zero_capacity(rng, cfg.family, d, cfg.env_dim, cfg.margin_filter, opts, cfg.max_attempts)?;
        channels.push(ch);
    }
    let sopts = SuperactivationOptions {
        capacity: *opts,
        fast_path: cfg.fast_path,
        ..Default::default()
    };
    let record_margins = |r: &SuperactivationReport, out: &mut Vec<f64>| {
        out.extend(r.individual_verdicts.iter().map(|v| v.margin));
        out.extend(r.joint_verdict.iter().map(|v| v.margin));
    };
    let report = superactivation_analysis(&channels, &sopts)?;
    rec.dims = dims;
    rec.complement_dims = report.complement_dims.clone();
    record_margins(&report, &mut rec.margins);
    rec.conclusion = Some(report.conclusion);
    rec.class = class_of(report.conclusion);
    if cfg.explicit_joint && report.joint_verdict.is_none() && report.conclusion == Conclusion::TheoremFastPath {
        let explicit = superactivation_analysis(&channels, &SuperactivationOptions { fast_path: false, ..sopts })?;
        if let Some(j) = &explicit.joint_verdict {
            rec.margins.push(j.margin);
        }
        rec.explicit_conclusion = Some(explicit.conclusion);
        rec.explicit_class = Some(class_of(explicit.conclusion));
    } else if cfg.explicit_joint {
        rec.explicit_conclusion = rec.conclusion;
        rec.explicit_class = Some(rec.class);
    }
    Ok(())
}

fn lemma_fuzz_trial(cfg: &CampaignConfig, opts: &CapacityOptions, rng: &mut ChaCha8Rng, rec: &mut TrialRecord) -> Result<()> {
    let n = pick(rng, &cfg.dims);
    let m = pick(rng, &cfg.dims);
    let k_max = ((m - 1) * (m - 1)).min(3);
    let k = rng.random_range(1..=k_max);
    let search = ProductSearchOptions { seed: rng.random(), ..opts.search };
    let inst = random_lemma_instance(rng, n, m, k, &search)?;
    let check = lemma_instance_check(&inst, &search)?;
    let residual = check.trace().offdiag_q_residual;
    rec.dims = vec![n, m];
    rec.lemma = Some(LemmaRecord {
        n,
        m,
        k,
        rank: match &check {
            LemmaCheck::RankNotOne { rank, .. } => Some(*rank),
            LemmaCheck::Violation { .. } => Some(1),
        },
        offdiag_residual: residual,
    });
    rec.class = if check.is_violation() || residual.is_nan() || residual > LEMMA_RESIDUAL_TOL {
        rec.note = Some(format!("rank-one M or off-diagonal residual {residual:e}"));
        TrialClass::Violation
    } else {
        TrialClass::Zero
    };
    Ok(())
}

fn run_trial(cfg: &CampaignConfig, base: &CapacityOptions, trial: usize) -> TrialRecord {
    let seed = mix_seed(cfg.seed, trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = base.with_seed(seed);
    let mut rec = TrialRecord::new(trial, seed, TrialClass::Unknown);
    let outcome = match cfg.mode {
        CampaignMode::Oracle => oracle_trial(cfg, &opts, &mut rng, &mut rec),
        CampaignMode::LemmaDim => lemma_dim_trial(cfg, &opts, &mut rng, &mut rec),
        CampaignMode::Theorem => {
            let partner = pick(&mut rng, &cfg.dims);
            joint_trial(cfg, &opts, &mut rng, vec![2, partner], &mut rec)
        }
        CampaignMode::Corollary => joint_trial(cfg, &opts, &mut rng, vec![2; cfg.arity], &mut rec),
        CampaignMode::LemmaFuzz => lemma_fuzz_trial(cfg, &opts, &mut rng, &mut rec),
    };
    if let Err(e) = outcome {
        // a trial that could not be carried out proves nothing either way
        rec.class = TrialClass::Unknown;
        rec.note = Some(e.to_string());
    }
    rec
}

pub fn run_campaign(cfg: &CampaignConfig, command: &str) -> Result<CampaignReport> {
    cfg.validate()?;
    let start = Instant::now();
    let base = cfg.capacity_options();
    let records = map_indexed(cfg.exec, cfg.trials, |i| run_trial(cfg, &base, i));
    let mut counts = Counts::default();
    let mut explicit: Option<Counts> = None;
    for r in &records {
        counts.add(r.class);
        if let Some(c) = r.explicit_class {
            explicit.get_or_insert_with(Counts::default).add(c);
        }
    }
    let unknown_rate = counts.unknown as f64 / cfg.trials as f64;
    let explicit_ok = explicit.is_none_or(|e| {
        e.superactivated == 0 && e.violation == 0 && e.unknown as f64 / cfg.trials as f64 <= MAX_UNKNOWN_RATE
    });
    let passed = counts.superactivated == 0 && counts.violation == 0 && unknown_rate <= MAX_UNKNOWN_RATE && explicit_ok;
    Ok(CampaignReport {
        command: command.to_string(),
        config: cfg.clone(),
        effective: base,
        counts,
        explicit_counts: explicit,
        unknown_rate,
        passed,
        records,
        wall_time_s: cfg.record_wall_time.then(|| start.elapsed().as_secs_f64()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: CampaignMode, trials: usize) -> CampaignConfig {
        CampaignConfig {
            mode,
            trials,
            ..Default::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(small(CampaignMode::Oracle, 0).validate().is_err());
        let mut c = small(CampaignMode::Oracle, 1);
        c.dims = vec![1, 2];
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert!(CampaignConfig::from_json(r#"{"trials": 3, "bogus": 1}"#).is_err());
        let c = CampaignConfig::from_json(r#"{"mode": "lemma-fuzz", "trials": 3}"#).unwrap();
        assert_eq!(c.mode, CampaignMode::LemmaFuzz);
        assert_eq!(c.dims, vec![2, 3]);
    }

    #[test]
    fn counts_sum_to_trials_and_runs_are_reproducible() {
        let cfg = small(CampaignMode::Oracle, 6);
        let a = run_campaign(&cfg, "test").unwrap();
        assert_eq!(a.counts.total(), 6);
        let seq = CampaignConfig { exec: Exec::Sequential, ..cfg };
        let b = run_campaign(&seq, "test").unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.wall_time_s.is_none());
    }

    #[test]
    fn report_round_trips() {
        let r = run_campaign(&small(CampaignMode::LemmaFuzz, 4), "test").unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: CampaignReport = serde_json::from_str(&text).unwrap();
        // exec is not serialized and comes back as the default
        assert_eq!(back, r);
    }

    #[test]
    fn theorem_trials_take_fast_path() {
        let r = run_campaign(&small(CampaignMode::Theorem, 3), "test").unwrap();
        assert_eq!(r.counts.fastpath, 3, "{:?}", r.records);
        let e = r.explicit_counts.unwrap();
        assert_eq!(e.superactivated, 0);
        assert!(r.passed);
    }
}
