//! Superactivation analysis for tuples of channels.

use super::{analyze_channel, verdict_from_complement, CapacityOptions, CapacityVerdict, VerdictStatus};
use crate::channel::Channel;
use crate::cj::{PermuteSubsystems, Subspace};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperactivationOptions {
    pub capacity: CapacityOptions,
    /// Skip the joint search when the theorem's hypothesis holds.
    pub fast_path: bool,
    /// Largest allowed product of input dimensions.
    pub ambient_cap: usize,
}

impl Default for SuperactivationOptions {
    fn default() -> Self {
        Self {
            capacity: CapacityOptions::default(),
            fast_path: true,
            ambient_cap: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conclusion {
    Superactivated,
    NotSuperactivated,
    /// Some channel already has positive capacity on its own.
    NotApplicable,
    /// Not superactivated; decided from `dim S_j⊥ ≤ 1` without a joint search.
    TheoremFastPath,
    /// An individual or joint verdict came back `Unknown`.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperactivationReport {
    pub individual_verdicts: Vec<CapacityVerdict>,
    /// `None` when the joint search was not needed.
    pub joint_verdict: Option<CapacityVerdict>,
    pub conclusion: Conclusion,
    pub fast_path_reason: Option<String>,
    /// `dim S_j⊥` for every channel, in input order.
    pub complement_dims: Vec<usize>,
}

impl SuperactivationReport {
    pub fn is_superactivated(&self) -> bool {
        self.conclusion == Conclusion::Superactivated
    }
}

/// `(S_1 ⊗ … ⊗ S_k)⊥` regrouped as `(A_1…A_k)`-`(A_1′…A_k′)`.
///
/// Built from `(S ⊗ T)⊥ = S⊥ ⊗ H_T ⊕ S ⊗ T⊥` so the large joint projector
/// is never diagonalised.
pub fn joint_complement(parts: &[(Subspace, Subspace)]) -> Result<Subspace> {
    let ((s0, c0), rest) = parts.split_first().ok_or(Error::NoChannels)?;
    let mut support = s0.clone();
    let mut complement = c0.clone();
    for (s, c) in rest {
        let full = Subspace::full(s.dims().to_vec());
        let left = complement.tensor(&full);
        let right = support.tensor(c);
        complement = left.direct_sum_unchecked(right);
        support = support.tensor(s);
    }
    let k = parts.len();
    // [A1, A1', A2, A2', …] → [A1, …, Ak, A1', …, Ak']
    let perm: Vec<usize> = (0..k).map(|j| 2 * j).chain((0..k).map(|j| 2 * j + 1)).collect();
    complement.permute_subsystems(&perm)?.as_bipartite(k)
}

pub fn superactivation_analysis(chs: &[Channel], opts: &SuperactivationOptions) -> Result<SuperactivationReport> {
    if chs.is_empty() {
        return Err(Error::NoChannels);
    }
    let ambient: usize = chs.iter().map(Channel::d_in).product();
    if ambient > opts.ambient_cap {
        return Err(Error::AmbientTooLarge {
            ambient,
            cap: opts.ambient_cap,
        });
    }
    let analyses = chs
        .iter()
        .map(|ch| analyze_channel(ch, &opts.capacity))
        .collect::<Result<Vec<_>>>()?;
    let complement_dims: Vec<usize> = analyses.iter().map(|a| a.complement.dim()).collect();
    let individual_verdicts: Vec<CapacityVerdict> = analyses.iter().map(|a| a.verdict.clone()).collect();
    let report = |joint_verdict, conclusion, fast_path_reason| SuperactivationReport {
        individual_verdicts: individual_verdicts.clone(),
        joint_verdict,
        conclusion,
        fast_path_reason,
        complement_dims: complement_dims.clone(),
    };

    if individual_verdicts.iter().any(CapacityVerdict::is_positive) {
        return Ok(report(None, Conclusion::NotApplicable, None));
    }
    if individual_verdicts.iter().any(|v| v.status == VerdictStatus::Unknown) {
        return Ok(report(None, Conclusion::Undetermined, None));
    }

    let small: Vec<usize> = complement_dims
        .iter()
        .enumerate()
        .filter(|(_, &d)| d <= 1)
        .map(|(i, _)| i)
        .collect();
    if opts.fast_path && small.len() + 1 >= chs.len() {
        let reason = format!(
            "channels {small:?} have dim S⊥ ≤ 1 (dims {complement_dims:?}); with at most one \
             other channel the one-shot zero-error capacity cannot be superactivated"
        );
        return Ok(report(None, Conclusion::TheoremFastPath, Some(reason)));
    }

    let parts: Vec<(Subspace, Subspace)> = analyses
        .into_iter()
        .map(|a| (a.subspace, a.complement))
        .collect();
    let complement = joint_complement(&parts)?;
    let joint = Channel::tensor_all(chs)?;
    let warnings = individual_verdicts
        .iter()
        .flat_map(|v| v.warnings.iter().cloned())
        .collect();
    let joint_verdict = verdict_from_complement(&joint, &complement, warnings, &opts.capacity)?;
    let conclusion = match joint_verdict.status {
        VerdictStatus::Positive => Conclusion::Superactivated,
        VerdictStatus::Zero => Conclusion::NotSuperactivated,
        VerdictStatus::Unknown => Conclusion::Undetermined,
    };
    Ok(report(Some(joint_verdict), conclusion, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cj::{capacity_subspace, SUPPORT_TOL};
    use crate::linalg::frobenius;

    #[test]
    fn identity_pair_not_applicable() {
        let r = superactivation_analysis(
            &[Channel::identity(2), Channel::identity(2)],
            &SuperactivationOptions::default(),
        )
        .unwrap();
        assert_eq!(r.conclusion, Conclusion::NotApplicable);
        assert!(r.joint_verdict.is_none());
    }

    #[test]
    fn depolarizing_pair_has_full_joint_support() {
        let dep = Channel::completely_depolarizing(2);
        let opts = SuperactivationOptions {
            fast_path: false,
            ..Default::default()
        };
        let r = superactivation_analysis(&[dep.clone(), dep.clone()], &opts).unwrap();
        assert_eq!(r.conclusion, Conclusion::NotSuperactivated);
        let j = r.joint_verdict.unwrap();
        assert_eq!(j.complement_dim, 0);
        assert!((j.margin - 0.25).abs() < 1e-9);

        let r = superactivation_analysis(&[dep.clone(), dep], &SuperactivationOptions::default()).unwrap();
        assert_eq!(r.conclusion, Conclusion::TheoremFastPath);
        assert!(r.fast_path_reason.is_some());
    }

    #[test]
    fn joint_complement_matches_tensor_channel() {
        let e = Channel::random(3, 1, 4).unwrap();
        let f = Channel::random(2, 1, 5).unwrap();
        let parts: Vec<_> = [&e, &f]
            .iter()
            .map(|ch| {
                let s = capacity_subspace(ch, SUPPORT_TOL).unwrap().subspace;
                let c = s.orthogonal_complement();
                (s, c)
            })
            .collect();
        let built = joint_complement(&parts).unwrap();
        let direct = capacity_subspace(&e.tensor(&f), SUPPORT_TOL)
            .unwrap()
            .subspace
            .orthogonal_complement();
        assert_eq!(built.dims(), &[6, 6]);
        assert_eq!(built.dim(), direct.dim());
        assert!(built.gram_defect() < 1e-10);
        assert!(frobenius(&(built.projector() - direct.projector())) < 1e-9);
    }

    #[test]
    fn ambient_cap_enforced() {
        let chs = vec![Channel::identity(3); 4];
        assert!(matches!(
            superactivation_analysis(&chs, &SuperactivationOptions::default()),
            Err(Error::AmbientTooLarge { ambient: 81, cap: 64 })
        ));
        assert!(matches!(
            superactivation_analysis(&[], &SuperactivationOptions::default()),
            Err(Error::NoChannels)
        ));
    }
}
