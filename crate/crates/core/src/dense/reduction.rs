//! Exact joint distributions of coarse transcripts and the final honesty
//! projector, computed three ways: on the raw state, on its Bell
//! premeasurement (dense), and on a Bell-label mixture.
//!
//! The "honesty projector" projects the survivors onto the label string that
//! `N` perfect singlets would have left under the same schedule.

use std::collections::{BTreeMap, BTreeSet};

use super::{exact_protocol_branches, DenseState};
use crate::bell::BellString;
use crate::bits::Subset;
use crate::error::Result;
use crate::verification::{honest_reference, trace_labels};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointOutcome {
    /// Coarse parity of every round.
    pub parities: Vec<bool>,
    /// Outcome of the projector onto the honest survivor string.
    pub honest_survivors: bool,
}

pub type JointDistribution = BTreeMap<JointOutcome, f64>;

fn add(d: &mut JointDistribution, parities: Vec<bool>, honest: bool, p: f64) {
    *d.entry(JointOutcome {
        parities,
        honest_survivors: honest,
    })
    .or_insert(0.0) += p;
}

/// Evolves amplitudes directly, with no premeasurement.
pub fn dense_joint_distribution(state: &DenseState, subsets: &[Subset]) -> Result<JointDistribution> {
    let reference = honest_reference(state.n_pairs(), subsets)?.survivors;
    let mut d = JointDistribution::new();
    for b in exact_protocol_branches(state, subsets)? {
        let f = b.state.residual_fidelity(&reference)?;
        add(&mut d, b.parities(), true, b.probability * f);
        add(&mut d, b.parities(), false, b.probability * (1.0 - f));
    }
    Ok(d)
}

/// Premeasures the pairs in the Bell basis, then evolves each branch densely.
pub fn premeasured_joint_distribution(state: &DenseState, subsets: &[Subset]) -> Result<JointDistribution> {
    let mut d = JointDistribution::new();
    for branch in state.bell_premeasure() {
        for (k, p) in dense_joint_distribution(&branch.state, subsets)? {
            *d.entry(k).or_insert(0.0) += branch.probability * p;
        }
    }
    Ok(d)
}

/// Classical computation over a mixture of Bell strings.
pub fn label_joint_distribution(mixture: &[(BellString, f64)], subsets: &[Subset]) -> Result<JointDistribution> {
    let mut d = JointDistribution::new();
    let Some((first, _)) = mixture.first() else {
        return Ok(d);
    };
    let reference = honest_reference(first.len(), subsets)?.survivors;
    for (w, p) in mixture {
        let t = trace_labels(w, subsets)?;
        add(&mut d, t.parities, t.survivors.same_labels(&reference), *p);
    }
    Ok(d)
}

/// `½ Σ |p(k) − q(k)|` over the union of supports.
pub fn total_variation(a: &JointDistribution, b: &JointDistribution) -> f64 {
    let keys: BTreeSet<&JointOutcome> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}
