//! Werner-state bookkeeping for quantum repeater chains: depolarizing
//! channels, recurrence purification, entanglement swapping and a simple
//! fault-tolerance model for the stations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell::BellLabel;
use crate::error::{invalid, Result};

/// Singlet fidelity of a Werner pair, `f Ψ− + (1−f)/3 (Φ+ + Ψ+ + Φ−)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct WernerFidelity(f64);

impl WernerFidelity {
    pub const PERFECT: Self = Self(1.0);

    pub fn new(f: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&f) {
            Ok(Self(f))
        } else {
            Err(invalid("fidelity", format!("{f} is outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Above 1/2 the pair can be purified toward a singlet.
    pub fn is_purifiable(self) -> bool {
        self.0 > 0.5
    }

    /// Probability weight of `label` in the Werner mixture.
    pub fn weight(self, label: BellLabel) -> f64 {
        if label.is_singlet() {
            self.0
        } else {
            (1.0 - self.0) / 3.0
        }
    }
}

impl TryFrom<f64> for WernerFidelity {
    type Error = crate::Error;

    fn try_from(f: f64) -> Result<Self> {
        Self::new(f)
    }
}

impl From<WernerFidelity> for f64 {
    fn from(f: WernerFidelity) -> f64 {
        f.0
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(name, format!("{p} is outside [0, 1]")))
    }
}

/// Depolarizing channel on one pair: with probability `p` the label is
/// replaced by a uniformly random one.
pub fn depolarize<R: Rng + ?Sized>(label: BellLabel, p: f64, rng: &mut R) -> Result<BellLabel> {
    check_probability("depolarizing_probability", p)?;
    Ok(if rng.random::<f64>() < p {
        BellLabel::from_index(rng.random_range(0..4))
    } else {
        label
    })
}

/// Effect of [`depolarize`] on a Werner pair.
pub fn depolarize_fidelity(f: WernerFidelity, p: f64) -> Result<WernerFidelity> {
    check_probability("depolarizing_probability", p)?;
    WernerFidelity::new((1.0 - p) * f.0 + p / 4.0)
}

/// One recurrence round on two Werner pairs of fidelity `f`:
/// `(f_out, p_success)`, with
/// `p = f² + 2f(1−f)/3 + 5((1−f)/3)²` and `f_out = (f² + ((1−f)/3)²) / p`.
/// The survivor is twirled back into Werner form.
pub fn purify_step(f: WernerFidelity) -> (WernerFidelity, f64) {
    let f = f.0;
    let e = (1.0 - f) / 3.0;
    let p = f * f + 2.0 * f * e + 5.0 * e * e;
    let out = (f * f + e * e) / p;
    (WernerFidelity(out.clamp(0.0, 1.0)), p)
}

/// Fidelity after swapping two Werner pairs: `f1 f2 + (1−f1)(1−f2)/3`.
pub fn connect(f1: WernerFidelity, f2: WernerFidelity) -> WernerFidelity {
    WernerFidelity((f1.0 * f2.0 + (1.0 - f1.0) * (1.0 - f2.0) / 3.0).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PurificationSchedule {
    /// Rounds per segment, in segment order.
    Fixed(Vec<u32>),
    /// The same number of rounds on every segment.
    Uniform(u32),
    /// The fewest uniform rounds that reach the target, searched up to a cap.
    MinimalUniform { max_rounds: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    /// Fidelity of the elementary pair on each segment.
    pub segments: Vec<WernerFidelity>,
    pub target: f64,
    pub schedule: PurificationSchedule,
}

impl ChainSpec {
    pub fn uniform(n_segments: usize, f: WernerFidelity, target: f64, schedule: PurificationSchedule) -> Self {
        Self {
            segments: vec![f; n_segments],
            target,
            schedule,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub rounds: Vec<u32>,
    pub purified: Vec<f64>,
    /// Success probability of each round, per segment.
    pub success_probabilities: Vec<Vec<f64>>,
    pub final_fidelity: f64,
    /// Expected elementary pairs consumed per delivered end-to-end pair.
    pub pairs_consumed_per_delivered: f64,
    pub reached_target: bool,
    /// First segment whose fidelity is at or below 1/2, if any.
    pub infeasible_segment: Option<usize>,
}

fn segment_trace(f: WernerFidelity, rounds: u32) -> (WernerFidelity, Vec<f64>) {
    let mut f = f;
    let mut ps = Vec::with_capacity(rounds as usize);
    for _ in 0..rounds {
        let (next, p) = purify_step(f);
        ps.push(p);
        f = next;
    }
    (f, ps)
}

/// Expected elementary pairs per purified pair: each round needs two inputs
/// and succeeds with probability `p_i`, so the cost multiplies by `2 / p_i`.
fn segment_cost(ps: &[f64]) -> f64 {
    ps.iter().map(|p| 2.0 / p).product()
}

fn evaluate(spec: &ChainSpec, rounds: Vec<u32>) -> ChainReport {
    let (purified, success): (Vec<_>, Vec<_>) = spec
        .segments
        .iter()
        .zip(&rounds)
        .map(|(&f, &r)| segment_trace(f, r))
        .unzip();
    let final_fidelity = purified
        .iter()
        .copied()
        .reduce(connect)
        .map_or(1.0, WernerFidelity::value);
    ChainReport {
        pairs_consumed_per_delivered: success.iter().map(|ps| segment_cost(ps)).sum(),
        purified: purified.iter().map(|f| f.value()).collect(),
        success_probabilities: success,
        reached_target: final_fidelity >= spec.target,
        final_fidelity,
        rounds,
        infeasible_segment: None,
    }
}

/// Purifies every segment per the schedule, then connects the segments left
/// to right.
pub fn simulate_chain(spec: &ChainSpec) -> Result<ChainReport> {
    if spec.segments.is_empty() {
        return Err(invalid("segments", "a chain needs at least one segment"));
    }
    if !(spec.target > 0.0 && spec.target <= 1.0) {
        return Err(invalid("target", "must lie in (0, 1]"));
    }
    let n = spec.segments.len();
    if let Some(bad) = spec.segments.iter().position(|f| !f.is_purifiable()) {
        let mut report = evaluate(spec, vec![0; n]);
        report.reached_target = false;
        report.infeasible_segment = Some(bad);
        return Ok(report);
    }
    Ok(match &spec.schedule {
        PurificationSchedule::Fixed(r) => {
            if r.len() != n {
                return Err(crate::Error::LengthMismatch {
                    expected: n,
                    actual: r.len(),
                });
            }
            evaluate(spec, r.clone())
        }
        PurificationSchedule::Uniform(r) => evaluate(spec, vec![*r; n]),
        PurificationSchedule::MinimalUniform { max_rounds } => {
            let mut report = evaluate(spec, vec![0; n]);
            for r in 1..=*max_rounds {
                if report.reached_target {
                    break;
                }
                report = evaluate(spec, vec![r; n]);
            }
            report
        }
    })
}

/// Samples the elementary pairs spent on one end-to-end delivery, replaying
/// each purification round until it succeeds.
pub fn sample_chain_cost<R: Rng + ?Sized>(report: &ChainReport, rng: &mut R) -> u64 {
    fn pairs_for<R: Rng + ?Sized>(ps: &[f64], rng: &mut R) -> u64 {
        let Some((&p, rest)) = ps.split_last() else {
            return 1;
        };
        let mut spent = 0;
        loop {
            spent += pairs_for(rest, rng) + pairs_for(rest, rng);
            if rng.random::<f64>() < p {
                return spent;
            }
        }
    }
    report.success_probabilities.iter().map(|ps| pairs_for(ps, rng)).sum()
}

/// Stations built from concatenated codes with `levels` levels of encoding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtqcParams {
    /// Physical error per gate.
    pub epsilon: f64,
    /// Threshold error rate.
    pub epsilon0: f64,
    pub levels: u32,
}

/// Logical error after `L` levels of concatenation, `ε0 (ε/ε0)^(2^L)`.
pub fn ftqc_error(params: &FtqcParams) -> Result<f64> {
    let FtqcParams {
        epsilon,
        epsilon0,
        levels,
    } = *params;
    if !(epsilon0 > 0.0 && epsilon0 <= 1.0) {
        return Err(invalid("epsilon0", "must lie in (0, 1]"));
    }
    check_probability("epsilon", epsilon)?;
    // iterating the one-level step keeps ε^(L+1) = (ε^(L))²/ε0 exact in floating point
    Ok((0..levels).fold(epsilon, |e, _| e * e / epsilon0))
}

/// Closed form `ε0 (ε/ε0)^(2^L)` of [`ftqc_error`].
pub fn ftqc_error_closed_form(params: &FtqcParams) -> f64 {
    params.epsilon0 * (params.epsilon / params.epsilon0).powf(2f64.powi(params.levels as i32))
}

/// Fewest levels whose logical error is at most `target`; `None` at or above
/// threshold.
pub fn ftqc_levels_for(epsilon: f64, epsilon0: f64, target: f64) -> Result<Option<u32>> {
    for levels in 0..=20 {
        let e = ftqc_error(&FtqcParams {
            epsilon,
            epsilon0,
            levels,
        })?;
        if e <= target {
            return Ok(Some(levels));
        }
        if epsilon >= epsilon0 {
            return Ok(None);
        }
    }
    Ok(None)
}
