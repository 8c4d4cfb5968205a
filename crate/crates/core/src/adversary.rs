//! Eavesdropping strategies.
//!
//! Eve prepares the pairs. At the label level she can hand over a product of
//! Bell states or sample one from a classical mixture; at the amplitude level
//! she can prepare any pure state of the pairs entangled with an ancilla.
//! A foreknowledge cheat is built for a schedule she was told in advance.
//!
//! The module also models the beamsplitter attack on weak coherent pulses,
//! which needs no pairs at all.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{apply_gates, BellLabel, BellString, Gate};
use crate::bits::BitString;
use crate::bits::Subset;
use crate::dense::{bell_vector, DenseState, C};
use crate::error::{invalid, Error, Result};
use crate::verification::{schedule_unitary, PairSource};

/// `N` singlets with `flaw` at `position`.
pub fn single_flaw(n_pairs: usize, position: usize, flaw: BellLabel) -> Result<BellString> {
    if flaw.is_singlet() {
        return Err(invalid("flaw_label", "a singlet is not a flaw"));
    }
    let mut s = BellString::singlets(n_pairs);
    s.set_label(position, flaw)?;
    Ok(s)
}

/// A probability distribution over Bell strings of a fixed length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellMixture {
    entries: Vec<(BellString, f64)>,
    cumulative: Vec<f64>,
}

impl BellMixture {
    pub fn new(entries: Vec<(BellString, f64)>) -> Result<Self> {
        let n = entries
            .first()
            .map(|e| e.0.len())
            .ok_or_else(|| invalid("mixture", "no entries"))?;
        if let Some((w, _)) = entries.iter().find(|(w, _)| w.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: w.len(),
            });
        }
        if entries.iter().any(|(_, p)| p.is_nan() || *p < 0.0) {
            return Err(invalid("mixture", "negative weight"));
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Unnormalized(total));
        }
        let cumulative = entries
            .iter()
            .scan(0.0, |acc, e| {
                *acc += e.1;
                Some(*acc)
            })
            .collect();
        Ok(Self { entries, cumulative })
    }

    /// Uniform over all `4^n` strings.
    pub fn uniform(n_pairs: usize) -> Self {
        let p = 1.0 / (1u64 << (2 * n_pairs)) as f64;
        Self::new(BellString::all(n_pairs).map(|w| (w, p)).collect()).expect("normalized")
    }

    pub fn entries(&self) -> &[(BellString, f64)] {
        &self.entries
    }

    pub fn n_pairs(&self) -> usize {
        self.entries[0].0.len()
    }

    /// Weight on the all-singlet string.
    pub fn singlet_weight(&self) -> f64 {
        self.entries.iter().filter(|e| e.0.is_all_singlets()).map(|e| e.1).sum()
    }

    /// Draws one string for one protocol run.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BellString {
        let u = rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.entries.len() - 1);
        self.entries[i].0.clone()
    }
}

/// Normalizes explicit amplitudes over pairs and ancilla.
pub fn general_pure(n_pairs: usize, n_ancilla: usize, amplitudes: Vec<C>) -> Result<DenseState> {
    DenseState::normalized(amplitudes, n_pairs, n_ancilla)
}

/// Random pure state with spherically distributed amplitudes.
pub fn general_pure_random<R: Rng + ?Sized>(n_pairs: usize, n_ancilla: usize, rng: &mut R) -> Result<DenseState> {
    DenseState::random(n_pairs, n_ancilla, rng)
}

fn foreknown_pairs(subsets: &[Subset]) -> Result<usize> {
    let n = subsets
        .first()
        .map(Subset::n_pairs)
        .ok_or_else(|| invalid("subsets", "no rounds to cheat against"))?;
    if subsets.len() >= n {
        return Err(invalid("subsets", "schedule consumes every pair, leaving no key pair"));
    }
    Ok(n)
}

/// The state that passes the known schedule with certainty and makes every
/// surviving pair yield `key_bit` for Alice.
///
/// The desired end state puts each measured pair in the Bell state honest
/// singlets would reach, and each key pair in `|↑↓>` (bit 0) or `|↓↑>`
/// (bit 1). Running the schedule's gates backwards gives the state to hand
/// over.
pub fn foreknowledge_cheat(subsets: &[Subset], key_bit: bool) -> Result<DenseState> {
    let n = foreknown_pairs(subsets)?;
    let (gates, measured) = schedule_unitary(n, subsets)?;
    let honest_final = apply_gates(&BellString::singlets(n), &gates)?;

    let zero = C::new(0.0, 0.0);
    let mut amps = vec![C::new(1.0, 0.0)];
    for (k, &label) in honest_final.labels().iter().enumerate() {
        let pair: [C; 4] = if measured.contains(&k) {
            bell_vector(label)
        } else if key_bit {
            [zero, zero, C::new(1.0, 0.0), zero]
        } else {
            [zero, C::new(1.0, 0.0), zero, zero]
        };
        amps = amps.iter().flat_map(|&a| pair.iter().map(move |&b| a * b)).collect();
    }
    let mut state = DenseState::from_amplitudes(amps, n, 0)?;
    for &g in gates.iter().rev() {
        state.apply_gate_inverse_mut(g)?;
    }
    Ok(state)
}

/// Bell-basis premeasurement of [`foreknowledge_cheat`], computed on labels.
///
/// Each key pair `|↑↓>` or `|↓↑>` is an equal superposition of Ψ+ and Ψ−, so
/// the end-state labels are uniform over those choices; running the label
/// permutation backwards gives the initial strings. The distribution does
/// not depend on the key bit and works for any number of pairs.
pub fn foreknowledge_mixture(subsets: &[Subset]) -> Result<BellMixture> {
    let n = foreknown_pairs(subsets)?;
    let (gates, measured) = schedule_unitary(n, subsets)?;
    let honest_final = apply_gates(&BellString::singlets(n), &gates)?;
    let keys: Vec<usize> = (0..n).filter(|k| !measured.contains(k)).collect();
    if keys.len() > 20 {
        return Err(invalid("subsets", "too many key pairs to enumerate"));
    }
    let inverse: Vec<Gate> = gates.iter().rev().flat_map(Gate::inverse).collect();
    let p = 0.5f64.powi(keys.len() as i32);
    let mut entries = Vec::with_capacity(1 << keys.len());
    for choice in 0..1usize << keys.len() {
        let mut end = honest_final.clone();
        for (j, &k) in keys.iter().enumerate() {
            end.set_label(k, BellLabel::new(choice >> j & 1 == 1, true))?;
        }
        let start = apply_gates(&end, &inverse)?;
        entries.push((BellString::new(start.labels().to_vec()), p));
    }
    BellMixture::new(entries)
}

/// A cheating strategy, turned into a source once per protocol run.
#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    Honest,
    SingleFlaw {
        position: usize,
        label: BellLabel,
    },
    BellMixture(BellMixture),
    /// A uniformly random label string per run.
    Uniform,
    /// Fresh random pure state per run, entangled with `n_ancilla` qubits.
    GeneralPure {
        n_ancilla: usize,
    },
    /// Premeasured foreknowledge cheat against a schedule Eve believes in.
    Foreknowledge {
        believed: Vec<Subset>,
        mixture: BellMixture,
    },
}

impl Strategy {
    pub fn foreknowledge(believed: Vec<Subset>) -> Result<Self> {
        let mixture = foreknowledge_mixture(&believed)?;
        Ok(Strategy::Foreknowledge { believed, mixture })
    }

    pub fn source<R: Rng + ?Sized>(&self, n_pairs: usize, rng: &mut R) -> Result<PairSource> {
        Ok(match self {
            Strategy::Honest => PairSource::Labels(BellString::singlets(n_pairs)),
            Strategy::SingleFlaw { position, label } => PairSource::Labels(single_flaw(n_pairs, *position, *label)?),
            Strategy::BellMixture(m) | Strategy::Foreknowledge { mixture: m, .. } => {
                if m.n_pairs() != n_pairs {
                    return Err(Error::LengthMismatch {
                        expected: n_pairs,
                        actual: m.n_pairs(),
                    });
                }
                PairSource::Labels(m.sample(rng))
            }
            Strategy::Uniform => PairSource::Labels(BellString::from_bits(&BitString::random(2 * n_pairs, rng))?),
            Strategy::GeneralPure { n_ancilla } => PairSource::Dense(general_pure_random(n_pairs, *n_ancilla, rng)?),
        })
    }
}

/// Weak coherent source, lossy channel and threshold detector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonSourceModel {
    /// Poisson mean photon number per pulse.
    pub mean_photon_number: f64,
    /// Channel transmittance in `(0, 1]`.
    pub transmittance: f64,
    pub detector_efficiency: f64,
}

impl PhotonSourceModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_photon_number > 0.0 && self.mean_photon_number.is_finite()) {
            return Err(invalid("mean_photon_number", "must be positive"));
        }
        if !(self.transmittance > 0.0 && self.transmittance <= 1.0) {
            return Err(invalid("transmittance", "must lie in (0, 1]"));
        }
        if !(self.detector_efficiency > 0.0 && self.detector_efficiency <= 1.0) {
            return Err(invalid("detector_efficiency", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// `P(n = k)` under the Poisson law.
    pub fn photon_number_probability(&self, k: u32) -> f64 {
        let mu = self.mean_photon_number;
        (k as f64 * mu.ln() - mu - ln_factorial(k)).exp()
    }

    /// `P(n >= 2) = 1 - e^-μ - μ e^-μ`.
    pub fn multiphoton_probability(&self) -> f64 {
        let mu = self.mean_photon_number;
        -(-mu).exp_m1() - mu * (-mu).exp()
    }

    /// Honest click rate at Bob, `1 - exp(-μ η d)`.
    pub fn detection_rate(&self) -> f64 {
        -(-self.mean_photon_number * self.transmittance * self.detector_efficiency).exp_m1()
    }
}

fn ln_factorial(k: u32) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub multiphoton_probability: f64,
    pub detection_rate: f64,
    /// Fraction of Bob's clicks Eve can hold a copy of.
    pub fraction_tapped: f64,
    pub eve_key_information_fraction: f64,
    pub feasible: bool,
    pub detection_model: String,
}

/// Generalized beamsplitter attack over a lossless channel: Eve blocks
/// single-photon pulses, keeps one photon of each multiphoton pulse and
/// forwards the rest. She reproduces Bob's click rate, and so learns the
/// whole key, when multiphoton pulses are at least as frequent as Bob's
/// honest clicks.
pub fn beamsplitter_attack(model: &PhotonSourceModel) -> Result<AttackReport> {
    model.validate()?;
    let multi = model.multiphoton_probability();
    let detect = model.detection_rate();
    let feasible = multi >= detect;
    let fraction = if feasible { 1.0 } else { multi / detect };
    Ok(AttackReport {
        multiphoton_probability: multi,
        detection_rate: detect,
        fraction_tapped: fraction,
        eve_key_information_fraction: fraction,
        feasible,
        detection_model: "threshold detector, Bob click rate 1 - exp(-mu*eta*d)".into(),
    })
}

/// Transmittance at which Bob's click rate equals the multiphoton rate;
/// the attack is feasible at or below it. `None` if it would exceed 1.
pub fn crossover_transmittance(mean_photon_number: f64, detector_efficiency: f64) -> Option<f64> {
    let m = PhotonSourceModel {
        mean_photon_number,
        transmittance: 1.0,
        detector_efficiency,
    };
    let eta = -(-m.multiphoton_probability()).ln_1p() / (mean_photon_number * detector_efficiency);
    (eta <= 1.0).then_some(eta)
}
