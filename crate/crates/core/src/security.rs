//! Bounds on Eve's information, and estimation of the singlet fraction by
//! random-axis sampling.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::bell::Coarse;
use crate::dense::Axis;
use crate::error::{invalid, Result};
use crate::verification::PairSource;

/// `log2(2^k − 1)` without overflow for large `k`.
fn log2_pow2_minus_one(k: u32) -> f64 {
    if k == 0 {
        f64::NEG_INFINITY
    } else if k < 53 {
        (((1u64 << k) - 1) as f64).log2()
    } else {
        k as f64 + (-(2f64).powi(-(k as i32))).ln_1p() / std::f64::consts::LN_2
    }
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    // starting from 0.0 avoids returning -0.0
    0.0 - xlog2x(p) - xlog2x(1.0 - p)
}

/// Largest von Neumann entropy of a `2R`-qubit state with singlet fidelity
/// `1 − δ`: `−(1−δ) log2(1−δ) − δ log2(δ / (2^{2R} − 1))`.
pub fn entropy_bound(delta: f64, key_bits: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(invalid("delta", format!("{delta} is outside [0, 1]")));
    }
    if key_bits == 0 {
        return Err(invalid("key_bits", "must be positive"));
    }
    let tail = if delta > 0.0 {
        delta * log2_pow2_minus_one(2 * key_bits)
    } else {
        0.0
    };
    Ok(-xlog2x(1.0 - delta) - xlog2x(delta) + tail)
}

/// Holevo bound on Eve's information about an `R`-bit key from survivors of
/// fidelity `fidelity`.
pub fn eve_info_bound(fidelity: f64, key_bits: u32) -> Result<f64> {
    entropy_bound(1.0 - fidelity, key_bits)
}

/// Typical-subspace bound on Eve's information: `log2 dim(typical) + ε(2N − log2 ε)`.
pub fn typical_subspace_bound(n_pairs: usize, atypical_mass: f64, typical_log_dim: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&atypical_mass) {
        return Err(invalid("atypical_mass", "must lie in [0, 1]"));
    }
    if !(typical_log_dim >= 0.0 && typical_log_dim <= 2.0 * n_pairs as f64) {
        return Err(invalid("typical_log_dim", "must lie in [0, 2N]"));
    }
    Ok(typical_log_dim + atypical_mass * 2.0 * n_pairs as f64 - xlog2x(atypical_mass))
}

/// Heuristic typical-subspace size for `N` pairs with independent bit and
/// phase error rates: `N (h(e_bit) + h(e_phase))` qubits' worth.
pub fn typical_log_dim_heuristic(n_pairs: usize, bit_error: f64, phase_error: f64) -> f64 {
    n_pairs as f64 * (binary_entropy(bit_error) + binary_entropy(phase_error))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalMethod {
    Normal,
    ClopperPearson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub population: usize,
    pub sampled: usize,
    /// Sampled pairs whose halves came out antiparallel.
    pub antiparallel: usize,
    pub axes: Vec<Axis>,
    /// `(3k − m) / 2m`; unbiased, may leave `[0, 1]`.
    pub f_hat_raw: f64,
    pub f_hat: f64,
    pub confidence: f64,
    pub interval: (f64, f64),
    pub method: IntervalMethod,
}

impl SampleReport {
    pub fn covers(&self, f: f64) -> bool {
        self.interval.0 <= f && f <= self.interval.1
    }
}

/// Measures `m` distinct pairs, each along an independent uniformly random
/// axis, and estimates the singlet fraction of the population.
///
/// A singlet is antiparallel on every axis; each other Bell state is
/// antiparallel on exactly one of the three, so `P(anti) = f + (1−f)/3`.
pub fn estimate_singlet_fraction<R: Rng + ?Sized>(
    pairs: &PairSource,
    m: usize,
    confidence: f64,
    method: IntervalMethod,
    rng: &mut R,
) -> Result<SampleReport> {
    let n = pairs.n_pairs();
    if m == 0 || m > n {
        return Err(invalid("sample_size", format!("need 1 <= m <= {n}, got {m}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid("confidence", "must lie in (0, 1)"));
    }
    let mut chosen = sample(rng, n, m).into_vec();
    chosen.sort_unstable_by(|a, b| b.cmp(a));
    let axes: Vec<Axis> = (0..m).map(|_| Axis::ALL[rng.random_range(0..3)]).collect();
    let antiparallel = match pairs {
        PairSource::Labels(s) => chosen
            .iter()
            .zip(&axes)
            .filter(|&(&k, &axis)| {
                let l = s.labels()[k];
                l.is_singlet() || axis.antiparallel_label() == l
            })
            .count(),
        PairSource::Dense(state) => {
            // highest index first, so earlier removals do not shift later ones
            let mut state = state.clone();
            let mut count = 0;
            for (&k, &axis) in chosen.iter().zip(&axes) {
                let (fine, rest) = state.sample_measure_pair_axis(k, axis, rng)?;
                count += (fine.coarse() == Coarse::Antiparallel) as usize;
                state = rest;
            }
            count
        }
    };
    Ok(build_report(n, m, antiparallel, axes, confidence, method))
}

fn build_report(
    n: usize,
    m: usize,
    k: usize,
    axes: Vec<Axis>,
    confidence: f64,
    method: IntervalMethod,
) -> SampleReport {
    let mf = m as f64;
    let raw = (3.0 * k as f64 - mf) / (2.0 * mf);
    let f = raw.clamp(0.0, 1.0);
    let alpha = 1.0 - confidence;
    let (lo, hi) = match method {
        IntervalMethod::Normal => {
            let fpc = if n > 1 { (n - m) as f64 / (n - 1) as f64 } else { 0.0 };
            let var = 9.0 / (4.0 * mf) * (4.0 / 9.0 * f * (1.0 - f) * fpc + 2.0 / 9.0 * (1.0 - f));
            let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
            let half = z * var.sqrt();
            (raw - half, raw + half)
        }
        IntervalMethod::ClopperPearson => {
            let q_lo = if k == 0 {
                0.0
            } else {
                Beta::new(k as f64, (m - k + 1) as f64)
                    .expect("positive shape")
                    .inverse_cdf(alpha / 2.0)
            };
            let q_hi = if k == m {
                1.0
            } else {
                Beta::new((k + 1) as f64, (m - k) as f64)
                    .expect("positive shape")
                    .inverse_cdf(1.0 - alpha / 2.0)
            };
            ((3.0 * q_lo - 1.0) / 2.0, (3.0 * q_hi - 1.0) / 2.0)
        }
    };
    SampleReport {
        population: n,
        sampled: m,
        antiparallel: k,
        axes,
        f_hat_raw: raw,
        f_hat: f,
        confidence,
        interval: (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0)),
        method,
    }
}
