//! Brute-force state-vector simulator for a handful of Bell pairs plus an
//! eavesdropper's ancilla.
//!
//! Qubit layout: pair `k` holds Alice's half at qubit `2k` and Bob's at
//! `2k + 1`; ancilla qubits follow all pairs. Qubit 0 is the most significant
//! bit of the basis index, and `|0>` is spin up, so `|↑↓>` of a single pair
//! is index 1.
//!
//! This is the ground truth the label algebra in [`crate::bell`] is checked
//! against. Mixtures are handled by enumerating pure branches.

mod measure;
mod protocol;
mod reduction;
pub mod werner;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bell::{BellLabel, BellString, Gate};
use crate::error::{Error, Result};

pub use measure::{Axis, PremeasureBranch, ZBranch};
pub use protocol::{exact_protocol_branches, run_protocol_dense, ProtocolBranch};
pub use reduction::{
    dense_joint_distribution, label_joint_distribution, premeasured_joint_distribution, total_variation,
    JointDistribution, JointOutcome,
};

/// Default limit on the number of simulated qubits.
pub const DEFAULT_QUBIT_CAP: usize = 12;

/// Tolerance on the norm of a valid state.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Branches lighter than this are dropped during exact enumeration.
pub(crate) const BRANCH_EPS: f64 = 1e-15;

pub(crate) type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

pub(crate) type Matrix2 = [[C; 2]; 2];

pub(crate) const PAULI_X: Matrix2 = [[ZERO, ONE], [ONE, ZERO]];
pub(crate) const PAULI_Y: Matrix2 = [[ZERO, C::new(0.0, -1.0)], [C::new(0.0, 1.0), ZERO]];
pub(crate) const PAULI_Z: Matrix2 = [[ONE, ZERO], [ZERO, C::new(-1.0, 0.0)]];

/// `exp(-iπσ/4) = (1 - iσ)/√2` for a Pauli `σ`.
fn quarter_turn(pauli: &Matrix2, sign: f64) -> Matrix2 {
    let s = FRAC_1_SQRT_2;
    let mut m = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let id = if r == c { ONE } else { ZERO };
            m[r][c] = (id - C::new(0.0, sign) * pauli[r][c]) * s;
        }
    }
    m
}

/// Who holds a qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitRole {
    Alice(usize),
    Bob(usize),
    Ancilla(usize),
}

/// A pure state of `n_pairs` shared pairs and `n_ancilla` ancilla qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    amplitudes: Vec<C>,
    n_pairs: usize,
    n_ancilla: usize,
}

fn check_cap(qubits: usize, cap: usize) -> Result<()> {
    if qubits > cap {
        Err(Error::TooManyQubits { qubits, cap })
    } else {
        Ok(())
    }
}

pub(crate) fn bell_vector(label: BellLabel) -> [C; 4] {
    let h = C::new(FRAC_1_SQRT_2, 0.0);
    let sign = if label.phase { -h } else { h };
    // indices: ↑↑ = 0, ↑↓ = 1, ↓↑ = 2, ↓↓ = 3
    if label.amplitude {
        [ZERO, h, sign, ZERO]
    } else {
        [h, ZERO, ZERO, sign]
    }
}

fn kron(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Amplitudes of a Bell product over `2N` qubits, global phase included.
pub(crate) fn bell_product_vector(labels: &BellString) -> Vec<C> {
    let mut v = vec![labels.phase().to_complex()];
    for &l in labels.labels() {
        v = kron(&v, &bell_vector(l));
    }
    v
}

impl DenseState {
    /// Wraps an already normalized amplitude vector.
    pub fn from_amplitudes(amplitudes: Vec<C>, n_pairs: usize, n_ancilla: usize) -> Result<Self> {
        Self::from_amplitudes_with_cap(amplitudes, n_pairs, n_ancilla, DEFAULT_QUBIT_CAP)
    }

    pub fn from_amplitudes_with_cap(amplitudes: Vec<C>, n_pairs: usize, n_ancilla: usize, cap: usize) -> Result<Self> {
        let qubits = 2 * n_pairs + n_ancilla;
        check_cap(qubits, cap)?;
        if amplitudes.len() != 1 << qubits {
            return Err(Error::LengthMismatch {
                expected: 1 << qubits,
                actual: amplitudes.len(),
            });
        }
        let state = Self {
            amplitudes,
            n_pairs,
            n_ancilla,
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalizable(norm));
        }
        Ok(state)
    }

    /// Normalizes `amplitudes` first; fails on a (numerically) zero vector.
    pub fn normalized(mut amplitudes: Vec<C>, n_pairs: usize, n_ancilla: usize) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::Unnormalizable(norm));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amplitudes, n_pairs, n_ancilla)
    }

    /// Product of the given Bell states (with the string's global phase).
    pub fn prepare_bell_product(labels: &BellString) -> Result<Self> {
        check_cap(2 * labels.len(), DEFAULT_QUBIT_CAP)?;
        Ok(Self {
            amplitudes: bell_product_vector(labels),
            n_pairs: labels.len(),
            n_ancilla: 0,
        })
    }

    /// `Σ_w c_w |w> ⊗ |e_w>`; each term is a Bell string with an ancilla
    /// vector of `2^n_ancilla` amplitudes. The result is normalized.
    pub fn from_bell_terms(terms: &[(BellString, Vec<C>)], n_pairs: usize, n_ancilla: usize) -> Result<Self> {
        check_cap(2 * n_pairs + n_ancilla, DEFAULT_QUBIT_CAP)?;
        let mut amps = vec![ZERO; 1 << (2 * n_pairs + n_ancilla)];
        for (w, anc) in terms {
            if w.len() != n_pairs {
                return Err(Error::LengthMismatch {
                    expected: n_pairs,
                    actual: w.len(),
                });
            }
            if anc.len() != 1 << n_ancilla {
                return Err(Error::LengthMismatch {
                    expected: 1 << n_ancilla,
                    actual: anc.len(),
                });
            }
            for (a, t) in amps.iter_mut().zip(kron(&bell_product_vector(w), anc)) {
                *a += t;
            }
        }
        Self::normalized(amps, n_pairs, n_ancilla)
    }

    /// Haar-random pure state: Gaussian real and imaginary parts, normalized.
    pub fn random<R: Rng + ?Sized>(n_pairs: usize, n_ancilla: usize, rng: &mut R) -> Result<Self> {
        let qubits = 2 * n_pairs + n_ancilla;
        check_cap(qubits, DEFAULT_QUBIT_CAP)?;
        let amps = (0..1usize << qubits)
            .map(|_| C::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps, n_pairs, n_ancilla)
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amplitudes
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_ancilla
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_pairs + self.n_ancilla
    }

    pub fn role(&self, qubit: usize) -> QubitRole {
        if qubit < 2 * self.n_pairs {
            if qubit.is_multiple_of(2) {
                QubitRole::Alice(qubit / 2)
            } else {
                QubitRole::Bob(qubit / 2)
            }
        } else {
            QubitRole::Ancilla(qubit - 2 * self.n_pairs)
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest amplitude difference after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        let ov = self.inner(other);
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest amplitude difference, phase included.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n_qubits() - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits() {
            Err(Error::PairOutOfRange {
                index: qubit,
                len: self.n_qubits(),
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_pair(&self, pair: usize) -> Result<()> {
        if pair >= self.n_pairs {
            Err(Error::PairOutOfRange {
                index: pair,
                len: self.n_pairs,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn apply_single(&mut self, qubit: usize, m: &Matrix2) -> Result<()> {
        self.check_qubit(qubit)?;
        let bit = self.bit(qubit);
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    pub(crate) fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        let (cb, tb) = (self.bit(control), self.bit(target));
        for i in 0..self.amplitudes.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amplitudes.swap(i, i | tb);
            }
        }
        Ok(())
    }

    /// Applies a gate of the Bell-pair gate set as an explicit unitary.
    pub fn apply_gate_mut(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_pairs)?;
        match gate {
            Gate::Bx(p) => {
                let r = quarter_turn(&PAULI_X, 1.0);
                self.apply_single(2 * p, &r)?;
                self.apply_single(2 * p + 1, &r)
            }
            Gate::By(p) => {
                let r = quarter_turn(&PAULI_Y, 1.0);
                self.apply_single(2 * p, &r)?;
                self.apply_single(2 * p + 1, &r)
            }
            Gate::SigmaX(p) => self.apply_single(2 * p, &PAULI_X),
            Gate::Bxor { source, target } => {
                self.apply_cnot(2 * source, 2 * target)?;
                self.apply_cnot(2 * source + 1, 2 * target + 1)
            }
        }
    }

    pub fn apply_gate(&self, gate: Gate) -> Result<Self> {
        let mut out = self.clone();
        out.apply_gate_mut(gate)?;
        Ok(out)
    }

    pub fn apply_gates(&self, gates: &[Gate]) -> Result<Self> {
        let mut out = self.clone();
        for &g in gates {
            out.apply_gate_mut(g)?;
        }
        Ok(out)
    }

    /// Applies the exact inverse of `gate`: `exp(+iπσ/4)` on both halves for
    /// the rotations, the gate itself otherwise.
    pub fn apply_gate_inverse_mut(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_pairs)?;
        match gate {
            Gate::Bx(p) | Gate::By(p) => {
                let pauli = if matches!(gate, Gate::Bx(_)) {
                    &PAULI_X
                } else {
                    &PAULI_Y
                };
                let r = quarter_turn(pauli, -1.0);
                self.apply_single(2 * p, &r)?;
                self.apply_single(2 * p + 1, &r)
            }
            _ => self.apply_gate_mut(gate),
        }
    }

    /// Drops the qubits of `pair`, keeping the slice where they equal `fine`.
    /// The result is unnormalized.
    pub(crate) fn project_out_pair(&self, pair: usize, fine_index: usize) -> Vec<C> {
        let n = self.n_qubits();
        let hi = 2 * pair; // qubits before the pair
        let lo = n - hi - 2; // qubits after the pair
        let mut out = Vec::with_capacity(1 << (n - 2));
        for h in 0..1usize << hi {
            for l in 0..1usize << lo {
                out.push(self.amplitudes[(h << (lo + 2)) | (fine_index << lo) | l]);
            }
        }
        out
    }
}
