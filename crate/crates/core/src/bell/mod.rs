//! Exact algebra of products of Bell pairs.
//!
//! A pair is described by two bits, `(phase, amplitude)`:
//!
//! | state | bits |
//! |-------|------|
//! | Φ+    | 00   |
//! | Ψ+    | 01   |
//! | Φ−    | 10   |
//! | Ψ−    | 11   |
//!
//! The amplitude bit is 1 exactly for the Ψ states, whose two halves are
//! antiparallel along z. The phase bit is 1 for the minus combinations.
//! `N` pairs form a `2N`-bit string with pair `k` at bits `2k, 2k + 1`.
//!
//! The local gate set maps products of Bell states onto products of Bell
//! states, so a string plus a global phase in `{±1, ±i}` describes the state
//! exactly. The phase is unobservable; it is carried so that results can be
//! compared amplitude-for-amplitude with the dense simulator.

mod circuit;
mod gates;
mod measure;

use std::fmt;
use std::ops::{Mul, MulAssign};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

pub use circuit::{build_parity_circuit, ParityCircuit};
pub use gates::{apply_gate, apply_gates, gate_action_table, Gate, GateAction, GateKind};
pub use measure::{measure_pair, Coarse, Fine, PairMeasurement};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BellLabel {
    pub phase: bool,
    pub amplitude: bool,
}

impl BellLabel {
    pub const PHI_PLUS: Self = Self::new(false, false);
    pub const PSI_PLUS: Self = Self::new(false, true);
    pub const PHI_MINUS: Self = Self::new(true, false);
    pub const PSI_MINUS: Self = Self::new(true, true);
    /// The singlet.
    pub const SINGLET: Self = Self::PSI_MINUS;

    pub const ALL: [Self; 4] = [Self::PHI_PLUS, Self::PSI_PLUS, Self::PHI_MINUS, Self::PSI_MINUS];

    pub const fn new(phase: bool, amplitude: bool) -> Self {
        Self { phase, amplitude }
    }

    /// `2 * phase + amplitude`, i.e. the label read as a 2-bit number.
    pub const fn index(self) -> usize {
        (self.phase as usize) << 1 | self.amplitude as usize
    }

    pub const fn from_index(i: usize) -> Self {
        Self::new(i & 2 != 0, i & 1 != 0)
    }

    pub fn is_singlet(self) -> bool {
        self == Self::SINGLET
    }

    pub fn name(self) -> &'static str {
        match self.index() {
            0 => "phi+",
            1 => "psi+",
            2 => "phi-",
            _ => "psi-",
        }
    }
}

impl fmt::Debug for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi+" | "00" => Ok(Self::PHI_PLUS),
            "psi+" | "01" => Ok(Self::PSI_PLUS),
            "phi-" | "10" => Ok(Self::PHI_MINUS),
            "psi-" | "11" | "singlet" => Ok(Self::PSI_MINUS),
            _ => Err(Error::Parse(format!("unknown Bell label {s:?}"))),
        }
    }
}

/// A global phase `i^k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Self = Self(0);
    pub const I: Self = Self(1);
    pub const MINUS_ONE: Self = Self(2);
    pub const MINUS_I: Self = Self(3);

    pub const fn power_of_i(k: u8) -> Self {
        Self(k % 4)
    }

    pub const fn exponent(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Self {
        Self((4 - self.0) % 4)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Recovers a phase from a complex number within `tol` of one of `±1, ±i`.
    pub fn from_complex(z: Complex64, tol: f64) -> Option<Self> {
        (0..4).map(Self).find(|p| (p.to_complex() - z).norm() < tol)
    }
}

impl Mul for Phase {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self((self.0 + rhs.0) % 4)
    }
}

impl MulAssign for Phase {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+1", "+i", "-1", "-i"][self.0 as usize])
    }
}

/// A product of `N` Bell pairs with a tracked global phase.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellString {
    labels: Vec<BellLabel>,
    phase: Phase,
}

impl BellString {
    pub fn new(labels: Vec<BellLabel>) -> Self {
        Self {
            labels,
            phase: Phase::ONE,
        }
    }

    pub fn with_phase(labels: Vec<BellLabel>, phase: Phase) -> Self {
        Self { labels, phase }
    }

    /// `N` singlets: the all-ones string.
    pub fn singlets(n: usize) -> Self {
        Self::new(vec![BellLabel::SINGLET; n])
    }

    /// Reads a `2N`-bit string, pair `k` at bits `2k, 2k + 1`.
    pub fn from_bits(bits: &BitString) -> Result<Self> {
        if !bits.len().is_multiple_of(2) {
            return Err(Error::Parse(format!("odd bit-string length {}", bits.len())));
        }
        Ok(Self::new(
            (0..bits.len() / 2)
                .map(|k| BellLabel::new(bits.get(2 * k), bits.get(2 * k + 1)))
                .collect(),
        ))
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::from_bits(&BitString::parse_binary(s)?)
    }

    /// Label string `index` of `n` pairs, pair 0 in the most significant position.
    pub fn from_index(index: usize, n: usize) -> Self {
        Self::new(
            (0..n)
                .map(|k| BellLabel::from_index((index >> (2 * (n - 1 - k))) & 3))
                .collect(),
        )
    }

    pub fn index(&self) -> usize {
        self.labels.iter().fold(0, |acc, l| acc << 2 | l.index())
    }

    pub fn to_bits(&self) -> BitString {
        BitString::from_bits(self.labels.iter().flat_map(|l| [l.phase, l.amplitude]).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[BellLabel] {
        &self.labels
    }

    pub fn label(&self, pair: usize) -> Result<BellLabel> {
        self.labels.get(pair).copied().ok_or(Error::PairOutOfRange {
            index: pair,
            len: self.labels.len(),
        })
    }

    pub fn set_label(&mut self, pair: usize, label: BellLabel) -> Result<()> {
        let len = self.labels.len();
        let slot = self
            .labels
            .get_mut(pair)
            .ok_or(Error::PairOutOfRange { index: pair, len })?;
        *slot = label;
        Ok(())
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn is_all_singlets(&self) -> bool {
        self.labels.iter().all(|l| l.is_singlet())
    }

    /// Label equality, ignoring the global phase.
    pub fn same_labels(&self, other: &Self) -> bool {
        self.labels == other.labels
    }

    pub(crate) fn remove_pair(&mut self, pair: usize) -> BellLabel {
        self.labels.remove(pair)
    }

    /// Enumerates all `4^n` label strings of `n` pairs.
    pub fn all(n: usize) -> impl Iterator<Item = Self> {
        (0..1usize << (2 * n)).map(move |i| Self::from_index(i, n))
    }
}

impl fmt::Debug for BellString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}|{}>", self.phase, self.to_bits())
    }
}

impl fmt::Display for BellString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bits())
    }
}
