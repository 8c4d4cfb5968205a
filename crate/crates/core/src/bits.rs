//! Fixed-length bit strings and parity subsets.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered string of bits, most significant (leftmost) first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![true; len])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse_binary(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// The low `len` bits of `value`, written most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        Self((0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect())
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.random::<bool>()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_zero(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }

    /// Lowercase hex of the big-endian integer value, `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len().div_ceil(4);
        let pad = digits * 4 - self.len();
        let padded: Vec<bool> = std::iter::repeat_n(false, pad).chain(self.0.iter().copied()).collect();
        padded
            .chunks(4)
            .map(|nib| {
                let v = nib.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
                char::from_digit(v, 16).unwrap()
            })
            .collect()
    }

    /// Inverse of [`BitString::to_hex`]; `len` fixes the number of bits.
    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if hex.len() != len.div_ceil(4) {
            return Err(Error::Parse(format!("{hex:?} does not hold exactly {len} bits")));
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("bad hex digit {c:?}")))?;
            bits.extend((0..4).rev().map(|k| (v >> k) & 1 == 1));
        }
        let pad = bits.len() - len;
        if bits[..pad].iter().any(|&b| b) {
            return Err(Error::Parse(format!("{hex:?} overflows {len} bits")));
        }
        Ok(Self(bits.split_off(pad)))
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_binary(s)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}

/// `⊕_i (x_i AND s_i)`.
pub fn subset_parity(x: &BitString, s: &BitString) -> Result<bool> {
    check_len(x.len(), s.len())?;
    Ok(x.0.iter().zip(&s.0).fold(false, |acc, (&a, &b)| acc ^ (a & b)))
}

/// A verification question: the set of label bits whose parity is asked for.
///
/// Over `n` pairs a subset has `2n` bits; bit `2k` selects the phase bit of
/// pair `k` and bit `2k + 1` its amplitude bit.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subset(BitString);

impl Subset {
    /// Rejects the all-zero string, which asks nothing.
    pub fn new(bits: BitString) -> Result<Self> {
        if bits.is_zero() {
            return Err(Error::EmptySubset);
        }
        Ok(Self(bits))
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::new(BitString::parse_binary(s)?)
    }

    /// Uniform over the `2^len - 1` nonzero strings of length `len`.
    pub fn random_nonzero<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        assert!(len > 0, "a subset needs at least one bit");
        loop {
            let bits = BitString::random(len, rng);
            if !bits.is_zero() {
                return Self(bits);
            }
        }
    }

    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of pairs this subset spans.
    pub fn n_pairs(&self) -> usize {
        self.0.len() / 2
    }

    /// `(phase selected, amplitude selected)` for pair `k`.
    pub fn pair_selection(&self, k: usize) -> (bool, bool) {
        (self.0.get(2 * k), self.0.get(2 * k + 1))
    }

    pub fn parity(&self, x: &BitString) -> Result<bool> {
        subset_parity(x, &self.0)
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subset({})", self.0)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
