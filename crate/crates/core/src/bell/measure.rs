use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::BellString;
use crate::error::{Error, Result};

/// Whether the two halves of a pair gave the same result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Coarse {
    Parallel,
    Antiparallel,
}

impl Coarse {
    /// Parity bit carried by the outcome: antiparallel is 1.
    pub fn parity(self) -> bool {
        self == Coarse::Antiparallel
    }

    pub fn from_parity(bit: bool) -> Self {
        if bit {
            Coarse::Antiparallel
        } else {
            Coarse::Parallel
        }
    }
}

/// Fine-grained z outcome of a pair, Alice's result first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Fine {
    UpUp,
    UpDown,
    DownUp,
    DownDown,
}

impl Fine {
    pub const ALL: [Fine; 4] = [Fine::UpUp, Fine::UpDown, Fine::DownUp, Fine::DownDown];

    /// Computational-basis index of the two qubits, Alice most significant,
    /// with up as 0.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_bits(alice_down: bool, bob_down: bool) -> Self {
        Self::ALL[(alice_down as usize) << 1 | bob_down as usize]
    }

    pub fn alice_down(self) -> bool {
        matches!(self, Fine::DownUp | Fine::DownDown)
    }

    pub fn bob_down(self) -> bool {
        matches!(self, Fine::UpDown | Fine::DownDown)
    }

    pub fn coarse(self) -> Coarse {
        Coarse::from_parity(self.alice_down() != self.bob_down())
    }

    pub fn code(self) -> &'static str {
        match self {
            Fine::UpUp => "uu",
            Fine::UpDown => "ud",
            Fine::DownUp => "du",
            Fine::DownDown => "dd",
        }
    }
}

impl fmt::Display for Fine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Fine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Fine::ALL
            .into_iter()
            .find(|f| f.code() == s)
            .ok_or_else(|| Error::Parse(format!("unknown fine outcome {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairMeasurement {
    pub coarse: Coarse,
    pub fine: Fine,
    pub residual: BellString,
}

/// Measures both halves of `pair` along z and drops the pair.
///
/// Ψ± contain only ↑↓ and ↓↑, Φ± only ↑↑ and ↓↓, each with weight 1/2, so
/// the coarse outcome is the amplitude bit and the fine outcome is a fair
/// coin within that class.
pub fn measure_pair<R: Rng + ?Sized>(state: &BellString, pair: usize, rng: &mut R) -> Result<PairMeasurement> {
    let label = state.label(pair)?;
    let alice_down = rng.random::<bool>();
    let fine = Fine::from_bits(alice_down, alice_down ^ label.amplitude);
    let mut residual = state.clone();
    residual.remove_pair(pair);
    Ok(PairMeasurement {
        coarse: fine.coarse(),
        fine,
        residual,
    })
}
