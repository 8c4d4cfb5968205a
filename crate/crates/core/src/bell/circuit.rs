use serde::{Deserialize, Serialize};

use super::gates::Gate;
use crate::bits::Subset;
use crate::error::{Error, Result};

/// A hashing circuit that collects one subset parity into the amplitude bit
/// of `destination`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCircuit {
    pub gates: Vec<Gate>,
    pub destination: usize,
}

impl ParityCircuit {
    /// Gate sequence undoing this circuit.
    pub fn inverse_gates(&self) -> Vec<Gate> {
        self.gates.iter().rev().flat_map(Gate::inverse).collect()
    }
}

/// Builds the circuit computing `s · x` over `n_pairs` live pairs.
///
/// Each touched pair is first rotated so that its amplitude bit carries its
/// own share of the parity:
///
/// * amplitude bit only: nothing to do;
/// * phase bit only: `By` swaps Ψ+ and Φ−, i.e. exchanges the two bits;
/// * both bits: `SigmaX` then `Bx` sends `(p, a)` to `(p, p ⊕ a)`.
///
/// Every other touched pair is then XORed into the destination, the lowest
/// touched pair, with a bilateral CNOT.
pub fn build_parity_circuit(s: &Subset, n_pairs: usize) -> Result<ParityCircuit> {
    if s.len() != 2 * n_pairs {
        return Err(Error::LengthMismatch {
            expected: 2 * n_pairs,
            actual: s.len(),
        });
    }
    let touched: Vec<usize> = (0..n_pairs)
        .filter(|&k| {
            let (p, a) = s.pair_selection(k);
            p || a
        })
        .collect();
    let (&destination, sources) = touched.split_first().ok_or(Error::EmptySubset)?;

    let mut gates = Vec::new();
    for &k in &touched {
        match s.pair_selection(k) {
            (false, true) => {}
            (true, false) => gates.push(Gate::By(k)),
            (true, true) => gates.extend([Gate::SigmaX(k), Gate::Bx(k)]),
            (false, false) => unreachable!(),
        }
    }
    gates.extend(sources.iter().map(|&source| Gate::Bxor {
        source,
        target: destination,
    }));
    Ok(ParityCircuit { gates, destination })
}
