use rand::Rng;

use super::DenseState;
use crate::bell::{build_parity_circuit, Fine};
use crate::bits::Subset;
use crate::error::{Error, Result};
use crate::verification::{honest_reference, Round, Transcript};

/// Runs the hashing rounds on amplitudes with Born-rule measurements of the
/// destination pairs. Stops at the first round whose parity differs from
/// the honest prediction.
pub fn run_protocol_dense<R: Rng + ?Sized>(
    state: &DenseState,
    subsets: &[Subset],
    rng: &mut R,
) -> Result<(Transcript, DenseState)> {
    let n = state.n_pairs();
    let honest = honest_reference(n, subsets)?;
    let mut cur = state.clone();
    let mut ids: Vec<usize> = (0..n).collect();
    let mut rounds = Vec::with_capacity(subsets.len());
    for (s, &expected) in subsets.iter().zip(&honest.parities) {
        let circuit = build_parity_circuit(s, cur.n_pairs())?;
        let evolved = cur.apply_gates(&circuit.gates)?;
        let (fine, rest) = evolved.sample_measure_pair_z(circuit.destination, rng)?;
        cur = rest;
        let round = Round {
            subset: s.clone(),
            destination: ids.remove(circuit.destination),
            fine,
            parity: fine.coarse().parity(),
            expected,
        };
        let passed = round.passed();
        rounds.push(round);
        if !passed {
            break;
        }
    }
    Ok((Transcript::from_rounds(n, rounds, ids), cur))
}

/// One fully resolved measurement history.
#[derive(Clone, Debug)]
pub struct ProtocolBranch {
    pub fines: Vec<Fine>,
    pub probability: f64,
    /// Normalized state of the survivors and ancilla.
    pub state: DenseState,
}

impl ProtocolBranch {
    pub fn parities(&self) -> Vec<bool> {
        self.fines.iter().map(|f| f.coarse().parity()).collect()
    }
}

/// Enumerates every fine-outcome history of the full schedule (no early
/// exit) with its exact probability.
pub fn exact_protocol_branches(state: &DenseState, subsets: &[Subset]) -> Result<Vec<ProtocolBranch>> {
    if subsets.len() > state.n_pairs() {
        return Err(Error::InvalidParameter {
            name: "subsets",
            reason: "more rounds than pairs".into(),
        });
    }
    let mut frontier = vec![ProtocolBranch {
        fines: Vec::new(),
        probability: 1.0,
        state: state.clone(),
    }];
    for s in subsets {
        let mut next = Vec::with_capacity(frontier.len() * 4);
        for b in frontier {
            let circuit = build_parity_circuit(s, b.state.n_pairs())?;
            let evolved = b.state.apply_gates(&circuit.gates)?;
            for z in evolved.measure_pair_z_branches(circuit.destination)? {
                let mut fines = b.fines.clone();
                fines.push(z.fine);
                next.push(ProtocolBranch {
                    fines,
                    probability: b.probability * z.probability,
                    state: z.state,
                });
            }
        }
        frontier = next;
    }
    Ok(frontier)
}
