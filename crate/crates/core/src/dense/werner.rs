//! Amplitude-level reference simulations of two-pair operations on Werner
//! pairs: one recurrence purification round and one entanglement swap.
//!
//! A Werner pair of fidelity `f` is the mixture `f Ψ− + (1−f)/3 (Φ+ + Ψ+ +
//! Φ−)`; both routines enumerate the 16 label combinations of the two input
//! pairs as pure branches.

use super::{bell_vector, DenseState, Matrix2, C, PAULI_X, PAULI_Y, PAULI_Z};
use crate::bell::{BellLabel, BellString, Gate};

fn werner_weight(f: f64, label: BellLabel) -> f64 {
    if label.is_singlet() {
        f
    } else {
        (1.0 - f) / 3.0
    }
}

fn singlet_fidelity(v: &[C]) -> f64 {
    let s = bell_vector(BellLabel::SINGLET);
    v.iter().zip(&s).map(|(a, b)| b.conj() * a).sum::<C>().norm_sqr()
}

/// One recurrence round: both pairs are rotated into the Φ+ frame by σy on
/// Alice's half, pair 0 is XORed into pair 1, pair 1 is measured along z and
/// the round succeeds when its halves agree. Returns `(f_out, p_success)`.
pub fn purification_round(f: f64) -> (f64, f64) {
    let mut success = 0.0;
    let mut good = 0.0;
    for l0 in BellLabel::ALL {
        for l1 in BellLabel::ALL {
            let w = werner_weight(f, l0) * werner_weight(f, l1);
            if w == 0.0 {
                continue;
            }
            let mut s = DenseState::prepare_bell_product(&BellString::new(vec![l0, l1])).expect("two pairs");
            s.apply_single(0, &PAULI_Y).expect("in range");
            s.apply_single(2, &PAULI_Y).expect("in range");
            s.apply_gate_mut(Gate::Bxor { source: 0, target: 1 }).expect("in range");
            for z in s.measure_pair_z_branches(1).expect("in range") {
                if z.fine.coarse().parity() {
                    continue;
                }
                let mut kept = z.state;
                kept.apply_single(0, &PAULI_Y).expect("in range");
                success += w * z.probability;
                good += w * z.probability * singlet_fidelity(kept.amplitudes());
            }
        }
    }
    (good / success, success)
}

/// Swaps `(A, C1)` of fidelity `f1` and `(C2, B)` of fidelity `f2` into
/// `(A, B)` by a Bell measurement of `C1 C2` and a Pauli correction on `B`.
/// Returns the singlet fidelity of `(A, B)` averaged over outcomes.
pub fn swap_fidelity(f1: f64, f2: f64) -> f64 {
    let corrections = correction_table();
    let mut total = 0.0;
    for l0 in BellLabel::ALL {
        for l1 in BellLabel::ALL {
            let w = werner_weight(f1, l0) * werner_weight(f2, l1);
            if w == 0.0 {
                continue;
            }
            let s = DenseState::prepare_bell_product(&BellString::new(vec![l0, l1])).expect("two pairs");
            for (outcome, correction) in BellLabel::ALL.into_iter().zip(&corrections) {
                let mut ab = project_middle(s.amplitudes(), outcome);
                let p: f64 = ab.iter().map(|a| a.norm_sqr()).sum();
                if p < 1e-15 {
                    continue;
                }
                ab.iter_mut().for_each(|a| *a /= p.sqrt());
                let fixed = apply_on_second(&ab, correction);
                total += w * p * singlet_fidelity(&fixed);
            }
        }
    }
    total
}

/// `(<L|_{C1 C2} ⊗ 1)` applied to a four-qubit vector ordered A, C1, C2, B.
fn project_middle(psi: &[C], outcome: BellLabel) -> [C; 4] {
    let l = bell_vector(outcome);
    let mut out = [C::new(0.0, 0.0); 4];
    for a in 0..2 {
        for b in 0..2 {
            for m in 0..4 {
                out[a << 1 | b] += l[m].conj() * psi[a << 3 | m << 1 | b];
            }
        }
    }
    out
}

fn apply_on_second(v: &[C; 4], m: &Matrix2) -> [C; 4] {
    let mut out = [C::new(0.0, 0.0); 4];
    for a in 0..2 {
        for b in 0..2 {
            for k in 0..2 {
                out[a << 1 | b] += m[b][k] * v[a << 1 | k];
            }
        }
    }
    out
}

/// For each Bell outcome, the Pauli on `B` that restores a singlet when both
/// inputs are singlets.
fn correction_table() -> Vec<Matrix2> {
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let identity: Matrix2 = [[one, zero], [zero, one]];
    let paulis = [identity, PAULI_X, PAULI_Y, PAULI_Z];
    let s = DenseState::prepare_bell_product(&BellString::singlets(2)).expect("two pairs");
    BellLabel::ALL
        .into_iter()
        .map(|outcome| {
            let mut ab = project_middle(s.amplitudes(), outcome);
            let p: f64 = ab.iter().map(|a| a.norm_sqr()).sum();
            ab.iter_mut().for_each(|a| *a /= p.sqrt());
            *paulis
                .iter()
                .find(|m| (singlet_fidelity(&apply_on_second(&ab, m)) - 1.0).abs() < 1e-12)
                .expect("some Pauli restores the singlet")
        })
        .collect()
}
