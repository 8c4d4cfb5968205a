use serde::{Deserialize, Serialize};

use super::{BellLabel, BellString, Phase};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    /// Bilateral π/2 rotation about x.
    Bx,
    /// Bilateral π/2 rotation about y.
    By,
    /// Pauli X on Alice's half only.
    SigmaX,
    /// Bilateral CNOT, source pair into target pair.
    Bxor,
}

/// One local operation on the shared pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    Bx(usize),
    By(usize),
    SigmaX(usize),
    Bxor { source: usize, target: usize },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Bx(_) => GateKind::Bx,
            Gate::By(_) => GateKind::By,
            Gate::SigmaX(_) => GateKind::SigmaX,
            Gate::Bxor { .. } => GateKind::Bxor,
        }
    }

    pub fn pairs(&self) -> Vec<usize> {
        match *self {
            Gate::Bx(p) | Gate::By(p) | Gate::SigmaX(p) => vec![p],
            Gate::Bxor { source, target } => vec![source, target],
        }
    }

    /// Checks pair indices against a state of `n` pairs.
    pub fn validate(&self, n: usize) -> Result<()> {
        for p in self.pairs() {
            if p >= n {
                return Err(Error::PairOutOfRange { index: p, len: n });
            }
        }
        if let Gate::Bxor { source, target } = *self {
            if source == target {
                return Err(Error::SamePair(source));
            }
        }
        Ok(())
    }

    /// The exact inverse as a sequence drawn from the same gate set.
    ///
    /// A bilateral π/2 rotation has order four as a unitary (`R(π/2)^4 = -1`
    /// on each side, `+1` bilaterally), so its inverse is three copies.
    pub fn inverse(&self) -> Vec<Gate> {
        match self {
            Gate::Bx(_) | Gate::By(_) => vec![*self; 3],
            Gate::SigmaX(_) | Gate::Bxor { .. } => vec![*self],
        }
    }
}

/// One row of the label action table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateAction {
    pub kind: GateKind,
    /// One label for single-pair gates; `(source, target)` for BXOR.
    pub input: Vec<BellLabel>,
    pub output: Vec<BellLabel>,
    pub phase: Phase,
}

const fn l(i: usize) -> BellLabel {
    BellLabel::from_index(i)
}

// Indexed by input label (Φ+, Ψ+, Φ−, Ψ−). Generated from the dense
// simulator with Bx = exp(-iπσx/4)⊗exp(-iπσx/4), By likewise with σy, and
// SigmaX = σx⊗1; `tests/gate_table_oracle.rs` re-derives every entry.
const BX: [(BellLabel, Phase); 4] = [
    (l(1), Phase::MINUS_I),
    (l(0), Phase::MINUS_I),
    (l(2), Phase::ONE),
    (l(3), Phase::ONE),
];
const BY: [(BellLabel, Phase); 4] = [
    (l(0), Phase::ONE),
    (l(2), Phase::MINUS_ONE),
    (l(1), Phase::ONE),
    (l(3), Phase::ONE),
];
const SIGMA_X: [(BellLabel, Phase); 4] = [
    (l(1), Phase::ONE),
    (l(0), Phase::ONE),
    (l(3), Phase::MINUS_ONE),
    (l(2), Phase::MINUS_ONE),
];
// Indexed by 4 * source + target; every entry has phase +1.
const BXOR: [(BellLabel, BellLabel); 16] = [
    (l(0), l(0)),
    (l(0), l(1)),
    (l(2), l(2)),
    (l(2), l(3)),
    (l(1), l(1)),
    (l(1), l(0)),
    (l(3), l(3)),
    (l(3), l(2)),
    (l(2), l(0)),
    (l(2), l(1)),
    (l(0), l(2)),
    (l(0), l(3)),
    (l(3), l(1)),
    (l(3), l(0)),
    (l(1), l(3)),
    (l(1), l(2)),
];

fn single_table(kind: GateKind) -> &'static [(BellLabel, Phase); 4] {
    match kind {
        GateKind::Bx => &BX,
        GateKind::By => &BY,
        GateKind::SigmaX => &SIGMA_X,
        GateKind::Bxor => unreachable!("BXOR acts on two pairs"),
    }
}

/// The complete label action of the gate set: 4 rows for each single-pair
/// gate and 16 for BXOR.
pub fn gate_action_table() -> Vec<GateAction> {
    let mut rows = Vec::with_capacity(28);
    for kind in [GateKind::Bx, GateKind::By, GateKind::SigmaX] {
        for (i, &(out, phase)) in single_table(kind).iter().enumerate() {
            rows.push(GateAction {
                kind,
                input: vec![l(i)],
                output: vec![out],
                phase,
            });
        }
    }
    for (i, &(src, tgt)) in BXOR.iter().enumerate() {
        rows.push(GateAction {
            kind: GateKind::Bxor,
            input: vec![l(i / 4), l(i % 4)],
            output: vec![src, tgt],
            phase: Phase::ONE,
        });
    }
    rows
}

/// Applies one gate, permuting labels and accumulating the phase.
pub fn apply_gate(state: &BellString, gate: Gate) -> Result<BellString> {
    let mut out = state.clone();
    apply_gate_in_place(&mut out, gate)?;
    Ok(out)
}

pub fn apply_gates(state: &BellString, gates: &[Gate]) -> Result<BellString> {
    let mut out = state.clone();
    for &g in gates {
        apply_gate_in_place(&mut out, g)?;
    }
    Ok(out)
}

pub(crate) fn apply_gate_in_place(state: &mut BellString, gate: Gate) -> Result<()> {
    gate.validate(state.len())?;
    match gate {
        Gate::Bx(p) | Gate::By(p) | Gate::SigmaX(p) => {
            let (out, phase) = single_table(gate.kind())[state.labels[p].index()];
            state.labels[p] = out;
            state.phase *= phase;
        }
        Gate::Bxor { source, target } => {
            let idx = 4 * state.labels[source].index() + state.labels[target].index();
            let (s, t) = BXOR[idx];
            state.labels[source] = s;
            state.labels[target] = t;
        }
    }
    Ok(())
}
