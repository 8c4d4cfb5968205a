//! Simulation laboratory for entanglement-based key distribution verified
//! by random hashing.
//!
//! * [`bell`]: exact label algebra of Bell-pair products under local gates.
//! * [`dense`]: brute-force amplitude simulator used as ground truth.
//! * [`verification`]: the parity game, hashing verification, key extraction.
//! * [`adversary`]: cheating strategies and the beamsplitter attack model.
//! * [`repeater`]: Werner-fidelity channel, purification and repeater chains.
//! * [`security`]: entropy bounds and the singlet-fraction estimator.

pub mod adversary;
pub mod bell;
pub mod bits;
pub mod dense;
pub mod error;
pub mod repeater;
pub mod security;
pub mod verification;

pub use bell::{BellLabel, BellString, Coarse, Fine, Gate, Phase};
pub use bits::{subset_parity, BitString, Subset};
pub use dense::DenseState;
pub use error::{Error, Result};
