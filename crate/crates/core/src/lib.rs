//! Numerical laboratory for single-photon differential phase shift quantum
//! key distribution (DPS-QKD).
//!
//! The crate is organised bottom-up:
//!
//! * [`state`]: exact state vectors of one n-pulse block, the 1-bit-delay
//!   Mach-Zehnder interferometer, Bob's time-slot filter and the Pauli
//!   observables used to define bit and phase errors.
//! * [`attack`]: the n×n Kraus component of an eavesdropper's attack and its
//!   on-disk JSON format.
//! * [`error_probs`]: closed-form per-slot bit/phase error probabilities,
//!   the two-complex-number lemma and the `(3+√5)` phase-error bound.
//! * [`search`]: random and Nelder-Mead adversarial search for attacks that
//!   push the phase error up relative to the bit error.
//! * [`rates`]: key-rate formulas, channel/detector models, tolerable bit
//!   error rates and loss sweeps.
//! * [`montecarlo`]: block-by-block simulation of the entanglement-based
//!   protocol, Azuma-type concentration checks and test-bit sampling.
//! * [`cli`]: the `dpsqkd` command line front end.
//!
//! Runnable walkthroughs of each capability live in the crate's `examples/`
//! directory.

pub mod attack;
pub mod cli;
pub mod error;
pub mod error_probs;
pub mod montecarlo;
pub mod rates;
pub mod search;
pub mod state;
pub mod table;

pub use attack::AttackMatrix;
pub use error::{Error, Result};
pub use error_probs::{bound_slack, error_table, lemma_gap, SlotErrorTable, BOUND_FACTOR};

pub use rates::{ChannelParams, Protocol, ProtocolRates};
pub use state::{JointState, LinearOperator, ModeBasis, PhotonState};

/// Absolute tolerance for structural identities (norms, projector algebra).
pub const STRUCTURAL_TOL: f64 = 1e-12;
