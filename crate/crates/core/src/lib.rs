//! Multi-dueling bandits: select a subset of at most `m` arms per round,
//! observe every pairwise duel inside it, and keep the average advantage of
//! the Condorcet winner over the chosen subset small.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: utilities, link functions, preference matrices and gaps.
//! - [`environment`]: the seeded duel simulator and regret accountant.
//! - [`baim`]: a best-arm-identification machine (LUCB).
//! - [`sbm`]: a UCB singleton bandit machine with an additional-feedback channel.
//! - [`policies`]: DoublerBAI, MultiSBM(-Feedback), MultiRUCB and a uniform baseline.
//! - [`bounds`]: closed-form regret-bound quantities.
//! - [`harness`]: configuration, seeded runs, aggregation and CSV output.

pub mod baim;
pub mod bounds;
pub mod environment;
pub mod error;
pub mod harness;
pub mod model;
pub mod policies;
pub mod sbm;

pub use environment::{ComparisonSet, DuelOutcome, Environment, SimRng};
pub use error::{Error, Result};
pub use model::{ArmId, GapTable, LinkFunction, PreferenceMatrix, UtilityVector};
pub use policies::{Policy, PolicySpec};
