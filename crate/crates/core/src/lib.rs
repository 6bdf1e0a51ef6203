//! Repeated Stackelberg games with quantal and best-responding followers,
//! with and without memory of past commitments, and Follow-The-Perturbed-Leader
//! learners for the leader.
//!
//! Typical use: build a [`GameInstance`], an [`Oracle`] for the follower
//! response model, then run a [`sim::BatchSpec`] through [`sim::run_batch`].

pub mod checks;
pub mod config;
pub mod error;
pub mod game;
pub mod learner;
pub mod memory;
pub mod oracle;
pub mod presets;
pub mod sim;
pub mod simplex;

pub use config::{GameSource, RunConfig};
pub use error::{Error, Result};
pub use game::{GameInstance, Matrix, ResponseMode, TypeWeights};
pub use learner::{Algorithm, Learner, LearnerConfig, PerturbationKind, PerturbationSpec};
pub use memory::{MemoryModel, ReputationState};
pub use oracle::{Certificate, Oracle, OracleConfig, OracleRequest, OracleResult};
pub use simplex::SimplexPoint;
