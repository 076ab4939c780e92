//! Compressed-sensing multiuser detection for uplink grant-free NOMA.
//!
//! The crate models an overloaded uplink in which a small, slot-invariant
//! subset of `K` users transmits over `N < K` shared subcarriers for `J`
//! consecutive slots. Detection is joint activity and data recovery from
//! `Y = G X + V` with a row-sparse `X`: cyclic closed-form row updates
//! minimize a row-regularized least-squares objective, a candidate-pruning
//! variant discards low-energy users early, and a cached variant maintains
//! the interference sum incrementally so each position costs a single
//! rank-one product. Detected rows are re-estimated by least squares and
//! sliced to the constellation.
//!
//! Everything is instrumented: detectors count the complex multiplications
//! they perform, and [`complexity`] evaluates the matching closed-form
//! budgets so counted and predicted costs can be reconciled. [`harness`]
//! runs paired, reproducible Monte Carlo sweeps and emits CSV/JSON tables.

pub mod complexity;
pub mod config;
pub mod constellation;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod solvers;
pub mod verify;

pub use config::{Modulation, SystemConfig};
pub use constellation::Constellation;
pub use error::{Error, Result};
pub use harness::{
    run_experiment, ExperimentOutput, ExperimentSpec, Metrics, SerDenominator, SweepAxis,
    SweepRow, VthPolicy,
};
pub use model::FrameInstance;
pub use rng::{derive_seed, RandomStream};
pub use solvers::{DetectionResult, SolverKind, SolverParams};
