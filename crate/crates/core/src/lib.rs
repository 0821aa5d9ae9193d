//! Exact (unambiguous) identification of a quantum change point.
//!
//! A source emits `n` particles in the default state `|0⟩` and at some
//! unknown position switches to the mutated state `|φ⟩`.  The hypotheses are
//! fully described by their Gram matrix `G_ij = c^|i-j|`, where `c = ⟨0|φ⟩`.
//! This crate works entirely in that `n`-dimensional Gram space:
//!
//! * [`gram`] builds `G`, a triangular embedding of the states, the
//!   reciprocal states and the unambiguous POVM;
//! * [`analytic`] evaluates the closed-form optimal efficiencies and success
//!   probability in both overlap regimes;
//! * [`certificate`] certifies optimality with matched primal/dual points,
//!   replays the leading-minor positivity arguments and provides an
//!   independent numerical optimum for small `n`;
//! * [`local`] covers online strategies that measure one particle at a time;
//! * [`simulator`] runs seeded Monte Carlo experiments of both.
//!
//! ```
//! use changepoint::{analytic, ProblemInstance};
//!
//! let inst = ProblemInstance::new(15, 0.5).unwrap();
//! let ps = analytic::success_probability(&inst);
//! assert!((ps.value - 0.362_963_867_187_5).abs() < 1e-12);
//! ```

pub mod analytic;
pub mod certificate;
mod error;
pub mod gram;
mod linalg;
pub mod local;
pub mod simulator;

pub use analytic::{CriticalOverlap, EfficiencyProfile, Regime, SuccessProbability};
pub use certificate::{CertificateSummary, DualWitness, MinorReport, OptimalityCertificate, PrimalPoint, Tolerances};
pub use error::{Error, Result};
pub use gram::{GramMatrix, Povm, ProblemInstance, StateEmbedding};
pub use local::{LocalStrategyKind, LocalStrategyResult, LocalWeights};
pub use simulator::{SimulationConfig, SimulationReport, Strategy};
