//! Correlated projection superoperator techniques for a qubit coupled to a
//! two-branch band environment.
//!
//! The crate builds the spin–band model ([`model`]), propagates it exactly
//! ([`exact`]), constructs averaged second-order time-convolutionless
//! generators on the reduced system ⊗ sector space ([`superop`]) and evolves
//! states under one or several projectors ([`tcl`]).

pub mod error;
pub mod exact;
pub mod linalg;
pub mod model;
pub mod superop;
pub mod tcl;

pub use error::{Error, Result};
pub use exact::{ensemble_average, evolve_exact, sector_variables, Trajectory};
pub use linalg::{ComplexMatrix, C64};
pub use model::{EnvSpec, ModelParams};
pub use superop::{EffectiveState, SuperOp};
pub use tcl::{ecps_evolve, solve_tcl, steady_state, EcpsComponent, TclGenerator, TclSolution};
