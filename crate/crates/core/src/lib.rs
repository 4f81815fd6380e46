//! Model-free upper bounds for American options with two exercise dates.
//!
//! Given the laws `μ` and `ν` of the underlying at the two dates (finite atomic
//! measures in convex order), the crate computes
//!
//! * the relaxed bound `P̄_c` over component families of martingale transports,
//!   together with a superhedging certificate `(φ, ψ, θ_l)` extracted from the
//!   LP duals ([`mot::solve_relaxed`]);
//! * the exact bound `P_c` by enumerating pure exercise strategies
//!   ([`mot::solve_pure_enumeration`]) or a lower bound by alternating
//!   maximization ([`mot::solve_alternating`]);
//! * purity (non-randomization) diagnostics, certificate verification, the
//!   irreducible decomposition of `(μ, ν)` and a left-curtain reference coupling.
//!
//! Everything here is `no_std` + `alloc`: there is no IO, no clock and no global
//! state. File formats and the command-line front end live in the `motex` crate.
#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod costs;
pub mod error;
pub mod experiments;
pub mod lp;
pub mod measures;
pub mod mot;

pub use costs::{CostSpec, HypothesisReport, Payoff};
pub use error::{Error, Result};
pub use measures::{DiscreteMeasure, IrreducibleComponent};
pub use mot::{DualCertificate, ExerciseStrategy, SolveReport, TransportPlan};
