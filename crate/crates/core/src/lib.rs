//! Solvers for the joint design of information and contracts in
//! principal-agent games with hidden states.
//!
//! A principal observes a hidden state `θ`, commits to a signaling scheme
//! `π(s|θ)` and a payment scheme, and an agent best-responds to the posterior
//! induced by the received signal. The crate provides:
//!
//! - [`model`] — domain types ([`Instance`], [`SignalingScheme`],
//!   [`PaymentScheme`], [`Mechanism`]) plus posterior / best-response /
//!   utility evaluation, incentive-compatibility checking, and the
//!   direct-mechanism merging transform.
//! - [`lp`] — a small dense LP layer (two-phase simplex) shared by all
//!   solver modules.
//! - [`amb`] — the ambiguous-contract pipeline: LP relaxation, repair of
//!   irregular pairs, approximate-IC to IC conversion, and the end-to-end
//!   `ζ`-optimal solver.
//! - [`linear`] — grid-based approximation schemes for single linear
//!   contracts and menus of linear contracts.
//! - [`oracle`] — ground-truth baselines: lattice brute force over explicit
//!   contracts, per-posterior optimal contracts, the K-uniform belief
//!   solver, and a Monte Carlo simulator.
//! - [`gen`] — instance generators (paper constructions, graph reductions,
//!   seeded random instances) and their closed-form mechanism evaluators.
//! - [`exact`] — rational-arithmetic evaluation for small instances, used
//!   to reproduce closed-form values without float error.

pub mod amb;
pub mod error;
pub mod exact;
pub mod gen;
pub mod linear;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod report;

mod persuasion;

pub use error::{Error, Result};
pub use model::{
    ICReport, Instance, Mechanism, PaymentScheme, Posterior, SignalingScheme, Violation,
};
pub use report::{Diagnostics, SolveReport};
