//! Sanction-evasion ordering contests.
//!
//! A compliant stablecoin issuer and an evader race to get a freeze or an
//! evasion transaction ordered first in one block. Both spend on ordering
//! priority; the block proposer keeps the spend. This crate solves the
//! resulting two-player Tullock(r) contest exactly ([`contest`]), derives the
//! economic quantities that follow from it ([`economics`]), and simulates
//! races to validate the analytics ([`sim`]).

pub mod contest;
pub mod economics;
mod error;
pub mod sim;

pub use contest::{
    check_lemma_large_psi, check_positive_utility, equilibrium, phi, solve_intensity_ratio,
    success_fn, verify_nash, ContestParams, Equilibrium, LargePsiCheck, NashAudit, NashGrid,
    PositiveUtilityCheck, SuccessProbs,
};
pub use error::ContestError;

pub type Result<T, E = ContestError> = std::result::Result<T, E>;
