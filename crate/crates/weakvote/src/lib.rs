//! Voting rules for weak-order ballots (rankings with ties).
//!
//! This crate implements elimination scoring rules such as Approval-IRV and
//! Split-IRV with exact parallel-universe tie-breaking, the multi-winner
//! rules Approval-STV and Split-STV with configurable quota, selection,
//! payment and elimination policies, executable checkers for axioms
//! (independence of clones, respect for cohesive majorities, indifference
//! monotonicity, generalized proportionality for solid coalitions), and a
//! synthetic-election pipeline for comparing the rules on sampled profiles.
//!
//! All tallying is done in exact arbitrary-precision rational arithmetic:
//! split scores and Gregory transfer factors are non-dyadic, and a float
//! tie would corrupt an elimination order.

pub mod axioms;
pub mod ballotio;
pub mod rules;
pub mod scoring;
pub mod stv;
pub mod synth;
pub mod types;

#[cfg(test)]
pub(crate) mod testutil;

pub use rules::{approval_irv, baldwin_weak, put_winners, split_irv, WinnerSet};
pub use scoring::{positional_scores, ScoringSystem};
pub use stv::{approval_stv, split_stv, QuotaKind, StvConfig};
pub use types::{CandidateId, OrderType, Profile, Rational, WeakOrder};
