//! Independent oracles and the acceptance suite for `melnikov-core`.

pub mod oracle;
pub mod suite;

pub use suite::{all, property_sweep, Bound, Check, CriterionOutcome};
