//! Static sensitivity analysis and differentially private execution of
//! relational algebra queries over constrained schemas.
//!
//! A schema attaches a check-constraint to each relation. The analyzer
//! propagates these constraints through a query, bounds how much the
//! query's result can change when one input tuple is added or removed, and
//! the Laplace mechanism in [`dp`] uses that bound to privatize the answer.

pub mod analyzer;
pub mod constraints;
pub mod dp;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod plan;
pub mod query;
pub mod syntax;
pub mod value;

pub use error::{Error, Result};
