//! Inter-generational selection dynamics for two groups competing for limited seats.
//!
//! Stylized model: each group holds a fraction of high types, a fixed capacity of seats
//! is filled by a meritocratic, fair and efficient rule, and the next generation's types
//! are drawn from the admission outcome. Two transition models are provided, Equal
//! Advantage ([`meanfield::MapKind::Ea`]) and Affinity Advantage ([`meanfield::MapKind::Aa`]),
//! each with a mean-field map and an exact finite-population simulator. A continuous-ability
//! model lives in [`richmodel`]. Parameter sweeps and their CSV output are in [`experiments`].

// range checks are written as `!(x > 0.0)` so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod meanfield;
pub mod model;
pub mod richmodel;
pub mod stochastic;
