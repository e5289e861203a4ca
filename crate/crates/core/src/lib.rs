//! Synthetic multi-step LaTeX equation derivations.
//!
//! The crate bundles a small symbolic engine ([`expr`], [`calculus`]), an
//! operation registry with replay ([`ops`]), the derivation generator
//! ([`gen`]), perturbations ([`perturb`]), prompt rendering ([`prompt`]) and
//! reference-based scoring ([`metrics`]).

pub mod expr;
pub mod calculus;
pub mod ops;
pub mod record;
pub mod prompt;
pub mod gen;
pub mod stats;
pub mod perturb;
pub mod metrics;
