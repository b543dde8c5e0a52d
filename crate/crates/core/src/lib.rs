//! Exact tests of whether observed beliefs and choices can come from a
//! Bayesian decision maker with some information structure.
//!
//! All arithmetic is exact. Polytopes live in the free belief coordinates
//! `μ(ω₂)…μ(ω_I)`; full beliefs carry every coordinate.

pub mod consistency;
pub mod error;
pub mod extensions;
pub mod geometry;
pub mod instances;
pub mod io;
pub mod lp;
pub mod model;
pub mod rational;
pub mod rationalizer;
pub mod structure;

pub use consistency::{check_bce, extreme_marginal_bounds, support_value, DualCertificate, JointDistribution, Verdict};
pub use error::{Error, Result};
pub use model::{DecisionProblem, Distribution};
pub use rational::Rational;
pub use structure::{classify, StructureClass, StructureTag};
