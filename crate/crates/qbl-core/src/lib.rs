//! Brascamp-Lieb data on bipartite quivers.
//!
//! A datum consists of finite-dimensional source and target spaces, surjective
//! linear arrows from sources to targets, and one integrability exponent per
//! target. The crate decides whether the associated inequality constant is
//! finite (exact rational scaling and dimension conditions, with witness
//! subspaces when they fail), computes the Gaussian constant by maximizing a
//! log-determinant ratio, and cross-checks both against direct evaluation of
//! the inequality on concrete test functions.

pub mod conditions;
pub mod datum;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod numerics;
pub mod verifier;

pub use error::{Error, Result};
