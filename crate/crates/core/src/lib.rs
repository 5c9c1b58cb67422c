//! Stochastic quasi-Fejér monotone iterations on Hadamard spaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`spaces`]: the geodesic kernel (Euclidean space, the tripod R-tree and
//!   the hyperbolic upper half-plane) with projections and curvature residuals.
//! - [`moduli`]: symbolic moduli of regularity, step schedules and their
//!   summation witnesses, and the assembly of rate certificates.
//! - [`problems`]: concrete stochastic problems with exact solution sets.
//! - [`algorithms`]: the stochastic proximal point method, the randomized
//!   Krasnoselskii–Mann scheme and the projected Busemann subgradient method,
//!   together with their certificate builders.
//! - [`harness`]: seeded Monte-Carlo ensembles, inequality audits and result
//!   export.
//! - [`config`] / [`cli`]: the JSON experiment front end used by the
//!   `fejerlab` binary.

pub mod algorithms;
pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod moduli;
pub mod problems;
pub mod spaces;

pub use error::{Error, Result};
