//! Numerical laboratory for central projection profiles of `l_p^n` balls.
//!
//! The crate computes and samples the quantities attached to the uniform
//! measure on `B_p^n = {x : sum |x_i|^p <= 1}` and its Gaussian heat-flow
//! regularizations, and checks the order relations they satisfy:
//!
//! * [`lp_model`]: volumes, coordinate moments, fourth-cumulant excess.
//! * [`sampler`]: exact uniform sampling through the sign-Dirichlet representation.
//! * [`profile`]: Laplace-transform profiles `M`, `A`, `A~` and the coordinate profile `Phi`.
//! * [`order_lab`]: majorization, T-transform chains, stop-loss convex-order tests.
//! * [`chain`]: endpoint constants `b_{p,k}` along the canonical coordinate-to-diagonal chain.
//! * [`flow_classifier`]: time-monotonicity of the coordinate profile.
//! * [`appendix_verify`]: exact and numeric certificates for the layer inequalities.
//!
//! Everything is built on the deterministic kernels in [`scalar_math`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod appendix_verify;
pub mod chain;
pub mod error;
pub mod flow_classifier;
pub mod lp_model;
pub mod montecarlo;
pub mod order_lab;
pub mod profile;
pub mod sampler;
pub mod scalar_math;

pub use error::{Error, Result};
pub use lp_model::{BallParams, MomentSet};
pub use montecarlo::{Estimate, McBudget};
pub use profile::{Direction, Method, ProfileEstimate};
pub use scalar_math::{QuadratureSpec, RngStream, StreamRng};
