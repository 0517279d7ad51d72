//! Exact samplers built from gamma variates.
//!
//! A uniform point of `B_p^n` is `X_i = eps_i T_i^(1/p)` where
//! `(T_0, ..., T_n) ~ Dirichlet(1, 1/p, ..., 1/p)` and the signs are fair.
//! Draw order from the stream is fixed: the slack gamma, then for each
//! coordinate its magnitude gamma followed by its sign.

use crate::error::{domain, Result};
use crate::lp_model::BallParams;
use crate::scalar_math::{gamma_sample, StreamRng};
use serde::Serialize;

/// One uniform draw from `B_p^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallSample {
    pub x: Vec<f64>,
}

/// One Dirichlet draw; for the ball sampler the slack component comes first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletDraw {
    pub t: Vec<f64>,
}

pub fn sample_dirichlet(shapes: &[f64], rng: &mut StreamRng) -> Result<DirichletDraw> {
    if shapes.is_empty() {
        return domain("Dirichlet needs at least one shape");
    }
    if let Some(bad) = shapes.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return domain(format!("Dirichlet shapes must be positive, got {bad}"));
    }
    let mut t: Vec<f64> = shapes.iter().map(|&a| gamma_sample(a, rng)).collect();
    let total: f64 = t.iter().sum();
    t.iter_mut().for_each(|g| *g /= total);
    Ok(DirichletDraw { t })
}

pub fn sample_uniform_ball(params: BallParams, rng: &mut StreamRng) -> BallSample {
    let mut x = vec![0.0; params.n];
    sample_uniform_ball_into(params, rng, &mut x);
    BallSample { x }
}

/// Allocation-free form of [`sample_uniform_ball`]; writes `params.n` coordinates into `out`.
#[inline]
pub fn sample_uniform_ball_into(params: BallParams, rng: &mut StreamRng, out: &mut [f64]) {
    let a = params.alpha;
    let mut total = gamma_sample(1.0, rng);
    for x in out.iter_mut().take(params.n) {
        let g = gamma_sample(a, rng);
        total += g;
        *x = g.copysign(rng.next_sign());
    }
    for x in out.iter_mut().take(params.n) {
        *x = (x.abs() / total).powf(a).copysign(*x);
    }
}

/// Draw from the density `exp(-|x|^p) / (2 Gamma(1 + 1/p))`.
pub fn sample_gen_gaussian(p: f64, rng: &mut StreamRng) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return domain(format!("p must lie in [1, 2], got {p}"));
    }
    let g = gamma_sample(1.0 / p, rng);
    Ok(g.powf(1.0 / p).copysign(rng.next_sign()))
}
