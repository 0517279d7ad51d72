//! Time monotonicity of the coordinate profile `Phi_{p,n}(t)`.
//!
//! With `W = X_1^2`, `lambda = 1/(2t)` and `L(lambda) = E exp(-lambda W)`,
//!
//! `Phi'(t) = -S(lambda) / (2 sqrt(2 pi) t^2 sqrt(1 + 2 v lambda))`,
//!
//! where `S(lambda) = int_0^1 exp(-lambda w) dmu(w)` for the signed measure
//! `dmu = q(w) w [v (n-1) r(w) - 1] dw`, `q` the density of `W` and
//! `r(w) = w^{p/2-1} / (1 - w^{p/2})`. The sign of `Delta = m4 - 3 v^2`
//! decides whether `Phi` is strictly decreasing or nonmonotone.

use crate::error::{domain, Result};
use crate::lp_model::{moment_set, BallParams};
use crate::profile::{coordinate_profile_phi, INV_SQRT_2PI};
use crate::scalar_math::{bisect, integrate_adaptive, ln_gamma, QuadratureSpec};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowVerdict {
    Nonmonotone,
    StrictlyDecreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowClassification {
    pub params: BallParams,
    pub delta: f64,
    pub big_r: f64,
    pub verdict: FlowVerdict,
    /// `(t1, t2)` with `Phi'(t1) < 0 < Phi'(t2)`, present iff nonmonotone.
    pub witness: Option<(f64, f64)>,
    /// Zero of `Phi'` located by bisection inside the witness bracket.
    pub crossing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedMeasureCheck {
    pub lambda_grid: Vec<f64>,
    pub s_values: Vec<f64>,
    pub s_errors: Vec<f64>,
    /// Sign changes of the bracketed factor of the density of `mu` on `(0, 1)`.
    pub mu_sign_changes: usize,
    /// `S(0) = mu([0, 1])`.
    pub s_at_zero: f64,
    /// `S'(0) = -int w dmu`.
    pub s_prime_at_zero: f64,
    pub delta: f64,
    /// Every `S(lambda)` exceeds its quadrature error.
    pub all_positive: bool,
}

fn check_flow_params(params: BallParams) -> Result<()> {
    params.require_below_two()?;
    if params.n < 2 {
        return domain(format!("n must be at least 2, got {}", params.n));
    }
    Ok(())
}

fn derivative_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-14, 1e-13, 4000).expect("valid spec")
}

/// `Phi'(t)` by central differences with step `t/100` and one Richardson step.
pub fn phi_derivative(params: BallParams, t: f64, spec: QuadratureSpec) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t must be positive and finite, got {t}"));
    }
    let phi = |s: f64| coordinate_profile_phi(params, s, spec).map(|e| e.value);
    let central = |h: f64| -> Result<f64> { Ok((phi(t + h)? - phi(t - h)?) / (2.0 * h)) };
    let h = t / 100.0;
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `Phi'` at each time of `ts`, evaluated in parallel.
pub fn derivative_scan(params: BallParams, ts: &[f64], spec: QuadratureSpec) -> Result<Vec<f64>> {
    ts.par_iter().map(|&t| phi_derivative(params, t, spec)).collect()
}

/// `Phi'(t)` through the signed-measure representation, with its error bound.
pub fn phi_derivative_from_measure(params: BallParams, t: f64, spec: QuadratureSpec) -> Result<(f64, f64)> {
    check_flow_params(params)?;
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t must be positive and finite, got {t}"));
    }
    let v = moment_set(params).v;
    let lambda = 0.5 / t;
    let (s, err) = s_lambda(params, lambda, spec)?;
    let scale = 0.5 * INV_SQRT_2PI / (t * t * (1.0 + 2.0 * v * lambda).sqrt());
    Ok((-scale * s, scale * err))
}

/// Verdict from the sign of `Delta`; a nonmonotone verdict carries a witness
/// found by scanning `Phi'` on a log grid and cross-checked against the
/// signed-measure form of `Phi'`.
pub fn classify(params: BallParams) -> Result<FlowClassification> {
    check_flow_params(params)?;
    let ms = moment_set(params);
    let mut out = FlowClassification {
        params,
        delta: ms.delta,
        big_r: ms.big_r,
        verdict: FlowVerdict::StrictlyDecreasing,
        witness: None,
        crossing: None,
    };
    if ms.delta >= 0.0 {
        return Ok(out);
    }
    out.verdict = FlowVerdict::Nonmonotone;
    let spec = derivative_spec();
    let ts: Vec<f64> = (-24..=16).map(|k| 10f64.powf(k as f64 / 4.0)).collect();
    let fd = derivative_scan(params, &ts, spec)?;
    let sign_of = |t: f64, d: f64| -> Result<Option<bool>> {
        let (exact, err) = phi_derivative_from_measure(params, t, spec)?;
        let agree = d.abs() > err && exact.abs() > err && (d > 0.0) == (exact > 0.0);
        Ok(agree.then_some(exact > 0.0))
    };
    let mut t_neg = None;
    for (&t, &d) in ts.iter().zip(&fd) {
        match (sign_of(t, d)?, t_neg) {
            (Some(false), _) => t_neg = Some(t),
            (Some(true), Some(t1)) => {
                let crossing = bisect(
                    |s| phi_derivative_from_measure(params, s, spec).map(|d| d.0).unwrap_or(f64::NAN),
                    t1,
                    t,
                );
                out.witness = Some((t1, t));
                out.crossing = Some(crossing);
                return Ok(out);
            }
            _ => {}
        }
    }
    Ok(out)
}

/// `R_{p,n} = m4 / v^2`.
pub fn kurtosis_ratio(params: BallParams) -> f64 {
    moment_set(params).big_r
}

/// `N(p) = min { n >= 2 : R_{p,n} >= 3 }`, using that `R_{p,n}` increases in `n`.
pub fn threshold_n(p: f64) -> Result<usize> {
    if !(1.0..2.0).contains(&p) {
        return domain(format!("threshold needs 1 <= p < 2, got {p}"));
    }
    let reaches = |n: usize| kurtosis_ratio(BallParams::unrestricted(p, n)) >= 3.0;
    let mut lo = 1;
    let mut hi = 2;
    while !reaches(hi) {
        lo = hi;
        hi = hi.checked_mul(2).filter(|h| *h <= 1 << 52).ok_or_else(|| {
            crate::error::Error::Domain(format!("threshold for p = {p} exceeds the search range"))
        })?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `R_{p,infinity} = Gamma(5/p) Gamma(1/p) / Gamma(3/p)^2`.
pub fn r_limit(p: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return domain(format!("p must lie in [1, 2], got {p}"));
    }
    Ok((ln_gamma(5.0 / p) + ln_gamma(1.0 / p) - 2.0 * ln_gamma(3.0 / p)).exp())
}

/// `int_0^1 f(w) dmu(w)` in the variable `z` with `w^{p/2} = 1 - z^{1/m}`,
/// which removes both endpoint singularities of the density.
fn integrate_mu<F: Fn(f64) -> f64>(params: BallParams, f: F, spec: QuadratureSpec) -> Result<(f64, f64)> {
    let ms = moment_set(params);
    let p = params.p;
    let nm1 = params.n as f64 - 1.0;
    let m = nm1 / p;
    let k = 2.0 * ms.c_norm / nm1;
    let vn = ms.v * nm1;
    let q = integrate_adaptive(
        |z: f64| {
            let tau = -(z.ln() / m).exp_m1();
            if tau <= 0.0 {
                return 0.0;
            }
            let w = tau.powf(2.0 / p);
            let dens = tau.powf(2.0 / p - 1.0) * (vn * tau.powf(1.0 - 1.0 / p) - tau.powf(1.0 / p) * (1.0 - tau));
            k * dens * f(w)
        },
        0.0,
        1.0,
        spec,
    )?;
    Ok((q.value, q.err_bound))
}

fn s_lambda(params: BallParams, lambda: f64, spec: QuadratureSpec) -> Result<(f64, f64)> {
    integrate_mu(params, |w| (-lambda * w).exp(), spec)
}

/// `S(lambda)` on a grid, the identities `S(0) = 0` and `S'(0) = Delta`, and
/// the sign pattern of the density of `mu`.
pub fn s_positivity(params: BallParams, lambda_grid: &[f64], spec: QuadratureSpec) -> Result<SignedMeasureCheck> {
    check_flow_params(params)?;
    if let Some(bad) = lambda_grid.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return domain(format!("lambda must be positive and finite, got {bad}"));
    }
    let values = lambda_grid.par_iter().map(|&l| s_lambda(params, l, spec)).collect::<Result<Vec<_>>>()?;
    let (s_at_zero, _) = integrate_mu(params, |_| 1.0, spec)?;
    let (first_moment, _) = integrate_mu(params, |w| w, spec)?;
    let all_positive = values.iter().all(|(s, e)| *s > *e);
    Ok(SignedMeasureCheck {
        lambda_grid: lambda_grid.to_vec(),
        s_values: values.iter().map(|v| v.0).collect(),
        s_errors: values.iter().map(|v| v.1).collect(),
        mu_sign_changes: bracket_sign_changes(params),
        s_at_zero,
        s_prime_at_zero: -first_moment,
        delta: moment_set(params).delta,
        all_positive,
    })
}

/// `v (n-1) r(w) - 1` at `w^{p/2} = tau`.
fn bracket_factor(params: BallParams, v: f64, tau: f64) -> f64 {
    let w = tau.powf(2.0 / params.p);
    v * (params.n as f64 - 1.0) * tau / (w * (1.0 - tau)) - 1.0
}

fn bracket_sign_changes(params: BallParams) -> usize {
    const GRID: usize = 4096;
    let v = moment_set(params).v;
    // The zero near w = 0 sits at tau ~ (v (n-1))^{p/(2-p)}, far below any
    // linear grid when p is close to 2.
    let mut taus: Vec<f64> = (1..GRID).map(|j| j as f64 / GRID as f64).collect();
    for k in 1..=1200 {
        let e = 10f64.powf(-(k as f64) / 4.0);
        taus.push(e);
        taus.push(1.0 - e);
    }
    taus.push(1.0 - 0.5 * params.p);
    taus.sort_by(f64::total_cmp);
    let signs: Vec<bool> = taus
        .iter()
        .filter(|t| **t > 0.0 && **t < 1.0)
        .map(|&t| bracket_factor(params, v, t))
        .filter(|b| *b != 0.0)
        .map(|b| b > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Minimizer of `r(w) = w^{p/2-1} / (1 - w^{p/2})` on `(0, 1)`, located as the
/// zero of `w (log r)'(w) = p/2 - 1 + (p/2) w^{p/2} / (1 - w^{p/2})`.
pub fn bracket_min_check(p: f64) -> Result<f64> {
    if !(p > 1.0 && p < 2.0) {
        return domain(format!("bracket minimum needs 1 < p < 2, got {p}"));
    }
    let h = 0.5 * p;
    Ok(bisect(
        |w| {
            let tau = w.powf(h);
            h - 1.0 + h * tau / (1.0 - tau)
        },
        0.0,
        1.0,
    ))
}
