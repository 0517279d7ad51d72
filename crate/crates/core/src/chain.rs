//! Endpoint constants along the canonical chain `u^(1), ..., u^(n)`.
//!
//! With `g_p(x) = exp(-|x|^p) / (2 Gamma(1 + 1/p))` and its characteristic
//! function `phi_p`, the normalized `k`-fold sum of `g_p` variables has
//! density at zero
//!
//! `b_{p,k} = (sqrt k / 2 pi) int phi_p(xi)^k d xi`,
//!
//! and the `t = 0` profile along `u^(k)` is
//! `A_{p,n,0}(u^(k)) = Gamma(1 + n/p) / Gamma(1 + (n-1)/p) * b_{p,k}`.

use crate::error::{domain, Error, Result};
use crate::lp_model::BallParams;
use crate::montecarlo::McBudget;
use crate::profile::{compare_directions, Direction};
use crate::scalar_math::{integrate_adaptive, ln_gamma, QuadratureSpec, RngStream};
use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMethod {
    Fourier,
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointConstants {
    pub p: f64,
    pub k: usize,
    /// `b_{p,k}`.
    pub b: f64,
    /// `S_{p,k} = b (2 Gamma(1 + 1/p))^k / Gamma(1 + (k-1)/p)`.
    pub s_section: f64,
    pub err: f64,
    pub method: ConstantMethod,
}

fn check_p(p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return domain(format!("p must lie in [1, 2], got {p}"));
    }
    Ok(())
}

/// `g_p(0) = 1 / (2 Gamma(1 + 1/p))`.
pub fn gen_gaussian_density_at_zero(p: f64) -> f64 {
    0.5 * (-ln_gamma(1.0 + 1.0 / p)).exp()
}

/// `phi_p(xi) = 2 int_0^inf cos(xi x) g_p(x) dx`.
///
/// The integral is taken along the ray `x = r e^{i theta}` with
/// `theta = pi / (4p)`, on which both `exp(i xi x)` and `exp(-x^p)` decay, so
/// the integrand is not oscillatory even for large `xi`.
pub fn char_fn_phi(p: f64, xi: f64, spec: QuadratureSpec) -> Result<f64> {
    check_p(p)?;
    if !xi.is_finite() {
        return domain("frequency must be finite");
    }
    Ok(phi_with_err(p, xi.abs(), spec)?.0)
}

const PHI_ACCEPT: f64 = 1e-12;

fn phi_with_err(p: f64, xi: f64, spec: QuadratureSpec) -> Result<(f64, f64)> {
    let theta = PI / (4.0 * p);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = (p * theta).sin_cos();
    // r = s / scale puts the decay of exp(i xi r e^{i theta}) at s ~ 1.
    let scale = xi.max(1.0);
    let w = xi / scale;
    let norm = (-ln_gamma(1.0 + 1.0 / p)).exp() / scale;
    let q = integrate_adaptive(
        |s: f64| {
            let rp = (s / scale).powf(p);
            let re = -w * s * st - rp * cp;
            let im = w * s * ct - rp * sp;
            re.exp() * (theta + im).cos()
        },
        0.0,
        f64::INFINITY,
        spec.with_tol(spec.abs_tol / norm, spec.rel_tol),
    );
    match q {
        Ok(q) => Ok((q.value * norm, q.err_bound * norm)),
        // Roundoff floor of the rule sits just above a 1e-14 request for some (p, xi).
        Err(Error::Convergence { estimate, err_bound }) if err_bound * norm <= PHI_ACCEPT => {
            Ok((estimate * norm, err_bound * norm))
        }
        Err(e) => Err(e),
    }
}

/// `E` with `|phi_p(xi)| <= E / xi^2`: two integrations by parts give
/// `E = 2 (|g'(0+)| + int |g''|) = 4 max |g'|`.
fn phi_envelope(p: f64) -> f64 {
    let c = gen_gaussian_density_at_zero(p);
    let x_p = (p - 1.0) / p;
    let max_slope = if p == 1.0 { c } else { c * p * x_p.powf((p - 1.0) / p) * (-x_p).exp() };
    4.0 * max_slope
}

/// `b_{p,k}` by Fourier inversion at zero; `k = 1` is `g_p(0)` in closed form.
///
/// The frequency integral stops at the `Xi` where the envelope bound
/// `E^k Xi^{1-2k} / (2k-1)` on the neglected tail drops below half the
/// absolute tolerance; the bound is carried in `err`.
pub fn b_constant(p: f64, k: usize, spec: QuadratureSpec) -> Result<EndpointConstants> {
    check_p(p)?;
    if k == 0 {
        return domain("k must be at least 1");
    }
    let finish = |b: f64, err: f64, method| EndpointConstants {
        p,
        k,
        b,
        s_section: section_from_b(p, k, b),
        err,
        method,
    };
    if k == 1 {
        return Ok(finish(gen_gaussian_density_at_zero(p), 0.0, ConstantMethod::ClosedForm));
    }
    let kf = k as f64;
    let pre = kf.sqrt() / PI;
    let env = phi_envelope(p);
    let budget = 0.5 * spec.abs_tol / pre;
    // E^k Xi^{1-2k} / (2k-1) <= budget
    let xi_max = ((env.powf(kf) / ((2.0 * kf - 1.0) * budget)).ln() / (2.0 * kf - 1.0)).exp().max(10.0);
    let tail = env.powf(kf) * xi_max.powf(1.0 - 2.0 * kf) / (2.0 * kf - 1.0);

    let inner = spec.with_tol(1e-14, 1e-13);
    let mut pieces = vec![0.0, 1.0];
    while *pieces.last().unwrap() * 4.0 < xi_max {
        let next = pieces.last().unwrap() * 4.0;
        pieces.push(next);
    }
    pieces.push(xi_max);
    let outer = spec.with_tol(spec.abs_tol / (pieces.len() as f64 * pre), spec.rel_tol);
    let mut total = 0.0;
    let mut outer_err = 0.0;
    let failure = std::cell::RefCell::new(None);
    let worst = std::cell::Cell::new(inner.abs_tol);
    for w in pieces.windows(2) {
        let q = integrate_adaptive(
            |xi: f64| match phi_with_err(p, xi, inner) {
                Ok((v, e)) => {
                    worst.set(worst.get().max(e));
                    v.powi(k as i32)
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            w[0],
            w[1],
            outer,
        )?;
        total += q.value;
        outer_err += q.err_bound;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    // |d(phi^k)| <= k |phi|^{k-1} eps and int |phi|^{k-1} <= 1 + E^{k-1} / (2k - 3).
    let inner_err = kf * worst.get() * (1.0 + env.powf(kf - 1.0) / (2.0 * kf - 3.0));
    let b = pre * total;
    Ok(finish(b, pre * (outer_err + tail + inner_err), ConstantMethod::Fourier))
}

fn section_from_b(p: f64, k: usize, b: f64) -> f64 {
    let kf = k as f64;
    b * (kf * (2.0f64.ln() + ln_gamma(1.0 + 1.0 / p)) - ln_gamma(1.0 + (kf - 1.0) / p)).exp()
}

/// `Gamma(1 + n/p) / Gamma(1 + (n-1)/p)`.
fn endpoint_prefactor(params: BallParams) -> f64 {
    let n = params.n as f64;
    (ln_gamma(1.0 + n / params.p) - ln_gamma(1.0 + (n - 1.0) / params.p)).exp()
}

/// `A_{p,n,0}(u^(k))` with its error bound.
pub fn endpoint_a0(params: BallParams, k: usize, spec: QuadratureSpec) -> Result<(f64, f64)> {
    if k == 0 || k > params.n {
        return domain(format!("k must lie in [1, {}], got {k}", params.n));
    }
    let b = b_constant(params.p, k, spec)?;
    let f = endpoint_prefactor(params);
    Ok((f * b.b, f * b.err))
}

/// An exact number `rational * sqrt(radicand)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surd {
    pub rational: BigRational,
    pub radicand: u64,
}

impl Surd {
    pub fn to_f64(&self) -> f64 {
        self.rational.to_f64().unwrap_or(f64::NAN) * (self.radicand as f64).sqrt()
    }
}

/// `b_{1,k} = sqrt(k) binom(2k-2, k-1) / 2^{2k-1}`.
pub fn cross_polytope_b(k: usize) -> Result<Surd> {
    if k == 0 {
        return domain("k must be at least 1");
    }
    let num = binomial(BigInt::from(2 * k - 2), BigInt::from(k - 1));
    let den = BigInt::one() << (2 * k - 1);
    Ok(Surd { rational: BigRational::new(num, den), radicand: k as u64 })
}

/// `A_{1,n,0}(u^(k)) = n sqrt(k) binom(2k-2, k-1) / 2^{2k-1}`.
pub fn cross_polytope_a0(n: usize, k: usize) -> Result<Surd> {
    if k == 0 || k > n {
        return domain(format!("k must lie in [1, {n}], got {k}"));
    }
    let b = cross_polytope_b(k)?;
    Ok(Surd { rational: b.rational * BigRational::from_integer(n.into()), radicand: b.radicand })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainEntry {
    pub k: usize,
    pub value: f64,
    pub err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub t: f64,
    pub method: ConstantMethod,
    pub entries: Vec<ChainEntry>,
    /// Gap `value_k - value_{k+1}` divided by its combined error.
    pub margins: Vec<f64>,
    pub strictly_decreasing: bool,
}

/// Strict decrease of the profile along `u^(1), ..., u^(n)`.
///
/// At `t = 0` the values are deterministic (exact for `p = 1`, Fourier
/// otherwise) and each gap must exceed its combined error. At `t > 0` the
/// values of `M` come from one common-random-number run and each gap must
/// exceed 3 standard errors.
pub fn chain_check(params: BallParams, t: f64, spec: QuadratureSpec, budget: McBudget, stream: RngStream) -> Result<ChainReport> {
    params.require_below_two()?;
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("t must be nonnegative and finite, got {t}"));
    }
    let n = params.n;
    if t == 0.0 {
        let (entries, method) = if params.p == 1.0 {
            let e = (1..=n)
                .map(|k| cross_polytope_a0(n, k).map(|s| ChainEntry { k, value: s.to_f64(), err: 0.0 }))
                .collect::<Result<Vec<_>>>()?;
            (e, ConstantMethod::ClosedForm)
        } else {
            let e = (1..=n)
                .map(|k| endpoint_a0(params, k, spec).map(|(value, err)| ChainEntry { k, value, err }))
                .collect::<Result<Vec<_>>>()?;
            (e, ConstantMethod::Fourier)
        };
        let margins: Vec<f64> = entries
            .windows(2)
            .map(|w| {
                let gap = w[0].value - w[1].value;
                let err = w[0].err + w[1].err;
                if err > 0.0 {
                    gap / err
                } else if gap > 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let strictly_decreasing = entries.windows(2).zip(&margins).all(|(w, m)| w[0].value > w[1].value && *m > 1.0);
        return Ok(ChainReport { t, method, entries, margins, strictly_decreasing });
    }
    let dirs = (1..=n).map(|k| Direction::canonical(n, k)).collect::<Result<Vec<_>>>()?;
    let cmp = compare_directions(params, t, &dirs, budget, stream)?;
    let entries = cmp
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| ChainEntry { k: i + 1, value: v.value, err: v.err })
        .collect();
    let margins: Vec<f64> = (0..cmp.gaps.len()).map(|i| cmp.gap_in_se(i)).collect();
    let strictly_decreasing = margins.iter().all(|m| *m > 3.0);
    Ok(ChainReport { t, method: ConstantMethod::MonteCarlo, entries, margins, strictly_decreasing })
}
