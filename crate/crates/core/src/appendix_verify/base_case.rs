//! Lower stop-loss monotonicity on the planar `l_p` ball along the path
//! `theta(phi) = (cos phi, sin phi)`, `0 <= phi <= pi/4`.

use super::layers::two_interval_q;
use super::{integrate_split, scan_roots};
use crate::error::{domain, Result};
use crate::scalar_math::{bisect, QuadratureSpec};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::FRAC_PI_4;

const FD_STEP: f64 = 1e-4;
const IDENTITY_TOL: f64 = 1e-6;
const SATURATED_TOL: f64 = 1e-9;

/// `||theta(phi)||_q`, the largest value of `<theta, x>` on the ball.
fn support(p: f64, phi: f64) -> f64 {
    let q = p / (p - 1.0);
    (phi.cos().abs().powf(q) + phi.sin().abs().powf(q)).powf(1.0 / q)
}

/// Length of the chord `{x in B_p : <theta(phi), x> = y}`.
fn chord_length(p: f64, phi: f64, y: f64) -> f64 {
    let (sn, cs) = phi.sin_cos();
    let g = |s: f64| (y * cs - s * sn).abs().powf(p) + (y * sn + s * cs).abs().powf(p) - 1.0;
    let slope = |s: f64| {
        let (x1, x2) = (y * cs - s * sn, y * sn + s * cs);
        -sn * x1.signum() * x1.abs().powf(p - 1.0) + cs * x2.signum() * x2.abs().powf(p - 1.0)
    };
    let centre = bisect(slope, -2.0, 2.0);
    if g(centre) >= 0.0 {
        return 0.0;
    }
    bisect(g, centre, 2.0) - bisect(g, -2.0, centre)
}

/// `F_rho(phi) = int_{B_p} (rho^2 - <theta(phi), x>^2)_+ dx`, iterated with the
/// outer variable `y = <theta, x>` written as `y = h - w^2`.
pub fn stop_loss_profile(p: f64, phi: f64, rho: f64, spec: QuadratureSpec) -> Result<(f64, f64)> {
    let h = support(p, phi);
    let top = rho.min(h);
    let w_of = |y: f64| (h - y).max(0.0).sqrt();
    let mut cuts = vec![w_of(top), h.sqrt()];
    for y in [phi.cos().abs(), phi.sin().abs()] {
        if y < top {
            cuts.push(w_of(y));
        }
    }
    let (v, e) = integrate_split(
        |w| {
            let y = h - w * w;
            (rho * rho - y * y) * chord_length(p, phi, y) * 2.0 * w
        },
        cuts,
        spec,
    )?;
    Ok((2.0 * v, 2.0 * e))
}

/// `-F_rho'(phi)` from the boundary integral over `t` in `[0, 1/2]`.
pub fn boundary_derivative(p: f64, phi: f64, rho: f64, spec: QuadratureSpec) -> Result<(f64, f64)> {
    let alpha = 1.0 / p;
    let a = phi.cos();
    let b_coef = phi.tan();
    let ell = rho / a;
    let pair = |t: f64| (t.powf(alpha), (1.0 - t).powf(alpha));
    let mut cuts = vec![0.0, 0.5];
    let levels: [fn(f64, f64, f64) -> f64; 4] =
        [|b, x, y| (b * y - x).abs(), |b, x, y| b * y + x, |b, x, y| (b * x - y).abs(), |b, x, y| b * x + y];
    for level in levels {
        cuts.extend(scan_roots(
            |t| {
                let (x, y) = pair(t);
                level(b_coef, x, y) - ell
            },
            0.0,
            0.5,
            400,
        ));
    }
    let (v, e) = integrate_split(
        |t| {
            let (x, y) = pair(t);
            let weight = (1.0 - t).powf(2.0 * alpha - 1.0) - t.powf(2.0 * alpha - 1.0);
            weight * (two_interval_q(ell, b_coef, x, y) - two_interval_q(ell, b_coef, y, x))
        },
        cuts,
        spec,
    )?;
    let scale = 2.0 * a * a * alpha;
    Ok((scale * v, scale * e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseCaseRow {
    pub rho: f64,
    pub phi: f64,
    pub value: f64,
    pub value_err: f64,
    /// `-F'` by central differences with step `1e-4`.
    pub fd_derivative: f64,
    /// `-F'` from the boundary identity.
    pub identity_derivative: f64,
    pub identity_err: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseCaseReport {
    pub p: f64,
    pub rows: Vec<BaseCaseRow>,
    /// `F_rho` nonincreasing along the grid for every `rho`.
    pub monotone: bool,
    pub identity_nonnegative: bool,
    pub max_gap: f64,
    /// Largest spread of `F_rho` across the grid among `rho` at or above every
    /// support value, where the positive part never binds.
    pub saturated_spread: Option<f64>,
    pub holds: bool,
}

pub fn base_case_check(p: f64, phi_grid: &[f64], rho_grid: &[f64], spec: QuadratureSpec) -> Result<BaseCaseReport> {
    if !(p > 1.0 && p < 2.0) {
        return domain(format!("p must lie in (1, 2), got {p}"));
    }
    if phi_grid.is_empty() || phi_grid.iter().any(|f| !(*f >= 0.0 && *f <= FRAC_PI_4 + 1e-15)) {
        return domain("phi grid must be nonempty and inside [0, pi/4]");
    }
    if rho_grid.is_empty() || rho_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return domain("rho grid must be nonempty and positive");
    }
    let mut phis = phi_grid.to_vec();
    phis.sort_by(f64::total_cmp);
    let cells: Vec<(f64, f64)> = rho_grid.iter().flat_map(|&r| phis.iter().map(move |&f| (r, f))).collect();
    let rows = cells
        .par_iter()
        .map(|&(rho, phi)| {
            let (value, value_err) = stop_loss_profile(p, phi, rho, spec)?;
            let fwd = stop_loss_profile(p, phi + FD_STEP, rho, spec)?.0;
            let back = stop_loss_profile(p, phi - FD_STEP, rho, spec)?.0;
            let fd_derivative = -(fwd - back) / (2.0 * FD_STEP);
            let (identity_derivative, identity_err) = boundary_derivative(p, phi, rho, spec)?;
            Ok(BaseCaseRow {
                rho,
                phi,
                value,
                value_err,
                fd_derivative,
                identity_derivative,
                identity_err,
                gap: (fd_derivative - identity_derivative).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let per_rho = rows.chunks(phis.len());
    let monotone = per_rho
        .clone()
        .all(|c| c.windows(2).all(|w| w[1].value <= w[0].value + w[0].value_err + w[1].value_err + 1e-12));
    let identity_nonnegative = rows.iter().all(|r| r.identity_derivative >= -r.identity_err - 1e-12);
    let max_gap = rows.iter().map(|r| r.gap).fold(0.0, f64::max);
    let reach = phis.iter().map(|&f| support(p, f)).fold(0.0, f64::max);
    let saturated_spread = per_rho
        .filter(|c| c[0].rho >= reach)
        .map(|c| {
            let (lo, hi) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.value), hi.max(r.value)));
            hi - lo
        })
        .reduce(f64::max);
    let holds = monotone && identity_nonnegative && max_gap <= IDENTITY_TOL && saturated_spread.is_none_or(|s| s <= SATURATED_TOL);
    Ok(BaseCaseReport { p, rows, monotone, identity_nonnegative, max_gap, saturated_spread, holds })
}

/// The five-point grid `{0, pi/16, pi/8, 3pi/16, pi/4}`.
pub fn default_phi_grid() -> Vec<f64> {
    (0..5).map(|j| j as f64 * FRAC_PI_4 / 4.0).collect()
}
