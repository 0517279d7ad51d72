//! Beta-trapezoid and two-interval lemmas, and the centered and dual layer
//! inequalities.
//!
//! For `B > 0`, `u(s) = (1 - s^p)^alpha`, `G = B u - s` and `H = B u + s`.
//! The centered inequality compares the endpoint sums over roots of
//! `|G| = L` and `H = L` with the bulk `int s (1 - s^p)^delta` over
//! `{|G| < L < H}`.

use crate::error::{domain, Result};
use crate::scalar_math::{bisect, integrate_adaptive, QuadratureSpec, RngStream};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

/// Relative level shift used for tangencies and endpoint roots.
pub const LEVEL_PERTURBATION: f64 = 1e-9;
const TANGENCY_TOL: f64 = 1e-12;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return domain(format!("alpha must lie in (1/2, 1), got {alpha}"));
    }
    Ok(())
}

fn check_exponent(alpha: f64, delta: f64) -> Result<()> {
    if !(delta >= 3.0 * alpha - 1e-12) || !delta.is_finite() {
        return domain(format!("exponent must be at least 3 alpha = {}, got {delta}", 3.0 * alpha));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapezoidReport {
    pub lhs: f64,
    pub lhs_err: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// `alpha int_a^b t^{2 alpha - 1} (1-t)^delta dt` against
/// `(b^{2 alpha} - a^{2 alpha}) ((1-a)^delta + (1-b)^delta) / 4`.
pub fn beta_trapezoid_check(alpha: f64, delta: f64, a: f64, b: f64, spec: QuadratureSpec) -> Result<TrapezoidReport> {
    check_alpha(alpha)?;
    check_exponent(alpha, delta)?;
    if !(0.0 <= a && a <= b && b <= 1.0) {
        return domain(format!("need 0 <= a <= b <= 1, got a = {a}, b = {b}"));
    }
    let q = integrate_adaptive(|t: f64| t.powf(2.0 * alpha - 1.0) * (1.0 - t).powf(delta), a, b, spec)?;
    let lhs = alpha * q.value;
    let rhs = 0.25 * (b.powf(2.0 * alpha) - a.powf(2.0 * alpha)) * ((1.0 - a).powf(delta) + (1.0 - b).powf(delta));
    let lhs_err = alpha * q.err_bound;
    Ok(TrapezoidReport { lhs, lhs_err, rhs, slack: rhs - lhs, holds: lhs <= rhs + lhs_err })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoIntervalReport {
    pub q_xy: f64,
    pub q_yx: f64,
    /// Decided in exact rational arithmetic on the binary values of the inputs.
    pub holds: bool,
}

/// `Q_ell(x, y) = Phi_ell(B y - x) - Phi_ell(B y + x)` with `Phi_ell(t) = (ell^2 - t^2)_+`.
pub fn two_interval_q(ell: f64, b_coef: f64, x: f64, y: f64) -> f64 {
    let phi = |t: f64| (ell * ell - t * t).max(0.0);
    phi(b_coef * y - x) - phi(b_coef * y + x)
}

fn exact(v: f64) -> Result<BigRational> {
    BigRational::from_f64(v).ok_or_else(|| crate::error::Error::Domain(format!("non-finite input {v}")))
}

pub fn two_interval_check(ell: f64, b_coef: f64, x: f64, y: f64) -> Result<TwoIntervalReport> {
    if !(ell >= 0.0 && (0.0..=1.0).contains(&b_coef) && 0.0 <= x && x <= y && y.is_finite() && ell.is_finite()) {
        return domain(format!("need ell >= 0, 0 <= B <= 1, 0 <= x <= y; got ell={ell}, B={b_coef}, x={x}, y={y}"));
    }
    let (l, b, xr, yr) = (exact(ell)?, exact(b_coef)?, exact(x)?, exact(y)?);
    let phi = |t: BigRational| {
        let v = &l * &l - &t * &t;
        if v.is_positive() {
            v
        } else {
            BigRational::zero()
        }
    };
    let q = |u: &BigRational, w: &BigRational| phi(&b * w - u) - phi(&b * w + u);
    let (q_xy, q_yx) = (q(&xr, &yr), q(&yr, &xr));
    Ok(TwoIntervalReport {
        q_xy: q_xy.to_f64().unwrap_or(f64::NAN),
        q_yx: q_yx.to_f64().unwrap_or(f64::NAN),
        holds: q_xy >= q_yx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootEquation {
    /// `G = L`.
    GPlus,
    /// `G = -L`.
    GMinus,
    /// `H = L`.
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Monotone,
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerRoot {
    pub s: f64,
    pub equation: RootEquation,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// Opened by `G = L`, closed by `G = -L`.
    Central,
    /// Opened by `H = L`, closed by `G = -L`.
    Mixed,
    /// Closed by the decreasing branch of `H = L`.
    Cap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerComponent {
    pub start: f64,
    pub end: f64,
    pub kind: ComponentKind,
}

/// One instance of the centered layer inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerScenario {
    pub alpha: f64,
    /// `delta` of the centered form.
    pub exponent: f64,
    /// `B`.
    pub coefficient: f64,
    /// `L`.
    pub level: f64,
    pub roots: Vec<LayerRoot>,
    pub components: Vec<LayerComponent>,
    /// A root is an endpoint or a double root; the inequality is then read as a limit.
    pub tangency: bool,
}

impl LayerScenario {
    pub fn new(alpha: f64, exponent: f64, coefficient: f64, level: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_exponent(alpha, exponent)?;
        if !(coefficient > 0.0 && coefficient.is_finite()) {
            return domain(format!("coefficient B must be positive, got {coefficient}"));
        }
        if !(level > 0.0 && level.is_finite()) {
            return domain(format!("level L must be positive, got {level}"));
        }
        Ok(Self { alpha, exponent, coefficient, level, roots: Vec::new(), components: Vec::new(), tangency: false })
    }

    fn p(&self) -> f64 {
        1.0 / self.alpha
    }

    fn u(&self, s: f64) -> f64 {
        (1.0 - s.powf(self.p())).max(0.0).powf(self.alpha)
    }

    pub fn g(&self, s: f64) -> f64 {
        self.coefficient * self.u(s) - s
    }

    pub fn h(&self, s: f64) -> f64 {
        self.coefficient * self.u(s) + s
    }

    /// `H'(s) = 1 - B s^{p-1} (1 - s^p)^{alpha - 1}`.
    fn h_prime(&self, s: f64) -> f64 {
        let one_minus = 1.0 - s.powf(self.p());
        if one_minus <= 0.0 {
            return f64::NEG_INFINITY;
        }
        1.0 - self.coefficient * s.powf(self.p() - 1.0) * one_minus.powf(self.alpha - 1.0)
    }

    fn active(&self, s: f64) -> bool {
        self.g(s).abs() < self.level && self.level < self.h(s)
    }

    /// `(1 - s^p)^{delta + alpha} / |G'(s)|` (for `GPlus`/`GMinus`) or `/ |H'(s)|`.
    fn endpoint_weight(&self, root: &LayerRoot) -> f64 {
        let s = root.s;
        let one_minus = (1.0 - s.powf(self.p())).max(0.0);
        let slope = self.coefficient * s.powf(self.p() - 1.0);
        let base = one_minus.powf(1.0 - self.alpha);
        let denom = match root.equation {
            RootEquation::GPlus | RootEquation::GMinus => base + slope,
            RootEquation::H => (base - slope).abs(),
        };
        one_minus.powf(self.exponent + 1.0) / denom
    }
}

/// Roots of `|G| = L` and `H = L` on `[0, 1]` and the components of the active set.
pub fn layer_roots(scenario: &LayerScenario) -> Result<LayerScenario> {
    let mut sc = LayerScenario::new(scenario.alpha, scenario.exponent, scenario.coefficient, scenario.level)?;
    let (b, l) = (sc.coefficient, sc.level);
    let near = |x: f64, y: f64| (x - y).abs() <= TANGENCY_TOL * x.abs().max(y.abs()).max(1.0);
    let mut roots = Vec::new();
    if b > l {
        roots.push(LayerRoot { s: bisect(|s| sc.g(s) - l, 0.0, 1.0), equation: RootEquation::GPlus, branch: Branch::Monotone });
    }
    if l < 1.0 {
        roots.push(LayerRoot { s: bisect(|s| sc.g(s) + l, 0.0, 1.0), equation: RootEquation::GMinus, branch: Branch::Monotone });
    }
    let s_c = bisect(|s| sc.h_prime(s), 0.0, 1.0);
    let h_max = sc.h(s_c);
    if b < l && l < h_max {
        roots.push(LayerRoot { s: bisect(|s| sc.h(s) - l, 0.0, s_c), equation: RootEquation::H, branch: Branch::Increasing });
    }
    if 1.0 < l && l < h_max {
        roots.push(LayerRoot { s: bisect(|s| sc.h(s) - l, s_c, 1.0), equation: RootEquation::H, branch: Branch::Decreasing });
    }
    sc.tangency = near(l, b) || near(l, 1.0) || near(l, h_max);
    roots.sort_by(|x, y| x.s.total_cmp(&y.s));

    let mut cuts: Vec<f64> = vec![0.0];
    cuts.extend(roots.iter().map(|r| r.s));
    cuts.push(1.0);
    let mut components: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        if w[1] <= w[0] || !sc.active(0.5 * (w[0] + w[1])) {
            continue;
        }
        match components.last_mut() {
            Some(last) if last.1 == w[0] => last.1 = w[1],
            _ => components.push((w[0], w[1])),
        }
    }
    let at = |s: f64| roots.iter().find(|r| r.s == s).copied();
    sc.components = components
        .into_iter()
        .map(|(start, end)| {
            let kind = match (at(start).map(|r| r.equation), at(end).map(|r| r.equation)) {
                (_, Some(RootEquation::H)) => ComponentKind::Cap,
                (Some(RootEquation::GPlus), _) => ComponentKind::Central,
                _ if l > 1.0 => ComponentKind::Cap,
                _ => ComponentKind::Mixed,
            };
            LayerComponent { start, end, kind }
        })
        .collect();
    sc.roots = roots;
    Ok(sc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentTally {
    pub kind: ComponentKind,
    pub start: f64,
    pub end: f64,
    /// `L B` times the weights of the two bounding roots.
    pub endpoint: f64,
    pub bulk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerSide {
    pub level: f64,
    pub endpoint_sum: f64,
    pub bulk: f64,
    pub bulk_err: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WclReport {
    pub scenario: LayerScenario,
    pub endpoint_sum: f64,
    pub bulk: f64,
    pub bulk_err: f64,
    pub slack: f64,
    pub components: Vec<ComponentTally>,
    /// Evaluations at `L (1 -+ 1e-9)` when the scenario has a tangency.
    pub perturbed: Vec<LayerSide>,
    pub holds: bool,
}

fn bulk_integral(alpha: f64, delta: f64, a: f64, b: f64, spec: QuadratureSpec) -> Result<(f64, f64)> {
    let p = 1.0 / alpha;
    let q = integrate_adaptive(|s: f64| s * (1.0 - s.powf(p)).max(0.0).powf(delta), a, b, spec)?;
    Ok((q.value, q.err_bound))
}

fn side_holds(endpoint: f64, bulk: f64, err: f64) -> bool {
    endpoint >= bulk - err - 1e-12 * bulk.abs().max(1e-300)
}

fn evaluate(sc: &LayerScenario, spec: QuadratureSpec) -> Result<(f64, f64, f64, Vec<ComponentTally>)> {
    let lb = sc.level * sc.coefficient;
    let endpoint_sum = lb * sc.roots.iter().map(|r| sc.endpoint_weight(r)).sum::<f64>();
    let mut bulk = 0.0;
    let mut bulk_err = 0.0;
    let mut tallies = Vec::with_capacity(sc.components.len());
    for c in &sc.components {
        let (v, e) = bulk_integral(sc.alpha, sc.exponent, c.start, c.end, spec)?;
        bulk += v;
        bulk_err += e;
        let endpoint = lb * sc.roots.iter().filter(|r| r.s == c.start || r.s == c.end).map(|r| sc.endpoint_weight(r)).sum::<f64>();
        tallies.push(ComponentTally { kind: c.kind, start: c.start, end: c.end, endpoint, bulk: v });
    }
    Ok((endpoint_sum, bulk, bulk_err, tallies))
}

/// Endpoint sums against the bulk for one centered scenario.
pub fn wcl_check(scenario: &LayerScenario, spec: QuadratureSpec) -> Result<WclReport> {
    let sc = layer_roots(scenario)?;
    let (endpoint_sum, bulk, bulk_err, components) = evaluate(&sc, spec)?;
    let mut perturbed = Vec::new();
    let mut holds = side_holds(endpoint_sum, bulk, bulk_err);
    if sc.tangency {
        for sign in [-1.0, 1.0] {
            let level = sc.level * (1.0 + sign * LEVEL_PERTURBATION);
            let shifted = layer_roots(&LayerScenario::new(sc.alpha, sc.exponent, sc.coefficient, level)?)?;
            let (e, b, err, _) = evaluate(&shifted, spec)?;
            let ok = side_holds(e, b, err);
            perturbed.push(LayerSide { level, endpoint_sum: e, bulk: b, bulk_err: err, holds: ok });
        }
        holds = perturbed.iter().all(|s| s.holds);
    }
    Ok(WclReport { endpoint_sum, bulk, bulk_err, slack: endpoint_sum - bulk, components, perturbed, holds, scenario: sc })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DltReport {
    pub alpha: f64,
    pub beta: f64,
    pub a_coef: f64,
    pub x_level: f64,
    /// Roots of `|g| = x` and `h = x`, found directly.
    pub roots: Vec<f64>,
    pub direct_endpoint: f64,
    pub direct_bulk: f64,
    /// `A` times the centered endpoint sum and bulk at `B = x/A`, `L = 1/A`.
    pub mapped_endpoint: Option<f64>,
    pub mapped_bulk: Option<f64>,
    /// Largest relative disagreement between the two routes, read at
    /// `x (1 -+ 1e-9)` when the level is a tangency.
    pub route_gap: f64,
    pub tangency: bool,
    pub holds: bool,
}

/// Dual layer inequality for `h = (1 + A s)/u`, `g = (1 - A s)/u`, checked
/// directly and through the centered form with `delta = beta + alpha - 1`.
pub fn dlt_check(alpha: f64, beta: f64, a_coef: f64, x_level: f64, spec: QuadratureSpec) -> Result<DltReport> {
    check_alpha(alpha)?;
    if !(beta >= 1.0 + 2.0 * alpha - 1e-12) || !beta.is_finite() {
        return domain(format!("beta must be at least 1 + 2 alpha = {}, got {beta}", 1.0 + 2.0 * alpha));
    }
    if !(a_coef >= 0.0 && a_coef.is_finite()) {
        return domain(format!("A must be nonnegative, got {a_coef}"));
    }
    if !(x_level > 0.0 && x_level.is_finite()) {
        return domain(format!("x must be positive, got {x_level}"));
    }
    let delta = beta + alpha - 1.0;
    let a = a_coef;
    let direct = dual_direct(alpha, delta, a, x_level, spec)?;
    let mut report = DltReport {
        alpha,
        beta,
        a_coef,
        x_level,
        roots: direct.roots.clone(),
        direct_endpoint: direct.endpoint,
        direct_bulk: direct.bulk,
        mapped_endpoint: None,
        mapped_bulk: None,
        route_gap: 0.0,
        tangency: false,
        holds: side_holds(direct.endpoint, direct.bulk, direct.bulk_err),
    };
    if a == 0.0 {
        return Ok(report);
    }
    let wcl = wcl_check(&LayerScenario::new(alpha, delta, x_level / a, 1.0 / a)?, spec)?;
    report.mapped_endpoint = Some(a * wcl.endpoint_sum);
    report.mapped_bulk = Some(a * wcl.bulk);
    report.tangency = wcl.scenario.tangency;
    let levels = if report.tangency {
        vec![x_level * (1.0 - LEVEL_PERTURBATION), x_level * (1.0 + LEVEL_PERTURBATION)]
    } else {
        vec![x_level]
    };
    let rel = |u: f64, v: f64| (u - v).abs() / u.abs().max(v.abs()).max(1.0);
    let mut direct_holds = true;
    for x in levels {
        let d = if x == x_level { direct.clone() } else { dual_direct(alpha, delta, a, x, spec)? };
        let mapped = layer_roots(&LayerScenario::new(alpha, delta, x / a, 1.0 / a)?)?;
        let (me, mb, _, _) = evaluate(&mapped, spec)?;
        report.route_gap = report.route_gap.max(rel(d.endpoint, a * me)).max(rel(d.bulk, a * mb));
        direct_holds &= side_holds(d.endpoint, d.bulk, d.bulk_err);
    }
    report.holds = wcl.holds && direct_holds;
    Ok(report)
}

#[derive(Debug, Clone)]
struct DualSide {
    roots: Vec<f64>,
    endpoint: f64,
    bulk: f64,
    bulk_err: f64,
}

fn dual_direct(alpha: f64, delta: f64, a: f64, x: f64, spec: QuadratureSpec) -> Result<DualSide> {
    let p = 1.0 / alpha;
    let u = |s: f64| (1.0 - s.powf(p)).max(0.0).powf(alpha);
    let h = |s: f64| (1.0 + a * s) / u(s);
    let g = |s: f64| (1.0 - a * s) / u(s);

    // Scan in t = s^p, dense towards t = 1 where u vanishes.
    const GRID: usize = 4000;
    let mut ts: Vec<f64> = (0..GRID).map(|j| j as f64 / GRID as f64).collect();
    ts.extend((1..=56).map(|k| 1.0 - 10f64.powf(-(k as f64) / 4.0)));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let ss: Vec<f64> = ts.iter().map(|t| t.powf(alpha)).collect();
    let mut roots: Vec<(f64, bool)> = Vec::new();
    let targets: [(&dyn Fn(f64) -> f64, bool); 3] = [(&|s| h(s) - x, true), (&|s| g(s) - x, false), (&|s| g(s) + x, false)];
    for (f, on_h) in targets {
        for w in ss.windows(2) {
            let (fa, fb) = (f(w[0]), f(w[1]));
            if fa == 0.0 {
                roots.push((w[0], on_h));
            } else if fa * fb < 0.0 {
                roots.push((bisect(f, w[0], w[1]), on_h));
            }
        }
    }
    roots.sort_by(|r, q| r.0.total_cmp(&q.0));

    let weight = |s: f64, on_h: bool| {
        let one_minus = (1.0 - s.powf(p)).max(0.0);
        let sp1 = s.powf(p - 1.0);
        let denom = if on_h { a * one_minus + (1.0 + a * s) * sp1 } else { (-a * one_minus + (1.0 - a * s) * sp1).abs() };
        one_minus.powf(delta + alpha + 1.0) / denom
    };
    let endpoint = x * roots.iter().map(|&(s, on_h)| weight(s, on_h)).sum::<f64>();
    let mut cuts = vec![0.0];
    cuts.extend(roots.iter().map(|r| r.0));
    cuts.push(1.0);
    let mut bulk = 0.0;
    let mut bulk_err = 0.0;
    if a > 0.0 {
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if w[1] > w[0] && g(mid).abs() < x && x < h(mid) {
                let (v, e) = bulk_integral(alpha, delta, w[0], w[1], spec)?;
                bulk += a * v;
                bulk_err += a * e;
            }
        }
    }
    Ok(DualSide { roots: roots.iter().map(|r| r.0).collect(), endpoint, bulk, bulk_err })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub count: usize,
    pub passed: usize,
    pub perturbed: usize,
    pub min_relative_slack: f64,
    /// Largest direct-versus-mapped gap (dual sweeps only).
    pub max_route_gap: f64,
    pub failures: Vec<String>,
    pub holds: bool,
}

/// Random centered scenarios: `alpha` in `(0.55, 0.95)`, `delta` in
/// `[3 alpha, 3 alpha + 4]`, `B, L` in `(0, 3]`.
pub fn wcl_sweep(count: usize, stream: RngStream, spec: QuadratureSpec) -> Result<SweepReport> {
    let reports = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.substream(i as u64).generator();
            let alpha = 0.55 + 0.4 * rng.next_open01();
            let delta = 3.0 * alpha + 4.0 * rng.next_f64();
            let b = 3.0 * (1.0 - rng.next_f64());
            let l = 3.0 * (1.0 - rng.next_f64());
            wcl_check(&LayerScenario::new(alpha, delta, b, l)?, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let failures: Vec<String> = reports
        .iter()
        .filter(|r| !r.holds)
        .map(|r| {
            let s = &r.scenario;
            format!("alpha={} delta={} B={} L={}", s.alpha, s.exponent, s.coefficient, s.level)
        })
        .collect();
    let min_relative_slack = reports
        .iter()
        .filter(|r| r.bulk > 0.0)
        .map(|r| r.slack / r.bulk)
        .fold(f64::INFINITY, f64::min);
    Ok(SweepReport {
        count,
        passed: count - failures.len(),
        perturbed: reports.iter().filter(|r| r.scenario.tangency).count(),
        min_relative_slack,
        max_route_gap: 0.0,
        holds: failures.is_empty(),
        failures,
    })
}

/// Random dual scenarios: `alpha` in `(0.55, 0.95)`, `beta` in
/// `[1 + 2 alpha, 5 + 2 alpha]`, `A` in `[0, 3]`, `x` in `(0, 3]`.
pub fn dlt_sweep(count: usize, stream: RngStream, spec: QuadratureSpec) -> Result<SweepReport> {
    let reports = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.substream(i as u64).generator();
            let alpha = 0.55 + 0.4 * rng.next_open01();
            let beta = 1.0 + 2.0 * alpha + 4.0 * rng.next_f64();
            let a = 3.0 * rng.next_f64();
            let x = 3.0 * (1.0 - rng.next_f64());
            dlt_check(alpha, beta, a, x, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let failures: Vec<String> = reports
        .iter()
        .filter(|r| !r.holds)
        .map(|r| format!("alpha={} beta={} A={} x={}", r.alpha, r.beta, r.a_coef, r.x_level))
        .collect();
    let min_relative_slack = reports
        .iter()
        .filter(|r| r.direct_bulk > 0.0)
        .map(|r| (r.direct_endpoint - r.direct_bulk) / r.direct_bulk)
        .fold(f64::INFINITY, f64::min);
    Ok(SweepReport {
        count,
        passed: count - failures.len(),
        perturbed: reports.iter().filter(|r| r.tangency).count(),
        min_relative_slack,
        max_route_gap: reports.iter().map(|r| r.route_gap).fold(0.0, f64::max),
        holds: failures.is_empty(),
        failures,
    })
}
