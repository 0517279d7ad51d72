//! The quadratic-layer second-derivative identity and the beta-Rademacher
//! append step `Y -> (1-T)^alpha Y + c T^alpha eps`, `T ~ Beta(alpha, beta)`.

use crate::error::{domain, Result};
use super::{integrate_split, scan_roots};
use crate::scalar_math::{ln_beta, QuadratureSpec};
use rayon::prelude::*;
use serde::Serialize;

/// The data `L, D, W` of a quadratic layer on `[0, r_max]`, with derivatives.
#[derive(Debug, Clone, Copy)]
pub struct LayerFunctions {
    pub l: fn(f64) -> f64,
    pub l_prime: fn(f64) -> f64,
    pub d: fn(f64) -> f64,
    pub d_prime: fn(f64) -> f64,
    pub w: fn(f64) -> f64,
    pub r_max: f64,
}

impl LayerFunctions {
    /// `L = 1`, `D = 0`, `W = 1` on `[0, 1]`, so `F(x) = (1 - x^2)_+`.
    pub fn single_layer() -> Self {
        Self { l: |_| 1.0, l_prime: |_| 0.0, d: |_| 0.0, d_prime: |_| 0.0, w: |_| 1.0, r_max: 1.0 }
    }

    /// `L = 1 + R^2`, `D = R`, `W = exp(-R)` on `[0, 2]`.
    pub fn smooth_example() -> Self {
        Self {
            l: |r| 1.0 + r * r,
            l_prime: |r| 2.0 * r,
            d: |r| r,
            d_prime: |_| 1.0,
            w: |r| (-r).exp(),
            r_max: 2.0,
        }
    }

    fn sum(&self, r: f64) -> f64 {
        (self.l)(r) + (self.d)(r)
    }

    fn diff(&self, r: f64) -> f64 {
        (self.l)(r) - (self.d)(r)
    }
}

const SCAN: usize = 2000;

/// Roots of `L + D = x` and `|L - D| = x` on the layer interval.
fn level_roots(case: &LayerFunctions, x: f64) -> (Vec<f64>, Vec<f64>) {
    let plus = scan_roots(|r| case.sum(r) - x, 0.0, case.r_max, SCAN);
    let mut minus = scan_roots(|r| case.diff(r) - x, 0.0, case.r_max, SCAN);
    minus.extend(scan_roots(|r| case.diff(r) + x, 0.0, case.r_max, SCAN));
    (plus, minus)
}

/// `F(x) = int W (1/2) ((L^2 - (x + D)^2)_+ + (L^2 - (x - D)^2)_+) dR`.
pub fn layer_profile(case: &LayerFunctions, x: f64, spec: QuadratureSpec) -> Result<f64> {
    let (plus, minus) = level_roots(case, x);
    let mut cuts = vec![0.0, case.r_max];
    cuts.extend(plus);
    cuts.extend(minus);
    let f = |r: f64| {
        let (l, d) = ((case.l)(r), (case.d)(r));
        (case.w)(r) * 0.5 * ((l * l - (x + d) * (x + d)).max(0.0) + (l * l - (x - d) * (x - d)).max(0.0))
    };
    Ok(integrate_split(f, cuts, spec)?.0)
}

/// Endpoint sums minus bulk: the right side of the identity for `4 x^3 G''(x^2)`.
pub fn layer_formula(case: &LayerFunctions, x: f64, spec: QuadratureSpec) -> Result<f64> {
    let (plus, minus) = level_roots(case, x);
    let wl = |r: f64| (case.w)(r) * (case.l)(r);
    let endpoint_plus: f64 = plus.iter().map(|&r| wl(r) / ((case.l_prime)(r) + (case.d_prime)(r)).abs()).sum();
    let endpoint_minus: f64 = minus.iter().map(|&r| wl(r) / ((case.l_prime)(r) - (case.d_prime)(r)).abs()).sum();
    let mut cuts = vec![0.0, case.r_max];
    cuts.extend(plus);
    cuts.extend(minus);
    let bulk = integrate_split(
        |r| {
            if case.diff(r).abs() < x && x < case.sum(r) {
                (case.w)(r) * (case.d)(r)
            } else {
                0.0
            }
        },
        cuts,
        spec,
    )?
    .0;
    Ok(x * (endpoint_plus + endpoint_minus) - bulk)
}

/// Levels `x` at which `G''` may jump: values of `L + D` and `|L - D|` at the
/// interval ends and at their critical points.
fn kink_levels(case: &LayerFunctions) -> Vec<f64> {
    let mut out = Vec::new();
    for r in [0.0, case.r_max] {
        out.push(case.sum(r));
        out.push(case.diff(r).abs());
    }
    let sum_prime = |r: f64| (case.l_prime)(r) + (case.d_prime)(r);
    let diff_prime = |r: f64| (case.l_prime)(r) - (case.d_prime)(r);
    for r in scan_roots(sum_prime, 0.0, case.r_max, SCAN) {
        out.push(case.sum(r));
    }
    for r in scan_roots(diff_prime, 0.0, case.r_max, SCAN) {
        out.push(case.diff(r).abs());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondDerivativeRow {
    pub x: f64,
    /// `4 x^3 G''(q)` from a five-point stencil in `q = x^2`.
    pub finite_difference: f64,
    pub formula: f64,
    pub gap: f64,
    /// The stencil could not be kept clear of a level where `G''` jumps.
    pub near_kink: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondDerivativeReport {
    pub rows: Vec<SecondDerivativeRow>,
    pub max_gap: f64,
    pub holds: bool,
}

/// Compares both sides of the identity at each `x`; rows whose stencil
/// straddles a kink level even after refinement are reported but not judged.
pub fn second_derivative_identity_check(case: &LayerFunctions, xs: &[f64], spec: QuadratureSpec) -> Result<SecondDerivativeReport> {
    if !(case.r_max > 0.0 && case.r_max.is_finite()) {
        return domain(format!("layer interval must be [0, R] with R > 0, got R = {}", case.r_max));
    }
    if let Some(bad) = xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return domain(format!("levels must be positive, got {bad}"));
    }
    let kinks = kink_levels(case);
    let rows = xs
        .par_iter()
        .map(|&x| {
            let q = x * x;
            let mut hq = 0.01 * q;
            let clear = |h: f64| {
                let (lo, hi) = ((q - 2.0 * h).max(0.0).sqrt(), (q + 2.0 * h).sqrt());
                !kinks.iter().any(|k| *k >= lo && *k <= hi)
            };
            let mut refinements = 0;
            while !clear(hq) && refinements < 12 {
                hq *= 0.25;
                refinements += 1;
            }
            let near_kink = !clear(hq);
            let g = |k: f64| layer_profile(case, (q + k * hq).sqrt(), spec);
            let second = (-g(2.0)? + 16.0 * g(1.0)? - 30.0 * g(0.0)? + 16.0 * g(-1.0)? - g(-2.0)?) / (12.0 * hq * hq);
            let finite_difference = 4.0 * x * x * x * second;
            let formula = layer_formula(case, x, spec)?;
            Ok(SecondDerivativeRow { x, finite_difference, formula, gap: (finite_difference - formula).abs(), near_kink })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_gap = rows.iter().filter(|r| !r.near_kink).map(|r| r.gap).fold(0.0, f64::max);
    Ok(SecondDerivativeReport { holds: max_gap <= 1e-6, max_gap, rows })
}

/// A finitely supported law given by `(value, probability)` atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteLaw {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteLaw {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return domain("a discrete law needs at least one atom");
        }
        if atoms.iter().any(|(v, w)| !v.is_finite() || !(*w >= 0.0)) {
            return domain("atoms need finite values and nonnegative probabilities");
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("probabilities must sum to 1, got {total}"));
        }
        Ok(Self { atoms })
    }

    pub fn point(value: f64) -> Self {
        Self { atoms: vec![(value, 1.0)] }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    fn squares(&self) -> Vec<(f64, f64)> {
        self.atoms.iter().map(|&(v, w)| (v * v, w)).collect()
    }

    fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|&(v, w)| w * v * v).sum()
    }
}

fn lower_stop_loss(law: &[(f64, f64)], a: f64) -> f64 {
    law.iter().map(|&(u, w)| w * (a - u).max(0.0)).sum()
}

/// `Y1^2 <=cx Y2^2` for discrete laws: equal means and lower stop-loss
/// dominance at every atom, where the stop-loss difference can change slope.
pub fn squares_convex_ordered(y1: &DiscreteLaw, y2: &DiscreteLaw) -> bool {
    let (u, v) = (y1.squares(), y2.squares());
    let scale = y1.second_moment().max(y2.second_moment()).max(1e-300);
    if (y1.second_moment() - y2.second_moment()).abs() > 1e-12 * scale {
        return false;
    }
    u.iter().chain(&v).all(|&(a, _)| lower_stop_loss(&u, a) <= lower_stop_loss(&v, a) + 1e-12 * scale)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendReport {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub rho_grid: Vec<f64>,
    /// `E (rho^2 - Y~_1^2)_+` per `rho`.
    pub lhs: Vec<f64>,
    /// `E (rho^2 - Y~_2^2)_+` per `rho`.
    pub rhs: Vec<f64>,
    pub err: Vec<f64>,
    /// `E Y~_1^2` and `E Y~_2^2` from the closed-form beta moments.
    pub second_moments: (f64, f64),
    /// `c^2 E T^{2 alpha}`, the common additive part of both second moments.
    pub shift: f64,
    /// `E (1-T)^{2 alpha}` by quadrature against its closed form.
    pub moment_check_gap: f64,
    pub holds: bool,
}

/// Parameters of the beta-Rademacher append step.
#[derive(Debug, Clone, Copy)]
struct AppendStep {
    alpha: f64,
    beta: f64,
    c: f64,
    /// `1 / (alpha B(alpha, beta))`.
    norm: f64,
}

impl AppendStep {
    /// `E_T f(T)` with `t = v^{1/alpha}`, which absorbs `t^{alpha - 1}`.
    fn expect<F: Fn(f64) -> f64>(&self, f: F, cuts: Vec<f64>, spec: QuadratureSpec) -> Result<(f64, f64)> {
        let (v, e) = integrate_split(
            |v: f64| {
                let t = v.powf(1.0 / self.alpha);
                (1.0 - t).powf(self.beta - 1.0) * f(t)
            },
            cuts,
            spec,
        )?;
        Ok((self.norm * v, self.norm * e))
    }

    /// `G(q) = E_{T, eps} (rho^2 - ((1-T)^alpha sqrt q + c T^alpha eps)^2)_+`.
    fn stop_loss(&self, rho: f64, q: f64, spec: QuadratureSpec) -> Result<(f64, f64)> {
        let y = q.sqrt();
        let arm = |v: f64, sign: f64| {
            let t = v.powf(1.0 / self.alpha);
            (1.0 - t).powf(self.alpha) * y + sign * self.c * t.powf(self.alpha)
        };
        let mut cuts = vec![0.0, 1.0];
        for sign in [1.0, -1.0] {
            cuts.extend(scan_roots(|v| arm(v, sign).abs() - rho, 0.0, 1.0, 400));
        }
        let a = self.alpha;
        self.expect(
            |t| {
                let base = (1.0 - t).powf(a) * y;
                let kick = self.c * t.powf(a);
                0.5 * ((rho * rho - (base + kick).powi(2)).max(0.0) + (rho * rho - (base - kick).powi(2)).max(0.0))
            },
            cuts,
            spec,
        )
    }
}

/// Lower stop-loss comparison of the appended squares on a grid of `rho`,
/// for discrete `Y1, Y2` with `Y1^2 <=cx Y2^2`.
pub fn append_lemma_check(
    alpha: f64,
    beta: f64,
    c: f64,
    y1_law: &DiscreteLaw,
    y2_law: &DiscreteLaw,
    spec: QuadratureSpec,
) -> Result<AppendReport> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return domain(format!("alpha must lie in (1/2, 1), got {alpha}"));
    }
    if !(beta >= 1.0 + 2.0 * alpha - 1e-12) || !beta.is_finite() {
        return domain(format!("beta must be at least 1 + 2 alpha, got {beta}"));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return domain(format!("c must be nonnegative, got {c}"));
    }
    if !squares_convex_ordered(y1_law, y2_law) {
        return domain("the input laws must satisfy Y1^2 <=cx Y2^2");
    }
    let step = AppendStep { alpha, beta, c, norm: (-ln_beta(alpha, beta)).exp() / alpha };
    let b0 = ln_beta(alpha, beta);
    let e_tail = (ln_beta(alpha, beta + 2.0 * alpha) - b0).exp();
    let e_head = (ln_beta(3.0 * alpha, beta) - b0).exp();
    let (quad_tail, _) = step.expect(|t| (1.0 - t).powf(2.0 * alpha), vec![0.0, 1.0], spec)?;
    let shift = c * c * e_head;
    let second_moments = (e_tail * y1_law.second_moment() + shift, e_tail * y2_law.second_moment() + shift);

    let reach = y1_law.atoms.iter().chain(&y2_law.atoms).map(|a| a.0.abs()).fold(0.0, f64::max) + c;
    let rho_grid: Vec<f64> = (1..=24).map(|j| 1.1 * reach * j as f64 / 24.0).collect();
    let side = |law: &DiscreteLaw, rho: f64| -> Result<(f64, f64)> {
        law.atoms.iter().try_fold((0.0, 0.0), |(v, e), &(y, w)| {
            let (g, ge) = step.stop_loss(rho, y * y, spec)?;
            Ok((v + w * g, e + w * ge))
        })
    };
    let rows = rho_grid
        .par_iter()
        .map(|&rho| Ok((side(y1_law, rho)?, side(y2_law, rho)?)))
        .collect::<Result<Vec<_>>>()?;
    let lhs: Vec<f64> = rows.iter().map(|r| r.0 .0).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.1 .0).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.0 .1 + r.1 .1).collect();
    let holds = lhs.iter().zip(&rhs).zip(&err).all(|((l, r), e)| *l <= r + e + 1e-12);
    Ok(AppendReport {
        alpha,
        beta,
        c,
        rho_grid,
        lhs,
        rhs,
        err,
        second_moments,
        shift,
        moment_check_gap: (quad_tail - e_tail).abs(),
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::new(1e-13, 1e-12, 4000).unwrap()
    }

    #[test]
    fn single_layer_closed_form() {
        let case = LayerFunctions::single_layer();
        for x in [0.2, 0.5, 0.8] {
            assert!((layer_profile(&case, x, spec()).unwrap() - (1.0 - x * x)).abs() < 1e-13);
        }
        let r = second_derivative_identity_check(&case, &[0.3, 0.6], spec()).unwrap();
        assert!(r.holds, "{r:?}");
        for row in &r.rows {
            assert!(row.formula.abs() < 1e-12 && row.finite_difference.abs() < 1e-6);
        }
    }

    #[test]
    fn smooth_example_agrees() {
        let case = LayerFunctions::smooth_example();
        let r = second_derivative_identity_check(&case, &[0.7, 1.5, 2.5, 4.0], spec()).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.rows.iter().filter(|row| !row.near_kink).count() >= 3);
        let nontrivial = r.rows.iter().find(|row| row.x == 1.5).unwrap();
        assert!(nontrivial.formula.abs() > 1e-3, "{nontrivial:?}");
    }

    #[test]
    fn empty_layer_is_zero() {
        let case = LayerFunctions::smooth_example();
        let x = 8.0;
        assert_eq!(layer_profile(&case, x, spec()).unwrap(), 0.0);
        let r = second_derivative_identity_check(&case, &[x], spec()).unwrap();
        assert_eq!(r.rows[0].formula, 0.0);
        assert_eq!(r.rows[0].finite_difference, 0.0);
    }

    #[test]
    fn convex_order_of_discrete_squares() {
        let m = 0.6f64;
        let spread = DiscreteLaw::new(vec![((m * m - 0.2).sqrt(), 0.5), ((m * m + 0.2).sqrt(), 0.5)]).unwrap();
        assert!(squares_convex_ordered(&DiscreteLaw::point(m), &spread));
        assert!(!squares_convex_ordered(&spread, &DiscreteLaw::point(m)));
        assert!(DiscreteLaw::new(vec![(1.0, 0.3)]).is_err());
    }

    #[test]
    fn append_examples() {
        let m = 0.6f64;
        let point = DiscreteLaw::point(m);
        let spread = DiscreteLaw::new(vec![((m * m - 0.2).sqrt(), 0.5), ((m * m + 0.2).sqrt(), 0.5)]).unwrap();
        let r = append_lemma_check(0.7, 2.5, 1.0, &point, &spread, spec()).unwrap();
        assert!(r.holds, "{r:?}");
        assert!((r.second_moments.0 - r.second_moments.1).abs() < 1e-14);
        assert!(r.moment_check_gap < 1e-10);
        let r = append_lemma_check(0.7, 2.5, 0.0, &point, &spread, spec()).unwrap();
        assert!(r.holds);
        assert_eq!(r.shift, 0.0);
        let r = append_lemma_check(0.8, 3.0, 0.5, &spread, &spread, spec()).unwrap();
        assert!(r.lhs.iter().zip(&r.rhs).all(|(a, b)| a == b));
        assert!(append_lemma_check(0.7, 2.5, 1.0, &spread, &point, spec()).is_err());
        assert!(append_lemma_check(0.7, 2.0, 1.0, &point, &spread, spec()).is_err());
    }

    #[test]
    fn large_rho_is_affine() {
        let point = DiscreteLaw::point(0.5);
        let r = append_lemma_check(0.6, 2.4, 0.4, &point, &point, spec()).unwrap();
        let rho = *r.rho_grid.last().unwrap();
        assert!((r.lhs.last().unwrap() - (rho * rho - r.second_moments.0)).abs() < 1e-10);
    }
}
