//! Exact and numeric checks of the auxiliary inequalities behind the
//! two-dimensional and layer-by-layer comparison arguments.

pub mod append;
pub mod base_case;
pub mod layers;
pub mod poly;

pub use append::{
    append_lemma_check, second_derivative_identity_check, AppendReport, DiscreteLaw, LayerFunctions,
    SecondDerivativeReport,
};
pub use base_case::{base_case_check, default_phi_grid, BaseCaseReport};
pub use layers::{
    beta_trapezoid_check, dlt_check, dlt_sweep, layer_roots, two_interval_check, wcl_check, wcl_sweep, DltReport,
    LayerScenario, SweepReport, TrapezoidReport, TwoIntervalReport, WclReport,
};
pub use poly::{bernstein_coeffs, verify_poly_inequality, PolyReport, RationalPoly};

use crate::error::Result;
use crate::scalar_math::{bisect, integrate_adaptive, QuadratureSpec, RngStream};
use rayon::prelude::*;
use serde::Serialize;

/// Sign changes of `f` on a uniform grid of `[lo, hi]`, refined by bisection.
pub(crate) fn scan_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let step = (hi - lo) / grid as f64;
    let mut a = lo;
    let mut fa = f(a);
    for j in 1..=grid {
        let b = if j == grid { hi } else { lo + j as f64 * step };
        let fb = f(b);
        if fa == 0.0 {
            out.push(a);
        } else if fa * fb < 0.0 {
            out.push(bisect(&f, a, b));
        }
        a = b;
        fa = fb;
    }
    out
}

/// Sum of adaptive quadratures between consecutive cut points.
pub(crate) fn integrate_split<F: Fn(f64) -> f64>(f: F, mut cuts: Vec<f64>, spec: QuadratureSpec) -> Result<(f64, f64)> {
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut value = 0.0;
    let mut err = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            let q = integrate_adaptive(&f, w[0], w[1], spec)?;
            value += q.value;
            err += q.err_bound;
        }
    }
    Ok((value, err))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoIntervalSweep {
    pub count: usize,
    pub violations: usize,
    pub holds: bool,
}

/// Random `(ell, B, x, y)` with `ell` in `[0, 3)`, `B` in `[0, 1)`,
/// `0 <= x <= y < 1`, each decided exactly.
pub fn two_interval_sweep(count: usize, stream: RngStream) -> Result<TwoIntervalSweep> {
    let violations = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.substream(i as u64).generator();
            let ell = 3.0 * rng.next_f64();
            let b = rng.next_f64();
            let (u, v) = (rng.next_f64(), rng.next_f64());
            Ok(!two_interval_check(ell, b, u.min(v), u.max(v))?.holds as usize)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(TwoIntervalSweep { count, violations, holds: violations == 0 })
}

/// Sizes for [`run_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub poly_samples: u64,
    pub two_interval_samples: usize,
    pub wcl_scenarios: usize,
    pub dlt_scenarios: usize,
    pub base_case_exponents: [f64; 3],
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            poly_samples: 100_000,
            two_interval_samples: 10_000,
            wcl_scenarios: 200,
            dlt_scenarios: 100,
            base_case_exponents: [1.2, 1.5, 1.8],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub poly: PolyReport,
    pub trapezoid: Vec<TrapezoidReport>,
    pub two_interval: TwoIntervalSweep,
    pub wcl: SweepReport,
    pub dlt: SweepReport,
    pub second_derivative: SecondDerivativeReport,
    pub append: AppendReport,
    pub base_case: Vec<BaseCaseReport>,
    pub holds: bool,
}

/// Every check in this module at the sizes in `config`. Independent random
/// parts draw from distinct streams of `config.seed`.
pub fn run_suite(config: SuiteConfig, spec: QuadratureSpec) -> Result<SuiteReport> {
    let stream = |id: u64| RngStream::new(config.seed, id);
    let poly = verify_poly_inequality(config.poly_samples, stream(1));
    let trapezoid = [(0.6, 1.8, 0.0, 1.0), (0.75, 2.25, 0.2, 0.7), (0.9, 3.5, 0.05, 0.5)]
        .iter()
        .map(|&(a, d, lo, hi)| beta_trapezoid_check(a, d, lo, hi, spec))
        .collect::<Result<Vec<_>>>()?;
    let two_interval = two_interval_sweep(config.two_interval_samples, stream(2))?;
    let wcl = wcl_sweep(config.wcl_scenarios, stream(3), spec)?;
    let dlt = dlt_sweep(config.dlt_scenarios, stream(4), spec)?;
    let second_derivative =
        second_derivative_identity_check(&LayerFunctions::smooth_example(), &[0.7, 1.5, 2.5, 4.0], spec)?;
    let m = 0.6f64;
    let spread = DiscreteLaw::new(vec![((m * m - 0.2).sqrt(), 0.5), ((m * m + 0.2).sqrt(), 0.5)])?;
    let append = append_lemma_check(0.7, 2.5, 1.0, &DiscreteLaw::point(m), &spread, spec)?;
    let base_case = config
        .base_case_exponents
        .iter()
        .map(|&p| base_case_check(p, &default_phi_grid(), &[0.25, 0.5, 0.75, 1.5], spec))
        .collect::<Result<Vec<_>>>()?;
    let holds = poly.holds
        && trapezoid.iter().all(|t| t.holds)
        && two_interval.holds
        && wcl.holds
        && dlt.holds
        && dlt.max_route_gap <= 1e-9
        && second_derivative.holds
        && append.holds
        && base_case.iter().all(|b| b.holds);
    Ok(SuiteReport { config, poly, trapezoid, two_interval, wcl, dlt, second_derivative, append, base_case, holds })
}
