//! Closed-form constants of the uniform probability measure on `B_p^n`.

use crate::error::{domain, Result};
use crate::scalar_math::ln_gamma;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

/// The pair `(p, n)` with `alpha = 1/p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallParams {
    pub p: f64,
    pub n: usize,
    pub alpha: f64,
}

impl BallParams {
    /// Validated constructor: `1 <= p <= 2`, `n >= 1`.
    pub fn new(p: f64, n: usize) -> Result<Self> {
        if !(1.0..=2.0).contains(&p) {
            return domain(format!("p must lie in [1, 2], got {p}"));
        }
        if n == 0 {
            return domain("n must be at least 1");
        }
        Ok(Self { p, n, alpha: 1.0 / p })
    }

    /// Any `p > 0`; only the sign-Dirichlet sampler is meaningful outside `[1, 2]`.
    pub(crate) fn unrestricted(p: f64, n: usize) -> Self {
        Self { p, n, alpha: 1.0 / p }
    }

    /// Domain guard for results whose strict form needs `p < 2`.
    pub fn require_below_two(&self) -> Result<()> {
        if self.p >= 2.0 {
            return domain(format!("operation requires p < 2, got p = {}", self.p));
        }
        Ok(())
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }
}

/// Moment summary of the first coordinate under the uniform law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    pub volume: f64,
    pub v: f64,
    pub m4: f64,
    pub delta: f64,
    pub big_r: f64,
    pub c_norm: f64,
}

/// `|B_p^n| = (2 Gamma(1 + 1/p))^n / Gamma(1 + n/p)`.
pub fn ball_volume(params: BallParams) -> f64 {
    let a = params.alpha;
    (params.nf() * (2.0f64.ln() + ln_gamma(1.0 + a)) - ln_gamma(1.0 + params.nf() * a)).exp()
}

/// `E|X_1|^r` for `r > -1`.
pub fn coordinate_moment(params: BallParams, r: f64) -> Result<f64> {
    if !(r > -1.0) {
        return domain(format!("moment order must exceed -1, got {r}"));
    }
    let a = params.alpha;
    let n = params.nf();
    Ok((ln_gamma(1.0 + n * a) + ln_gamma((r + 1.0) * a) - ln_gamma(a) - ln_gamma(1.0 + (n + r) * a)).exp())
}

/// Normalizer `C_{p,n}` of the coordinate density.
pub fn density_normalizer(params: BallParams) -> f64 {
    let a = params.alpha;
    let n = params.nf();
    (ln_gamma(1.0 + n * a) - 2.0f64.ln() - ln_gamma(1.0 + a) - ln_gamma(1.0 + (n - 1.0) * a)).exp()
}

pub fn moment_set(params: BallParams) -> MomentSet {
    let v = coordinate_moment(params, 2.0).expect("r = 2 is in range");
    let m4 = coordinate_moment(params, 4.0).expect("r = 4 is in range");
    MomentSet {
        volume: ball_volume(params),
        v,
        m4,
        delta: m4 - 3.0 * v * v,
        big_r: m4 / (v * v),
        c_norm: density_normalizer(params),
    }
}

/// Density of `X_1`: `C_{p,n} (1 - |u|^p)_+^{(n-1)/p}`.
pub fn coordinate_density(params: BallParams, u: f64) -> f64 {
    let au = u.abs();
    if au >= 1.0 {
        return 0.0;
    }
    let m = (params.nf() - 1.0) * params.alpha;
    density_normalizer(params) * (1.0 - au.powf(params.p)).powf(m)
}

/// Exact `(E X_i^4, E X_i^2 X_j^2)` on the cross-polytope `B_1^n`.
pub fn p1_mixed_fourth(n: usize) -> Result<(BigRational, BigRational)> {
    if n < 2 {
        return domain(format!("mixed moments need n >= 2, got {n}"));
    }
    let d = p1_rising(n, 4);
    Ok((BigRational::new(24.into(), d.clone()), BigRational::new(4.into(), d)))
}

/// Exact `v_{1,n} = 2 / ((n+1)(n+2))`.
pub fn p1_variance(n: usize) -> BigRational {
    BigRational::new(2.into(), p1_rising(n, 2))
}

/// `(n+1)(n+2)...(n+len)`.
fn p1_rising(n: usize, len: usize) -> BigInt {
    (1..=len).map(|j| BigInt::from(n + j)).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn bp(p: f64, n: usize) -> BallParams {
        BallParams::new(p, n).unwrap()
    }

    #[test]
    fn volume_examples() {
        assert_relative_eq!(ball_volume(bp(1.0, 2)), 2.0, max_relative = 1e-14);
        assert_relative_eq!(ball_volume(bp(2.0, 2)), std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(ball_volume(bp(1.0, 1)), 2.0, max_relative = 1e-14);
        assert_relative_eq!(ball_volume(bp(2.0, 3)), 4.0 * std::f64::consts::PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn moment_examples() {
        assert_relative_eq!(coordinate_moment(bp(1.3, 5), 0.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(coordinate_moment(bp(1.0, 2), 2.0).unwrap(), 1.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(coordinate_moment(bp(1.0, 4), 4.0).unwrap(), 1.0 / 70.0, max_relative = 1e-14);
        assert!(coordinate_moment(bp(1.0, 4), -1.0).is_err());
    }

    #[test]
    fn moment_set_cross_polytope() {
        let m = moment_set(bp(1.0, 4));
        assert_relative_eq!(m.v, 1.0 / 15.0, max_relative = 1e-13);
        assert_relative_eq!(m.m4, 1.0 / 70.0, max_relative = 1e-13);
        assert_relative_eq!(m.delta, 1.0 / 1050.0, max_relative = 1e-10);
        assert!(moment_set(bp(1.0, 3)).delta < 0.0);
    }

    #[test]
    fn euclidean_kurtosis_tends_to_three() {
        let r = moment_set(bp(2.0, 100_000)).big_r;
        assert!((r - 3.0).abs() < 1e-3, "{r}");
        assert!(moment_set(bp(2.0, 10)).big_r < r);
    }

    #[test]
    fn density_examples() {
        let c = density_normalizer(bp(1.7, 4));
        assert_relative_eq!(coordinate_density(bp(1.7, 4), 0.0), c);
        assert_eq!(coordinate_density(bp(1.7, 4), 1.0), 0.0);
        assert_eq!(coordinate_density(bp(1.7, 4), -1.0), 0.0);
        assert_relative_eq!(coordinate_density(bp(1.0, 2), 0.5), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn density_integrates_to_one() {
        let params = bp(1.4, 6);
        let q = crate::scalar_math::integrate_adaptive(
            |u| coordinate_density(params, u),
            -1.0,
            1.0,
            Default::default(),
        )
        .unwrap();
        assert!((q.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn mixed_fourth_examples() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(p1_mixed_fourth(2).unwrap(), (r(1, 15), r(1, 90)));
        assert_eq!(p1_mixed_fourth(4).unwrap(), (r(1, 70), r(1, 420)));
        for n in 2..30usize {
            let (m4, m22) = p1_mixed_fourth(n).unwrap();
            let d = ((n + 1) * (n + 2) * (n + 3) * (n + 4)) as i64;
            assert_eq!(m4 - m22 * BigRational::from_integer(3.into()), r(12, d));
        }
        assert!(p1_mixed_fourth(1).is_err());
    }

    #[test]
    fn cross_polytope_gamma_route_matches_rationals() {
        for n in 2..=50usize {
            let m = moment_set(bp(1.0, n));
            let v = p1_variance(n).to_f64().unwrap();
            let m4 = p1_mixed_fourth(n).unwrap().0.to_f64().unwrap();
            assert!(((m.v - v) / v).abs() <= 1e-12, "n={n}");
            assert!(((m.m4 - m4) / m4).abs() <= 1e-12, "n={n}");
        }
    }

    #[test]
    fn cross_polytope_delta_sign_rule() {
        for n in 2..=50i64 {
            let d = moment_set(bp(1.0, n as usize)).delta;
            let rule = n * n - n - 8;
            assert_eq!(d > 0.0, rule > 0, "n={n}");
            assert_eq!(d < 0.0, rule < 0, "n={n}");
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(BallParams::new(0.9, 3).is_err());
        assert!(BallParams::new(2.1, 3).is_err());
        assert!(BallParams::new(1.5, 0).is_err());
        assert!(bp(2.0, 3).require_below_two().is_err());
        assert!(bp(1.99, 3).require_below_two().is_ok());
    }

    proptest! {
        #[test]
        fn moments_are_log_convex(p in 1.0f64..=2.0, n in 1usize..40, r in -0.5f64..5.5, h in 0.01f64..0.45) {
            let params = bp(p, n);
            let lo = coordinate_moment(params, r - h).unwrap().ln();
            let mid = coordinate_moment(params, r).unwrap().ln();
            let hi = coordinate_moment(params, r + h).unwrap().ln();
            prop_assert!(2.0 * mid <= lo + hi + 1e-12);
        }

        #[test]
        fn moment_set_is_consistent(p in 1.0f64..=2.0, n in 1usize..200) {
            let m = moment_set(bp(p, n));
            prop_assert!(m.v > 0.0 && m.m4 > 0.0 && m.volume > 0.0 && m.c_norm > 0.0);
            prop_assert!((m.delta - (m.m4 - 3.0 * m.v * m.v)).abs() <= 1e-15);
            prop_assert!((m.big_r - m.m4 / (m.v * m.v)).abs() <= 1e-12 * m.big_r);
        }
    }
}
