//! Heat-flow profiles of central projections.
//!
//! For a unit direction `theta` and `t > 0`:
//!
//! * `M(theta) = E exp(-<X, theta>^2 / (2t))`,
//! * `A(theta) = M / sqrt(2 pi t)`, the density at zero of `<X, theta> + sqrt(t) Z`,
//! * `A~(theta) = sqrt(v + t) A = sqrt(1 + v/t) M / sqrt(2 pi)`.
//!
//! General directions are estimated by Monte Carlo on shared samples. The
//! coordinate direction has a closed-form marginal and is integrated
//! deterministically as `Phi(t)`.

use crate::error::{domain, Result};
use crate::lp_model::{moment_set, BallParams};
use crate::montecarlo::{self, Estimate, McBudget};
use crate::sampler::sample_uniform_ball_into;
use crate::scalar_math::{integrate_adaptive, QuadratureSpec, RngStream};
use serde::Serialize;
use std::f64::consts::PI;

pub(crate) const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// Beyond this many standard deviations the Gaussian weight is below the f64 range.
const GAUSS_CUTOFF: f64 = 40.0;

/// A unit vector together with its squared coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Direction {
    pub theta: Vec<f64>,
    pub squared: Vec<f64>,
}

impl Direction {
    /// Normalizes `v` to unit Euclidean length.
    pub fn new(v: &[f64]) -> Result<Self> {
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return domain("direction must be a non-empty finite vector");
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return domain("direction must be non-zero");
        }
        let theta: Vec<f64> = v.iter().map(|x| x / norm).collect();
        let squared = theta.iter().map(|x| x * x).collect();
        Ok(Self { theta, squared })
    }

    /// `u^(k)`: `k` equal non-zero leading coordinates.
    pub fn canonical(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return domain(format!("canonical index k must lie in [1, {n}], got {k}"));
        }
        let c = 1.0 / (k as f64).sqrt();
        let theta: Vec<f64> = (0..n).map(|i| if i < k { c } else { 0.0 }).collect();
        let squared = (0..n).map(|i| if i < k { 1.0 / k as f64 } else { 0.0 }).collect();
        Ok(Self { theta, squared })
    }

    pub fn e1(n: usize) -> Result<Self> {
        Self::canonical(n, 1)
    }

    pub fn diagonal(n: usize) -> Result<Self> {
        Self::canonical(n, n)
    }

    /// Parses `e1`, `diag`, `u:k`, or a comma-separated vector of length `n`.
    pub fn parse(spec: &str, n: usize) -> Result<Self> {
        match spec.trim() {
            "e1" => Self::e1(n),
            "diag" => Self::diagonal(n),
            s if s.starts_with("u:") => match s[2..].parse::<usize>() {
                Ok(k) => Self::canonical(n, k),
                Err(_) => domain(format!("bad canonical preset '{s}'")),
            },
            s => {
                let parsed: std::result::Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
                match parsed {
                    Ok(v) if v.len() == n => Self::new(&v),
                    Ok(v) => domain(format!("direction has {} entries, expected {n}", v.len())),
                    Err(_) => domain(format!("cannot parse direction '{s}'")),
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    #[inline]
    pub(crate) fn project(&self, x: &[f64]) -> f64 {
        self.theta.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    Quadrature,
}

/// A value with its error account.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileEstimate {
    pub value: f64,
    pub err: f64,
    pub method: Method,
    pub samples_or_panels: u64,
}

impl ProfileEstimate {
    fn scaled(self, factor: f64) -> Self {
        Self { value: self.value * factor, err: self.err * factor, ..self }
    }

    fn from_mc(e: Estimate) -> Self {
        Self { value: e.value, err: e.se, method: Method::MonteCarlo, samples_or_panels: e.samples }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("smoothing time must be positive and finite, got {t}"));
    }
    Ok(())
}

fn check_dirs(params: BallParams, dirs: &[&Direction]) -> Result<()> {
    for d in dirs {
        if d.len() != params.n {
            return domain(format!("direction has dimension {}, ball has n = {}", d.len(), params.n));
        }
    }
    Ok(())
}

/// Monte Carlo estimate of `M_{p,n,t}(theta)`.
pub fn laplace_m(params: BallParams, t: f64, dir: &Direction, budget: McBudget, stream: RngStream) -> Result<ProfileEstimate> {
    check_time(t)?;
    check_dirs(params, &[dir])?;
    let n = params.n;
    let c = -0.5 / t;
    let m = montecarlo::run(budget, stream, 1, &[], || vec![0.0; n], |x, rng, out| {
        sample_uniform_ball_into(params, rng, x);
        let y = dir.project(x);
        out[0] = (c * y * y).exp();
    });
    Ok(ProfileEstimate::from_mc(m.estimate(0)))
}

/// `A = M / sqrt(2 pi t)`.
pub fn profile_a(params: BallParams, t: f64, dir: &Direction, budget: McBudget, stream: RngStream) -> Result<ProfileEstimate> {
    Ok(laplace_m(params, t, dir, budget, stream)?.scaled(1.0 / (2.0 * PI * t).sqrt()))
}

/// `A~ = sqrt(1 + v/t) M / sqrt(2 pi)`.
pub fn profile_a_tilde(params: BallParams, t: f64, dir: &Direction, budget: McBudget, stream: RngStream) -> Result<ProfileEstimate> {
    let v = moment_set(params).v;
    Ok(laplace_m(params, t, dir, budget, stream)?.scaled((1.0 + v / t).sqrt() * INV_SQRT_2PI))
}

/// `M` along a list of directions, all on the same samples.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionalComparison {
    pub t: f64,
    pub values: Vec<ProfileEstimate>,
    /// `M(dirs[i]) - M(dirs[i + 1])` with its standard error.
    pub gaps: Vec<Estimate>,
}

impl DirectionalComparison {
    /// Gap `i` in units of its standard error.
    pub fn gap_in_se(&self, i: usize) -> f64 {
        self.gaps[i].value / self.gaps[i].se
    }
}

/// Evaluates `M` on every direction with common random numbers.
///
/// Consecutive gaps use `<dirs[i], X>^2 - <dirs[i+1], X>^2` as a control
/// variate; its mean is zero because every unit direction has variance `v`.
pub fn compare_directions(
    params: BallParams,
    t: f64,
    dirs: &[Direction],
    budget: McBudget,
    stream: RngStream,
) -> Result<DirectionalComparison> {
    check_time(t)?;
    check_dirs(params, &dirs.iter().collect::<Vec<_>>())?;
    if dirs.is_empty() {
        return Ok(DirectionalComparison { t, values: vec![], gaps: vec![] });
    }
    let k = dirs.len();
    let g = k - 1;
    let dim = k + 2 * g;
    let pairs: Vec<(usize, usize)> = (0..g).map(|i| (k + i, k + g + i)).collect();
    let n = params.n;
    let c = -0.5 / t;
    let m = montecarlo::run(budget, stream, dim, &pairs, || (vec![0.0; n], vec![0.0; k]), |(x, y), rng, out| {
        sample_uniform_ball_into(params, rng, x);
        for (i, d) in dirs.iter().enumerate() {
            let s = d.project(x);
            y[i] = s * s;
            out[i] = (c * y[i]).exp();
        }
        for i in 0..g {
            out[k + i] = out[i] - out[i + 1];
            out[k + g + i] = y[i] - y[i + 1];
        }
    });
    Ok(DirectionalComparison {
        t,
        values: (0..k).map(|i| ProfileEstimate::from_mc(m.estimate(i))).collect(),
        gaps: (0..g).map(|i| m.cv_estimate(k + i, k + g + i, 0.0)).collect(),
    })
}

/// Deterministic coordinate profile `Phi_{p,n}(t) = A~_{p,n,t}(e_1)`.
///
/// With `u = sqrt(t) y` the marginal integral becomes
/// `Phi = sqrt(v + t) (2C / sqrt(2 pi)) int_0^{1/sqrt t} (1 - t^{p/2} y^p)^m e^{-y^2/2} dy`,
/// `m = (n-1)/p`, which is well conditioned for both small and large `t`.
pub fn coordinate_profile_phi(params: BallParams, t: f64, spec: QuadratureSpec) -> Result<ProfileEstimate> {
    check_time(t)?;
    let ms = moment_set(params);
    let m = (params.n as f64 - 1.0) * params.alpha;
    let tp = t.powf(0.5 * params.p);
    let p = params.p;
    let upper = (1.0 / t.sqrt()).min(GAUSS_CUTOFF);
    let q = integrate_adaptive(
        |y: f64| {
            let r = tp * y.powf(p);
            if r >= 1.0 {
                return 0.0;
            }
            (m * (-r).ln_1p() - 0.5 * y * y).exp()
        },
        0.0,
        upper,
        spec,
    )?;
    let pre = (ms.v + t).sqrt() * 2.0 * ms.c_norm * INV_SQRT_2PI;
    Ok(ProfileEstimate {
        value: pre * q.value,
        err: pre * q.err_bound,
        method: Method::Quadrature,
        samples_or_panels: q.panels as u64,
    })
}

/// Small-time deviations of the coordinate profile from its `t = 0` limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallTimeDeviation {
    /// `Phi(t) / (C sqrt v) - 1`.
    pub profile: f64,
    /// `h_t(0) / C - 1`, the same quantity without the `sqrt(1 + t/v)` factor.
    pub density: f64,
    pub err: f64,
}

/// Deviations from the `t = 0` limit, computed without cancellation.
///
/// With `J = E[1 - (1 - t^{p/2}|Z|^p)_+^m]` one has `h_t(0) / C = 1 - J` and
/// `Phi / (C sqrt v) = sqrt(1 + t/v) (1 - J)`.
pub fn coordinate_profile_deviation(params: BallParams, t: f64, spec: QuadratureSpec) -> Result<SmallTimeDeviation> {
    check_time(t)?;
    let ms = moment_set(params);
    let m = (params.n as f64 - 1.0) * params.alpha;
    let p = params.p;
    let tp = t.powf(0.5 * p);
    let kink = 1.0 / t.sqrt();
    let inner = integrate_adaptive(
        |y: f64| {
            let r = tp * y.powf(p);
            let q = if r >= 1.0 { 1.0 } else { -(m * (-r).ln_1p()).exp_m1() };
            q * (-0.5 * y * y).exp()
        },
        0.0,
        kink.min(GAUSS_CUTOFF),
        spec,
    )?;
    let tail = if kink < GAUSS_CUTOFF {
        integrate_adaptive(|y: f64| (-0.5 * y * y).exp(), kink, f64::INFINITY, spec)?
    } else {
        crate::scalar_math::Quadrature { value: 0.0, err_bound: 0.0, panels: 0 }
    };
    let w = 2.0 * INV_SQRT_2PI;
    let j = w * (inner.value + tail.value);
    let j_err = w * (inner.err_bound + tail.err_bound);
    let x = t / ms.v;
    let root = (1.0 + x).sqrt();
    Ok(SmallTimeDeviation { profile: x / (root + 1.0) - root * j, density: -j, err: root * j_err })
}

/// `E|Z|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi)` for a standard normal `Z`.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    use crate::scalar_math::ln_gamma;
    (0.5 * p * 2.0f64.ln() + ln_gamma(0.5 * (p + 1.0)) - 0.5 * PI.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(p: f64, n: usize) -> BallParams {
        BallParams::new(p, n).unwrap()
    }

    fn tight() -> QuadratureSpec {
        QuadratureSpec::new(1e-13, 1e-12, 4000).unwrap()
    }

    fn budget(n: u64) -> McBudget {
        McBudget::new(n).unwrap()
    }

    #[test]
    fn direction_presets_and_normalization() {
        let d = Direction::new(&[3.0, 4.0]).unwrap();
        assert!((d.theta[0] - 0.6).abs() < 1e-15 && (d.squared[1] - 0.64).abs() < 1e-15);
        let doubled = Direction::new(&[6.0, 8.0]).unwrap();
        assert_eq!(d, doubled);
        assert_eq!(Direction::parse("u:2", 4).unwrap(), Direction::canonical(4, 2).unwrap());
        assert_eq!(Direction::parse("diag", 3).unwrap().squared, vec![1.0 / 3.0; 3]);
        assert_eq!(Direction::parse("1, 0 ,0", 3).unwrap(), Direction::e1(3).unwrap());
        assert!(Direction::parse("1,0", 3).is_err());
        assert!(Direction::parse("u:0", 3).is_err());
        assert!(Direction::new(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn huge_time_gives_unit_m() {
        let e = laplace_m(bp(1.5, 3), 1e6, &Direction::e1(3).unwrap(), budget(10_000), RngStream::new(1, 0)).unwrap();
        assert!((e.value - 1.0).abs() < 1e-5);
        let at = profile_a_tilde(bp(1.5, 3), 1e6, &Direction::diagonal(3).unwrap(), budget(10_000), RngStream::new(1, 0)).unwrap();
        assert!((at.value - INV_SQRT_2PI).abs() < 1e-4);
    }

    #[test]
    fn euclidean_ball_is_rotation_invariant() {
        let dirs = [Direction::e1(3).unwrap(), Direction::diagonal(3).unwrap()];
        let c = compare_directions(bp(2.0, 3), 0.5, &dirs, budget(1_000_000), RngStream::new(2, 0)).unwrap();
        assert!(c.gap_in_se(0).abs() < 4.0, "{}", c.gap_in_se(0));
    }

    #[test]
    fn coordinate_beats_diagonal_in_two_dimensions() {
        let dirs = [Direction::e1(2).unwrap(), Direction::diagonal(2).unwrap()];
        let c = compare_directions(bp(1.5, 2), 0.5, &dirs, budget(1_000_000), RngStream::new(3, 0)).unwrap();
        assert!(c.gap_in_se(0) > 4.0, "{}", c.gap_in_se(0));
    }

    #[test]
    fn a_and_m_are_consistent() {
        let (params, t, d) = (bp(1.2, 4), 0.3, Direction::parse("1,2,0,-1", 4).unwrap());
        let s = RngStream::new(4, 0);
        let m = laplace_m(params, t, &d, budget(5000), s).unwrap();
        let a = profile_a(params, t, &d, budget(5000), s).unwrap();
        assert!((a.value * (2.0 * PI * t).sqrt() - m.value).abs() < 1e-15);
        let at = profile_a_tilde(params, t, &d, budget(5000), s).unwrap();
        let v = moment_set(params).v;
        assert!((at.value - (v + t).sqrt() * a.value).abs() < 1e-15);
    }

    #[test]
    fn a_approaches_the_density_normalizer() {
        // A(e1) -> C as t -> 0; the quadrature route is the oracle.
        let params = bp(1.0, 2);
        let mut prev = f64::INFINITY;
        for t in [0.01, 0.005] {
            let phi = coordinate_profile_phi(params, t, tight()).unwrap().value;
            let a_quad = phi / (moment_set(params).v + t).sqrt();
            let a_mc = profile_a(params, t, &Direction::e1(2).unwrap(), budget(1_000_000), RngStream::new(5, 0)).unwrap();
            assert!((a_mc.value - a_quad).abs() < 4.0 * a_mc.err);
            assert!((a_quad - 1.0).abs() < prev);
            prev = (a_quad - 1.0).abs();
        }
        assert!(prev < 0.1);
    }

    #[test]
    fn quadrature_matches_monte_carlo() {
        for (p, n, t, seed) in [(1.0, 2, 1.0, 6), (1.0, 3, 1.0, 7), (1.5, 4, 0.2, 8), (1.8, 3, 0.05, 9)] {
            let params = bp(p, n);
            let q = coordinate_profile_phi(params, t, tight()).unwrap();
            let mc = profile_a_tilde(params, t, &Direction::e1(n).unwrap(), budget(1_000_000), RngStream::new(seed, 0)).unwrap();
            assert!((q.value - mc.value).abs() < 4.0 * mc.err, "p={p} n={n} t={t}");
        }
    }

    #[test]
    fn large_time_expansion() {
        for (p, n) in [(1.0, 4), (1.5, 5), (1.2, 2)] {
            let params = bp(p, n);
            let t = 1e4;
            let phi = coordinate_profile_phi(params, t, tight()).unwrap().value;
            let want = INV_SQRT_2PI * (1.0 + moment_set(params).delta / (8.0 * t * t));
            assert!((phi - want).abs() < 1e-10, "p={p} n={n}: {phi} vs {want}");
        }
    }

    #[test]
    fn small_time_leading_term() {
        let params = bp(1.5, 2);
        let t: f64 = 1e-4;
        let d = coordinate_profile_deviation(params, t, tight()).unwrap().density;
        let slope = d / t.powf(0.75);
        let want = -(1.0 / 1.5) * gaussian_abs_moment(1.5);
        assert!(((slope - want) / want).abs() < 0.1, "{slope} vs {want}");
    }

    #[test]
    fn deviation_agrees_with_direct_profile() {
        let params = bp(1.3, 6);
        let c = moment_set(params).c_norm;
        let v = moment_set(params).v;
        for t in [1e-3, 0.1, 2.0] {
            let phi = coordinate_profile_phi(params, t, tight()).unwrap().value;
            let d = coordinate_profile_deviation(params, t, tight()).unwrap();
            assert!((phi / (c * v.sqrt()) - 1.0 - d.profile).abs() < 1e-10, "t={t}");
            assert!(((1.0 + d.density) * (1.0 + t / v).sqrt() - 1.0 - d.profile).abs() < 1e-14);
        }
    }

    #[test]
    fn gaussian_abs_moments() {
        assert!((gaussian_abs_moment(2.0) - 1.0).abs() < 1e-14);
        assert!((gaussian_abs_moment(1.0) - (2.0 / PI).sqrt()).abs() < 1e-14);
        assert!((gaussian_abs_moment(4.0) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn signed_permutations_leave_m_unchanged() {
        let params = bp(1.4, 3);
        let dirs = [
            Direction::new(&[0.2, 0.5, 0.9]).unwrap(),
            Direction::new(&[0.9, -0.2, 0.5]).unwrap(),
            Direction::new(&[-0.5, 0.9, -0.2]).unwrap(),
        ];
        let c = compare_directions(params, 0.4, &dirs, budget(400_000), RngStream::new(10, 0)).unwrap();
        for i in 0..2 {
            assert!(c.gap_in_se(i).abs() < 2.0 * std::f64::consts::SQRT_2, "{}", c.gap_in_se(i));
        }
    }

    #[test]
    fn m_is_monotone_in_time_and_bounded() {
        let params = bp(1.7, 4);
        let d = Direction::new(&[1.0, 1.0, 0.0, 0.5]).unwrap();
        let s = RngStream::new(11, 0);
        let mut prev = 0.0;
        for t in [0.01, 0.05, 0.2, 1.0, 5.0] {
            let m = laplace_m(params, t, &d, budget(50_000), s).unwrap();
            assert!(m.value > 0.0 && m.value <= 1.0);
            assert!(m.value >= prev);
            prev = m.value;
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = Direction::e1(3).unwrap();
        assert!(laplace_m(bp(1.0, 3), 0.0, &d, budget(10), RngStream::new(0, 0)).is_err());
        assert!(laplace_m(bp(1.0, 4), 1.0, &d, budget(10), RngStream::new(0, 0)).is_err());
        assert!(coordinate_profile_phi(bp(1.0, 4), -1.0, tight()).is_err());
    }
}
