use crate::error::{Error, Result};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerances and subdivision budget for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol >= 0.0) || max_subdivisions == 0 {
            return Err(Error::Domain(format!(
                "invalid quadrature spec: abs_tol={abs_tol}, rel_tol={rel_tol}, max_subdivisions={max_subdivisions}"
            )));
        }
        Ok(Self { abs_tol, rel_tol, max_subdivisions })
    }

    /// Same budget, different tolerances.
    pub fn with_tol(self, abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..self }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_subdivisions: 4000 }
    }
}

/// Result of a converged quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub err_bound: f64,
    pub panels: usize,
}

// Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);
    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        err = f64::INFINITY;
    }
    Panel { lo, hi, value, err }
}

fn adaptive_finite<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Quadrature> {
    let first = kronrod15(f, lo, hi);
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    heap.push(first);
    let mut total = first.value;
    let mut total_err = first.err;
    let mut bisections = 0usize;
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        let width_floor = 4.0 * f64::EPSILON * worst.lo.abs().max(worst.hi.abs()).max(f64::MIN_POSITIVE);
        if bisections >= spec.max_subdivisions || worst.hi - worst.lo <= width_floor || mid <= worst.lo || mid >= worst.hi {
            frozen.push(worst);
            if bisections >= spec.max_subdivisions {
                break;
            }
            continue;
        }
        bisections += 1;
        let left = kronrod15(f, worst.lo, mid);
        let right = kronrod15(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
    let panels: Vec<Panel> = heap.into_iter().chain(frozen).collect();
    let value = super::compensated_sum(panels.iter().map(|p| p.value));
    let err_bound = super::compensated_sum(panels.iter().map(|p| p.err));
    let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
    if !value.is_finite() || !(err_bound <= tol) {
        return Err(Error::Convergence { estimate: value, err_bound });
    }
    Ok(Quadrature { value, err_bound, panels: panels.len() })
}

/// Adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[lo, hi]`.
///
/// Either limit may be infinite; a half-line `[a, inf)` is mapped onto
/// `[0, 1)` by `x = a + u / (1 - u)`. The panel with the largest error
/// estimate is bisected until the summed estimate meets
/// `max(abs_tol, rel_tol * |value|)`. Integrable endpoint singularities are
/// fine as long as `f` is finite at the interior nodes.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, spec: QuadratureSpec) -> Result<Quadrature> {
    integrate_dyn(&f, lo, hi, spec)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, spec: QuadratureSpec) -> Result<Quadrature> {
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::Domain("integration limits must not be NaN".into()));
    }
    if lo == hi {
        return Ok(Quadrature { value: 0.0, err_bound: 0.0, panels: 0 });
    }
    if lo > hi {
        let q = integrate_dyn(f, hi, lo, spec)?;
        return Ok(Quadrature { value: -q.value, ..q });
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adaptive_finite(&f, lo, hi, &spec),
        (true, false) => {
            let g = |u: f64| {
                let w = 1.0 - u;
                f(lo + u / w) / (w * w)
            };
            adaptive_finite(&g, 0.0, 1.0, &spec)
        }
        (false, true) => {
            let g = |u: f64| {
                let w = 1.0 - u;
                f(hi - u / w) / (w * w)
            };
            adaptive_finite(&g, 0.0, 1.0, &spec)
        }
        (false, false) => {
            let half = spec.with_tol(0.5 * spec.abs_tol, spec.rel_tol);
            let right = integrate_dyn(f, 0.0, f64::INFINITY, half)?;
            let left = integrate_dyn(f, f64::NEG_INFINITY, 0.0, half)?;
            Ok(Quadrature {
                value: left.value + right.value,
                err_bound: left.err_bound + right.err_bound,
                panels: left.panels + right.panels,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::new(1e-13, 1e-13, 2000).unwrap()
    }

    #[test]
    fn rule_is_exact_for_low_degree_polynomials() {
        let wsum: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((wsum - 2.0).abs() < 1e-15);
        let p = kronrod15(&|x: f64| x.powi(20) - 3.0 * x.powi(7) + 1.0, 0.0, 1.0);
        assert!((p.value - (1.0 / 21.0 - 3.0 / 8.0 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn spec_examples() {
        let q = integrate_adaptive(|x| x, 0.0, 1.0, spec()).unwrap();
        assert!((q.value - 0.5).abs() < 1e-15);
        let q = integrate_adaptive(|u| (1.0 - u).sqrt(), 0.0, 1.0, spec()).unwrap();
        assert!((q.value - 2.0 / 3.0).abs() < 1e-13);
        let q = integrate_adaptive(|x| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, spec()).unwrap();
        assert!((q.value - PI.sqrt()).abs() < 1e-12, "{}", q.value);
    }

    #[test]
    fn endpoint_singularity_and_algebraic_tail() {
        let q = integrate_adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, spec()).unwrap();
        assert!((q.value - 2.0).abs() < 1e-11, "{}", q.value);
        let q = integrate_adaptive(|x| 1.0 / (1.0 + x * x), 0.0, f64::INFINITY, spec()).unwrap();
        assert!((q.value - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let q = integrate_adaptive(|x| x * x, 2.0, 0.0, spec()).unwrap();
        assert!((q.value + 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn reflection_about_midpoint_agrees() {
        let f = |x: f64| (3.0 * x).sin() * (-x).exp() + x.sqrt();
        let (lo, hi) = (0.0, 2.5);
        let a = integrate_adaptive(f, lo, hi, spec()).unwrap();
        let b = integrate_adaptive(|x| f(lo + hi - x), lo, hi, spec()).unwrap();
        assert!((a.value - b.value).abs() <= 2.0 * (a.err_bound + b.err_bound));
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let tight = QuadratureSpec::new(1e-15, 0.0, 3).unwrap();
        match integrate_adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, tight) {
            Err(Error::Convergence { estimate, .. }) => assert!((estimate - 2.0).abs() < 0.1),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 0.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, -1.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, 0.0, 0).is_err());
    }
}
