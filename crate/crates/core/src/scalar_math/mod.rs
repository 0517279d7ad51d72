//! Deterministic scalar kernels: the log-gamma family, adaptive
//! Gauss-Kronrod quadrature, and counter-based random streams.

mod quadrature;
mod rng;
mod special;

pub use quadrature::{integrate_adaptive, Quadrature, QuadratureSpec};
pub use rng::{gamma_sample, normal_sample, RngStream, StreamRng};
pub use special::{gamma_ratio, log_gamma};
pub(crate) use special::{ln_beta, ln_gamma};

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Bisection for a sign change of `f` on `[lo, hi]`; runs until the bracket
/// stops shrinking in floating point.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
