//! Exact rational polynomials, Bernstein certificates and the polynomial
//! inequality `(1 + s^2)(1 + r)(1 + r^3) <= 2 (1 + r^2 s)^2` for `s^2 <= r <= s`.

use crate::error::{domain, Result};
use crate::scalar_math::{RngStream, StreamRng};
use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

/// Polynomial with exact rational coefficients, ascending degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalPoly {
    coefficients: Vec<BigRational>,
}

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

impl RationalPoly {
    pub fn new(mut coefficients: Vec<BigRational>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    pub fn from_ints(coefficients: &[i64]) -> Self {
        Self::new(coefficients.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coefficients.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coefficients.len().max(other.coefficients.len());
        let zero = BigRational::zero();
        Self::new(
            (0..len)
                .map(|i| self.coefficients.get(i).unwrap_or(&zero) + other.coefficients.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coefficients.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::default();
        }
        let mut out = vec![BigRational::zero(); self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(BigRational::one()), |acc, _| acc.mul(self))
    }

    /// `self(inner(x))`.
    pub fn compose(&self, inner: &Self) -> Self {
        self.coefficients
            .iter()
            .rev()
            .fold(Self::default(), |acc, c| acc.mul(inner).add(&Self::constant(c.clone())))
    }
}

/// Bernstein coefficients on `[0, 1]` in degree `degree`:
/// `b_k = sum_{j <= k} binom(k, j) / binom(degree, j) a_j`.
pub fn bernstein_coeffs(poly: &RationalPoly, degree: usize) -> Result<Vec<BigRational>> {
    if degree < poly.degree() {
        return domain(format!("Bernstein degree {degree} is below the polynomial degree {}", poly.degree()));
    }
    let zero = BigRational::zero();
    Ok((0..=degree)
        .map(|k| {
            (0..=k)
                .map(|j| {
                    let a = poly.coefficients.get(j).unwrap_or(&zero);
                    let w = BigRational::new(binomial(BigInt::from(k), BigInt::from(j)), binomial(BigInt::from(degree), BigInt::from(j)));
                    a * w
                })
                .sum()
        })
        .collect())
}

/// The four certificate polynomials `P_0, ..., P_3` in `s`.
pub fn certificate_polys() -> [RationalPoly; 4] {
    [
        RationalPoly::from_ints(&[1, 1, -1, -3, 0, 1, 2, 1]),
        RationalPoly::from_ints(&[3, 0, -6, 0, 3, 4]),
        RationalPoly::from_ints(&[3, 3, -8, -3, 9, 6]),
        RationalPoly::from_ints(&[1, 0, -3, 4]),
    ]
}

/// The published Bernstein coefficient lists of `P_0, ..., P_3`.
pub fn published_bernstein_lists() -> [Vec<BigRational>; 4] {
    let ints = |v: &[i64]| v.iter().map(|&c| rat(c, 1)).collect::<Vec<_>>();
    [
        vec![rat(1, 1), rat(8, 7), rat(26, 21), rat(6, 5), rat(33, 35), rat(3, 7), rat(0, 1), rat(2, 1)],
        vec![rat(3, 1), rat(3, 1), rat(12, 5), rat(6, 5), rat(0, 1), rat(4, 1)],
        vec![rat(3, 1), rat(18, 5), rat(17, 5), rat(21, 10), rat(6, 5), rat(10, 1)],
        ints(&[1, 1, 0, 2]),
    ]
}

/// Polynomial in an outer variable whose coefficients are polynomials in `s`.
type Bivariate = Vec<RationalPoly>;

fn bi_trim(mut p: Bivariate) -> Bivariate {
    while p.last().is_some_and(RationalPoly::is_zero) {
        p.pop();
    }
    p
}

fn bi_add(a: &Bivariate, b: &Bivariate) -> Bivariate {
    let len = a.len().max(b.len());
    let zero = RationalPoly::default();
    bi_trim((0..len).map(|i| a.get(i).unwrap_or(&zero).add(b.get(i).unwrap_or(&zero))).collect())
}

fn bi_mul(a: &Bivariate, b: &Bivariate) -> Bivariate {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![RationalPoly::default(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    bi_trim(out)
}

fn bi_scale(a: &Bivariate, c: &RationalPoly) -> Bivariate {
    bi_trim(a.iter().map(|x| x.mul(c)).collect())
}

fn bi_compose(outer: &Bivariate, inner: &Bivariate) -> Bivariate {
    outer.iter().rev().fold(Vec::new(), |acc, c| bi_add(&bi_mul(&acc, inner), &vec![c.clone()]))
}

fn sp(c: &[i64]) -> RationalPoly {
    RationalPoly::from_ints(c)
}

/// `F_s(r) = 2 (1 + r^2 s)^2 - (1 + s^2)(1 + r)(1 + r^3)` as a polynomial in `r`.
fn f_in_r() -> Bivariate {
    let one_r2s: Bivariate = vec![sp(&[1]), RationalPoly::default(), sp(&[0, 1])];
    let left = bi_scale(&bi_mul(&one_r2s, &one_r2s), &sp(&[2]));
    let right = bi_scale(
        &bi_mul(&vec![sp(&[1]), sp(&[1])], &vec![sp(&[1]), RationalPoly::default(), RationalPoly::default(), sp(&[1])]),
        &sp(&[1, 0, 1]),
    );
    bi_add(&left, &bi_scale(&right, &sp(&[-1])))
}

/// Exact `F_s(r)`.
pub fn f_exact(s: &BigRational, r: &BigRational) -> BigRational {
    let one = BigRational::one();
    let a = &one + r * r * s;
    BigRational::from_integer(2.into()) * &a * &a - (&one + s * s) * (&one + r) * (&one + r * r * r)
}

pub fn f_value(s: f64, r: f64) -> f64 {
    let a = 1.0 + r * r * s;
    2.0 * a * a - (1.0 + s * s) * (1.0 + r) * (1.0 + r * r * r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernsteinRow {
    pub name: String,
    pub computed: Vec<String>,
    pub published: Vec<String>,
    pub matches: bool,
    pub nonnegative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyReport {
    pub bernstein: Vec<BernsteinRow>,
    /// `F_s(s) = (1-s)^2 (1+s)^2 (s^2 - s + 1)` as polynomials in `s`.
    pub boundary_identity: bool,
    /// `F_s(r) - F_s(s)` is divisible by `r - s` and the quotient, after
    /// `r = s^2 + z (s - s^2)`, has `z`-Bernstein coefficients
    /// `(1-s) P_0, (1-s)(1+s) P_1 / 3, (1-s) P_2 / 3, (1-s)(1+s) P_3`.
    pub quotient_decomposition: bool,
    pub samples: u64,
    pub negative_samples: u64,
    pub min_value: f64,
    pub holds: bool,
}

fn rat_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn check_boundary_identity() -> bool {
    let f = f_in_r();
    let s = RationalPoly::x();
    let on_diagonal = f.iter().enumerate().fold(RationalPoly::default(), |acc, (j, c)| acc.add(&c.mul(&s.pow(j as u32))));
    let one_minus = sp(&[1, -1]);
    let one_plus = sp(&[1, 1]);
    let claimed = one_minus.pow(2).mul(&one_plus.pow(2)).mul(&sp(&[1, -1, 1]));
    on_diagonal == claimed
}

fn check_quotient_decomposition() -> bool {
    let mut f = f_in_r();
    let s = RationalPoly::x();
    let f_ss = f.iter().enumerate().fold(RationalPoly::default(), |acc, (j, c)| acc.add(&c.mul(&s.pow(j as u32))));
    f[0] = f[0].sub(&f_ss);
    // Synthetic division by r - s.
    let deg = f.len() - 1;
    let mut q = vec![RationalPoly::default(); deg];
    let mut carry = RationalPoly::default();
    for j in (1..=deg).rev() {
        carry = f[j].add(&carry.mul(&s));
        q[j - 1] = carry.clone();
    }
    if !f[0].add(&carry.mul(&s)).is_zero() {
        return false;
    }
    let substitution: Bivariate = vec![sp(&[0, 0, 1]), sp(&[0, 1, -1])];
    let neg_h = bi_scale(&bi_compose(&q, &substitution), &sp(&[-1]));
    let d = 3usize;
    if neg_h.len() > d + 1 {
        return false;
    }
    let zero = RationalPoly::default();
    let bern: Vec<RationalPoly> = (0..=d)
        .map(|k| {
            (0..=k).fold(RationalPoly::default(), |acc, j| {
                let w = BigRational::new(binomial(BigInt::from(k), BigInt::from(j)), binomial(BigInt::from(d), BigInt::from(j)));
                acc.add(&neg_h.get(j).unwrap_or(&zero).scale(&w))
            })
        })
        .collect();
    let [p0, p1, p2, p3] = certificate_polys();
    let one_minus = sp(&[1, -1]);
    let both = one_minus.mul(&sp(&[1, 1]));
    let third = rat(1, 3);
    let claimed = [one_minus.mul(&p0), both.mul(&p1).scale(&third), one_minus.mul(&p2).scale(&third), both.mul(&p3)];
    bern.iter().zip(&claimed).all(|(a, b)| a == b)
}

fn sample_pair(rng: &mut StreamRng) -> (f64, f64) {
    let s = rng.next_open01();
    let z = rng.next_f64();
    (s, s * s + z * (s - s * s))
}

/// Exact certificate checks plus `sample_count` random evaluations of `F_s(r)`
/// on `0 < s < 1`, `s^2 <= r <= s`; values below `1e-9` are re-evaluated exactly.
pub fn verify_poly_inequality(sample_count: u64, stream: RngStream) -> PolyReport {
    let published = published_bernstein_lists();
    let bernstein: Vec<BernsteinRow> = certificate_polys()
        .iter()
        .zip(published.iter())
        .enumerate()
        .map(|(i, (poly, want))| {
            let got = bernstein_coeffs(poly, poly.degree()).expect("degree matches");
            BernsteinRow {
                name: format!("P{i}"),
                matches: &got == want,
                nonnegative: got.iter().all(|c| !c.is_negative()),
                computed: got.iter().map(rat_string).collect(),
                published: want.iter().map(rat_string).collect(),
            }
        })
        .collect();
    let boundary_identity = check_boundary_identity();
    let quotient_decomposition = check_quotient_decomposition();

    const CHUNK: u64 = 1 << 12;
    let chunks = sample_count.div_ceil(CHUNK);
    let (negative_samples, min_value) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.substream(c).generator();
            let count = CHUNK.min(sample_count - c * CHUNK);
            let mut neg = 0u64;
            let mut min = f64::INFINITY;
            for _ in 0..count {
                let (s, r) = sample_pair(&mut rng);
                let v = f_value(s, r);
                min = min.min(v);
                if v < 1e-9 {
                    let exact = f_exact(&BigRational::from_f64(s).expect("finite"), &BigRational::from_f64(r).expect("finite"));
                    if exact.is_negative() {
                        neg += 1;
                    }
                }
            }
            (neg, min)
        })
        .reduce(|| (0, f64::INFINITY), |a, b| (a.0 + b.0, a.1.min(b.1)));
    let holds = bernstein.iter().all(|r| r.matches && r.nonnegative) && boundary_identity && quotient_decomposition && negative_samples == 0;
    PolyReport {
        bernstein,
        boundary_identity,
        quotient_decomposition,
        samples: sample_count,
        negative_samples,
        min_value,
        holds,
    }
}
