//! Chunked, deterministic Monte Carlo with common random numbers.
//!
//! A run of `samples` draws is cut into fixed-size chunks. Chunk `c` reads
//! from `stream.substream(c)`, so the sample path depends only on the
//! stream token and the chunk size, never on the number of threads. Chunk
//! accumulators are merged in index order, which makes every reported
//! digit reproducible.

use crate::error::{Error, Result};
use crate::scalar_math::{RngStream, StreamRng};
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
const CHUNK: u64 = 1 << 14;

/// Sample budget of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McBudget {
    pub samples: u64,
}

impl McBudget {
    pub fn new(samples: u64) -> Result<Self> {
        if samples < 2 {
            return Err(Error::Usage(format!("Monte Carlo budget must be at least 2 samples, got {samples}")));
        }
        Ok(Self { samples })
    }
}

impl Default for McBudget {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES }
    }
}

/// A mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub samples: u64,
}

impl Estimate {
    /// `(self - other) / sqrt(se_1^2 + se_2^2)`; only meaningful for independent runs.
    pub fn z_against(&self, other: &Estimate) -> f64 {
        (self.value - other.value) / self.se.hypot(other.se)
    }
}

/// Running first and second moments of a fixed set of per-sample statistics.
///
/// Variances are always tracked; cross moments only for the requested pairs.
#[derive(Debug, Clone)]
pub struct Moments {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    cross: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize, pairs: &[(usize, usize)]) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
            pairs: pairs.to_vec(),
            cross: vec![0.0; pairs.len()],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Welford update with one observation vector.
    pub fn push(&mut self, x: &[f64], delta: &mut [f64]) {
        self.count += 1;
        let inv = 1.0 / self.count as f64;
        for i in 0..x.len() {
            let d = x[i] - self.mean[i];
            delta[i] = d;
            self.mean[i] += d * inv;
            self.m2[i] += d * (x[i] - self.mean[i]);
        }
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            self.cross[k] += delta[i] * (x[j] - self.mean[j]);
        }
    }

    /// Chan-Golub-LeVeque merge of two disjoint accumulations.
    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let w = na * nb / n;
        let d: Vec<f64> = other.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        for (i, di) in d.iter().enumerate() {
            self.mean[i] += di * nb / n;
            self.m2[i] += other.m2[i] + di * di * w;
        }
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            self.cross[k] += other.cross[k] + d[i] * d[j] * w;
        }
        self.count += other.count;
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.mean[i]
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.m2[i] / (self.count as f64 - 1.0)
    }

    pub fn covariance(&self, i: usize, j: usize) -> Option<f64> {
        if i == j {
            return Some(self.variance(i));
        }
        self.pairs
            .iter()
            .position(|&pr| pr == (i, j) || pr == (j, i))
            .map(|k| self.cross[k] / (self.count as f64 - 1.0))
    }

    pub fn estimate(&self, i: usize) -> Estimate {
        Estimate {
            value: self.mean[i],
            se: (self.variance(i).max(0.0) / self.count as f64).sqrt(),
            samples: self.count,
        }
    }

    /// Control-variate estimate of `E Y_y` using `Y_c` with known mean `c_mean`.
    ///
    /// Falls back to the plain mean when the pair was not tracked or the
    /// control is degenerate.
    pub fn cv_estimate(&self, y: usize, c: usize, c_mean: f64) -> Estimate {
        let var_c = self.variance(c);
        let Some(cov) = self.covariance(y, c) else {
            return self.estimate(y);
        };
        if !(var_c > 0.0) {
            return self.estimate(y);
        }
        let beta = cov / var_c;
        let resid = (self.variance(y) - beta * cov).max(0.0);
        Estimate {
            value: self.mean[y] - beta * (self.mean[c] - c_mean),
            se: (resid / self.count as f64).sqrt(),
            samples: self.count,
        }
    }
}

/// Runs `budget.samples` draws, each producing `dim` statistics.
///
/// `init` builds per-chunk scratch state; `draw` fills the statistics of one
/// sample. Only the covariances listed in `pairs` are accumulated.
pub fn run<S, I, F>(
    budget: McBudget,
    stream: RngStream,
    dim: usize,
    pairs: &[(usize, usize)],
    init: I,
    draw: F,
) -> Moments
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut StreamRng, &mut [f64]) + Sync,
{
    let chunks = budget.samples.div_ceil(CHUNK);
    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(budget.samples - c * CHUNK);
            let mut rng = stream.substream(c).generator();
            let mut state = init();
            let mut acc = Moments::new(dim, pairs);
            let mut stats = vec![0.0; dim];
            let mut delta = vec![0.0; dim];
            for _ in 0..len {
                draw(&mut state, &mut rng, &mut stats);
                acc.push(&stats, &mut delta);
            }
            acc
        })
        .collect();
    let mut total = Moments::new(dim, pairs);
    for m in &partial {
        total.merge(m);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<[f64; 2]> = (0..1000).map(|i| [(i as f64).sin(), (i as f64 * 0.37).cos() + 3.0]).collect();
        let mut whole = Moments::new(2, &[(0, 1)]);
        let mut d = [0.0; 2];
        for x in &xs {
            whole.push(x, &mut d);
        }
        let mut a = Moments::new(2, &[(0, 1)]);
        let mut b = Moments::new(2, &[(0, 1)]);
        for x in &xs[..313] {
            a.push(x, &mut d);
        }
        for x in &xs[313..] {
            b.push(x, &mut d);
        }
        a.merge(&b);
        for i in 0..2 {
            assert!((a.mean(i) - whole.mean(i)).abs() < 1e-14);
            assert!((a.variance(i) - whole.variance(i)).abs() < 1e-12);
        }
        assert!((a.covariance(0, 1).unwrap() - whole.covariance(1, 0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn uniform_mean_and_determinism() {
        let go = || {
            run(McBudget::new(200_000).unwrap(), RngStream::new(5, 0), 1, &[], || (), |_, rng, out| {
                out[0] = rng.next_f64();
            })
        };
        let a = go().estimate(0);
        let b = go().estimate(0);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert!((a.value - 0.5).abs() < 4.0 * a.se);
        assert!((a.se - (1.0f64 / 12.0 / 200_000.0).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn result_does_not_depend_on_thread_count() {
        let go = || {
            run(McBudget::new(100_000).unwrap(), RngStream::new(9, 2), 1, &[], || (), |_, rng, out| {
                out[0] = rng.next_f64().powi(3);
            })
            .estimate(0)
        };
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(go);
        let multi = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(go);
        assert_eq!(single.value.to_bits(), multi.value.to_bits());
        assert_eq!(single.se.to_bits(), multi.se.to_bits());
    }

    #[test]
    fn control_variate_shrinks_error() {
        // E[U^2] with control U (mean 1/2).
        let m = run(McBudget::new(100_000).unwrap(), RngStream::new(3, 0), 2, &[(0, 1)], || (), |_, rng, out| {
            let u = rng.next_f64();
            out[0] = u * u;
            out[1] = u;
        });
        let plain = m.estimate(0);
        let cv = m.cv_estimate(0, 1, 0.5);
        assert!(cv.se < 0.3 * plain.se);
        assert!((cv.value - 1.0 / 3.0).abs() < 4.0 * cv.se);
    }

    #[test]
    fn zero_budget_is_a_usage_error() {
        assert!(matches!(McBudget::new(0), Err(Error::Usage(_))));
    }
}
