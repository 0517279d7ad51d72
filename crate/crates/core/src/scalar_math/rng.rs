//! Counter-based random streams (Philox4x32-10).
//!
//! A stream is the pair `(seed, stream_id)`. Block `i` of a stream is the
//! Philox permutation of the counter `(i, stream_id)` under the key `seed`,
//! so any block can be produced without touching the others and streams can
//! be split by id for parallel work.

use serde::Serialize;
use std::f64::consts::PI;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

pub(crate) fn philox4x32_10(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(PHILOX_W0);
            key[1] = key[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Immutable token naming one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Child stream for work item `index`. Deterministic in `(self, index)`.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019))),
        }
    }

    /// A fresh generator positioned at the start of the stream.
    pub fn generator(&self) -> StreamRng {
        StreamRng { stream: *self, block: 0, buf: [0; 2], buf_pos: 2 }
    }
}

/// Sequential reader over the blocks of an [`RngStream`].
#[derive(Debug, Clone)]
pub struct StreamRng {
    stream: RngStream,
    block: u64,
    buf: [u64; 2],
    buf_pos: usize,
}

impl StreamRng {
    pub fn stream(&self) -> RngStream {
        self.stream
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        if self.buf_pos == 2 {
            let ctr = [
                self.block as u32,
                (self.block >> 32) as u32,
                self.stream.stream_id as u32,
                (self.stream.stream_id >> 32) as u32,
            ];
            let key = [self.stream.seed as u32, (self.stream.seed >> 32) as u32];
            let out = philox4x32_10(ctr, key);
            self.buf = [
                u64::from(out[0]) | (u64::from(out[1]) << 32),
                u64::from(out[2]) | (u64::from(out[3]) << 32),
            ];
            self.block = self.block.wrapping_add(1);
            self.buf_pos = 0;
        }
        let v = self.buf[self.buf_pos];
        self.buf_pos += 1;
        v
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Rademacher sign from one draw.
    #[inline]
    pub fn next_sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Standard normal draw (Box-Muller, cosine branch; two uniforms per call).
#[inline]
pub fn normal_sample(rng: &mut StreamRng) -> f64 {
    let u1 = rng.next_open01();
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Draw from Gamma(shape, 1).
///
/// Marsaglia-Tsang squeeze for `shape >= 1`; smaller shapes use
/// `Gamma(a) = Gamma(a + 1) * U^(1/a)`.
///
/// # Panics
/// If `shape` is not a finite positive number.
pub fn gamma_sample(shape: f64, rng: &mut StreamRng) -> f64 {
    assert!(shape > 0.0 && shape.is_finite(), "gamma shape must be positive, got {shape}");
    if shape < 1.0 {
        let g = marsaglia_tsang(shape + 1.0, rng);
        let u = rng.next_open01();
        return (g.ln() + u.ln() / shape).exp();
    }
    marsaglia_tsang(shape, rng)
}

fn marsaglia_tsang(shape: f64, rng: &mut StreamRng) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = normal_sample(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = rng.next_open01();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Known-answer vectors published with the Random123 library.
    #[test]
    fn philox_known_answers() {
        assert_eq!(philox4x32_10([0; 4], [0; 2]), [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]);
        assert_eq!(
            philox4x32_10([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
        );
        assert_eq!(
            philox4x32_10([0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344], [0xa409_3822, 0x299f_31d0]),
            [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1]
        );
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = {
            let mut g = RngStream::new(7, 3).generator();
            (0..16).map(|_| g.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut g = RngStream::new(7, 3).generator();
            (0..16).map(|_| g.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut g = RngStream::new(7, 4).generator();
            (0..16).map(|_| g.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(RngStream::new(7, 3).substream(0), RngStream::new(7, 3).substream(1));
    }

    #[test]
    fn uniforms_stay_in_range() {
        let mut g = RngStream::new(1, 1).generator();
        for _ in 0..10_000 {
            let u = g.next_open01();
            assert!(u > 0.0 && u < 1.0);
            let v = g.next_f64();
            assert!((0.0..1.0).contains(&v));
        }
    }

    fn mean_and_var(shape: f64, draws: usize, seed: u64) -> (f64, f64) {
        let mut g = RngStream::new(seed, 0).generator();
        let xs: Vec<f64> = (0..draws).map(|_| gamma_sample(shape, &mut g)).collect();
        let m = xs.iter().sum::<f64>() / draws as f64;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (draws as f64 - 1.0);
        (m, v)
    }

    #[test]
    fn gamma_moments_match_shape() {
        let draws = 1_000_000;
        for (shape, seed) in [(1.0, 11), (0.5, 12), (2.7, 13)] {
            let (m, v) = mean_and_var(shape, draws, seed);
            // Gamma(k): mean k, variance k, fourth central moment 3k^2 + 6k.
            let se_mean = (shape / draws as f64).sqrt();
            let se_var = ((3.0 * shape * shape + 6.0 * shape - shape * shape) / draws as f64).sqrt();
            assert!((m - shape).abs() < 4.0 * se_mean, "shape {shape}: mean {m}");
            assert!((v - shape).abs() < 5.0 * se_var, "shape {shape}: var {v}");
        }
    }

    #[test]
    fn gamma_is_deterministic() {
        let mut a = RngStream::new(99, 5).generator();
        let mut b = RngStream::new(99, 5).generator();
        for _ in 0..100 {
            assert_eq!(gamma_sample(0.7, &mut a).to_bits(), gamma_sample(0.7, &mut b).to_bits());
        }
    }
}
