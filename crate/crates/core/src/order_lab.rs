//! Majorization, T-transform chains and stop-loss tests of convex order.

use crate::error::{domain, Error, Result};
use crate::lp_model::{moment_set, BallParams};
use crate::montecarlo::{self, Estimate, McBudget};
use crate::profile::{compare_directions, Direction};
use crate::sampler::sample_uniform_ball_into;
use crate::scalar_math::{RngStream, StreamRng};
use serde::Serialize;

/// Default tolerance for sums and partial sums of simplex vectors.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A nonnegative vector with a declared total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexVector {
    pub s: Vec<f64>,
    pub total: f64,
}

impl SimplexVector {
    /// Nonnegative entries; the total is their sum.
    pub fn new(s: Vec<f64>) -> Result<Self> {
        if s.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return domain("simplex entries must be finite and nonnegative");
        }
        let total = s.iter().sum();
        Ok(Self { s, total })
    }

    pub fn from_direction(d: &Direction) -> Self {
        Self { s: d.squared.clone(), total: 1.0 }
    }

    /// The unit direction with nonnegative entries `sqrt(s_i / total)`.
    pub fn to_direction(&self) -> Result<Direction> {
        Direction::new(&self.s.iter().map(|x| x.sqrt()).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    fn sorted_desc(&self) -> Vec<f64> {
        let mut v = self.s.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }
}

/// `s` majorizes `r`: every partial sum of `s` sorted decreasingly dominates
/// that of `r`, up to `tol`.
pub fn majorizes(s: &SimplexVector, r: &SimplexVector, tol: f64) -> Result<bool> {
    if s.len() != r.len() {
        return domain(format!("length mismatch: {} vs {}", s.len(), r.len()));
    }
    if (s.total - r.total).abs() > tol {
        return domain(format!("totals differ: {} vs {}", s.total, r.total));
    }
    let (a, b) = (s.sorted_desc(), r.sorted_desc());
    let (mut pa, mut pb) = (0.0, 0.0);
    for i in 0..a.len() {
        pa += a[i];
        pb += b[i];
        if pa < pb - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `s` majorizes `r` and the two are not permutations of each other.
pub fn strictly_majorizes(s: &SimplexVector, r: &SimplexVector, tol: f64) -> Result<bool> {
    Ok(majorizes(s, r, tol)? && !majorizes(r, s, tol)?)
}

/// Replace `(s_i, s_j)` by `(l s_i + (1-l) s_j, l s_j + (1-l) s_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTransfer {
    pub i: usize,
    pub j: usize,
    pub lambda: f64,
}

impl TTransfer {
    pub fn apply(&self, s: &mut [f64]) {
        let (a, b) = (s[self.i], s[self.j]);
        s[self.i] = self.lambda * a + (1.0 - self.lambda) * b;
        s[self.j] = self.lambda * b + (1.0 - self.lambda) * a;
    }
}

pub fn replay(from: &SimplexVector, chain: &[TTransfer]) -> SimplexVector {
    let mut s = from.s.clone();
    for t in chain {
        t.apply(&mut s);
    }
    SimplexVector { s, total: from.total }
}

/// T-transforms carrying `from` to `to`, following the classical constructive proof.
///
/// On the decreasing rearrangements, take `j` the last index where `from`
/// exceeds `to` and `k` the first later index where it falls short, and move
/// `min(x_j - y_j, y_k - x_k)` from `j` to `k`. Each move fixes at least one
/// coordinate, so at most `n - 1` moves are needed. When the two vectors are
/// not similarly ordered, swaps (`lambda = 0`) finish the job.
pub fn t_transform_chain(from: &SimplexVector, to: &SimplexVector) -> Result<Vec<TTransfer>> {
    let tol = 1e-10 * from.total.max(1.0);
    if !majorizes(from, to, tol)? {
        return domain("source does not majorize target");
    }
    let n = from.len();
    let order = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
        idx
    };
    let pos_to = order(&to.s);
    // Ties in `from` are ranked like the target, so similarly ordered inputs need no swaps.
    let mut rank_in_to = vec![0; n];
    for (r, &i) in pos_to.iter().enumerate() {
        rank_in_to[i] = r;
    }
    let mut pos_from: Vec<usize> = (0..n).collect();
    pos_from.sort_by(|&a, &b| from.s[b].total_cmp(&from.s[a]).then(rank_in_to[a].cmp(&rank_in_to[b])));

    let mut x: Vec<f64> = pos_from.iter().map(|&i| from.s[i]).collect();
    let y: Vec<f64> = pos_to.iter().map(|&i| to.s[i]).collect();
    let mut chain = Vec::new();
    for _ in 0..n {
        let Some(j) = (0..n).rev().find(|&j| x[j] - y[j] > tol) else {
            break;
        };
        let Some(k) = (j + 1..n).find(|&k| y[k] - x[k] > tol) else {
            break;
        };
        let delta = (x[j] - y[j]).min(y[k] - x[k]);
        let lambda = 1.0 - delta / (x[j] - x[k]);
        chain.push(TTransfer { i: pos_from[j], j: pos_from[k], lambda });
        x[j] -= delta;
        x[k] += delta;
    }

    // Rank r now sits at position pos_from[r] and must end at pos_to[r].
    let mut at: Vec<usize> = vec![0; n];
    for r in 0..n {
        at[pos_from[r]] = r;
    }
    for target in 0..n {
        let r = rank_in_to[target];
        let cur = pos_from[r];
        if cur != target {
            chain.push(TTransfer { i: cur, j: target, lambda: 0.0 });
            let other = at[target];
            pos_from[other] = cur;
            at[cur] = other;
            pos_from[r] = target;
            at[target] = r;
        }
    }
    Ok(chain)
}

/// A random point majorized by `from`, reached by `steps` random T-transforms.
pub fn random_majorized(from: &SimplexVector, steps: usize, rng: &mut StreamRng) -> (SimplexVector, Vec<TTransfer>) {
    let n = from.len();
    let mut s = from.s.clone();
    let mut chain = Vec::with_capacity(steps);
    if n < 2 {
        return (from.clone(), chain);
    }
    for _ in 0..steps {
        let i = (rng.next_u64() % n as u64) as usize;
        let mut j = (rng.next_u64() % (n as u64 - 1)) as usize;
        if j >= i {
            j += 1;
        }
        let t = TTransfer { i, j, lambda: rng.next_f64() };
        t.apply(&mut s);
        chain.push(t);
    }
    (SimplexVector { s, total: from.total }, chain)
}

/// Empirical lower stop-loss transform `a -> E(a - U)_+` with standard errors.
pub fn stop_loss_curve(samples: &[f64], thresholds: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples.is_empty() {
        return Err(Error::Usage("stop-loss curve needs at least one sample".into()));
    }
    if thresholds.iter().any(|a| !(*a >= 0.0)) {
        return domain("stop-loss thresholds must be nonnegative");
    }
    let n = samples.len() as f64;
    let mut means = Vec::with_capacity(thresholds.len());
    let mut ses = Vec::with_capacity(thresholds.len());
    for &a in thresholds {
        let vals = samples.iter().map(|u| (a - u).max(0.0));
        let mean = vals.clone().sum::<f64>() / n;
        let var = if samples.len() > 1 { vals.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        means.push(mean);
        ses.push((var / n).sqrt());
    }
    Ok((means, ses))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConsistentWithOrder,
    Violation,
    Inconclusive,
}

/// Stop-loss comparison of `U = <eta, X>^2` against `V = <theta, X>^2`.
#[derive(Debug, Clone, Serialize)]
pub struct StopLossReport {
    pub thresholds: Vec<f64>,
    /// `E(a - U)_+`.
    pub lhs: Vec<f64>,
    /// `E(a - V)_+`.
    pub rhs: Vec<f64>,
    /// Control-variate estimate of `lhs - rhs`.
    pub diff: Vec<f64>,
    /// Standard error of `diff`.
    pub se: Vec<f64>,
    pub mean_u: Estimate,
    pub mean_v: Estimate,
    /// `(mean_u - mean_v) / se` on the paired samples.
    pub mean_gap_z: f64,
    /// Largest `diff / se` over the grid.
    pub worst_z: f64,
    pub verdict: Verdict,
}

/// Evenly spaced thresholds `0, a_max/(k-1), ..., a_max`.
pub fn threshold_grid(a_max: f64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..k).map(|i| a_max * i as f64 / (k - 1) as f64).collect(),
    }
}

/// A grid that covers the bulk of both squared projections: 41 points on `[0, 6 v]`.
pub fn default_grid(params: BallParams) -> Vec<f64> {
    threshold_grid(6.0 * moment_set(params).v, 41)
}

/// Checks `E(a - U)_+ <= E(a - V)_+` on `grid` with common random numbers.
///
/// The difference at each threshold is adjusted with the control variate
/// `V - U`, whose mean is zero. A threshold whose adjusted difference
/// exceeds 3 standard errors is a violation; without violations the verdict
/// is consistent when the sample means agree within 4 standard errors.
pub fn convex_order_test(
    params: BallParams,
    theta: &Direction,
    eta: &Direction,
    grid: &[f64],
    budget: McBudget,
    stream: RngStream,
) -> Result<StopLossReport> {
    params.require_below_two()?;
    if theta.len() != params.n || eta.len() != params.n {
        return domain("direction dimension does not match n");
    }
    if !majorizes(&SimplexVector::from_direction(theta), &SimplexVector::from_direction(eta), 1e-9)? {
        return domain("s(theta) must majorize s(eta)");
    }
    stop_loss_compare(params, theta, eta, grid, budget, stream)
}

/// [`convex_order_test`] without the majorization precondition.
pub(crate) fn stop_loss_compare(
    params: BallParams,
    theta: &Direction,
    eta: &Direction,
    grid: &[f64],
    budget: McBudget,
    stream: RngStream,
) -> Result<StopLossReport> {
    if grid.iter().any(|a| !(*a >= 0.0)) {
        return domain("stop-loss thresholds must be nonnegative");
    }
    let g = grid.len();
    // Layout: U, V, C = V - U, then lhs, rhs and diff blocks.
    let dim = 3 + 3 * g;
    let pairs: Vec<(usize, usize)> = (0..g).map(|i| (3 + 2 * g + i, 2)).chain(std::iter::once((0, 1))).collect();
    let n = params.n;
    let m = montecarlo::run(budget, stream, dim, &pairs, || vec![0.0; n], |x, rng, out| {
        sample_uniform_ball_into(params, rng, x);
        let pu = eta.project(x);
        let pv = theta.project(x);
        let (u, v) = (pu * pu, pv * pv);
        out[0] = u;
        out[1] = v;
        out[2] = v - u;
        for (i, &a) in grid.iter().enumerate() {
            let l = (a - u).max(0.0);
            let r = (a - v).max(0.0);
            out[3 + i] = l;
            out[3 + g + i] = r;
            out[3 + 2 * g + i] = l - r;
        }
    });
    let mut diff = Vec::with_capacity(g);
    let mut se = Vec::with_capacity(g);
    let mut worst_z = f64::NEG_INFINITY;
    let mut violation = false;
    for i in 0..g {
        let e = m.cv_estimate(3 + 2 * g + i, 2, 0.0);
        let z = if e.se > 0.0 { e.value / e.se } else if e.value > 1e-15 { f64::INFINITY } else { 0.0 };
        worst_z = worst_z.max(z);
        violation |= z > 3.0;
        diff.push(e.value);
        se.push(e.se);
    }
    let c = m.estimate(2);
    let mean_gap_z = if c.se > 0.0 { -c.value / c.se } else { 0.0 };
    let verdict = if violation {
        Verdict::Violation
    } else if mean_gap_z.abs() <= 4.0 {
        Verdict::ConsistentWithOrder
    } else {
        Verdict::Inconclusive
    };
    Ok(StopLossReport {
        thresholds: grid.to_vec(),
        lhs: (0..g).map(|i| m.mean(3 + i)).collect(),
        rhs: (0..g).map(|i| m.mean(3 + g + i)).collect(),
        diff,
        se,
        mean_u: m.estimate(0),
        mean_v: m.estimate(1),
        mean_gap_z,
        worst_z: if g == 0 { 0.0 } else { worst_z },
        verdict,
    })
}

/// One consecutive pair of a Schur scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchurPair {
    pub index: usize,
    pub gap: f64,
    pub se: f64,
    pub margin_se: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchurScan {
    pub t: f64,
    pub values: Vec<crate::profile::ProfileEstimate>,
    pub pairs: Vec<SchurPair>,
    pub monotone: bool,
    pub first_failure: Option<usize>,
}

/// `M` must decrease by more than 3 standard errors along a strict majorization chain.
pub fn schur_scan(params: BallParams, t: f64, chain: &[Direction], budget: McBudget, stream: RngStream) -> Result<SchurScan> {
    params.require_below_two()?;
    for w in chain.windows(2) {
        let (a, b) = (SimplexVector::from_direction(&w[0]), SimplexVector::from_direction(&w[1]));
        if !strictly_majorizes(&a, &b, 1e-9)? {
            return domain("chain is not ordered by strict majorization");
        }
    }
    let cmp = compare_directions(params, t, chain, budget, stream)?;
    let pairs: Vec<SchurPair> = cmp
        .gaps
        .iter()
        .enumerate()
        .map(|(index, g)| {
            let margin_se = g.value / g.se;
            SchurPair { index, gap: g.value, se: g.se, margin_se, ok: margin_se > 3.0 }
        })
        .collect();
    let first_failure = pairs.iter().position(|p| !p.ok);
    Ok(SchurScan { t, values: cmp.values, monotone: first_failure.is_none(), first_failure, pairs })
}

/// The support of `<eta, X>^2` leaves `[0, 1]` when `p > 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Counterexample {
    pub p: f64,
    pub n: usize,
    /// `P(<eta, X>^2 > 1)` for `eta = (e_1 + e_2)/sqrt 2`.
    pub prob_exceed: Estimate,
    /// `E(<eta, X>^2 - 1)_+`.
    pub excess_eta: Estimate,
    /// `E(<e_1, X>^2 - 1)_+`, identically zero.
    pub excess_e1: f64,
    /// `max <eta, x>` over the ball, `2^{1/q - 1/2}` with `q = p/(p-1)`.
    pub support_bound: f64,
}

pub fn p_gt_2_counterexample(p: f64, n: usize, budget: McBudget, stream: RngStream) -> Result<Counterexample> {
    if !(p > 2.0 && p.is_finite()) {
        return domain(format!("counterexample needs p > 2, got {p}"));
    }
    if n < 2 {
        return domain("counterexample needs n >= 2");
    }
    let params = BallParams::unrestricted(p, n);
    let q = p / (p - 1.0);
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let m = montecarlo::run(budget, stream, 3, &[], || vec![0.0; n], |x, rng, out| {
        sample_uniform_ball_into(params, rng, x);
        let y = c * (x[0] + x[1]);
        let u = y * y;
        out[0] = if u > 1.0 { 1.0 } else { 0.0 };
        out[1] = (u - 1.0).max(0.0);
        out[2] = (x[0] * x[0] - 1.0).max(0.0);
    });
    Ok(Counterexample {
        p,
        n,
        prob_exceed: m.estimate(0),
        excess_eta: m.estimate(1),
        excess_e1: m.mean(2),
        support_bound: 2f64.powf(1.0 / q - 0.5),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(v: &[f64]) -> SimplexVector {
        SimplexVector::new(v.to_vec()).unwrap()
    }

    fn bp(p: f64, n: usize) -> BallParams {
        BallParams::new(p, n).unwrap()
    }

    fn assert_replays(from: &SimplexVector, to: &SimplexVector, chain: &[TTransfer]) {
        let mut s = from.clone();
        for t in chain {
            let next = replay(&s, std::slice::from_ref(t));
            assert!(majorizes(&s, &next, 1e-10).unwrap());
            s = next;
        }
        for (a, b) in s.s.iter().zip(&to.s) {
            assert!((a - b).abs() < 1e-10, "{:?} vs {:?}", s.s, to.s);
        }
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&sv(&[1.0, 0.0]), &sv(&[0.5, 0.5]), SIMPLEX_TOL).unwrap());
        assert!(!majorizes(&sv(&[0.5, 0.5]), &sv(&[1.0, 0.0]), SIMPLEX_TOL).unwrap());
        assert!(majorizes(&sv(&[0.5, 0.3, 0.2]), &sv(&[0.4, 0.4, 0.2]), SIMPLEX_TOL).unwrap());
        assert!(majorizes(&sv(&[0.2, 0.5, 0.3]), &sv(&[0.2, 0.4, 0.4]), SIMPLEX_TOL).unwrap());
        assert!(majorizes(&sv(&[0.2, 0.5]), &sv(&[0.5]), SIMPLEX_TOL).is_err());
        assert!(majorizes(&sv(&[0.2, 0.5]), &sv(&[0.5, 0.5]), SIMPLEX_TOL).is_err());
    }

    #[test]
    fn uniform_vector_is_majorized_by_everything() {
        let mut rng = RngStream::new(1, 0).generator();
        let u = sv(&[0.25; 4]);
        for _ in 0..200 {
            let raw: Vec<f64> = (0..4).map(|_| rng.next_f64()).collect();
            let t: f64 = raw.iter().sum();
            let s = sv(&raw.iter().map(|x| x / t).collect::<Vec<_>>());
            assert!(majorizes(&s, &u, 1e-12).unwrap());
        }
    }

    #[test]
    fn chain_examples() {
        let (a, b) = (sv(&[1.0, 0.0, 0.0]), sv(&[1.0 / 3.0; 3]));
        let chain = t_transform_chain(&a, &b).unwrap();
        assert!(chain.len() <= 2);
        assert_replays(&a, &b, &chain);

        assert!(t_transform_chain(&b, &b).unwrap().is_empty());

        let chain = t_transform_chain(&sv(&[0.7, 0.3]), &sv(&[0.5, 0.5])).unwrap();
        assert_eq!(chain.len(), 1);
        // 0.7 l + 0.3 (1 - l) = 0.5
        assert!((chain[0].lambda - 0.5).abs() < 1e-12);

        assert!(t_transform_chain(&b, &a).is_err());
    }

    #[test]
    fn chain_handles_differently_ordered_inputs() {
        let from = sv(&[0.1, 0.6, 0.3]);
        let to = sv(&[0.4, 0.2, 0.4]);
        let chain = t_transform_chain(&from, &to).unwrap();
        assert_replays(&from, &to, &chain);
    }

    #[test]
    fn stop_loss_examples() {
        let mut rng = RngStream::new(2, 0).generator();
        let xs: Vec<f64> = (0..200_000).map(|_| rng.next_f64()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let max = xs.iter().cloned().fold(0.0, f64::max);
        let (m, se) = stop_loss_curve(&xs, &[0.0, 0.5, max, 2.0]).unwrap();
        assert_eq!(m[0], 0.0);
        assert!((m[1] - 0.125).abs() < 4.0 * se[1]);
        assert!((m[2] - (max - mean)).abs() < 1e-12);
        assert!((m[3] - (2.0 - mean)).abs() < 1e-12);
        assert!(stop_loss_curve(&[], &[0.1]).is_err());
        assert!(stop_loss_curve(&[0.1], &[-0.1]).is_err());
    }

    #[test]
    fn convex_order_in_the_plane() {
        let grid: Vec<f64> = (0..=40).map(|k| 0.05 * k as f64).collect();
        let params = bp(1.5, 2);
        let r = convex_order_test(
            params,
            &Direction::e1(2).unwrap(),
            &Direction::diagonal(2).unwrap(),
            &grid,
            McBudget::new(400_000).unwrap(),
            RngStream::new(3, 0),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::ConsistentWithOrder);
        assert!(r.lhs.iter().zip(&grid).all(|(l, a)| *l >= 0.0 && *l <= *a + 1e-15));
        let v = moment_set(params).v;
        assert!((r.mean_u.value - v).abs() < 4.0 * r.mean_u.se);
        assert!((r.mean_v.value - v).abs() < 4.0 * r.mean_v.se);
    }

    #[test]
    fn convex_order_identical_laws_and_cross_polytope() {
        let grid = default_grid(bp(1.0, 3));
        let d = Direction::new(&[0.3, 0.5, 0.8]).unwrap();
        let r = convex_order_test(bp(1.2, 3), &d, &d, &grid, McBudget::new(50_000).unwrap(), RngStream::new(4, 0)).unwrap();
        assert_eq!(r.verdict, Verdict::ConsistentWithOrder);
        assert!(r.diff.iter().all(|x| *x == 0.0));
        let r = convex_order_test(
            bp(1.0, 3),
            &Direction::e1(3).unwrap(),
            &Direction::canonical(3, 2).unwrap(),
            &grid,
            McBudget::new(400_000).unwrap(),
            RngStream::new(5, 0),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::ConsistentWithOrder);
    }

    #[test]
    fn convex_order_guards() {
        let (e1, d) = (Direction::e1(2).unwrap(), Direction::diagonal(2).unwrap());
        let b = McBudget::new(100).unwrap();
        assert!(convex_order_test(bp(2.0, 2), &e1, &d, &[0.1], b, RngStream::new(0, 0)).is_err());
        assert!(convex_order_test(bp(1.5, 2), &d, &e1, &[0.1], b, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn reversed_order_is_flagged() {
        let params = bp(1.3, 3);
        let grid = default_grid(params);
        let r = stop_loss_compare(
            params,
            &Direction::diagonal(3).unwrap(),
            &Direction::e1(3).unwrap(),
            &grid,
            McBudget::new(200_000).unwrap(),
            RngStream::new(11, 0),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Violation);
    }

    #[test]
    fn nearby_directions_are_still_resolved() {
        let params = bp(1.0, 2);
        let grid = default_grid(params);
        let theta = Direction::new(&[1.0, 1e-3]).unwrap();
        let eta = Direction::diagonal(2).unwrap();
        let r = convex_order_test(params, &theta, &eta, &grid, McBudget::new(200_000).unwrap(), RngStream::new(6, 0)).unwrap();
        assert_eq!(r.verdict, Verdict::ConsistentWithOrder);
        assert!(r.worst_z < 3.0);
        let most_negative = r.diff.iter().zip(&r.se).map(|(d, s)| d / s).fold(f64::INFINITY, f64::min);
        assert!(most_negative < -3.0, "order should be resolved strictly somewhere: {most_negative}");
    }

    #[test]
    fn schur_scan_canonical_chain() {
        let chain: Vec<Direction> = (1..=4).map(|k| Direction::canonical(4, k).unwrap()).collect();
        let s = schur_scan(bp(1.0, 4), 0.5, &chain, McBudget::new(1_000_000).unwrap(), RngStream::new(7, 0)).unwrap();
        assert!(s.monotone, "{:?}", s.pairs);
        assert!(schur_scan(bp(2.0, 4), 0.5, &chain, McBudget::new(100).unwrap(), RngStream::new(7, 0)).is_err());
        let reversed: Vec<Direction> = chain.into_iter().rev().collect();
        assert!(schur_scan(bp(1.0, 4), 0.5, &reversed, McBudget::new(100).unwrap(), RngStream::new(7, 0)).is_err());
    }

    #[test]
    fn schur_scan_random_chain() {
        let mut rng = RngStream::new(8, 0).generator();
        let top = sv(&[0.7, 0.2, 0.1]);
        let (bottom, _) = random_majorized(&top, 6, &mut rng);
        let mid: Vec<f64> = top.s.iter().zip(&bottom.s).map(|(a, b)| 0.5 * (a + b)).collect();
        let chain = vec![top.to_direction().unwrap(), sv(&mid).to_direction().unwrap(), bottom.to_direction().unwrap()];
        let s = schur_scan(bp(1.5, 3), 1.0, &chain, McBudget::new(1_000_000).unwrap(), RngStream::new(9, 0)).unwrap();
        assert!(s.monotone, "{:?}", s.pairs);
    }

    #[test]
    fn counterexample_support() {
        let c = p_gt_2_counterexample(3.0, 2, McBudget::new(1_000_000).unwrap(), RngStream::new(10, 0)).unwrap();
        assert!((c.support_bound - 2f64.powf(1.0 / 6.0)).abs() < 1e-12);
        assert!(c.prob_exceed.value - 3.0 * c.prob_exceed.se > 0.0);
        assert_eq!(c.excess_e1, 0.0);
        let c4 = p_gt_2_counterexample(4.0, 3, McBudget::new(10).unwrap(), RngStream::new(10, 0)).unwrap();
        assert!((c4.support_bound - 2f64.powf(0.25)).abs() < 1e-12);
        assert!(p_gt_2_counterexample(2.0, 2, McBudget::new(10).unwrap(), RngStream::new(0, 0)).is_err());
    }

    fn simplex_strategy(n: usize) -> impl Strategy<Value = SimplexVector> {
        prop::collection::vec(0.0f64..1.0, n).prop_filter_map("non-zero", |v| {
            let t: f64 = v.iter().sum();
            (t > 1e-6).then(|| SimplexVector::new(v.iter().map(|x| x / t).collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn majorization_is_reflexive(s in simplex_strategy(5)) {
            prop_assert!(majorizes(&s, &s, 1e-12).unwrap());
        }

        #[test]
        fn majorization_is_transitive(s in simplex_strategy(5), seed in 0u64..1000) {
            let mut rng = RngStream::new(seed, 1).generator();
            let (r, _) = random_majorized(&s, 3, &mut rng);
            let (q, _) = random_majorized(&r, 3, &mut rng);
            prop_assert!(majorizes(&s, &r, 1e-10).unwrap());
            prop_assert!(majorizes(&r, &q, 1e-10).unwrap());
            prop_assert!(majorizes(&s, &q, 1e-10).unwrap());
        }

        #[test]
        fn majorization_is_antisymmetric_up_to_permutation(s in simplex_strategy(4), seed in 0u64..1000) {
            let mut rng = RngStream::new(seed, 2).generator();
            let mut perm = s.s.clone();
            for i in (1..perm.len()).rev() {
                let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                perm.swap(i, j);
            }
            let p = SimplexVector { s: perm, total: s.total };
            prop_assert!(majorizes(&s, &p, 1e-12).unwrap() && majorizes(&p, &s, 1e-12).unwrap());
        }

        #[test]
        fn chains_replay(s in simplex_strategy(5), seed in 0u64..1000, steps in 0usize..8) {
            let mut rng = RngStream::new(seed, 3).generator();
            let (target, _) = random_majorized(&s, steps, &mut rng);
            let chain = t_transform_chain(&s, &target).unwrap();
            let mut cur = s.clone();
            for t in &chain {
                prop_assert!((0.0..=1.0).contains(&t.lambda));
                let next = replay(&cur, std::slice::from_ref(t));
                prop_assert!(majorizes(&cur, &next, 1e-10).unwrap());
                cur = next;
            }
            for (a, b) in cur.s.iter().zip(&target.s) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn sorted_chains_are_short(s in simplex_strategy(6), seed in 0u64..1000) {
            let mut rng = RngStream::new(seed, 4).generator();
            let (t, _) = random_majorized(&s, 5, &mut rng);
            let mut a = s.s.clone();
            let mut b = t.s.clone();
            a.sort_by(|x, y| y.total_cmp(x));
            b.sort_by(|x, y| y.total_cmp(x));
            let chain = t_transform_chain(&SimplexVector { s: a, total: s.total }, &SimplexVector { s: b, total: t.total }).unwrap();
            prop_assert!(chain.len() < 6);
        }
    }
}
