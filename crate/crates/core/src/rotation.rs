//! Rotation numbers: periodic orbits, chain classes, powers, Atkinson sums
//! and the prime-end estimator.

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::annulus::{basin_report, birkhoff_rotation, circle_gap, AnnulusPoint, Direction, LiftMap, LiftPoint, Power};
use crate::conley::{chain_classes, transition_graph_with, BoxDigraph, ChainClass, GraphOptions};
use crate::constructions::{ExactPoint, HorseshoeCore};
use crate::error::{Error, Result};

/// Default tolerance for reading off the deck displacement of a periodic
/// orbit.
pub const LIFT_TOL: f64 = 1e-6;

/// `p / q`, kept unreduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRot {
    pub p: i64,
    pub q: u64,
}

impl RationalRot {
    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn reduced(&self) -> RationalRot {
        let g = num_integer::gcd(self.p.unsigned_abs(), self.q).max(1);
        RationalRot { p: self.p / g as i64, q: self.q / g }
    }
}

impl fmt::Display for RationalRot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.reduced();
        write!(f, "{}/{}", r.p, r.q)
    }
}

/// Rotation number of a periodic point: `h~^q(p) = T^k(p)` gives `k / q`.
pub fn rotation_of_periodic<M: LiftMap + ?Sized>(map: &M, p: LiftPoint, q: usize, tol: f64) -> Result<RationalRot> {
    if q == 0 {
        return Err(Error::invalid("period must be at least 1"));
    }
    let y = Power::new(map, q, 0).eval(p)?;
    let delta = y.x - p.x;
    let defect = circle_gap(delta).max((y.t - p.t).abs());
    if !(defect < tol) {
        return Err(Error::NotPeriodic { q, defect });
    }
    let k = delta.round();
    if !((delta - k).abs() < tol) {
        return Err(Error::NotLifted { delta });
    }
    Ok(RationalRot { p: k as i64, q: q as u64 })
}

/// Exact version on the horseshoe core.
pub fn rotation_of_periodic_exact(p: &ExactPoint, q: usize) -> Result<RationalRot> {
    if q == 0 {
        return Err(Error::invalid("period must be at least 1"));
    }
    let h = HorseshoeCore;
    let mut y = p.clone();
    for _ in 0..q {
        y = h.eval_exact(&y)?;
    }
    let dx = &y.x - &p.x;
    if y.t != p.t || !dx.is_integer() {
        let defect = (y.to_f64().t - p.to_f64().t).abs().max(circle_gap(y.to_f64().x - p.to_f64().x));
        return Err(Error::NotPeriodic { q, defect });
    }
    let k = dx.to_integer();
    let k = i64::try_from(k).map_err(|_| Error::invalid("deck displacement overflows i64"))?;
    Ok(RationalRot { p: k, q: q as u64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalMethod {
    CycleMean,
    BirkhoffSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationInterval {
    pub lo: f64,
    pub hi: f64,
    pub method: IntervalMethod,
    /// Bound on the per-step jump of the pseudo-orbits behind the cycles
    /// (`eps` plus one box diameter).
    pub slack: f64,
}

impl RotationInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// A weighted digraph in compressed adjacency form.
#[derive(Debug, Clone, Default)]
pub struct WeightedDigraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightedDigraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut sorted = edges.to_vec();
        sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut offsets = vec![0; n + 1];
        for &(u, _, _) in &sorted {
            offsets[u + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        WeightedDigraph {
            offsets,
            targets: sorted.iter().map(|e| e.1).collect(),
            weights: sorted.iter().map(|e| e.2).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn out(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.offsets[v]..self.offsets[v + 1]).map(move |e| (self.targets[e], self.weights[e]))
    }

    fn negated(&self) -> Self {
        WeightedDigraph {
            offsets: self.offsets.clone(),
            targets: self.targets.clone(),
            weights: self.weights.iter().map(|w| -w).collect(),
        }
    }
}

/// Minimum cycle mean by Karp's recurrence, `O(n m)` time and `O(n)` memory
/// (two passes). `None` for an acyclic graph.
pub fn min_cycle_mean_karp(g: &WeightedDigraph) -> Option<f64> {
    let n = g.len();
    if n == 0 {
        return None;
    }
    // D_k(v): minimum weight of a k-edge walk ending at v, from any start.
    let step = |prev: &[f64]| -> Vec<f64> {
        let mut next = vec![f64::INFINITY; n];
        for u in 0..n {
            if prev[u].is_finite() {
                for (v, w) in g.out(u) {
                    next[v] = next[v].min(prev[u] + w);
                }
            }
        }
        next
    };
    let mut d = vec![0.0f64; n];
    for _ in 0..n {
        d = step(&d);
    }
    let d_n = d;
    let mut worst = vec![f64::NEG_INFINITY; n];
    let mut d = vec![0.0f64; n];
    for k in 0..n {
        for v in 0..n {
            if d_n[v].is_finite() && d[v].is_finite() {
                worst[v] = worst[v].max((d_n[v] - d[v]) / (n - k) as f64);
            }
        }
        d = step(&d);
    }
    (0..n).filter(|&v| d_n[v].is_finite()).map(|v| worst[v]).min_by(f64::total_cmp)
}

/// Minimum cycle mean by Howard's policy iteration.
pub fn min_cycle_mean_howard(g: &WeightedDigraph) -> Option<f64> {
    let n = g.len();
    // Keep only nodes from which a cycle is reachable.
    let mut alive = vec![true; n];
    let mut outdeg: Vec<usize> = (0..n).map(|v| g.out(v).count()).collect();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in 0..n {
        for (v, _) in g.out(u) {
            preds[v].push(u);
        }
    }
    let mut dead: Vec<usize> = (0..n).filter(|&v| outdeg[v] == 0).collect();
    while let Some(v) = dead.pop() {
        alive[v] = false;
        for &u in &preds[v] {
            outdeg[u] -= 1;
            if outdeg[u] == 0 {
                dead.push(u);
            }
        }
    }
    if !alive.iter().any(|&a| a) {
        return None;
    }
    let mut policy: Vec<(usize, f64)> = vec![(usize::MAX, 0.0); n];
    for v in (0..n).filter(|&v| alive[v]) {
        policy[v] = g
            .out(v)
            .filter(|&(u, _)| alive[u])
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("alive node has a live successor");
    }
    let scale = g.weights.iter().fold(1.0f64, |m, w| m.max(w.abs()));
    let tol = 1e-12 * scale * (n as f64).max(1.0);
    let mut eta = vec![0.0; n];
    let mut x = vec![0.0; n];
    for _ in 0..10_000 {
        evaluate_policy(&policy, &alive, &mut eta, &mut x);
        let mut changed = false;
        // Improve the cycle means first.
        for v in (0..n).filter(|&v| alive[v]) {
            let best = g.out(v).filter(|&(u, _)| alive[u]).min_by(|a, b| eta[a.0].total_cmp(&eta[b.0]));
            if let Some((u, w)) = best {
                if eta[u] < eta[v] - tol {
                    policy[v] = (u, w);
                    changed = true;
                }
            }
        }
        if !changed {
            for v in (0..n).filter(|&v| alive[v]) {
                let best = g
                    .out(v)
                    .filter(|&(u, _)| alive[u] && (eta[u] - eta[v]).abs() <= tol)
                    .map(|(u, w)| (u, w, w - eta[v] + x[u]))
                    .min_by(|a, b| a.2.total_cmp(&b.2));
                if let Some((u, w, val)) = best {
                    if val < x[v] - tol * (1.0 + x[v].abs()) {
                        policy[v] = (u, w);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&v| alive[v]).map(|v| eta[v]).min_by(f64::total_cmp)
}

/// Cycle means `eta` and relative values `x` of a policy graph.
fn evaluate_policy(policy: &[(usize, f64)], alive: &[bool], eta: &mut [f64], x: &mut [f64]) {
    let n = policy.len();
    const UNSEEN: usize = usize::MAX;
    const DONE: usize = usize::MAX - 1;
    let mut mark = vec![UNSEEN; n];
    let mut path = Vec::new();
    for start in (0..n).filter(|&v| alive[v]) {
        if mark[start] != UNSEEN {
            continue;
        }
        path.clear();
        let mut v = start;
        while mark[v] == UNSEEN {
            mark[v] = start;
            path.push(v);
            v = policy[v].0;
        }
        if mark[v] == start {
            // New cycle through v.
            let pos = path.iter().position(|&u| u == v).expect("cycle start on path");
            let cycle = &path[pos..];
            let mean = cycle.iter().map(|&u| policy[u].1).sum::<f64>() / cycle.len() as f64;
            x[v] = 0.0;
            eta[v] = mean;
            for &u in cycle[1..].iter().rev() {
                let (next, w) = policy[u];
                eta[u] = mean;
                x[u] = w - mean + x[next];
            }
            for &u in cycle {
                mark[u] = DONE;
            }
            path.truncate(pos);
        }
        for &u in path.iter().rev() {
            let (next, w) = policy[u];
            eta[u] = eta[next];
            x[u] = w - eta[u] + x[next];
            mark[u] = DONE;
        }
    }
}

/// The subgraph of `dg` induced by a class, weighted by `lo` or `hi`.
fn class_subgraph(dg: &BoxDigraph, class: &ChainClass, upper: bool) -> WeightedDigraph {
    let local = |v: usize| class.nodes.binary_search(&v).ok();
    let mut edges = Vec::new();
    for (i, &u) in class.nodes.iter().enumerate() {
        let (lo, hi) = dg.weights(u);
        for (k, &v) in dg.successors(u).iter().enumerate() {
            if let Some(j) = local(v as usize) {
                edges.push((i, j, if upper { hi[k] } else { lo[k] }));
            }
        }
    }
    WeightedDigraph::from_edges(class.nodes.len(), &edges)
}

/// `[min cycle mean of lo, max cycle mean of hi]` over the class subgraph.
pub fn rotation_interval_of_class(dg: &BoxDigraph, class: &ChainClass) -> Result<RotationInterval> {
    if !class.recurrent {
        return Err(Error::invalid(format!("class {} is not recurrent", class.id)));
    }
    let lo = min_cycle_mean_howard(&class_subgraph(dg, class, false));
    let hi = min_cycle_mean_howard(&class_subgraph(dg, class, true).negated()).map(|m| -m);
    match (lo, hi) {
        (Some(lo), Some(hi)) => Ok(RotationInterval {
            lo,
            hi,
            method: IntervalMethod::CycleMean,
            slack: dg.eps() + dg.grid().box_diameter(),
        }),
        _ => Err(Error::NoConvergence { what: "cycle mean" }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerRotationReport {
    pub q: usize,
    pub base: RotationInterval,
    pub power: Option<RotationInterval>,
    /// `max(|lo_q - q lo|, |hi_q - q hi|)`.
    pub deviation: f64,
    /// `q * base.slack + power.slack`.
    pub tolerance: f64,
    pub pass: bool,
}

/// Compare the rotation interval of a class with that of `h~^q` on the
/// same grid (and the same active boxes). The power interval spans every
/// recurrent class of the power graph that meets the given class.
pub fn power_rotation_check<M: LiftMap + ?Sized>(
    map: &M,
    dg: &BoxDigraph,
    class: &ChainClass,
    q: usize,
) -> Result<PowerRotationReport> {
    if q == 0 {
        return Err(Error::invalid("power must be at least 1"));
    }
    let base = rotation_interval_of_class(dg, class)?;
    let grid = *dg.grid();
    let opts = GraphOptions::new(dg.eps()).with_seed(dg.seed());
    let active: Option<Vec<usize>> =
        dg.is_restricted().then(|| (0..dg.node_count()).map(|v| dg.box_of_node(v)).collect());
    let power = Power::new(map, q, 0);
    let pg = if q == 1 { dg.clone() } else { transition_graph_with(&power, &grid, &opts, active.as_deref())? };
    let pc = chain_classes(&pg);
    let mut hit: Vec<usize> = class
        .nodes
        .iter()
        .filter_map(|&v| pg.node_of_box(dg.box_of_node(v)))
        .map(|v| pc.class_of(v))
        .filter(|&c| pc.get(c).recurrent)
        .collect();
    hit.sort_unstable();
    hit.dedup();
    let mut power_iv: Option<RotationInterval> = None;
    for c in hit {
        let iv = rotation_interval_of_class(&pg, pc.get(c))?;
        power_iv = Some(match power_iv {
            None => iv,
            Some(p) => RotationInterval { lo: p.lo.min(iv.lo), hi: p.hi.max(iv.hi), ..p },
        });
    }
    let qf = q as f64;
    let (deviation, tolerance) = match &power_iv {
        Some(p) => ((p.lo - qf * base.lo).abs().max((p.hi - qf * base.hi).abs()), qf * base.slack + p.slack),
        None => (f64::INFINITY, qf * base.slack),
    };
    Ok(PowerRotationReport { q, base, power: power_iv, deviation, tolerance, pass: deviation <= tolerance })
}

/// All `n` in `1..=n_max` with `|Pi_1(G^n(p)) - Pi_1(p)| < eps`, where
/// `G = T^{-shift} o h~^q`.
pub fn atkinson_small_sums<M: LiftMap + ?Sized>(
    map: &M,
    p: LiftPoint,
    shift: i64,
    q: usize,
    eps: f64,
    n_max: u64,
) -> Result<Vec<u64>> {
    if q == 0 {
        return Err(Error::invalid("power must be at least 1"));
    }
    let g = Power::new(map, q, shift);
    let mut y = p;
    let mut hits = Vec::new();
    for n in 1..=n_max {
        y = g.eval(y)?;
        if (y.x - p.x).abs() < eps {
            hits.push(n);
        }
    }
    Ok(hits)
}

/// [`atkinson_small_sums`] on the horseshoe core in exact arithmetic. The
/// floating orbit of a saddle periodic point drifts off after a few dozen
/// steps; the exact one returns to itself.
pub fn atkinson_small_sums_exact(p: &ExactPoint, shift: i64, q: usize, eps: f64, n_max: u64) -> Result<Vec<u64>> {
    if q == 0 {
        return Err(Error::invalid("power must be at least 1"));
    }
    let eps = BigRational::from_float(eps).ok_or_else(|| Error::invalid("eps must be finite"))?;
    let h = HorseshoeCore;
    let mut y = p.clone();
    let mut hits = Vec::new();
    for n in 1..=n_max {
        for _ in 0..q {
            y = h.eval_exact(&y)?;
        }
        y = y.deck(-shift);
        if (&y.x - &p.x).abs() < eps {
            hits.push(n);
        }
    }
    Ok(hits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Plus,
    Minus,
}

impl End {
    pub fn name(self) -> &'static str {
        match self {
            End::Plus => "plus",
            End::Minus => "minus",
        }
    }
}

/// Heights beyond which an orbit counts as having reached an end.
pub const END_HEIGHT: f64 = 14.0;

/// Rotation number seen from one end: the backward Birkhoff average for the
/// `+infinity` end, the forward one for `-infinity`. The seed must escape
/// through that end (above `END_HEIGHT`, resp. below `-END_HEIGHT`) within
/// `n` steps.
///
/// Beyond those heights the Denjoy tower is exactly `(f~_alpha, t + 1)`
/// backward and `(f~_beta, t - 1)` forward, so the average converges to the
/// prime-end rotation number; for other maps it is only an estimate.
pub fn prime_end_rotation_estimate<M: LiftMap + ?Sized>(map: &M, seed: AnnulusPoint, n: u64, end: End) -> Result<f64> {
    prime_end_rotation_estimate_with(map, seed, n, end, END_HEIGHT, -END_HEIGHT)
}

pub fn prime_end_rotation_estimate_with<M: LiftMap + ?Sized>(
    map: &M,
    seed: AnnulusPoint,
    n: u64,
    end: End,
    t_hi: f64,
    t_lo: f64,
) -> Result<f64> {
    let report = basin_report(map, seed, t_hi, t_lo, n)?;
    let (escaped, direction) = match end {
        End::Plus => (report.plus_step.is_some(), Direction::Backward),
        End::Minus => (report.minus_step.is_some(), Direction::Forward),
    };
    if !escaped {
        return Err(Error::NotInBasin { end: end.name() });
    }
    let avg = birkhoff_rotation(map, seed.lift(), n, direction)?;
    if !avg.complete {
        return Err(Error::NoConvergence { what: "prime-end orbit left the domain" });
    }
    Ok(avg.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::Rect;
    use crate::conley::Grid;
    use crate::constructions::horseshoe::{self, horseshoe_symbolic_point};
    use crate::mapspec::{build_paper_example, rigid_translation};
    use proptest::prelude::*;

    fn all_cycle_means(n: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
        // Brute force over simple cycles (tiny graphs only).
        fn dfs(
            start: usize,
            v: usize,
            sum: f64,
            len: usize,
            seen: &mut Vec<bool>,
            edges: &[(usize, usize, f64)],
            out: &mut Vec<f64>,
        ) {
            for &(_, b, w) in edges.iter().filter(|e| e.0 == v) {
                if b == start {
                    out.push((sum + w) / (len + 1) as f64);
                } else if b > start && !seen[b] {
                    seen[b] = true;
                    dfs(start, b, sum + w, len + 1, seen, edges, out);
                    seen[b] = false;
                }
            }
        }
        let mut out = Vec::new();
        for s in 0..n {
            let mut seen = vec![false; n];
            seen[s] = true;
            dfs(s, s, 0.0, 0, &mut seen, edges, &mut out);
        }
        out
    }

    #[test]
    fn horseshoe_fixed_points() {
        let h = HorseshoeCore;
        assert_eq!(rotation_of_periodic(&h, horseshoe::A, 1, LIFT_TOL).unwrap(), RationalRot { p: 0, q: 1 });
        assert_eq!(rotation_of_periodic(&h, horseshoe::B, 1, LIFT_TOL).unwrap(), RationalRot { p: 1, q: 1 });
        let s = horseshoe_symbolic_point("011").unwrap();
        assert_eq!(rotation_of_periodic_exact(&s.point, 3).unwrap(), RationalRot { p: 2, q: 3 });
        let r = rotation_of_periodic(&h, s.point.to_f64(), 3, LIFT_TOL).unwrap();
        assert_eq!((r.p, r.q), (2, 3));
        assert_eq!(r.to_string(), "2/3");
        assert_eq!(RationalRot { p: 2, q: 4 }.to_string(), "1/2");
    }

    #[test]
    fn lemma_both_directions_on_short_words() {
        let h = HorseshoeCore;
        for q in 1..=6usize {
            for bits in 0..(1u32 << q) {
                let word: String = (0..q).map(|k| if bits >> (q - 1 - k) & 1 == 1 { '1' } else { '0' }).collect();
                let s = horseshoe_symbolic_point(&word).unwrap();
                let ones = word.matches('1').count() as i64;
                assert_eq!(rotation_of_periodic_exact(&s.point, q).unwrap(), RationalRot { p: ones, q: q as u64 });
                let r = rotation_of_periodic(&h, s.point.to_f64(), q, LIFT_TOL).unwrap();
                assert_eq!(r, RationalRot { p: ones, q: q as u64 });
                // Deck translates have the same rotation number.
                let r = rotation_of_periodic(&h, s.point.to_f64().deck(-2), q, LIFT_TOL).unwrap();
                assert_eq!(r.p, ones);
            }
        }
        // A non-periodic point in the domain.
        let e = rotation_of_periodic(&h, LiftPoint::new(0.21, -0.01), 1, LIFT_TOL).unwrap_err();
        assert!(matches!(e, Error::NotPeriodic { .. }));
        let off = ExactPoint::from_ratios((1, 24), (-1, 5));
        assert!(matches!(rotation_of_periodic_exact(&off, 2), Err(Error::NotPeriodic { .. } | Error::OutOfDomain(_))));
    }

    #[test]
    fn karp_and_howard_on_toys() {
        let g = WeightedDigraph::from_edges(1, &[(0, 0, 0.25)]);
        assert_eq!(min_cycle_mean_karp(&g), Some(0.25));
        assert_eq!(min_cycle_mean_howard(&g), Some(0.25));
        // Two 2-cycles with means 0 and 1/2 joined into one component.
        let edges = [(0, 1, 0.0), (1, 0, 0.0), (2, 3, 0.5), (3, 2, 0.5), (1, 2, 3.0), (3, 0, 3.0)];
        let g = WeightedDigraph::from_edges(4, &edges);
        assert!((min_cycle_mean_howard(&g).unwrap() - 0.0).abs() < 1e-12);
        let means = all_cycle_means(4, &edges);
        let max = means.iter().cloned().fold(f64::MIN, f64::max);
        assert!((-min_cycle_mean_howard(&g.negated()).unwrap() - max).abs() < 1e-12);
        assert_eq!(min_cycle_mean_karp(&WeightedDigraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)])), None);
        assert_eq!(min_cycle_mean_howard(&WeightedDigraph::from_edges(3, &[(0, 1, 1.0)])), None);
    }

    #[test]
    fn artificial_class_interval() {
        let grid = Grid::new(Rect::new(0.0, 1.0, 0.0, 1.0), 2).unwrap();
        let edges = [(0, 1, 0.0), (1, 0, 0.0), (2, 3, 0.5), (3, 2, 0.5), (1, 2, 0.25), (3, 0, 0.25)];
        let dg = BoxDigraph::from_edges(grid, 0.1, edges.iter().map(|&(u, v, w)| (u, Some(v), w, w)));
        let cc = chain_classes(&dg);
        let class = cc.largest_recurrent().unwrap();
        assert_eq!(class.nodes, vec![0, 1, 2, 3]);
        let iv = rotation_interval_of_class(&dg, class).unwrap();
        assert!(iv.lo.abs() < 1e-12 && (iv.hi - 0.5).abs() < 1e-12);
        let dg = BoxDigraph::from_edges(grid, 0.1, [(5, Some(5), 0.25, 0.25)]);
        let cc = chain_classes(&dg);
        let iv = rotation_interval_of_class(&dg, cc.largest_recurrent().unwrap()).unwrap();
        assert_eq!((iv.lo, iv.hi), (0.25, 0.25));
    }

    #[test]
    fn rigid_power_scaling() {
        let m = rigid_translation(0.2, 0.0);
        let grid = Grid::new(Rect::new(0.0, 1.0, 0.0, 1.0), 3).unwrap();
        let dg = crate::conley::transition_graph(&m, &grid, crate::conley::default_eps(&grid)).unwrap();
        let cc = chain_classes(&dg);
        let class = cc.largest_recurrent().unwrap();
        let r = power_rotation_check(&m, &dg, class, 3).unwrap();
        assert!((r.base.lo - 0.2).abs() < 1e-12 && (r.base.hi - 0.2).abs() < 1e-12);
        let p = r.power.unwrap();
        assert!((p.lo - 0.6).abs() < 1e-12 && (p.hi - 0.6).abs() < 1e-12);
        assert!(r.pass && r.deviation < 1e-12);
        let r1 = power_rotation_check(&m, &dg, class, 1).unwrap();
        assert_eq!(r1.deviation, 0.0);
    }

    #[test]
    fn atkinson_examples() {
        let h = HorseshoeCore;
        let all: Vec<u64> = (1..=50).collect();
        assert_eq!(atkinson_small_sums(&h, horseshoe::A, 0, 1, 1e-9, 50).unwrap(), all);
        let s = horseshoe_symbolic_point("01").unwrap();
        assert_eq!(atkinson_small_sums_exact(&s.point, 1, 2, 1e-9, 50).unwrap(), all);
        // Under h~ alone the lift creeps right by one every two steps.
        assert_eq!(atkinson_small_sums_exact(&s.point, 0, 1, 0.4, 100).unwrap(), vec![1]);
        // The floating orbit of the saddle eventually leaves the domain.
        let e = atkinson_small_sums(&h, s.point.to_f64(), 1, 2, 1e-9, 1000).unwrap_err();
        assert!(matches!(e, Error::OutOfDomain(_)));
    }

    #[test]
    fn prime_end_rigid_and_basin_check() {
        let m = rigid_translation(0.2, 1.0);
        let seed = AnnulusPoint::new(0.3, 0.0);
        for end in [End::Plus, End::Minus] {
            let v = prime_end_rotation_estimate(&m, seed, 1000, end).unwrap();
            assert!((v - 0.2).abs() < 1e-12);
        }
        let still = rigid_translation(0.2, 0.0);
        let e = prime_end_rotation_estimate(&still, seed, 1000, End::Plus).unwrap_err();
        assert_eq!(e, Error::NotInBasin { end: "plus" });
    }

    #[test]
    fn prime_end_estimates_converge_like_one_over_n() {
        let spec = build_paper_example(0.5f64.sqrt(), 2f64.sqrt() - 1.0).unwrap();
        let alpha = 0.5f64.sqrt();
        for n in [500u64, 1000, 2000] {
            for k in 0..5 {
                let seed = AnnulusPoint::new(0.13 * k as f64, 20.0);
                let v = prime_end_rotation_estimate(&spec, seed, n, End::Plus).unwrap();
                assert!((v - alpha).abs() <= 1.0 / n as f64, "n={n} err={}", (v - alpha).abs());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn howard_matches_karp(
            n in 1usize..7,
            raw in prop::collection::vec((0usize..7, 0usize..7, -3.0f64..3.0), 1..20),
        ) {
            let edges: Vec<_> = raw.into_iter().map(|(u, v, w)| (u % n, v % n, w)).collect();
            let g = WeightedDigraph::from_edges(n, &edges);
            let k = min_cycle_mean_karp(&g);
            let h = min_cycle_mean_howard(&g);
            let brute = all_cycle_means(n, &edges).into_iter().min_by(f64::total_cmp);
            match (k, h, brute) {
                (Some(k), Some(h), Some(b)) => {
                    prop_assert!((k - b).abs() < 1e-9);
                    prop_assert!((h - b).abs() < 1e-9);
                }
                (None, None, None) => {}
                other => prop_assert!(false, "mismatch {:?}", other),
            }
        }

        #[test]
        fn adding_an_edge_never_shrinks_the_interval(
            extra in (0usize..4, 0usize..4, -2.0f64..2.0),
        ) {
            let base = vec![(0, 1, 0.1), (1, 2, 0.3), (2, 3, -0.2), (3, 0, 0.4)];
            let mut more = base.clone();
            more.push(extra);
            let g0 = WeightedDigraph::from_edges(4, &base);
            let g1 = WeightedDigraph::from_edges(4, &more);
            let lo0 = min_cycle_mean_howard(&g0).unwrap();
            let lo1 = min_cycle_mean_howard(&g1).unwrap();
            let hi0 = -min_cycle_mean_howard(&g0.negated()).unwrap();
            let hi1 = -min_cycle_mean_howard(&g1.negated()).unwrap();
            prop_assert!(lo1 <= lo0 + 1e-12);
            prop_assert!(hi1 >= hi0 - 1e-12);
        }
    }
}
