//! Periodic points as zeros of `G = T^{-p} o h~^q - Id`, fixed point
//! indices, and the integer bookkeeping of pseudo-orbit concatenation.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::annulus::{AnnulusPoint, LiftMap, LiftPoint, Power, Rect};
use crate::error::{Error, Result};

/// Samples on the index loop around each certified orbit (doubled on demand).
pub const INDEX_SAMPLES: usize = 1 << 10;
/// Limit on the number of boxes kept at one subdivision level.
const BOX_CAP: usize = 1 << 18;
const NEWTON_STEPS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    pub point: LiftPoint,
    pub q: usize,
    pub p: i64,
    /// `|G(point)|` in the sup norm.
    pub residual: f64,
    /// Winding number of `G` around a small square, when it could be resolved.
    pub index: Option<i32>,
}

/// A map evaluated with the local formula in force at `reference`.
#[derive(Debug, Clone, Copy)]
pub struct Continued<'a, M: ?Sized> {
    map: &'a M,
    reference: LiftPoint,
}

impl<'a, M: LiftMap + ?Sized> Continued<'a, M> {
    pub fn new(map: &'a M, reference: LiftPoint) -> Self {
        Continued { map, reference }
    }
}

impl<M: LiftMap + ?Sized> LiftMap for Continued<'_, M> {
    fn eval(&self, p: LiftPoint) -> Result<LiftPoint> {
        self.map.eval_continued(p, self.reference)
    }

    fn inverse(&self, p: LiftPoint) -> Result<LiftPoint> {
        self.map.inverse(p)
    }
}

/// A box of the dyadic subdivision of the search window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Cell {
    level: u32,
    ix: u64,
    it: u64,
}

impl Cell {
    fn rect(&self, w: &Rect) -> Rect {
        let n = (1u64 << self.level) as f64;
        let (bw, bh) = (w.width() / n, w.height() / n);
        let x = w.x_lo + self.ix as f64 * bw;
        let t = w.t_lo + self.it as f64 * bh;
        Rect::new(x, x + bw, t, t + bh)
    }

    fn children(&self) -> [Cell; 4] {
        let (l, x, t) = (self.level + 1, 2 * self.ix, 2 * self.it);
        [
            Cell { level: l, ix: x, it: t },
            Cell { level: l, ix: x + 1, it: t },
            Cell { level: l, ix: x, it: t + 1 },
            Cell { level: l, ix: x + 1, it: t + 1 },
        ]
    }
}

/// Whether the enclosure of `G(B)` meets `B`.
fn admits_fixed_point<M: LiftMap + ?Sized>(g: &M, r: &Rect) -> bool {
    let slack = 1e-12 * (1.0 + r.x_hi.abs().max(r.t_hi.abs()));
    let grown = r.dilate(slack);
    g.image_enclosure(r).iter().any(|e| e.intersects(&grown))
}

fn subdivide<M: LiftMap + ?Sized>(g: &M, window: &Rect, cells: Vec<Cell>) -> Vec<Cell> {
    let mut next: Vec<Cell> = cells
        .par_iter()
        .flat_map_iter(|c| c.children())
        .filter(|c| admits_fixed_point(g, &c.rect(window)))
        .collect();
    next.sort_unstable();
    next
}

/// Group cells that touch (including at corners).
fn clusters(cells: &[Cell]) -> Vec<Vec<Cell>> {
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let index: std::collections::HashMap<(u64, u64), usize> =
        cells.iter().enumerate().map(|(i, c)| ((c.ix, c.it), i)).collect();
    for (i, c) in cells.iter().enumerate() {
        for dx in [-1i64, 0, 1] {
            for dt in [-1i64, 0, 1] {
                let (x, t) = (c.ix as i64 + dx, c.it as i64 + dt);
                if x < 0 || t < 0 {
                    continue;
                }
                if let Some(&j) = index.get(&(x as u64, t as u64)) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Cell>> = Default::default();
    for (i, c) in cells.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(*c);
    }
    groups.into_values().collect()
}

fn residual_vec<M: LiftMap + ?Sized>(g: &M, z: LiftPoint, reference: LiftPoint) -> Result<(f64, f64)> {
    let y = g.eval(z).or_else(|_| g.eval_continued(z, reference))?;
    Ok((y.x - z.x, y.t - z.t))
}

/// Newton's method on `G(z) - z` with a central-difference Jacobian.
fn polish<M: LiftMap + ?Sized>(g: &M, start: LiftPoint, tol: f64) -> Option<LiftPoint> {
    let mut z = start;
    for _ in 0..NEWTON_STEPS {
        let (fx, ft) = residual_vec(g, z, start).ok()?;
        if fx.abs().max(ft.abs()) < 0.01 * tol {
            break;
        }
        let h = 1e-7 * (1.0 + z.x.abs().max(z.t.abs()));
        let col = |dx: f64, dt: f64| -> Option<(f64, f64)> {
            let a = residual_vec(g, LiftPoint::new(z.x + dx, z.t + dt), start).ok()?;
            let b = residual_vec(g, LiftPoint::new(z.x - dx, z.t - dt), start).ok()?;
            Some(((a.0 - b.0) / (2.0 * h), (a.1 - b.1) / (2.0 * h)))
        };
        let (j11, j21) = col(h, 0.0)?;
        let (j12, j22) = col(0.0, h)?;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-14 {
            return Some(z);
        }
        let dx = (j22 * fx - j12 * ft) / det;
        let dt = (-j21 * fx + j11 * ft) / det;
        z = LiftPoint::new(z.x - dx, z.t - dt);
        if dx.abs().max(dt.abs()) < 1e-17 {
            break;
        }
    }
    Some(z)
}

/// Counterclockwise square of half-side `r` around `c`.
pub fn square_loop(c: LiftPoint, r: f64) -> Vec<LiftPoint> {
    vec![
        LiftPoint::new(c.x - r, c.t - r),
        LiftPoint::new(c.x + r, c.t - r),
        LiftPoint::new(c.x + r, c.t + r),
        LiftPoint::new(c.x - r, c.t + r),
    ]
}

/// Zeros of `G = T^{-p} o h~^q - Id` in `window` (lift coordinates).
///
/// The window is subdivided `depth` times, keeping boxes whose image
/// enclosure meets them, and surviving clusters are refined further until
/// boxes are well below `tol`. Cluster centers are polished by Newton's
/// method and kept when `|G| < tol`. An empty result is reported as
/// [`Error::NoCandidates`], which does not prove there are no zeros.
pub fn find_fixed_points_of_power<M: LiftMap + ?Sized>(
    map: &M,
    q: usize,
    p: i64,
    window: Rect,
    depth: u32,
    tol: f64,
) -> Result<Vec<PeriodicOrbit>> {
    if q == 0 {
        return Err(Error::invalid("period must be at least 1"));
    }
    if !(tol > 0.0) || !(window.width() > 0.0 && window.height() > 0.0) {
        return Err(Error::invalid("need a positive tolerance and a nondegenerate window"));
    }
    if depth > 40 {
        return Err(Error::invalid("search depth above 40"));
    }
    let g = Power::new(map, q, p);
    let mut cells = vec![Cell { level: 0, ix: 0, it: 0 }];
    if !admits_fixed_point(&g, &window) {
        return Err(Error::NoCandidates);
    }
    for _ in 0..depth {
        cells = subdivide(&g, &window, cells);
        if cells.len() > BOX_CAP {
            return Err(Error::NoConvergence { what: "fixed point subdivision (too many boxes)" });
        }
    }
    // Keep refining while it stays cheap.
    let target = 1e-3 * tol;
    let mut level = depth;
    while level < 60 && !cells.is_empty() {
        let r = cells[0].rect(&window);
        if r.width().max(r.height()) < target {
            break;
        }
        let next = subdivide(&g, &window, cells.clone());
        if next.len() > 4 * cells.len().max(64) {
            break;
        }
        cells = next;
        level += 1;
    }
    let mut found: Vec<PeriodicOrbit> = clusters(&cells)
        .par_iter()
        .filter_map(|group| {
            let bound = Rect::bounding(group.iter().flat_map(|c| {
                let r = c.rect(&window);
                [LiftPoint::new(r.x_lo, r.t_lo), LiftPoint::new(r.x_hi, r.t_hi)]
            }))?;
            let z = polish(&g, bound.center(), tol)?;
            let y = g.eval(z).ok()?;
            let residual = y.sup_dist(z);
            (residual < tol && window.dilate(tol).contains(z))
                .then_some(PeriodicOrbit { point: z, q, p, residual, index: None })
        })
        .collect();
    found.sort_by(|a, b| a.point.x.total_cmp(&b.point.x).then(a.point.t.total_cmp(&b.point.t)));
    let merge = 10.0 * tol;
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    for o in found {
        match orbits.iter_mut().find(|k| k.point.sup_dist(o.point) < merge) {
            Some(k) if o.residual < k.residual => *k = o,
            Some(_) => {}
            None => orbits.push(o),
        }
    }
    if orbits.is_empty() {
        return Err(Error::NoCandidates);
    }
    let cell = Cell { level: depth, ix: 0, it: 0 }.rect(&window);
    let cell_size = cell.width().min(cell.height());
    let snapshot: Vec<LiftPoint> = orbits.iter().map(|o| o.point).collect();
    for o in orbits.iter_mut() {
        let nearest = snapshot
            .iter()
            .filter(|&&z| z != o.point)
            .map(|&z| z.sup_dist(o.point))
            .fold(f64::INFINITY, f64::min);
        let r = (0.3 * nearest).min(0.25 * cell_size).min(1e-3);
        let local = Continued::new(&g, o.point);
        let square = square_loop(o.point, r);
        // Strongly hyperbolic powers need finer sampling to clear the boundary check.
        o.index = (0..7).find_map(|k| fixed_point_index(&local, &square, INDEX_SAMPLES << k).ok());
    }
    Ok(orbits)
}

/// Winding number of `z - f(z)` along the closed polygon `vertices`,
/// sampled at `samples` points spaced evenly by arclength.
pub fn fixed_point_index<M: LiftMap + ?Sized>(map: &M, vertices: &[LiftPoint], samples: usize) -> Result<i32> {
    if vertices.len() < 3 || samples < vertices.len() {
        return Err(Error::invalid("index loop needs at least three vertices and as many samples"));
    }
    let k = vertices.len();
    let lens: Vec<f64> = (0..k).map(|i| vertices[i].dist(vertices[(i + 1) % k])).collect();
    let total: f64 = lens.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("index loop has zero length"));
    }
    let mut g = Vec::with_capacity(samples);
    let (mut edge, mut start) = (0usize, 0.0);
    for s in 0..samples {
        let arc = total * s as f64 / samples as f64;
        while edge + 1 < k && arc >= start + lens[edge] {
            start += lens[edge];
            edge += 1;
        }
        let f = if lens[edge] > 0.0 { ((arc - start) / lens[edge]).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (vertices[edge], vertices[(edge + 1) % k]);
        let z = LiftPoint::new(a.x + f * (b.x - a.x), a.t + f * (b.t - a.t));
        let y = map.eval(z)?;
        g.push((z.x - y.x, z.t - y.t));
    }
    let min_norm = g.iter().map(|v| v.0.hypot(v.1)).fold(f64::INFINITY, f64::min);
    let variation = (0..samples)
        .map(|i| {
            let (a, b) = (g[i], g[(i + 1) % samples]);
            (a.0 - b.0).hypot(a.1 - b.1)
        })
        .fold(0.0, f64::max);
    if !(min_norm > 10.0 * variation) {
        return Err(Error::ZeroOnBoundary { min_norm, variation });
    }
    let mut turn = 0.0;
    for i in 0..samples {
        let (a, b) = (g[i], g[(i + 1) % samples]);
        let inc = (a.0 * b.1 - a.1 * b.0).atan2(a.0 * b.0 + a.1 * b.1);
        if inc.abs() >= PI / 2.0 {
            return Err(Error::UnresolvedWinding { increment: inc });
        }
        turn += inc;
    }
    Ok((turn / (2.0 * PI)).round() as i32)
}

/// A `delta`-chain with its dynamical index `(steps, deck displacement)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaChain {
    pub points: Vec<AnnulusPoint>,
    pub delta: f64,
    pub index: (usize, i64),
}

impl DeltaChain {
    pub fn new<M: LiftMap + ?Sized>(map: &M, points: Vec<AnnulusPoint>, delta: f64) -> Result<Self> {
        let index = chain_dynamical_index(map, &points, delta)?;
        Ok(DeltaChain { points, delta, index })
    }
}

/// Lift a `delta`-chain starting from the lift of its first point with
/// angle in `[0, 1)`: each next point is taken in the sheet within `delta`
/// of the image of the previous one.
pub fn lift_chain<M: LiftMap + ?Sized>(map: &M, chain: &[AnnulusPoint], delta: f64) -> Result<Vec<LiftPoint>> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    if delta >= 0.5 {
        return Err(Error::AmbiguousLift { delta });
    }
    let Some(first) = chain.first() else {
        return Err(Error::invalid("empty chain"));
    };
    let mut lifted = vec![first.lift()];
    for (step, next) in chain.iter().enumerate().skip(1) {
        let y = map.eval(*lifted.last().unwrap())?;
        let x = next.theta + (y.x - next.theta).round();
        let z = LiftPoint::new(x, next.t);
        let jump = y.dist(z);
        if !(jump < delta) {
            return Err(Error::InvalidChain { step: step - 1, jump, delta });
        }
        lifted.push(z);
    }
    Ok(lifted)
}

/// `(i, j)`: the chain has `i` steps and its lift from the first point ends
/// at `T^j` of the lift of the last point with angle in `[0, 1)`.
pub fn chain_dynamical_index<M: LiftMap + ?Sized>(map: &M, chain: &[AnnulusPoint], delta: f64) -> Result<(usize, i64)> {
    let lifted = lift_chain(map, chain, delta)?;
    let end = lifted.last().unwrap();
    let target = chain.last().unwrap().lift();
    Ok((lifted.len() - 1, (end.x - target.x).round() as i64))
}

/// Traversal counts for concatenating pseudo-orbits: with `a + zeta + eta =
/// xi` steps and `b + zeta p1 + eta p2 = xi (p1 + 1)` turns, the chain
/// closes up into a periodic pseudo-orbit of rotation number `p1 + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConcatSolution {
    pub eta: i64,
    pub xi: i64,
    pub zeta: i64,
}

impl ConcatSolution {
    pub fn satisfies(&self, a: i64, b: i64, p1: i64, p2: i64) -> bool {
        let (a, b, p1, p2) = (a as i128, b as i128, p1 as i128, p2 as i128);
        let (eta, xi, zeta) = (self.eta as i128, self.xi as i128, self.zeta as i128);
        a + zeta + eta == xi && b + zeta * p1 + eta * p2 == xi * (p1 + 1)
    }
}

fn check_concat(a: i64, p1: i64, p2: i64) -> Result<()> {
    if a < 1 {
        return Err(Error::invalid("a must be at least 1"));
    }
    if p1.checked_add(1).is_none_or(|s| s >= p2) {
        return Err(Error::invalid("need p1 + 1 < p2"));
    }
    Ok(())
}

fn narrow(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::invalid("concatenation counts overflow i64"))
}

/// `xi = eta (p2 - p1) + (b - p1 a)`, `zeta = eta (p2 - p1 - 1) + (b - p1 a - a)`.
pub fn concat_triple(a: i64, b: i64, p1: i64, p2: i64, eta: i64) -> Result<ConcatSolution> {
    check_concat(a, p1, p2)?;
    let (a, b, p1, p2, e) = (a as i128, b as i128, p1 as i128, p2 as i128, eta as i128);
    let xi = e * (p2 - p1) + (b - p1 * a);
    let zeta = e * (p2 - p1 - 1) + (b - p1 * a - a);
    Ok(ConcatSolution { eta, xi: narrow(xi)?, zeta: narrow(zeta)? })
}

fn div_ceil(n: i128, d: i128) -> i128 {
    let q = n.div_euclid(d);
    if n.rem_euclid(d) == 0 { q } else { q + 1 }
}

/// The smallest `eta >= eta_min` with `xi >= 1` and `zeta >= 1`.
pub fn concat_solver(a: i64, b: i64, p1: i64, p2: i64, eta_min: i64) -> Result<ConcatSolution> {
    check_concat(a, p1, p2)?;
    if eta_min < 1 {
        return Err(Error::invalid("eta_min must be at least 1"));
    }
    let (ai, bi, p1i, p2i) = (a as i128, b as i128, p1 as i128, p2 as i128);
    let need_xi = div_ceil(1 - (bi - p1i * ai), p2i - p1i);
    let need_zeta = div_ceil(1 - (bi - p1i * ai - ai), p2i - p1i - 1);
    let eta = narrow((eta_min as i128).max(need_xi).max(need_zeta))?;
    let sol = concat_triple(a, b, p1, p2, eta)?;
    debug_assert!(sol.xi >= 1 && sol.zeta >= 1 && sol.satisfies(a, b, p1, p2));
    Ok(sol)
}
