//! Degree-one lifts of circle homeomorphisms.
//!
//! Two kinds are supported. A rigid rotation `x -> x + alpha`, and a Denjoy
//! homeomorphism obtained by blowing up every point of one orbit of the rigid
//! rotation into an interval. Interval `i` sits at the rotation-orbit point
//! `{i * alpha}` and has length `l_i = c / ((|i|+1)(|i|+2))`, with `c = 1/3`
//! so that the lengths sum to `1/2`. The Cantor set left over after removing
//! all inserted intervals is the unique minimal set.
//!
//! Only the intervals with `|i| <= N` are materialised. `N` is chosen from the
//! requested tolerance using the closed form of the tail,
//! `sum_{|i|>N} l_i = 2c / (N + 2)`, and the missing mass is spread uniformly
//! over the circle so that the truncated coordinate change still has degree one.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Total length of the inserted intervals.
pub const DENJOY_TOTAL_LENGTH: f64 = 0.5;
/// Scale `c` of the interval-length law; `c * 3/2 = DENJOY_TOTAL_LENGTH`.
pub const DENJOY_LENGTH_SCALE: f64 = 1.0 / 3.0;
/// Largest denominator considered by the irrationality guard.
pub const MAX_DENOMINATOR: u64 = 1_000_000;
/// Finest truncation tolerance accepted for Denjoy maps (memory bound).
pub const MIN_DENJOY_TOL: f64 = 1e-6;
/// Default truncation tolerance.
pub const DEFAULT_DENJOY_TOL: f64 = 1e-6;

/// Length of the inserted interval with orbit index `i`.
pub fn interval_length(i: i64) -> f64 {
    let a = i.unsigned_abs() as f64;
    DENJOY_LENGTH_SCALE / ((a + 1.0) * (a + 2.0))
}

/// Total length of the intervals with `|i| > n` (telescoping closed form).
pub fn tail_length(n: u64) -> f64 {
    2.0 * DENJOY_LENGTH_SCALE / (n as f64 + 2.0)
}

/// Smallest truncation index whose tail length is below `tol`.
pub fn truncation_index(tol: f64) -> u64 {
    let n = (2.0 * DENJOY_LENGTH_SCALE / tol).ceil() - 1.0;
    n.max(1.0) as u64
}

/// Fractional part of `i * alpha`, computed with an error-free product so the
/// result is accurate to an ulp even for large `i`.
pub fn orbit_position(i: i64, alpha: f64) -> f64 {
    let fi = i as f64;
    let p = fi * alpha;
    let e = fi.mul_add(alpha, -p);
    let mut r = (p - p.floor()) + e;
    if r < 0.0 {
        r += 1.0;
    }
    if r >= 1.0 {
        r -= 1.0;
    }
    r
}

/// Best rational approximation `p/q` with `q <= max_den` and
/// `|alpha - p/q| < tol / q^2`, if one exists.
///
/// Any such fraction is a continued-fraction convergent when `tol < 1/2`, so
/// only convergents are examined.
pub fn rational_approximation(alpha: f64, tol: f64, max_den: u64) -> Option<(i64, u64)> {
    if !alpha.is_finite() {
        return None;
    }
    let (mut h1, mut h2): (i128, i128) = (1, 0);
    let (mut k1, mut k2): (i128, i128) = (0, 1);
    let mut x = alpha;
    for _ in 0..64 {
        let a = x.floor();
        if k1 > 0 && a * (k1 as f64) > 2.0 * max_den as f64 {
            break;
        }
        let a = a as i128;
        let h = a * h1 + h2;
        let k = a * k1 + k2;
        if k > max_den as i128 {
            break;
        }
        let err = (alpha - h as f64 / k as f64).abs();
        if err < tol / (k as f64 * k as f64) {
            return Some((h as i64, k as u64));
        }
        let frac = x - x.floor();
        if frac == 0.0 {
            return Some((h as i64, k as u64));
        }
        x = 1.0 / frac;
        h2 = h1;
        h1 = h;
        k2 = k1;
        k1 = k;
    }
    None
}

/// A rigid rotation `x -> x + alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidRotation {
    alpha: f64,
    /// `(p, q)` when alpha is treated as the rational `p/q`.
    period: Option<(i64, u64)>,
}

/// Where a point of `[0, 1)` sits in the Denjoy coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenjoyLocation {
    /// On the Cantor part, with rotation coordinate `u`.
    Gap { u: f64 },
    /// Inside the inserted interval with orbit index `index`, at relative
    /// position `frac` in `[0, 1]`.
    Interval { index: i64, frac: f64 },
}

/// Precomputed tables for a truncated Denjoy homeomorphism.
#[derive(Debug)]
pub struct DenjoyLift {
    alpha: f64,
    tol: f64,
    n_trunc: i64,
    slope: f64,
    // Sorted by rotation coordinate.
    pos: Vec<f64>,
    start: Vec<f64>,
    len: Vec<f64>,
    index: Vec<i64>,
    // rank[(i + N)] = position of interval i in the sorted tables.
    rank: Vec<u32>,
    pos_next: f64,
    pos_prev: f64,
}

impl DenjoyLift {
    fn build(alpha: f64, tol: f64) -> Self {
        let n = truncation_index(tol) as i64;
        let count = (2 * n + 1) as usize;
        let mut order: Vec<(f64, i64)> = (-n..=n).map(|i| (orbit_position(i, alpha), i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut total = 0.0;
        let mut comp = 0.0;
        for i in -n..=n {
            neumaier_add(&mut total, &mut comp, interval_length(i));
        }
        let inserted = total + comp;
        let slope = 1.0 - inserted;

        let mut pos = Vec::with_capacity(count);
        let mut start = Vec::with_capacity(count);
        let mut len = Vec::with_capacity(count);
        let mut index = Vec::with_capacity(count);
        let mut rank = vec![0u32; count];
        let (mut acc, mut acc_c) = (0.0, 0.0);
        for (k, &(u, i)) in order.iter().enumerate() {
            let l = interval_length(i);
            pos.push(u);
            start.push(slope * u + (acc + acc_c));
            len.push(l);
            index.push(i);
            rank[(i + n) as usize] = k as u32;
            neumaier_add(&mut acc, &mut acc_c, l);
        }
        DenjoyLift {
            alpha,
            tol,
            n_trunc: n,
            slope,
            pos,
            start,
            len,
            index,
            rank,
            pos_next: orbit_position(n + 1, alpha),
            pos_prev: orbit_position(-n - 1, alpha),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn truncation(&self) -> i64 {
        self.n_trunc
    }

    fn rank_of(&self, i: i64) -> usize {
        self.rank[(i + self.n_trunc) as usize] as usize
    }

    /// Left endpoint and length of interval `i` in `[0, 1)`, if materialised.
    pub fn interval(&self, i: i64) -> Option<(f64, f64)> {
        if i.abs() > self.n_trunc {
            return None;
        }
        let k = self.rank_of(i);
        Some((self.start[k], self.len[k]))
    }

    /// Devil's-staircase coordinate change from the rotation circle to the
    /// Denjoy circle, for `u` in `[0, 1)`. Returns the left end of the
    /// inserted interval when `u` is an orbit point.
    pub fn sigma(&self, u: f64) -> f64 {
        let k = self.pos.partition_point(|&v| v < u);
        if k == 0 {
            self.slope * u
        } else {
            let j = k - 1;
            self.start[j] + self.len[j] + self.slope * (u - self.pos[j])
        }
    }

    /// Locate `y` in `[0, 1)`.
    pub fn locate(&self, y: f64) -> DenjoyLocation {
        let k = self.start.partition_point(|&s| s <= y);
        if k == 0 {
            return DenjoyLocation::Gap { u: y / self.slope };
        }
        let j = k - 1;
        let end = self.start[j] + self.len[j];
        if y <= end {
            DenjoyLocation::Interval {
                index: self.index[j],
                frac: ((y - self.start[j]) / self.len[j]).clamp(0.0, 1.0),
            }
        } else {
            let mut u = self.pos[j] + (y - end) / self.slope;
            let upper = if j + 1 < self.pos.len() { self.pos[j + 1] } else { 1.0 };
            if u >= upper {
                u = prev_float(upper);
            }
            DenjoyLocation::Gap { u }
        }
    }

    fn step(&self, x: f64, forward: bool) -> f64 {
        let (n, y) = split_unit(x);
        let shift = if forward { self.alpha } else { -self.alpha };
        match self.locate(y) {
            DenjoyLocation::Interval { index, frac } => {
                let u = self.pos[self.rank_of(index)];
                let target = if forward { index + 1 } else { index - 1 };
                if target.abs() <= self.n_trunc {
                    let k2 = self.rank_of(target);
                    let m = (u + shift - self.pos[k2]).round();
                    n + m + self.start[k2] + frac * self.len[k2]
                } else {
                    let u2 = if forward { self.pos_next } else { self.pos_prev };
                    let m = (u + shift - u2).round();
                    n + m + self.sigma(u2)
                }
            }
            DenjoyLocation::Gap { u } => {
                let v = u + shift;
                let (m, w) = split_unit(v);
                n + m + self.sigma(w)
            }
        }
    }

    /// Lift of the semiconjugacy to the rigid rotation: collapses every
    /// inserted interval to its orbit point.
    pub fn collapse(&self, x: f64) -> f64 {
        let (n, y) = split_unit(x);
        match self.locate(y) {
            DenjoyLocation::Gap { u } => n + u,
            DenjoyLocation::Interval { index, .. } => n + self.pos[self.rank_of(index)],
        }
    }
}

fn neumaier_add(sum: &mut f64, comp: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

fn prev_float(v: f64) -> f64 {
    f64::from_bits(v.to_bits() - 1)
}

/// Split `x` into `(floor, fractional part)` with the fractional part in `[0, 1)`.
pub(crate) fn split_unit(x: f64) -> (f64, f64) {
    let n = x.floor();
    let mut y = x - n;
    let mut n = n;
    if y >= 1.0 {
        y -= 1.0;
        n += 1.0;
    }
    (n, y)
}

/// A strictly increasing degree-one lift of a circle homeomorphism.
#[derive(Debug, Clone)]
pub enum CircleLift {
    Rigid(RigidRotation),
    Denjoy(Arc<DenjoyLift>),
}

impl CircleLift {
    /// The translation `x -> x + alpha`.
    pub fn make_rigid_rotation(alpha: f64) -> Self {
        let period = rational_approximation(alpha, 1e-9, MAX_DENOMINATOR);
        CircleLift::Rigid(RigidRotation { alpha, period })
    }

    /// Rigid rotation by the exact rational `p/q`.
    pub fn make_rational_rotation(p: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("rotation denominator must be positive"));
        }
        Ok(CircleLift::Rigid(RigidRotation { alpha: p as f64 / q as f64, period: Some((p, q)) }))
    }

    /// Denjoy homeomorphism with rotation number `alpha`, accurate to `tol`.
    ///
    /// Fails with `NearRational` when `|alpha - p/q| < tol / q^2` for some
    /// `q <= 10^6`: such an `alpha` is indistinguishable from a rational at the
    /// resolution the construction works at.
    pub fn make_denjoy(alpha: f64, tol: f64) -> Result<Self> {
        if !(alpha.is_finite()) {
            return Err(Error::invalid("alpha must be finite"));
        }
        if !(MIN_DENJOY_TOL..=0.1).contains(&tol) {
            return Err(Error::invalid(format!(
                "Denjoy tolerance {tol} outside [{MIN_DENJOY_TOL}, 0.1]"
            )));
        }
        if let Some((p, q)) = rational_approximation(alpha, tol, MAX_DENOMINATOR) {
            return Err(Error::NearRational { alpha, p, q });
        }
        Ok(CircleLift::Denjoy(Arc::new(DenjoyLift::build(alpha, tol))))
    }

    pub fn alpha(&self) -> f64 {
        match self {
            CircleLift::Rigid(r) => r.alpha,
            CircleLift::Denjoy(d) => d.alpha,
        }
    }

    pub fn is_rigid(&self) -> bool {
        matches!(self, CircleLift::Rigid(_))
    }

    /// `(p, q)` for a rigid rotation treated as rational.
    pub fn rational(&self) -> Option<(i64, u64)> {
        match self {
            CircleLift::Rigid(r) => r.period,
            CircleLift::Denjoy(_) => None,
        }
    }

    pub fn denjoy(&self) -> Option<&DenjoyLift> {
        match self {
            CircleLift::Denjoy(d) => Some(d),
            CircleLift::Rigid(_) => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CircleLift::Rigid(r) => x + r.alpha,
            CircleLift::Denjoy(d) => d.step(x, true),
        }
    }

    pub fn inverse(&self, x: f64) -> f64 {
        match self {
            CircleLift::Rigid(r) => x - r.alpha,
            CircleLift::Denjoy(d) => d.step(x, false),
        }
    }

    /// `F^n(x)`; negative `n` iterates the inverse.
    pub fn iterate(&self, x: f64, n: i64) -> f64 {
        match self {
            CircleLift::Rigid(r) => x + n as f64 * r.alpha,
            CircleLift::Denjoy(d) => {
                let mut y = x;
                for _ in 0..n.unsigned_abs() {
                    y = d.step(y, n > 0);
                }
                y
            }
        }
    }

    /// Continuous function on the circle vanishing exactly on the minimal set,
    /// with values in `[0, 1/2]`.
    ///
    /// Rigid `p/q`: `sin^2(pi q theta) / 2`. Denjoy: a tent of height `1/2` on
    /// interval 0, transported to interval `i` and divided by `|i|`, zero on the
    /// Cantor set. A rigid rotation by an irrational has the whole circle as
    /// minimal set and this function is identically zero.
    pub fn g_alpha(&self, theta: f64) -> f64 {
        match self {
            CircleLift::Rigid(r) => match r.period {
                Some((_, q)) => {
                    let s = (PI * q as f64 * theta).sin();
                    0.5 * s * s
                }
                None => 0.0,
            },
            CircleLift::Denjoy(d) => {
                let (_, y) = split_unit(theta);
                match d.locate(y) {
                    DenjoyLocation::Gap { .. } => 0.0,
                    DenjoyLocation::Interval { index, frac } => {
                        let tent = 0.5 * (1.0 - (2.0 * frac - 1.0).abs());
                        tent / (index.unsigned_abs().max(1) as f64)
                    }
                }
            }
        }
    }

    /// `(F^n(x0) - x0) / n`.
    pub fn rotation_number_estimate(&self, x0: f64, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::invalid("rotation estimate needs n >= 1"));
        }
        Ok((self.iterate(x0, n as i64) - x0) / n as f64)
    }

    /// Semiconjugacy to the rigid rotation (identity for rigid lifts).
    pub fn collapse(&self, x: f64) -> f64 {
        match self {
            CircleLift::Rigid(_) => x,
            CircleLift::Denjoy(d) => d.collapse(x),
        }
    }
}

/// Invert a strictly increasing degree-one lift by bisection on `[y-2, y+2]`.
pub fn invert_monotone<F: Fn(f64) -> f64>(f: F, y: f64) -> Result<f64> {
    let (mut lo, mut hi) = (y - 2.0, y + 2.0);
    if !(f(lo) <= y && f(hi) >= y) {
        return Err(Error::NoConvergence { what: "circle lift inversion" });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
