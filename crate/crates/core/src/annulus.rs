//! Points of the annulus `S^1 x R` and its universal cover, and the common
//! interface of lifted annulus homeomorphisms.

use serde::{Deserialize, Serialize};

use crate::circle::split_unit;
use crate::error::{Error, Result};

/// A point of the universal cover: `x` lifts the angle, `t` is the height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftPoint {
    pub x: f64,
    pub t: f64,
}

impl LiftPoint {
    pub const fn new(x: f64, t: f64) -> Self {
        LiftPoint { x, t }
    }

    /// Deck transformation `T^k`.
    pub fn deck(self, k: i64) -> Self {
        LiftPoint { x: self.x + k as f64, t: self.t }
    }

    pub fn project(self) -> AnnulusPoint {
        AnnulusPoint::new(self.x, self.t)
    }

    pub fn sup_dist(self, other: LiftPoint) -> f64 {
        (self.x - other.x).abs().max((self.t - other.t).abs())
    }

    pub fn dist(self, other: LiftPoint) -> f64 {
        (self.x - other.x).hypot(self.t - other.t)
    }
}

/// `T^k(p)`.
pub fn deck(p: LiftPoint, k: i64) -> LiftPoint {
    p.deck(k)
}

/// A point of the annulus, angle normalised to `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusPoint {
    pub theta: f64,
    pub t: f64,
}

impl AnnulusPoint {
    pub fn new(theta: f64, t: f64) -> Self {
        let (_, theta) = split_unit(theta);
        AnnulusPoint { theta, t }
    }

    /// The lift with `x` in `[0, 1)`.
    pub fn lift(self) -> LiftPoint {
        LiftPoint { x: self.theta, t: self.t }
    }

    /// Flat distance on the annulus (circular in the angle).
    pub fn dist(self, other: AnnulusPoint) -> f64 {
        circle_gap(self.theta - other.theta).hypot(self.t - other.t)
    }
}

/// Distance from `d` to the nearest integer.
pub fn circle_gap(d: f64) -> f64 {
    (d - d.round()).abs()
}

/// Axis-aligned closed rectangle in lift coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Rect {
    pub const fn new(x_lo: f64, x_hi: f64, t_lo: f64, t_hi: f64) -> Self {
        Rect { x_lo, x_hi, t_lo, t_hi }
    }

    pub fn center(&self) -> LiftPoint {
        LiftPoint::new(0.5 * (self.x_lo + self.x_hi), 0.5 * (self.t_lo + self.t_hi))
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: LiftPoint) -> bool {
        p.x >= self.x_lo && p.x <= self.x_hi && p.t >= self.t_lo && p.t <= self.t_hi
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.x_lo <= o.x_hi && o.x_lo <= self.x_hi && self.t_lo <= o.t_hi && o.t_lo <= self.t_hi
    }

    pub fn intersection(&self, o: &Rect) -> Option<Rect> {
        let r = Rect::new(
            self.x_lo.max(o.x_lo),
            self.x_hi.min(o.x_hi),
            self.t_lo.max(o.t_lo),
            self.t_hi.min(o.t_hi),
        );
        (r.x_lo <= r.x_hi && r.t_lo <= r.t_hi).then_some(r)
    }

    pub fn translate(&self, dx: f64, dt: f64) -> Rect {
        Rect::new(self.x_lo + dx, self.x_hi + dx, self.t_lo + dt, self.t_hi + dt)
    }

    pub fn dilate(&self, r: f64) -> Rect {
        Rect::new(self.x_lo - r, self.x_hi + r, self.t_lo - r, self.t_hi + r)
    }

    /// The four quadrants.
    pub fn split(&self) -> [Rect; 4] {
        let c = self.center();
        [
            Rect::new(self.x_lo, c.x, self.t_lo, c.t),
            Rect::new(c.x, self.x_hi, self.t_lo, c.t),
            Rect::new(self.x_lo, c.x, c.t, self.t_hi),
            Rect::new(c.x, self.x_hi, c.t, self.t_hi),
        ]
    }

    /// Bounding box of a set of points.
    pub fn bounding(points: impl IntoIterator<Item = LiftPoint>) -> Option<Rect> {
        let mut it = points.into_iter();
        let p = it.next()?;
        let mut r = Rect::new(p.x, p.x, p.t, p.t);
        for p in it {
            r.x_lo = r.x_lo.min(p.x);
            r.x_hi = r.x_hi.max(p.x);
            r.t_lo = r.t_lo.min(p.t);
            r.t_hi = r.t_hi.max(p.t);
        }
        Some(r)
    }
}

/// A lifted annulus homeomorphism `h~`, commuting with the deck map.
pub trait LiftMap: Send + Sync {
    fn eval(&self, p: LiftPoint) -> Result<LiftPoint>;

    fn inverse(&self, p: LiftPoint) -> Result<LiftPoint>;

    /// Evaluate `p` with the local formula that is in force at `reference`.
    /// Maps defined piecewise on a restricted domain use this to continue a
    /// branch across the domain boundary; elsewhere it is plain evaluation.
    fn eval_continued(&self, p: LiftPoint, reference: LiftPoint) -> Result<LiftPoint> {
        let _ = reference;
        self.eval(p)
    }

    /// Rectangles whose union covers the image of `r` (intersected with the
    /// domain). The default encloses a 5x5 sample grid, padded by the largest
    /// image gap between neighbouring samples.
    fn image_enclosure(&self, r: &Rect) -> Vec<Rect> {
        sampled_enclosure(self, r)
    }
}

pub(crate) fn sampled_enclosure<M: LiftMap + ?Sized>(map: &M, r: &Rect) -> Vec<Rect> {
    const K: usize = 5;
    let mut img = [[None; K]; K];
    for (i, row) in img.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let p = LiftPoint::new(
                r.x_lo + r.width() * i as f64 / (K - 1) as f64,
                r.t_lo + r.height() * j as f64 / (K - 1) as f64,
            );
            *cell = map.eval(p).ok();
        }
    }
    let mut pad: f64 = 0.0;
    for i in 0..K {
        for j in 0..K {
            if let Some(a) = img[i][j] {
                if i + 1 < K {
                    if let Some(b) = img[i + 1][j] {
                        pad = pad.max(a.dist(b));
                    }
                }
                if j + 1 < K {
                    if let Some(b) = img[i][j + 1] {
                        pad = pad.max(a.dist(b));
                    }
                }
            }
        }
    }
    Rect::bounding(img.iter().flatten().flatten().copied())
        .map(|b| vec![b.dilate(pad)])
        .unwrap_or_default()
}

impl<M: LiftMap + ?Sized> LiftMap for &M {
    fn eval(&self, p: LiftPoint) -> Result<LiftPoint> {
        (**self).eval(p)
    }
    fn inverse(&self, p: LiftPoint) -> Result<LiftPoint> {
        (**self).inverse(p)
    }
    fn eval_continued(&self, p: LiftPoint, reference: LiftPoint) -> Result<LiftPoint> {
        (**self).eval_continued(p, reference)
    }
    fn image_enclosure(&self, r: &Rect) -> Vec<Rect> {
        (**self).image_enclosure(r)
    }
}

/// `T^{-shift} o h~^q`, itself a lifted annulus map.
#[derive(Debug, Clone, Copy)]
pub struct Power<'a, M: ?Sized> {
    map: &'a M,
    q: usize,
    shift: i64,
}

impl<'a, M: LiftMap + ?Sized> Power<'a, M> {
    pub fn new(map: &'a M, q: usize, shift: i64) -> Self {
        assert!(q >= 1, "power must be at least 1");
        Power { map, q, shift }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }
}

impl<M: LiftMap + ?Sized> LiftMap for Power<'_, M> {
    fn eval(&self, p: LiftPoint) -> Result<LiftPoint> {
        let mut y = p;
        for _ in 0..self.q {
            y = self.map.eval(y)?;
        }
        Ok(y.deck(-self.shift))
    }

    fn inverse(&self, p: LiftPoint) -> Result<LiftPoint> {
        let mut y = p.deck(self.shift);
        for _ in 0..self.q {
            y = self.map.inverse(y)?;
        }
        Ok(y)
    }

    fn eval_continued(&self, p: LiftPoint, reference: LiftPoint) -> Result<LiftPoint> {
        let (mut y, mut r) = (p, reference);
        for k in 0..self.q {
            y = self.map.eval_continued(y, r)?;
            if k + 1 < self.q {
                r = self.map.eval(r)?;
            }
        }
        Ok(y.deck(-self.shift))
    }

    fn image_enclosure(&self, r: &Rect) -> Vec<Rect> {
        let mut cur = vec![*r];
        for _ in 0..self.q {
            cur = cur.iter().flat_map(|b| self.map.image_enclosure(b)).collect();
            if cur.is_empty() {
                break;
            }
        }
        cur.into_iter().map(|b| b.translate(-(self.shift as f64), 0.0)).collect()
    }
}

/// `Pi_1(h~(p)) - Pi_1(p)`; independent of the lift chosen for `p`.
pub fn displacement<M: LiftMap + ?Sized>(map: &M, p: AnnulusPoint) -> Result<f64> {
    let q = p.lift();
    Ok(map.eval(q)?.x - q.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// Result of a Birkhoff rotation average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BirkhoffAverage {
    pub value: f64,
    /// Steps actually taken.
    pub steps: u64,
    /// False when the orbit left the domain before `n` steps.
    pub complete: bool,
}

/// Forward: `(Pi_1(h~^n p) - Pi_1 p) / n`. Backward:
/// `(Pi_1 p - Pi_1(h~^{-n} p)) / n`.
pub fn birkhoff_rotation<M: LiftMap + ?Sized>(
    map: &M,
    p: LiftPoint,
    n: u64,
    direction: Direction,
) -> Result<BirkhoffAverage> {
    if n == 0 {
        return Err(Error::invalid("Birkhoff average needs n >= 1"));
    }
    let mut y = p;
    let mut steps = 0;
    while steps < n {
        let next = match direction {
            Direction::Forward => map.eval(y),
            Direction::Backward => map.inverse(y),
        };
        match next {
            Ok(z) => y = z,
            Err(e) if steps == 0 => return Err(e),
            Err(_) => break,
        }
        steps += 1;
    }
    let drift = match direction {
        Direction::Forward => y.x - p.x,
        Direction::Backward => p.x - y.x,
    };
    Ok(BirkhoffAverage { value: drift / steps as f64, steps, complete: steps == n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basin {
    PlusBasin,
    MinusBasin,
    Undetermined,
}

/// When (if ever) an orbit was seen escaping through either end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BasinReport {
    /// Backward step at which the height first exceeded `t_hi`.
    pub plus_step: Option<u64>,
    /// Forward step at which the height first dropped below `t_lo`.
    pub minus_step: Option<u64>,
}

/// Run both half-orbits for up to `max_iter` steps and record escapes.
pub fn basin_report<M: LiftMap + ?Sized>(
    map: &M,
    p: AnnulusPoint,
    t_hi: f64,
    t_lo: f64,
    max_iter: u64,
) -> Result<BasinReport> {
    if !(t_lo < t_hi) {
        return Err(Error::invalid("basin thresholds need t_lo < t_hi"));
    }
    let plus_step = escape_step(max_iter, p.lift(), |y| map.inverse(y), |y| y.t > t_hi)?;
    let minus_step = escape_step(max_iter, p.lift(), |y| map.eval(y), |y| y.t < t_lo)?;
    Ok(BasinReport { plus_step, minus_step })
}

fn escape_step(
    max_iter: u64,
    start: LiftPoint,
    step: impl Fn(LiftPoint) -> Result<LiftPoint>,
    escaped: impl Fn(LiftPoint) -> bool,
) -> Result<Option<u64>> {
    let mut y = start;
    for k in 0..=max_iter {
        if escaped(y) {
            return Ok(Some(k));
        }
        if k < max_iter {
            y = step(y)?;
        }
    }
    Ok(None)
}

/// Semi-decision of basin membership. Both half-orbits are advanced in
/// lockstep; the first end witnessed wins (the `+infinity` end on ties).
/// Basin membership is only semi-decidable, so `Undetermined` is an honest
/// outcome, not an error.
pub fn classify_basin<M: LiftMap + ?Sized>(
    map: &M,
    p: AnnulusPoint,
    t_hi: f64,
    t_lo: f64,
    max_iter: u64,
) -> Result<Basin> {
    let r = basin_report(map, p, t_hi, t_lo, max_iter)?;
    Ok(match (r.plus_step, r.minus_step) {
        (Some(a), Some(b)) if b < a => Basin::MinusBasin,
        (Some(_), _) => Basin::PlusBasin,
        (None, Some(_)) => Basin::MinusBasin,
        (None, None) => Basin::Undetermined,
    })
}
