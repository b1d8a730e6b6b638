//! The linear winding horseshoe on `R = [0, 1/4] x [-1/4, 0]`.
//!
//! On `R0 = [0, 1/20] x [-1/4, 0]` the map is `(5 theta, t / 5)`; on
//! `R1 = [1/5, 1/4] x [-1/4, 0]` it is `(5 theta - 1, t/5 - 1/5)`. The image
//! of `R1` wraps once around the annulus, so in lift coordinates both branches
//! read `x -> k + 5 (x - k)` where `k = floor(x)`: branch 1 gains one deck
//! translation. Only the core map on `R0 u R1` is modelled; evaluation
//! elsewhere is `OutOfDomain`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::AffineMap;
use crate::annulus::{AnnulusPoint, LiftMap, LiftPoint, Rect};
use crate::circle::split_unit;
use crate::error::{Error, Result};

pub const R: Rect = Rect::new(0.0, 0.25, -0.25, 0.0);
pub const R0: Rect = Rect::new(0.0, 0.05, -0.25, 0.0);
pub const R1: Rect = Rect::new(0.2, 0.25, -0.25, 0.0);

/// Fixed point `a = (0, 0)`, rotation number 0.
pub const A: LiftPoint = LiftPoint::new(0.0, 0.0);
/// Fixed point `b = (1/4, -1/4)`; its lift satisfies `h~(b) = T(b)`.
pub const B: LiftPoint = LiftPoint::new(0.25, -0.25);

/// Points within this distance of `R0 u R1` are snapped onto it.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointLabel {
    A,
    B,
}

impl FixedPointLabel {
    pub fn point(self) -> LiftPoint {
        match self {
            FixedPointLabel::A => A,
            FixedPointLabel::B => B,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HorseshoeCore;

/// Branch (0 or 1) containing `(theta, t)`, `theta` in `[0, 1)`.
pub fn branch_of(theta: f64, t: f64) -> Option<u8> {
    if t < R.t_lo - DOMAIN_SLACK || t > R.t_hi + DOMAIN_SLACK {
        return None;
    }
    // theta just below 1 is the same angle as just above 0.
    let theta = if theta > 1.0 - DOMAIN_SLACK { theta - 1.0 } else { theta };
    if theta >= R0.x_lo - DOMAIN_SLACK && theta <= R0.x_hi + DOMAIN_SLACK {
        Some(0)
    } else if theta >= R1.x_lo - DOMAIN_SLACK && theta <= R1.x_hi + DOMAIN_SLACK {
        Some(1)
    } else {
        None
    }
}

/// Affine branch `b` on the plane, with the deck translation of branch 1
/// folded in (so `b` is its fixed point).
pub fn branch_affine(b: u8) -> AffineMap {
    match b {
        0 => AffineMap::new([[5.0, 0.0], [0.0, 0.2]], [0.0, 0.0]),
        _ => AffineMap::new([[5.0, 0.0], [0.0, 0.2]], [-1.0, -0.2]),
    }
}

impl HorseshoeCore {
    fn apply(p: LiftPoint, k: f64, b: u8) -> LiftPoint {
        LiftPoint::new(5.0 * p.x - 4.0 * k, (p.t - b as f64) / 5.0)
    }

    /// Exact evaluation of the lift on rational points.
    pub fn eval_exact(&self, p: &ExactPoint) -> Result<ExactPoint> {
        let k = p.x.floor();
        let theta = &p.x - &k;
        let b = exact_branch(&theta, &p.t).ok_or(Error::OutOfDomain(p.to_f64()))?;
        let five = BigRational::from_integer(BigInt::from(5));
        Ok(ExactPoint {
            x: &k + &theta * &five,
            t: (&p.t - BigRational::from_integer(BigInt::from(b))) / five,
        })
    }
}

impl LiftMap for HorseshoeCore {
    fn eval(&self, p: LiftPoint) -> Result<LiftPoint> {
        let (k, theta) = split_unit(p.x);
        let b = branch_of(theta, p.t).ok_or(Error::OutOfDomain(p))?;
        // theta just below 1 belongs to the next sheet.
        let k = if theta > 0.5 { k + 1.0 } else { k };
        Ok(Self::apply(p, k, b))
    }

    fn inverse(&self, p: LiftPoint) -> Result<LiftPoint> {
        let (k, mut theta) = split_unit(p.x);
        let mut k = k;
        if theta > 1.0 - DOMAIN_SLACK {
            theta -= 1.0;
            k += 1.0;
        }
        if theta < R.x_lo - DOMAIN_SLACK || theta > R.x_hi + DOMAIN_SLACK {
            return Err(Error::OutOfDomain(p));
        }
        if p.t >= -0.05 - DOMAIN_SLACK && p.t <= DOMAIN_SLACK {
            Ok(LiftPoint::new(k + theta / 5.0, 5.0 * p.t))
        } else if p.t >= -0.25 - DOMAIN_SLACK && p.t <= -0.2 + DOMAIN_SLACK {
            Ok(LiftPoint::new(k - 1.0 + (theta + 1.0) / 5.0, 5.0 * p.t + 1.0))
        } else {
            Err(Error::OutOfDomain(p))
        }
    }

    fn eval_continued(&self, p: LiftPoint, reference: LiftPoint) -> Result<LiftPoint> {
        let (k, theta) = split_unit(reference.x);
        let b = branch_of(theta, reference.t).ok_or(Error::OutOfDomain(reference))?;
        let k = if theta > 0.5 { k + 1.0 } else { k };
        Ok(Self::apply(p, k, b))
    }

    /// Exact: the rectangle is cut along deck sheets and the two branch
    /// rectangles, and each piece is mapped affinely.
    fn image_enclosure(&self, r: &Rect) -> Vec<Rect> {
        let mut out = Vec::new();
        let k_lo = r.x_lo.floor() as i64;
        let k_hi = r.x_hi.floor() as i64;
        for k in k_lo..=k_hi {
            let kf = k as f64;
            for (b, branch) in [(0u8, R0), (1u8, R1)] {
                if let Some(piece) = r.intersection(&branch.translate(kf, 0.0)) {
                    let lo = Self::apply(LiftPoint::new(piece.x_lo, piece.t_lo), kf, b);
                    let hi = Self::apply(LiftPoint::new(piece.x_hi, piece.t_hi), kf, b);
                    out.push(Rect::new(lo.x, hi.x, lo.t, hi.t));
                }
            }
        }
        out
    }
}

/// A point with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPoint {
    pub x: BigRational,
    pub t: BigRational,
}

impl ExactPoint {
    pub fn new(x: BigRational, t: BigRational) -> Self {
        ExactPoint { x, t }
    }

    pub fn from_ratios(x: (i64, i64), t: (i64, i64)) -> Self {
        ExactPoint { x: ratio(x.0, x.1), t: ratio(t.0, t.1) }
    }

    pub fn to_f64(&self) -> LiftPoint {
        LiftPoint::new(self.x.to_f64().unwrap_or(f64::NAN), self.t.to_f64().unwrap_or(f64::NAN))
    }

    pub fn deck(&self, k: i64) -> ExactPoint {
        ExactPoint { x: &self.x + BigRational::from_integer(BigInt::from(k)), t: self.t.clone() }
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn exact_branch(theta: &BigRational, t: &BigRational) -> Option<u8> {
    let zero = BigRational::zero();
    if *t < ratio(-1, 4) || *t > zero {
        return None;
    }
    if *theta >= zero && *theta <= ratio(1, 20) {
        Some(0)
    } else if *theta >= ratio(1, 5) && *theta <= ratio(1, 4) {
        Some(1)
    } else {
        None
    }
}

/// A periodic point of the horseshoe with prescribed itinerary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicPoint {
    pub point: ExactPoint,
    /// Number of 1s in the word: `h~^q(x) = T^p(x)`.
    pub p: i64,
    pub q: usize,
}

/// The unique period-`q` point whose itinerary through `(R0, R1)` is `word`,
/// solved exactly. With `S = sum_k w_k 5^(q-1-k)` and `U = sum_k w_k 5^k`,
/// the point is `(S, -U) / (5^q - 1)`.
pub fn horseshoe_symbolic_point(word: &str) -> Result<SymbolicPoint> {
    let bits: Vec<u8> = word
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::invalid(format!("itinerary must be binary, got {word:?}"))),
        })
        .collect::<Result<_>>()?;
    if bits.is_empty() {
        return Err(Error::invalid("itinerary word must be nonempty"));
    }
    let q = bits.len();
    let five = BigInt::from(5);
    let mut s = BigInt::zero();
    let mut u = BigInt::zero();
    let mut pow = BigInt::one();
    for (k, &w) in bits.iter().enumerate() {
        s = &s * &five + BigInt::from(w);
        if w == 1 {
            u += &pow;
        }
        if k + 1 < q {
            pow *= &five;
        }
    }
    let denom = &pow * &five - BigInt::one();
    let point = ExactPoint {
        x: BigRational::new(s, denom.clone()),
        t: BigRational::new(-u, denom),
    };
    let h = HorseshoeCore;
    let mut y = point.clone();
    for (step, &w) in bits.iter().enumerate() {
        let k = y.x.floor();
        let theta = &y.x - &k;
        if exact_branch(&theta, &y.t) != Some(w) {
            return Err(Error::ItineraryViolation { word: word.to_string(), step, expected: w });
        }
        y = h.eval_exact(&y)?;
    }
    let p = bits.iter().filter(|&&w| w == 1).count() as i64;
    if y != point.deck(p) {
        return Err(Error::ItineraryViolation { word: word.to_string(), step: q, expected: bits[0] });
    }
    Ok(SymbolicPoint { point, p, q })
}

/// An `eps`-chain between fixed points made of exact orbit segments along the
/// connecting manifolds, jumping only near the endpoints.
///
/// `a -> b` runs along `t = 0` (unstable manifold of `a`) to `(1/4, 0)`, then
/// down the stable manifold of `b`. `b -> a` runs along `t = -1/4` to
/// `(0, -1/4)`, then up the stable manifold of `a`.
pub fn horseshoe_chain(from: FixedPointLabel, to: FixedPointLabel, eps: f64) -> Result<Vec<AnnulusPoint>> {
    if !(eps > 0.0) {
        return Err(Error::invalid("chain tolerance must be positive"));
    }
    let h = HorseshoeCore;
    let start = from.point();
    let target = to.point().project();
    let mut chain = vec![start.project()];
    if h.eval(start)?.project().dist(target) < eps {
        chain.push(target);
        return Ok(chain);
    }
    // Leave `from` along its unstable manifold: `(1/4 - c/(4*5^m), t_from)`.
    let mut m = 0u32;
    let exit = |m: u32| -> ExactPoint {
        let off = BigRational::new(BigInt::one(), BigInt::from(4) * BigInt::from(5).pow(m));
        match from {
            FixedPointLabel::A => ExactPoint::new(off, BigRational::zero()),
            FixedPointLabel::B => ExactPoint::new(ratio(1, 4) - off, ratio(-1, 4)),
        }
    };
    while exit(m).to_f64().project().dist(start.project()) >= eps {
        m += 1;
    }
    let mut y = exit(m);
    chain.push(y.to_f64().project());
    for _ in 0..10_000 {
        let next = h.eval_exact(&y)?;
        if next.to_f64().project().dist(target) < eps {
            chain.push(target);
            return Ok(chain);
        }
        chain.push(next.to_f64().project());
        y = next;
    }
    Err(Error::NoConvergence { what: "heteroclinic chain" })
}

/// The closed chain `a -> b -> a`.
pub fn horseshoe_heteroclinic_chain(eps: f64) -> Result<Vec<AnnulusPoint>> {
    let mut chain = horseshoe_chain(FixedPointLabel::A, FixedPointLabel::B, eps)?;
    let back = horseshoe_chain(FixedPointLabel::B, FixedPointLabel::A, eps)?;
    chain.extend_from_slice(&back[1..]);
    Ok(chain)
}
