//! Explicit example systems: the Denjoy tower with prescribed end rotation
//! numbers and the linear winding horseshoe.

pub mod horseshoe;
pub mod paper_example;

use serde::{Deserialize, Serialize};

use crate::annulus::{LiftMap, LiftPoint, Rect};
use crate::circle::{rational_approximation, CircleLift, MAX_DENOMINATOR};
use crate::error::{Error, Result};

pub use horseshoe::{
    horseshoe_chain, horseshoe_heteroclinic_chain, horseshoe_symbolic_point, ExactPoint, FixedPointLabel,
    HorseshoeCore, SymbolicPoint,
};
pub use paper_example::PaperExample;

/// How a rotation parameter was realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Rational,
    Irrational,
}

/// Rigid rotation when `alpha` is within `tol / q^2` of some `p/q` with
/// `q <= 10^6`, Denjoy map otherwise.
pub fn resolve_circle(alpha: f64, tol: f64) -> Result<(CircleLift, ParamKind)> {
    match rational_approximation(alpha, tol, MAX_DENOMINATOR) {
        Some((p, q)) => Ok((CircleLift::make_rational_rotation(p, q)?, ParamKind::Rational)),
        None => Ok((CircleLift::make_denjoy(alpha, tol)?, ParamKind::Irrational)),
    }
}

/// A planar affine map `z -> M z + c`, usable as a global lifted map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub m: [[f64; 2]; 2],
    pub c: [f64; 2],
}

impl AffineMap {
    pub const fn new(m: [[f64; 2]; 2], c: [f64; 2]) -> Self {
        AffineMap { m, c }
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Fixed point of the map, if `I - M` is invertible.
    pub fn fixed_point(&self) -> Option<LiftPoint> {
        let a = 1.0 - self.m[0][0];
        let b = -self.m[0][1];
        let c = -self.m[1][0];
        let d = 1.0 - self.m[1][1];
        let det = a * d - b * c;
        (det != 0.0).then(|| {
            LiftPoint::new((d * self.c[0] - b * self.c[1]) / det, (a * self.c[1] - c * self.c[0]) / det)
        })
    }
}

impl LiftMap for AffineMap {
    fn eval(&self, p: LiftPoint) -> Result<LiftPoint> {
        Ok(LiftPoint::new(
            self.m[0][0] * p.x + self.m[0][1] * p.t + self.c[0],
            self.m[1][0] * p.x + self.m[1][1] * p.t + self.c[1],
        ))
    }

    fn inverse(&self, p: LiftPoint) -> Result<LiftPoint> {
        let det = self.det();
        if det == 0.0 {
            return Err(Error::invalid("singular affine map"));
        }
        let (u, v) = (p.x - self.c[0], p.t - self.c[1]);
        Ok(LiftPoint::new(
            (self.m[1][1] * u - self.m[0][1] * v) / det,
            (-self.m[1][0] * u + self.m[0][0] * v) / det,
        ))
    }

    fn image_enclosure(&self, r: &Rect) -> Vec<Rect> {
        let corners = [
            LiftPoint::new(r.x_lo, r.t_lo),
            LiftPoint::new(r.x_hi, r.t_lo),
            LiftPoint::new(r.x_lo, r.t_hi),
            LiftPoint::new(r.x_hi, r.t_hi),
        ];
        Rect::bounding(corners.iter().map(|&p| self.eval(p).expect("affine eval"))).into_iter().collect()
    }
}
