//! Map specifications and their serialized document form.
//!
//! A map-spec document is JSON:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "variant": "paper_example",
//!   "alpha": { "value": "1/3", "kind": "rational" },
//!   "beta": { "value": "0.41421356237309515", "kind": "irrational" },
//!   "tolerances": { "denjoy": 1e-6 }
//! }
//! ```
//!
//! `value` is either a fraction `p/q` or a decimal; decimals are written in
//! shortest round-trip form so re-reading reproduces the same `f64`. `kind` is
//! optional on input and decided by the irrationality guard when absent.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::annulus::{LiftMap, LiftPoint, Rect};
use crate::circle::{rational_approximation, CircleLift, DEFAULT_DENJOY_TOL, MAX_DENOMINATOR};
use crate::constructions::{resolve_circle, HorseshoeCore, PaperExample, ParamKind};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    PaperExample,
    HorseshoeCore,
    RigidTranslation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDoc {
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ParamKind>,
}

impl ParamDoc {
    pub fn parse_value(&self) -> Result<(f64, Option<(i64, u64)>)> {
        parse_rotation(&self.value)
    }
}

/// Parse `"p/q"` or a decimal.
pub fn parse_rotation(s: &str) -> Result<(f64, Option<(i64, u64)>)> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| Error::invalid(format!("bad numerator in {s:?}")))?;
        let q: u64 = q.trim().parse().map_err(|_| Error::invalid(format!("bad denominator in {s:?}")))?;
        if q == 0 {
            return Err(Error::invalid("zero denominator"));
        }
        Ok((p as f64 / q as f64, Some((p, q))))
    } else {
        let v: f64 = s.parse().map_err(|_| Error::invalid(format!("bad rotation value {s:?}")))?;
        if !v.is_finite() {
            return Err(Error::invalid("rotation value must be finite"));
        }
        Ok((v, None))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub denjoy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { denjoy: DEFAULT_DENJOY_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpecDoc {
    pub schema_version: u32,
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ParamDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<ParamDoc>,
    /// Vertical drop per step of the rigid translation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone)]
enum Compiled {
    Paper(Arc<PaperExample>),
    Horseshoe(HorseshoeCore),
    Rigid { alpha: f64, drop: f64 },
}

/// A lifted annulus homeomorphism together with the document it was built from.
#[derive(Debug, Clone)]
pub struct AnnulusMapSpec {
    doc: MapSpecDoc,
    compiled: Compiled,
}

fn circle_from_param(param: &ParamDoc, tol: f64) -> Result<(CircleLift, ParamKind)> {
    let (value, exact) = param.parse_value()?;
    match (param.kind, exact) {
        (Some(ParamKind::Irrational), Some(_)) => {
            Err(Error::invalid(format!("{:?} is a fraction but marked irrational", param.value)))
        }
        (Some(ParamKind::Irrational), None) => Ok((CircleLift::make_denjoy(value, tol)?, ParamKind::Irrational)),
        (_, Some((p, q))) => Ok((CircleLift::make_rational_rotation(p, q)?, ParamKind::Rational)),
        (Some(ParamKind::Rational), None) => match rational_approximation(value, tol, MAX_DENOMINATOR) {
            Some((p, q)) => Ok((CircleLift::make_rational_rotation(p, q)?, ParamKind::Rational)),
            None => Err(Error::invalid(format!("{value} is not rational at tolerance {tol}"))),
        },
        (None, None) => resolve_circle(value, tol),
    }
}

fn param_doc(value: f64, kind: ParamKind) -> ParamDoc {
    ParamDoc { value: format!("{value:?}"), kind: Some(kind) }
}

impl AnnulusMapSpec {
    pub fn from_doc(doc: &MapSpecDoc) -> Result<Self> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!("unsupported schema_version {}", doc.schema_version)));
        }
        let mut doc = doc.clone();
        let compiled = match doc.variant {
            Variant::PaperExample => {
                let tol = doc.tolerances.denjoy;
                let a = doc.alpha.as_mut().ok_or_else(|| Error::invalid("paper_example needs alpha"))?;
                let (fa, ka) = circle_from_param(a, tol)?;
                a.kind = Some(ka);
                let b = doc.beta.as_mut().ok_or_else(|| Error::invalid("paper_example needs beta"))?;
                let (fb, kb) = circle_from_param(b, tol)?;
                b.kind = Some(kb);
                Compiled::Paper(Arc::new(PaperExample::new(fa, fb)))
            }
            Variant::HorseshoeCore => Compiled::Horseshoe(HorseshoeCore),
            Variant::RigidTranslation => {
                let a = doc.alpha.as_ref().ok_or_else(|| Error::invalid("rigid_translation needs alpha"))?;
                let (alpha, _) = a.parse_value()?;
                let drop = doc.drop.unwrap_or(0.0);
                if !drop.is_finite() {
                    return Err(Error::invalid("drop must be finite"));
                }
                Compiled::Rigid { alpha, drop }
            }
        };
        Ok(AnnulusMapSpec { doc, compiled })
    }

    pub fn to_doc(&self) -> MapSpecDoc {
        self.doc.clone()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("map spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: MapSpecDoc = serde_json::from_str(s).map_err(|e| Error::invalid(format!("map spec: {e}")))?;
        Self::from_doc(&doc)
    }

    pub fn variant(&self) -> Variant {
        self.doc.variant
    }

    pub fn paper_example(&self) -> Option<&PaperExample> {
        match &self.compiled {
            Compiled::Paper(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_horseshoe(&self) -> bool {
        matches!(self.compiled, Compiled::Horseshoe(_))
    }

    fn as_map(&self) -> &dyn LiftMap {
        match &self.compiled {
            Compiled::Paper(p) => p.as_ref(),
            Compiled::Horseshoe(h) => h,
            Compiled::Rigid { .. } => self,
        }
    }
}

/// The two-ended Denjoy tower with end rotation numbers `alpha` (top) and
/// `beta` (bottom). Each parameter is realised as a rigid rotation when it
/// is numerically rational and as a Denjoy map otherwise; the decision is
/// recorded in the document.
pub fn build_paper_example(alpha: f64, beta: f64) -> Result<AnnulusMapSpec> {
    build_paper_example_with_tol(alpha, beta, DEFAULT_DENJOY_TOL)
}

pub fn build_paper_example_with_tol(alpha: f64, beta: f64, tol: f64) -> Result<AnnulusMapSpec> {
    let (fa, ka) = resolve_circle(alpha, tol)?;
    let (fb, kb) = resolve_circle(beta, tol)?;
    let doc = MapSpecDoc {
        schema_version: SCHEMA_VERSION,
        variant: Variant::PaperExample,
        alpha: Some(param_doc(alpha, ka)),
        beta: Some(param_doc(beta, kb)),
        drop: None,
        tolerances: Tolerances { denjoy: tol },
    };
    Ok(AnnulusMapSpec { doc, compiled: Compiled::Paper(Arc::new(PaperExample::new(fa, fb))) })
}

pub fn build_horseshoe_core() -> AnnulusMapSpec {
    AnnulusMapSpec {
        doc: MapSpecDoc {
            schema_version: SCHEMA_VERSION,
            variant: Variant::HorseshoeCore,
            alpha: None,
            beta: None,
            drop: None,
            tolerances: Tolerances::default(),
        },
        compiled: Compiled::Horseshoe(HorseshoeCore),
    }
}

/// `(x, t) -> (x + alpha, t - drop)`.
pub fn rigid_translation(alpha: f64, drop: f64) -> AnnulusMapSpec {
    AnnulusMapSpec {
        doc: MapSpecDoc {
            schema_version: SCHEMA_VERSION,
            variant: Variant::RigidTranslation,
            alpha: Some(ParamDoc { value: format!("{alpha:?}"), kind: None }),
            beta: None,
            drop: Some(drop),
            tolerances: Tolerances::default(),
        },
        compiled: Compiled::Rigid { alpha, drop },
    }
}

impl LiftMap for AnnulusMapSpec {
    fn eval(&self, p: LiftPoint) -> Result<LiftPoint> {
        match &self.compiled {
            Compiled::Rigid { alpha, drop } => Ok(LiftPoint::new(p.x + alpha, p.t - drop)),
            _ => self.as_map().eval(p),
        }
    }

    fn inverse(&self, p: LiftPoint) -> Result<LiftPoint> {
        match &self.compiled {
            Compiled::Rigid { alpha, drop } => Ok(LiftPoint::new(p.x - alpha, p.t + drop)),
            _ => self.as_map().inverse(p),
        }
    }

    fn eval_continued(&self, p: LiftPoint, reference: LiftPoint) -> Result<LiftPoint> {
        match &self.compiled {
            Compiled::Rigid { .. } => self.eval(p),
            _ => self.as_map().eval_continued(p, reference),
        }
    }

    fn image_enclosure(&self, r: &Rect) -> Vec<Rect> {
        match &self.compiled {
            Compiled::Rigid { alpha, drop } => vec![r.translate(*alpha, -drop)],
            _ => self.as_map().image_enclosure(r),
        }
    }
}
