use thiserror::Error;

use crate::annulus::LiftPoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rotation number {alpha} lies within tolerance of {p}/{q}")]
    NearRational { alpha: f64, p: i64, q: u64 },

    #[error("point ({}, {}) is outside the domain of the map", .0.x, .0.t)]
    OutOfDomain(LiftPoint),

    #[error("{what} did not converge")]
    NoConvergence { what: &'static str },

    #[error("word {word:?} leaves rectangle R{expected} at step {step}")]
    ItineraryViolation { word: String, step: usize, expected: u8 },

    #[error("point is not periodic with period {q} (defect {defect:e})")]
    NotPeriodic { q: usize, defect: f64 },

    #[error("angular displacement {delta} is not within tolerance of an integer")]
    NotLifted { delta: f64 },

    #[error("seed is not in the basin of the {end} end")]
    NotInBasin { end: &'static str },

    #[error("map vanishes on the index loop (min |G| = {min_norm:e}, variation {variation:e})")]
    ZeroOnBoundary { min_norm: f64, variation: f64 },

    #[error("argument increment {increment} exceeds pi/2; increase the sample count")]
    UnresolvedWinding { increment: f64 },

    #[error("not a {delta}-chain: jump {step} has length {jump}")]
    InvalidChain { step: usize, jump: f64, delta: f64 },

    #[error("lift of a chain jump is ambiguous for delta = {delta} >= 1/2")]
    AmbiguousLift { delta: f64 },

    #[error("no candidate zeros survived the search (this does not certify absence)")]
    NoCandidates,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
