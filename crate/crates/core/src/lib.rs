//! Lifted annulus homeomorphisms whose ends are an attractor and a repellor.
//!
//! The crate builds two families of explicit maps on the universal cover
//! `R x R` of the open annulus `S^1 x R`:
//!
//! * a "Denjoy tower" whose ends carry prescribed prime-end rotation numbers
//!   (`constructions::paper_example`), and
//! * the linear winding horseshoe on a rectangle (`constructions::horseshoe`),
//!
//! and provides the numerical machinery to study them: Birkhoff rotation
//! averages, grid-level chain recurrence with complete Lyapunov functions,
//! rotation intervals of chain classes via extremal cycle means, certified
//! periodic orbit search, fixed point indices and the integer calculus of
//! pseudo-orbit concatenation.

pub mod annulus;
pub mod circle;
pub mod conley;
pub mod constructions;
pub mod error;
pub mod mapspec;
pub mod periodic;
pub mod rotation;

pub use annulus::{AnnulusPoint, LiftMap, LiftPoint, Rect};
pub use circle::CircleLift;
pub use error::{Error, Result};
pub use mapspec::AnnulusMapSpec;
