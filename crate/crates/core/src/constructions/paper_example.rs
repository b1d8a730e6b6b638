//! The Denjoy tower `h(theta, t) = (phi_t(theta), t - g(theta, t))`.
//!
//! Far up (`t >= 5`) the angular part is `f_alpha`, far down (`t <= -5`) it is
//! `f_beta`, and in between the two lifts are blended linearly. The vertical
//! drop `g` equals 1 except on the two bands `6 < |t| < 14`, where a cosine
//! bump pulls it down to `g_alpha` (at `t = 10`) or `g_beta` (at `t = -10`).
//! The minimal sets `C_alpha x {10}` and `C_beta x {-10}` are exactly the zeros
//! of `g`.

use std::f64::consts::PI;

use crate::annulus::{LiftMap, LiftPoint};
use crate::circle::{invert_monotone, split_unit, CircleLift};
use crate::error::{Error, Result};

/// Upper bump `(1 + cos(pi (t - 10) / 4)) / 2` on `[6, 14]`, zero elsewhere.
pub fn bump(t: f64) -> f64 {
    if (6.0..=14.0).contains(&t) {
        0.5 * (1.0 + (PI * (t - 10.0) / 4.0).cos())
    } else {
        0.0
    }
}

/// Derivative of [`bump`].
pub fn bump_slope(t: f64) -> f64 {
    if (6.0..=14.0).contains(&t) {
        -PI / 8.0 * (PI * (t - 10.0) / 4.0).sin()
    } else {
        0.0
    }
}

/// `sup |bump'| = pi / 8`.
pub const BUMP_SLOPE_BOUND: f64 = PI / 8.0;

/// Weight of `f_alpha` in the isotopy: `clamp((t + 5) / 10, 0, 1)`.
pub fn isotopy_weight(t: f64) -> f64 {
    ((t + 5.0) / 10.0).clamp(0.0, 1.0)
}

const T_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone)]
pub struct PaperExample {
    alpha: CircleLift,
    beta: CircleLift,
}

impl PaperExample {
    pub fn new(alpha: CircleLift, beta: CircleLift) -> Self {
        PaperExample { alpha, beta }
    }

    pub fn f_alpha(&self) -> &CircleLift {
        &self.alpha
    }

    pub fn f_beta(&self) -> &CircleLift {
        &self.beta
    }

    /// Vertical drop `g(theta, t) = 1 - lambda(t)(1 - g_alpha) - mu(t)(1 - g_beta)`.
    pub fn g(&self, theta: f64, t: f64) -> f64 {
        let up = bump(t);
        let down = bump(-t);
        let mut g = 1.0;
        if up > 0.0 {
            g -= up * (1.0 - self.alpha.g_alpha(theta));
        }
        if down > 0.0 {
            g -= down * (1.0 - self.beta.g_alpha(theta));
        }
        g
    }

    /// `d g / d t`, exact.
    pub fn g_t(&self, theta: f64, t: f64) -> f64 {
        -bump_slope(t) * (1.0 - self.alpha.g_alpha(theta)) + bump_slope(-t) * (1.0 - self.beta.g_alpha(theta))
    }

    /// Lifted isotopy `phi~_t(x)`.
    pub fn phi(&self, x: f64, t: f64) -> f64 {
        let w = isotopy_weight(t);
        if w == 1.0 {
            self.alpha.eval(x)
        } else if w == 0.0 {
            self.beta.eval(x)
        } else {
            w * self.alpha.eval(x) + (1.0 - w) * self.beta.eval(x)
        }
    }

    pub fn phi_inverse(&self, x: f64, t: f64) -> Result<f64> {
        let w = isotopy_weight(t);
        if w == 1.0 {
            Ok(self.alpha.inverse(x))
        } else if w == 0.0 {
            Ok(self.beta.inverse(x))
        } else {
            invert_monotone(|y| self.phi(y, t), x)
        }
    }
}

impl LiftMap for PaperExample {
    fn eval(&self, p: LiftPoint) -> Result<LiftPoint> {
        let (_, theta) = split_unit(p.x);
        Ok(LiftPoint::new(self.phi(p.x, p.t), p.t - self.g(theta, p.t)))
    }

    /// Solve `t - g(phi_t^{-1}(x'), t) = t'` on `[t', t' + 1]` by bisection.
    /// The left side is strictly increasing: where `phi_t` depends on `t` the
    /// drop is identically 1, and elsewhere `|dg/dt| <= pi/8 < 1`.
    fn inverse(&self, p: LiftPoint) -> Result<LiftPoint> {
        let t_img = p.t;
        // g == 1 whenever the preimage height lies outside (-14, -6) u (6, 14).
        if t_img >= 14.0 || t_img + 1.0 <= -14.0 || (t_img >= -6.0 && t_img + 1.0 <= 6.0) {
            let t = t_img + 1.0;
            return Ok(LiftPoint::new(self.phi_inverse(p.x, t)?, t));
        }
        let residual = |t: f64| -> Result<f64> {
            let x = self.phi_inverse(p.x, t)?;
            let (_, theta) = split_unit(x);
            Ok(t - self.g(theta, t) - t_img)
        };
        let (mut lo, mut hi) = (t_img, t_img + 1.0);
        let (r_lo, r_hi) = (residual(lo)?, residual(hi)?);
        if r_lo > 0.0 || r_hi < 0.0 {
            return Err(Error::NoConvergence { what: "height inversion bracket" });
        }
        if r_lo == 0.0 {
            hi = lo;
        }
        let mut it = 0;
        while hi - lo > T_TOL && it < MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if residual(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            it += 1;
        }
        if hi - lo > T_TOL && hi - lo > 4.0 * f64::EPSILON * hi.abs() {
            return Err(Error::NoConvergence { what: "height inversion" });
        }
        let t = 0.5 * (lo + hi);
        Ok(LiftPoint::new(self.phi_inverse(p.x, t)?, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::DEFAULT_DENJOY_TOL;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn third_and_silver() -> PaperExample {
        PaperExample::new(
            CircleLift::make_rational_rotation(1, 3).unwrap(),
            CircleLift::make_denjoy(2f64.sqrt() - 1.0, DEFAULT_DENJOY_TOL).unwrap(),
        )
    }

    #[test]
    fn bump_profile() {
        assert_eq!(bump(10.0), 1.0);
        assert_eq!(bump(6.0), 0.0);
        assert_eq!(bump(14.0), 0.0);
        assert_eq!(bump(3.0), 0.0);
        assert!((bump(8.0) - 0.5).abs() < 1e-15);
        for k in 0..=800 {
            let t = 6.0 + k as f64 * 0.01;
            assert!(bump_slope(t).abs() <= BUMP_SLOPE_BOUND + 1e-15);
        }
    }

    #[test]
    fn degenerate_parameters_translate_down() {
        let id = CircleLift::make_rigid_rotation(0.0);
        let h = PaperExample::new(id.clone(), id);
        let y = h.eval(LiftPoint::new(0.3, 3.0)).unwrap();
        assert_eq!(y, LiftPoint::new(0.3, 2.0));
        for t in [-5.0, -1.0, 0.0, 4.5, 5.0] {
            assert_eq!(h.eval(LiftPoint::new(0.7, t)).unwrap(), LiftPoint::new(0.7, t - 1.0));
        }
    }

    #[test]
    fn inverse_far_up_is_exact_shift() {
        let h = third_and_silver();
        let p = h.inverse(LiftPoint::new(0.2, 20.0)).unwrap();
        assert_eq!(p.t, 21.0);
        assert!((p.x - (0.2 - 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn roundtrip_on_random_points() {
        let h = third_and_silver();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let p = LiftPoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-20.0..20.0));
            let back = h.inverse(h.eval(p).unwrap()).unwrap();
            worst = worst.max(back.sup_dist(p));
        }
        assert!(worst < 1e-9, "worst roundtrip error {worst}");
    }

    #[test]
    fn jacobian_is_positive() {
        let h = PaperExample::new(
            CircleLift::make_rational_rotation(1, 3).unwrap(),
            CircleLift::make_rational_rotation(2, 5).unwrap(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = 1e-6;
        for _ in 0..2_000 {
            let p = LiftPoint::new(rng.gen_range(0.0..1.0), rng.gen_range(-16.0..16.0));
            let f = |x: f64, t: f64| h.eval(LiftPoint::new(x, t)).unwrap();
            let (a, b) = (f(p.x + s, p.t), f(p.x - s, p.t));
            let (c, d) = (f(p.x, p.t + s), f(p.x, p.t - s));
            let jxx = (a.x - b.x) / (2.0 * s);
            let jtx = (a.t - b.t) / (2.0 * s);
            let jxt = (c.x - d.x) / (2.0 * s);
            let jtt = (c.t - d.t) / (2.0 * s);
            assert!(jxx * jtt - jxt * jtx > 0.0, "at {p:?}");
        }
    }
}
