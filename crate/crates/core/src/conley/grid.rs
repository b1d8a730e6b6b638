use serde::{Deserialize, Serialize};

use crate::annulus::{LiftPoint, Rect};
use crate::error::{Error, Result};

/// Points this close outside the window still belong to the boundary boxes.
const EDGE_SLACK: f64 = 1e-12;
pub const MAX_DEPTH: u32 = 14;

/// A `2^d x 2^d` tiling of an annulus window. The window is given in lift
/// coordinates with angular extent at most 1; at extent exactly 1 it wraps.
/// Box `b` sits at column `b % side`, row `b / side`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    window: Rect,
    depth: u32,
}

impl Grid {
    pub fn new(window: Rect, depth: u32) -> Result<Self> {
        let finite = [window.x_lo, window.x_hi, window.t_lo, window.t_hi].iter().all(|v| v.is_finite());
        if !finite || !(window.x_hi > window.x_lo) || !(window.t_hi > window.t_lo) {
            return Err(Error::invalid(format!("degenerate window {window:?}")));
        }
        if window.width() > 1.0 + EDGE_SLACK {
            return Err(Error::invalid("window angular extent exceeds one turn"));
        }
        if depth > MAX_DEPTH {
            return Err(Error::invalid(format!("grid depth {depth} exceeds {MAX_DEPTH}")));
        }
        Ok(Grid { window, depth })
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn side(&self) -> usize {
        1 << self.depth
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_cyclic(&self) -> bool {
        (self.window.width() - 1.0).abs() <= EDGE_SLACK
    }

    pub fn box_width(&self) -> f64 {
        self.window.width() / self.side() as f64
    }

    pub fn box_height(&self) -> f64 {
        self.window.height() / self.side() as f64
    }

    pub fn box_diameter(&self) -> f64 {
        self.box_width().hypot(self.box_height())
    }

    pub fn index(&self, ix: usize, it: usize) -> usize {
        it * self.side() + ix
    }

    pub fn coords(&self, b: usize) -> (usize, usize) {
        (b % self.side(), b / self.side())
    }

    pub fn rect(&self, b: usize) -> Rect {
        let (ix, it) = self.coords(b);
        let (bw, bh) = (self.box_width(), self.box_height());
        let x = self.window.x_lo + ix as f64 * bw;
        let t = self.window.t_lo + it as f64 * bh;
        Rect::new(x, x + bw, t, t + bh)
    }

    pub fn center(&self, b: usize) -> LiftPoint {
        self.rect(b).center()
    }

    /// Angular offset of `x` from the window's left edge, reduced mod 1.
    fn angular_offset(&self, x: f64) -> Option<f64> {
        let w = self.window.width();
        let mut u = (x - self.window.x_lo).rem_euclid(1.0);
        if u > 1.0 - EDGE_SLACK {
            u = 0.0;
        }
        if u > w + EDGE_SLACK {
            None
        } else {
            Some(u.min(w))
        }
    }

    /// The box containing the projection of `p`, if it lies in the window.
    pub fn box_of(&self, p: LiftPoint) -> Option<usize> {
        let u = self.angular_offset(p.x)?;
        let v = p.t - self.window.t_lo;
        if !(v >= -EDGE_SLACK && v <= self.window.height() + EDGE_SLACK) {
            return None;
        }
        let n = self.side();
        let ix = ((u / self.box_width()) as usize).min(n - 1);
        let it = ((v.max(0.0) / self.box_height()) as usize).min(n - 1);
        Some(self.index(ix, it))
    }

    /// Whether the projection of `r` lies inside the window.
    pub fn covers(&self, r: &Rect) -> bool {
        let w = self.window;
        if r.t_lo < w.t_lo - EDGE_SLACK || r.t_hi > w.t_hi + EDGE_SLACK {
            return false;
        }
        if self.is_cyclic() {
            return true;
        }
        match self.angular_offset(r.x_lo) {
            Some(u) => u + r.width() <= w.width() + EDGE_SLACK,
            None => false,
        }
    }

    /// Visit every box whose projection meets the projection of `r`. The
    /// callback also receives the box rectangle translated into the deck
    /// sheet where it meets `r`.
    pub fn for_each_box_meeting(&self, r: &Rect, mut f: impl FnMut(usize, Rect)) {
        let w = self.window;
        let (bw, bh) = (self.box_width(), self.box_height());
        let n = self.side();
        let t_lo = r.t_lo.max(w.t_lo);
        let t_hi = r.t_hi.min(w.t_hi);
        if t_lo > t_hi {
            return;
        }
        let row_lo = (((t_lo - w.t_lo) / bh) as usize).min(n - 1);
        let row_hi = (((t_hi - w.t_lo) / bh) as usize).min(n - 1);
        let mut seen_cols = vec![];
        let k_lo = (r.x_lo - w.x_hi).floor() as i64;
        let k_hi = (r.x_hi - w.x_lo).floor() as i64;
        for k in k_lo..=k_hi.min(k_lo + 3) {
            let base = w.x_lo + k as f64;
            let a = r.x_lo.max(base);
            let b = r.x_hi.min(base + w.width());
            if a > b {
                continue;
            }
            let c_lo = (((a - base) / bw) as usize).min(n - 1);
            let c_hi = (((b - base) / bw) as usize).min(n - 1);
            for ix in c_lo..=c_hi {
                if seen_cols.contains(&ix) {
                    continue;
                }
                seen_cols.push(ix);
                let x = base + ix as f64 * bw;
                for it in row_lo..=row_hi {
                    let t = w.t_lo + it as f64 * bh;
                    f(self.index(ix, it), Rect::new(x, x + bw, t, t + bh));
                }
            }
        }
    }

    /// The four boxes of the grid one level finer that tile `b`.
    pub fn children(&self, b: usize) -> [usize; 4] {
        let (ix, it) = self.coords(b);
        let m = 2 * self.side();
        let (cx, ct) = (2 * ix, 2 * it);
        [ct * m + cx, ct * m + cx + 1, (ct + 1) * m + cx, (ct + 1) * m + cx + 1]
    }

    pub fn refine(&self) -> Result<Grid> {
        Grid::new(self.window, self.depth + 1)
    }

    /// The eight surrounding boxes (fewer at the window edge; columns wrap
    /// on a cyclic window).
    pub fn neighbors(&self, b: usize) -> Vec<usize> {
        let n = self.side() as i64;
        let (ix, it) = self.coords(b);
        let mut out = Vec::with_capacity(8);
        for dt in -1..=1i64 {
            for dx in -1..=1i64 {
                if dx == 0 && dt == 0 {
                    continue;
                }
                let t = it as i64 + dt;
                let mut x = ix as i64 + dx;
                if t < 0 || t >= n {
                    continue;
                }
                if self.is_cyclic() {
                    x = x.rem_euclid(n);
                } else if x < 0 || x >= n {
                    continue;
                }
                let nb = self.index(x as usize, t as usize);
                if nb != b && !out.contains(&nb) {
                    out.push(nb);
                }
            }
        }
        out
    }
}

/// Euclidean distance from `p` to the rectangle `r` (zero inside).
pub fn point_rect_distance(p: LiftPoint, r: &Rect) -> f64 {
    let dx = (r.x_lo - p.x).max(p.x - r.x_hi).max(0.0);
    let dt = (r.t_lo - p.t).max(p.t - r.t_hi).max(0.0);
    dx.hypot(dt)
}

/// Euclidean distance between two rectangles.
pub fn rect_distance(a: &Rect, b: &Rect) -> f64 {
    let dx = (a.x_lo - b.x_hi).max(b.x_lo - a.x_hi).max(0.0);
    let dt = (a.t_lo - b.t_hi).max(b.t_lo - a.t_hi).max(0.0);
    dx.hypot(dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_of_center_roundtrip() {
        for window in [Rect::new(0.0, 0.25, -0.25, 0.0), Rect::new(-0.5, 0.5, 3.0, 7.0)] {
            let g = Grid::new(window, 5).unwrap();
            for b in 0..g.len() {
                assert_eq!(g.box_of(g.center(b)), Some(b));
                assert_eq!(g.box_of(g.center(b).deck(3)), Some(b));
            }
        }
    }

    #[test]
    fn boxes_tile_the_window() {
        let g = Grid::new(Rect::new(0.1, 0.6, 0.0, 2.0), 3).unwrap();
        let area: f64 = (0..g.len()).map(|b| g.rect(b).width() * g.rect(b).height()).sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert_eq!(g.rect(g.len() - 1).x_hi, 0.6);
        assert_eq!(g.box_of(LiftPoint::new(0.6, 2.0)), Some(g.len() - 1));
        assert_eq!(g.box_of(LiftPoint::new(0.7, 1.0)), None);
        assert_eq!(g.box_of(LiftPoint::new(0.3, 2.5)), None);
    }

    #[test]
    fn cyclic_meeting_wraps() {
        let g = Grid::new(Rect::new(0.0, 1.0, 0.0, 1.0), 2).unwrap();
        let mut hit = vec![];
        g.for_each_box_meeting(&Rect::new(0.9, 1.1, 0.1, 0.2), |b, r| hit.push((b, r.x_lo)));
        hit.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(hit, vec![(0, 1.0), (3, 0.75)]);
        assert_eq!(g.neighbors(0).len(), 5);
    }

    #[test]
    fn children_tile_parent() {
        let g = Grid::new(Rect::new(0.0, 0.25, -0.25, 0.0), 3).unwrap();
        let f = g.refine().unwrap();
        for b in 0..g.len() {
            let area: f64 = g.children(b).iter().map(|&c| {
                let r = f.rect(c);
                assert!(g.rect(b).contains(r.center()));
                r.width() * r.height()
            }).sum();
            let r = g.rect(b);
            assert!((area - r.width() * r.height()).abs() < 1e-15);
        }
    }
}
