use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::grid::{point_rect_distance, rect_distance, Grid};
use crate::annulus::{LiftMap, LiftPoint, Rect};
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const RANDOM_SAMPLES: usize = 8;
const INACTIVE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphOptions {
    /// Dilation radius of sampled images.
    pub eps: f64,
    pub seed: u64,
    /// Also cover the map's own image enclosure of each box.
    pub enclosure: bool,
}

impl GraphOptions {
    pub fn new(eps: f64) -> Self {
        GraphOptions { eps, seed: DEFAULT_SEED, enclosure: true }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Twice the box diameter.
pub fn default_eps(grid: &Grid) -> f64 {
    2.0 * grid.box_diameter()
}

/// Corners, center and `RANDOM_SAMPLES` interior points of box `b`. The
/// random points depend only on `(seed, b)`.
pub fn box_samples(grid: &Grid, b: usize, seed: u64) -> Vec<LiftPoint> {
    let r = grid.rect(b);
    let mut out = vec![
        LiftPoint::new(r.x_lo, r.t_lo),
        LiftPoint::new(r.x_hi, r.t_lo),
        LiftPoint::new(r.x_lo, r.t_hi),
        LiftPoint::new(r.x_hi, r.t_hi),
        r.center(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    for _ in 0..RANDOM_SAMPLES {
        out.push(LiftPoint::new(rng.gen_range(r.x_lo..r.x_hi), rng.gen_range(r.t_lo..r.t_hi)));
    }
    out
}

/// Outer approximation of a map on a grid: node `i` is an active box, and
/// the extra node `exit()` absorbs everything that leaves the window, the
/// domain or the active set. Every edge carries the range `[lo, hi]` of
/// angular displacements `Pi_1(h~(z)) - Pi_1(z)` over the samples `z` that
/// produced it, in lift coordinates.
#[derive(Debug, Clone)]
pub struct BoxDigraph {
    grid: Grid,
    eps: f64,
    seed: u64,
    boxes: Vec<u32>,
    node_of: Vec<u32>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    w_lo: Vec<f64>,
    w_hi: Vec<f64>,
}

/// Outgoing edges `(target, lo, hi)` of one node before assembly.
type EdgeList = Vec<(u32, f64, f64)>;

impl BoxDigraph {
    /// Assemble a digraph on all boxes of `grid` from explicit edges
    /// `(u, v, lo, hi)`; `v = None` is the exit node.
    pub fn from_edges(grid: Grid, eps: f64, edges: impl IntoIterator<Item = (usize, Option<usize>, f64, f64)>) -> Self {
        let n = grid.len();
        let mut lists: Vec<EdgeList> = vec![Vec::new(); n];
        for (u, v, lo, hi) in edges {
            let v = v.map_or(n as u32, |v| v as u32);
            lists[u].push((v, lo, hi));
        }
        let boxes = (0..n as u32).collect();
        let node_of = (0..n as u32).collect();
        Self::assemble(grid, eps, 0, boxes, node_of, lists)
    }

    fn assemble(grid: Grid, eps: f64, seed: u64, boxes: Vec<u32>, node_of: Vec<u32>, lists: Vec<EdgeList>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let total: usize = lists.iter().map(Vec::len).sum();
        let (mut targets, mut w_lo, mut w_hi) =
            (Vec::with_capacity(total), Vec::with_capacity(total), Vec::with_capacity(total));
        offsets.push(0);
        for mut list in lists {
            list.sort_by(|a, b| a.0.cmp(&b.0));
            let mut i = 0;
            while i < list.len() {
                let (v, mut lo, mut hi) = list[i];
                i += 1;
                while i < list.len() && list[i].0 == v {
                    lo = lo.min(list[i].1);
                    hi = hi.max(list[i].2);
                    i += 1;
                }
                targets.push(v);
                w_lo.push(lo);
                w_hi.push(hi);
            }
            offsets.push(targets.len());
        }
        BoxDigraph { grid, eps, seed, boxes, node_of, offsets, targets, w_lo, w_hi }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of box nodes (the exit node is not counted).
    pub fn node_count(&self) -> usize {
        self.boxes.len()
    }

    pub fn exit(&self) -> usize {
        self.boxes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn is_restricted(&self) -> bool {
        self.boxes.len() < self.grid.len()
    }

    pub fn box_of_node(&self, v: usize) -> usize {
        self.boxes[v] as usize
    }

    pub fn node_of_box(&self, b: usize) -> Option<usize> {
        match self.node_of.get(b) {
            Some(&v) if v != INACTIVE => Some(v as usize),
            _ => None,
        }
    }

    pub fn node_of_point(&self, p: LiftPoint) -> Option<usize> {
        self.grid.box_of(p).and_then(|b| self.node_of_box(b))
    }

    pub fn successors(&self, v: usize) -> &[u32] {
        if v >= self.boxes.len() {
            return &[];
        }
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `(lo, hi)` weight slices parallel to [`Self::successors`].
    pub fn weights(&self, v: usize) -> (&[f64], &[f64]) {
        if v >= self.boxes.len() {
            return (&[], &[]);
        }
        let r = self.offsets[v]..self.offsets[v + 1];
        (&self.w_lo[r.clone()], &self.w_hi[r])
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.successors(u).binary_search(&(v as u32)).is_ok()
    }

    /// All edges `(u, v, lo, hi)`, including those into the exit node.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.boxes.len()).flat_map(move |u| {
            (self.offsets[u]..self.offsets[u + 1])
                .map(move |e| (u, self.targets[e] as usize, self.w_lo[e], self.w_hi[e]))
        })
    }
}

/// Transition graph of `map` on every box of `grid`.
pub fn transition_graph<M: LiftMap + ?Sized>(map: &M, grid: &Grid, eps: f64) -> Result<BoxDigraph> {
    transition_graph_with(map, grid, &GraphOptions::new(eps), None)
}

/// Transition graph restricted to the boxes in `active` (all boxes when
/// `None`). Edges into inactive boxes are redirected to the exit node.
pub fn transition_graph_with<M: LiftMap + ?Sized>(
    map: &M,
    grid: &Grid,
    opts: &GraphOptions,
    active: Option<&[usize]>,
) -> Result<BoxDigraph> {
    if !(opts.eps > 0.0 && opts.eps.is_finite()) {
        return Err(Error::invalid("eps must be positive"));
    }
    if opts.eps >= 0.5 {
        return Err(Error::invalid("eps must be below 1/2"));
    }
    let (boxes, node_of) = match active {
        None => ((0..grid.len() as u32).collect::<Vec<_>>(), (0..grid.len() as u32).collect::<Vec<_>>()),
        Some(list) => {
            let mut boxes: Vec<u32> = list.iter().map(|&b| b as u32).collect();
            boxes.sort_unstable();
            boxes.dedup();
            if boxes.last().is_some_and(|&b| b as usize >= grid.len()) {
                return Err(Error::invalid("active box outside the grid"));
            }
            let mut node_of = vec![INACTIVE; grid.len()];
            for (i, &b) in boxes.iter().enumerate() {
                node_of[b as usize] = i as u32;
            }
            (boxes, node_of)
        }
    };
    let exit = boxes.len() as u32;
    let lists: Vec<EdgeList> = boxes
        .par_iter()
        .map(|&b| box_edges(map, grid, opts, b as usize, &node_of, exit))
        .collect();
    Ok(BoxDigraph::assemble(*grid, opts.eps, opts.seed, boxes, node_of, lists))
}

fn box_edges<M: LiftMap + ?Sized>(
    map: &M,
    grid: &Grid,
    opts: &GraphOptions,
    b: usize,
    node_of: &[u32],
    exit: u32,
) -> EdgeList {
    let eps = opts.eps;
    let target = |bx: usize| match node_of[bx] {
        INACTIVE => exit,
        v => v,
    };
    let mut out: EdgeList = Vec::new();
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for z in box_samples(grid, b, opts.seed) {
        let y = match map.eval(z) {
            Ok(y) => y,
            Err(_) => {
                out.push((exit, 0.0, 0.0));
                continue;
            }
        };
        let w = y.x - z.x;
        range = (range.0.min(w), range.1.max(w));
        if grid.box_of(y).is_none() {
            out.push((exit, w, w));
            continue;
        }
        let ball = Rect::new(y.x - eps, y.x + eps, y.t - eps, y.t + eps);
        grid.for_each_box_meeting(&ball, |bx, r| {
            if point_rect_distance(y, &r) <= eps {
                out.push((target(bx), w, w));
            }
        });
    }
    if opts.enclosure {
        let src = grid.rect(b);
        for img in map.image_enclosure(&src) {
            // Displacement bound valid for every point of the box.
            let bound = (img.x_lo - src.x_hi, img.x_hi - src.x_lo);
            let (lo, hi) = if range.0 <= range.1 { range } else { bound };
            if !grid.covers(&img) {
                out.push((exit, lo, hi));
            }
            grid.for_each_box_meeting(&img.dilate(eps), |bx, r| {
                if rect_distance(&img, &r) <= eps {
                    out.push((target(bx), lo, hi));
                }
            });
        }
    }
    // Exit edges carry no rotation information.
    for e in out.iter_mut().filter(|e| e.0 == exit) {
        e.1 = 0.0;
        e.2 = 0.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::HorseshoeCore;
    use crate::mapspec::{build_horseshoe_core, rigid_translation};

    #[test]
    fn coarse_graph_matches_brute_force() {
        let h = HorseshoeCore;
        let grid = Grid::new(Rect::new(0.0, 0.25, -0.25, 0.0), 2).unwrap();
        let eps = default_eps(&grid);
        let opts = GraphOptions { eps, seed: 3, enclosure: false };
        let dg = transition_graph_with(&h, &grid, &opts, None).unwrap();
        assert_eq!(dg.node_count(), 16);
        for u in 0..16 {
            let mut expect = vec![];
            for z in box_samples(&grid, u, 3) {
                match h.eval(z) {
                    Ok(y) if grid.box_of(y).is_some() => {
                        let y = LiftPoint::new(y.x - y.x.floor(), y.t);
                        for v in 0..16 {
                            if point_rect_distance(y, &grid.rect(v)) <= eps {
                                expect.push(v as u32);
                            }
                        }
                    }
                    _ => expect.push(16),
                }
            }
            expect.sort_unstable();
            expect.dedup();
            assert_eq!(dg.successors(u), &expect[..], "box {u}");
        }
    }

    #[test]
    fn horseshoe_graph_is_sound_on_random_points() {
        let spec = build_horseshoe_core();
        let grid = Grid::new(Rect::new(0.0, 0.25, -0.25, 0.0), 5).unwrap();
        let dg = transition_graph(&spec, &grid, default_eps(&grid)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut checked = 0;
        for u in 0..grid.len() {
            let r = grid.rect(u);
            for _ in 0..100 {
                let z = LiftPoint::new(rng.gen_range(r.x_lo..r.x_hi), rng.gen_range(r.t_lo..r.t_hi));
                let Ok(y) = spec.eval(z) else { continue };
                let v = grid.box_of(y).map_or(dg.exit(), |b| dg.node_of_box(b).unwrap());
                assert!(dg.has_edge(u, v), "box {u} misses image box {v} of {z:?}");
                checked += 1;
            }
        }
        assert!(checked > 10_000);
    }

    #[test]
    fn weights_are_lift_displacements() {
        let m = rigid_translation(0.3, 0.0);
        let grid = Grid::new(Rect::new(0.0, 1.0, 0.0, 1.0), 3).unwrap();
        let dg = transition_graph(&m, &grid, default_eps(&grid)).unwrap();
        for (u, v, lo, hi) in dg.edges() {
            assert_ne!(v, dg.exit(), "from {u}");
            assert!((lo - 0.3).abs() < 1e-12 && (hi - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn restricted_graph_redirects_to_exit() {
        let m = rigid_translation(0.0, 0.0);
        let grid = Grid::new(Rect::new(0.0, 1.0, 0.0, 1.0), 3).unwrap();
        let dg = transition_graph_with(&m, &grid, &GraphOptions::new(0.01), Some(&[0, 27])).unwrap();
        assert_eq!(dg.node_count(), 2);
        assert_eq!(dg.successors(0), &[0, 2]);
        assert_eq!(dg.successors(1), &[1, 2]);
        assert_eq!(dg.box_of_node(1), 27);
    }

    #[test]
    fn construction_is_deterministic() {
        let spec = build_horseshoe_core();
        let grid = Grid::new(Rect::new(0.0, 0.25, -0.25, 0.0), 4).unwrap();
        let a = transition_graph(&spec, &grid, default_eps(&grid)).unwrap();
        let b = transition_graph(&spec, &grid, default_eps(&grid)).unwrap();
        assert!(a.edges().eq(b.edges()));
    }
}
