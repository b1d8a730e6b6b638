//! Chain recurrence at grid resolution.
//!
//! A map is discretised to a [`BoxDigraph`] whose edges are the one-step
//! `eps`-chain moves between boxes. Its strongly connected components are the
//! grid chain classes; the condensation carries a complete Lyapunov function
//! and the lattice of attractors.

mod attractors;
mod digraph;
mod grid;
mod lyapunov;
mod scc;

pub use attractors::{attractor_pairs, AttractorLattice, AttractorPair, DOWNSET_CAP};
pub use digraph::{
    box_samples, default_eps, transition_graph, transition_graph_with, BoxDigraph, GraphOptions, DEFAULT_SEED,
    RANDOM_SAMPLES,
};
pub use grid::{point_rect_distance, rect_distance, Grid, MAX_DEPTH};
pub use lyapunov::{lyapunov, CantorValue, GridLyapunov, Plateau};
pub use scc::{chain_classes, ChainClass, ChainClasses};

use crate::annulus::LiftMap;
use crate::error::{Error, Result};

/// Grid boxes at `depth` that descend from recurrent boxes of `dg`, plus a
/// margin of one fine box around them.
pub fn refined_active_set(dg: &BoxDigraph, cc: &ChainClasses, depth: u32) -> Result<(Grid, Vec<usize>)> {
    let coarse = *dg.grid();
    if depth < coarse.depth() {
        return Err(Error::invalid("refinement depth below the coarse grid"));
    }
    let fine = Grid::new(coarse.window(), depth)?;
    let mut level = coarse;
    let mut boxes: Vec<usize> = (0..dg.node_count())
        .filter(|&v| cc.is_recurrent_node(v))
        .map(|v| dg.box_of_node(v))
        .collect();
    while level.depth() < depth {
        boxes = boxes.iter().flat_map(|&b| level.children(b)).collect();
        level = level.refine()?;
    }
    let mut active = vec![false; fine.len()];
    for &b in &boxes {
        active[b] = true;
        for nb in fine.neighbors(b) {
            active[nb] = true;
        }
    }
    Ok((fine, (0..fine.len()).filter(|&b| active[b]).collect()))
}

/// Build the graph at `coarse_depth` on every box, then repeatedly refine
/// around its recurrent boxes up to `depth`. Returns the final graph and its
/// classes; `eps` at each level is `eps_factor` box diameters.
pub fn subdivision_graph<M: LiftMap + ?Sized>(
    map: &M,
    grid: &Grid,
    coarse_depth: u32,
    eps_factor: f64,
    seed: u64,
) -> Result<(BoxDigraph, ChainClasses)> {
    let depth = grid.depth();
    let start = Grid::new(grid.window(), coarse_depth.min(depth))?;
    let opts = GraphOptions::new(eps_factor * start.box_diameter()).with_seed(seed);
    let mut dg = transition_graph_with(map, &start, &opts, None)?;
    let mut cc = chain_classes(&dg);
    for d in start.depth() + 1..=depth {
        let (fine, active) = refined_active_set(&dg, &cc, d)?;
        let opts = GraphOptions::new(eps_factor * fine.box_diameter()).with_seed(seed);
        dg = transition_graph_with(map, &fine, &opts, Some(&active))?;
        cc = chain_classes(&dg);
    }
    Ok((dg, cc))
}
