use serde::Serialize;

use super::digraph::BoxDigraph;
use super::scc::ChainClasses;

/// A point of the middle-thirds Cantor set with a finite ternary expansion:
/// `numerator / 3^digits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CantorValue {
    pub numerator: u128,
    pub digits: u32,
}

impl CantorValue {
    /// The point with ternary digits `2 * bits` (most significant first).
    pub fn from_bits(bits: u64, digits: u32) -> Self {
        assert!(digits <= 64, "at most 64 ternary digits");
        let mut numerator = 0u128;
        for k in (0..digits).rev() {
            numerator = 3 * numerator + 2 * u128::from((bits >> k) & 1);
        }
        CantorValue { numerator, digits }
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / 3f64.powi(self.digits as i32)
    }

    /// Exact check that every ternary digit is 0 or 2.
    pub fn is_cantor(&self) -> bool {
        let mut n = self.numerator;
        for _ in 0..self.digits {
            if n % 3 == 1 {
                return false;
            }
            n /= 3;
        }
        n == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Plateau {
    pub class: usize,
    pub level: CantorValue,
}

/// Values in `[0, 1]` on the box nodes, strictly decreasing along every edge
/// between different classes, constant on each recurrent class.
#[derive(Debug, Clone, Serialize)]
pub struct GridLyapunov {
    pub values: Vec<f64>,
    pub plateaus: Vec<Plateau>,
}

impl GridLyapunov {
    /// Edges between different classes along which the value fails to drop
    /// (edges into the exit node are skipped).
    pub fn violations(&self, dg: &BoxDigraph, cc: &ChainClasses) -> Vec<(usize, usize)> {
        dg.edges()
            .filter(|&(u, v, _, _)| v != dg.exit() && cc.class_of(u) != cc.class_of(v))
            .filter(|&(u, v, _, _)| !(self.values[u] > self.values[v]))
            .map(|(u, v, _, _)| (u, v))
            .collect()
    }

    pub fn cross_edge_count(&self, dg: &BoxDigraph, cc: &ChainClasses) -> usize {
        dg.edges().filter(|&(u, v, _, _)| v != dg.exit() && cc.class_of(u) != cc.class_of(v)).count()
    }
}

/// Values are assigned along the topological order of the condensation. The
/// `k`-th recurrent class from the sink end gets the Cantor point whose
/// ternary digits spell `k` in binary (so consecutive plateaus are a power of
/// three apart), and transient classes are spaced evenly between the
/// plateaus around them.
pub fn lyapunov(dg: &BoxDigraph, cc: &ChainClasses) -> GridLyapunov {
    let classes = cc.classes();
    let m = cc.recurrent().count() as u64;
    let digits = (64 - m.leading_zeros()).max(1);
    // Anchor value per class position: Some for plateaus.
    let mut anchor: Vec<Option<f64>> = vec![None; classes.len()];
    let mut plateaus = Vec::new();
    let mut rank = m;
    for c in classes {
        if c.recurrent {
            let level = CantorValue::from_bits(rank, digits);
            anchor[c.id] = Some(level.value());
            plateaus.push(Plateau { class: c.id, level });
            rank -= 1;
        }
    }
    let mut class_value = vec![0.0; classes.len()];
    let mut upper = 1.0;
    let mut run_start = 0;
    for pos in 0..=classes.len() {
        let lower = if pos == classes.len() { 0.0 } else { anchor[pos].unwrap_or(f64::NAN) };
        if pos < classes.len() && anchor[pos].is_none() {
            continue;
        }
        // Transient run run_start..pos strictly between upper and lower;
        // the very first run may touch 1.
        let len = pos - run_start;
        let top_inclusive = run_start == 0;
        for (i, slot) in class_value[run_start..pos].iter_mut().enumerate() {
            let frac = if top_inclusive { i as f64 / len as f64 } else { (i + 1) as f64 / (len + 1) as f64 };
            *slot = upper - (upper - lower) * frac;
        }
        if pos < classes.len() {
            class_value[pos] = lower;
            upper = lower;
        }
        run_start = pos + 1;
    }
    let values = (0..dg.node_count()).map(|v| class_value[cc.class_of(v)]).collect();
    GridLyapunov { values, plateaus }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::Rect;
    use crate::conley::{chain_classes, Grid};

    fn toy(edges: &[(usize, usize)]) -> BoxDigraph {
        let grid = Grid::new(Rect::new(0.0, 1.0, 0.0, 1.0), 2).unwrap();
        BoxDigraph::from_edges(grid, 0.1, edges.iter().map(|&(u, v)| (u, Some(v), 0.0, 0.0)))
    }

    #[test]
    fn cantor_digits() {
        let c = CantorValue::from_bits(0b101, 3);
        assert_eq!(c.numerator, 2 * 9 + 2);
        assert!(c.is_cantor());
        assert!((c.value() - 20.0 / 27.0).abs() < 1e-15);
        assert!(!CantorValue { numerator: 1, digits: 1 }.is_cantor());
        assert!(!CantorValue { numerator: 27, digits: 2 }.is_cantor());
    }

    #[test]
    fn single_class_with_transients() {
        let dg = toy(&[(0, 1), (1, 2), (2, 2), (2, 3), (3, 4)]);
        let cc = chain_classes(&dg);
        let l = lyapunov(&dg, &cc);
        assert_eq!(l.plateaus.len(), 1);
        assert!(l.violations(&dg, &cc).is_empty());
        assert!(l.values[0] > l.values[1] && l.values[1] > l.values[2]);
        assert!(l.values[2] > l.values[3] && l.values[3] > l.values[4]);
        assert!(l.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn incomparable_classes_get_distinct_cantor_values() {
        let dg = toy(&[(0, 1), (1, 0), (2, 3), (3, 2), (4, 0), (4, 2)]);
        let cc = chain_classes(&dg);
        let l = lyapunov(&dg, &cc);
        assert_eq!(l.plateaus.len(), 2);
        assert_ne!(l.values[0], l.values[2]);
        assert_eq!(l.values[0], l.values[1]);
        assert!(l.plateaus.iter().all(|p| p.level.is_cantor()));
        assert!(l.violations(&dg, &cc).is_empty());
    }
}
