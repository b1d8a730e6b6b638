use serde::Serialize;

use super::digraph::BoxDigraph;

/// One strongly connected component of the box digraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainClass {
    /// Position in topological order (edges only go from lower to higher ids).
    pub id: usize,
    /// Digraph nodes, ascending.
    pub nodes: Vec<usize>,
    /// Has an internal edge or a self-loop.
    pub recurrent: bool,
}

/// The condensation of a box digraph.
#[derive(Debug, Clone)]
pub struct ChainClasses {
    classes: Vec<ChainClass>,
    class_of: Vec<u32>,
}

impl ChainClasses {
    pub fn classes(&self) -> &[ChainClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, node: usize) -> usize {
        self.class_of[node] as usize
    }

    pub fn get(&self, id: usize) -> &ChainClass {
        &self.classes[id]
    }

    pub fn recurrent(&self) -> impl Iterator<Item = &ChainClass> {
        self.classes.iter().filter(|c| c.recurrent)
    }

    /// The recurrent class with the most boxes.
    pub fn largest_recurrent(&self) -> Option<&ChainClass> {
        self.recurrent().max_by_key(|c| (c.nodes.len(), std::cmp::Reverse(c.id)))
    }

    pub fn is_recurrent_node(&self, node: usize) -> bool {
        self.classes[self.class_of(node)].recurrent
    }
}

/// Strongly connected components of the box nodes (the exit node is left
/// out), numbered in topological order.
pub fn chain_classes(dg: &BoxDigraph) -> ChainClasses {
    let n = dg.node_count();
    let comp = tarjan(n, |v| dg.successors(v).iter().map(|&w| w as usize).filter(move |&w| w < n));
    let count = comp.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    // Tarjan closes sinks first; reverse for topological order.
    let class_of: Vec<u32> = comp.iter().map(|&c| (count - 1 - c as usize) as u32).collect();
    let mut classes: Vec<ChainClass> =
        (0..count).map(|id| ChainClass { id, nodes: Vec::new(), recurrent: false }).collect();
    for (v, &c) in class_of.iter().enumerate() {
        classes[c as usize].nodes.push(v);
    }
    for c in classes.iter_mut() {
        c.recurrent = c.nodes.len() > 1 || dg.has_edge(c.nodes[0], c.nodes[0]);
    }
    ChainClasses { classes, class_of }
}

/// Iterative Tarjan. Returns the component of each node, numbered in the
/// order components are completed.
pub(crate) fn tarjan<I>(n: usize, succ: impl Fn(usize) -> I) -> Vec<u32>
where
    I: Iterator<Item = usize>,
{
    const UNSEEN: u32 = u32::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0u32;
    let mut next_comp = 0u32;
    let mut call: Vec<(usize, I)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, succ(root)));
        while let Some((v, it)) = call.last_mut() {
            let v = *v;
            match it.next() {
                Some(w) if index[w] == UNSEEN => {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, succ(w)));
                }
                Some(w) => {
                    if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                }
                None => {
                    call.pop();
                    if let Some((parent, _)) = call.last() {
                        low[*parent] = low[*parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            comp[w] = next_comp;
                            if w == v {
                                break;
                            }
                        }
                        next_comp += 1;
                    }
                }
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::Rect;
    use crate::conley::Grid;

    fn toy(edges: &[(usize, usize)]) -> BoxDigraph {
        let grid = Grid::new(Rect::new(0.0, 1.0, 0.0, 1.0), 2).unwrap();
        BoxDigraph::from_edges(grid, 0.1, edges.iter().map(|&(u, v)| (u, Some(v), 0.0, 0.0)))
    }

    fn reaches(dg: &BoxDigraph, from: usize) -> Vec<bool> {
        let mut seen = vec![false; dg.node_count()];
        let mut todo = vec![from];
        seen[from] = true;
        while let Some(v) = todo.pop() {
            for &w in dg.successors(v) {
                let w = w as usize;
                if w < seen.len() && !seen[w] {
                    seen[w] = true;
                    todo.push(w);
                }
            }
        }
        seen
    }

    #[test]
    fn two_cycle_is_one_recurrent_class() {
        let cc = chain_classes(&toy(&[(3, 5), (5, 3)]));
        let rec: Vec<_> = cc.recurrent().collect();
        assert_eq!(rec.len(), 1);
        assert_eq!(rec[0].nodes, vec![3, 5]);
    }

    #[test]
    fn dag_has_no_recurrent_class() {
        let cc = chain_classes(&toy(&[(0, 1), (1, 2), (0, 2), (2, 7)]));
        assert_eq!(cc.recurrent().count(), 0);
        assert_eq!(cc.len(), 16);
    }

    #[test]
    fn classes_are_topologically_sorted_and_match_reachability() {
        let edges = [(0, 1), (1, 0), (1, 2), (2, 3), (3, 4), (4, 2), (5, 5), (5, 0), (6, 4), (9, 10), (10, 9)];
        let dg = toy(&edges);
        let cc = chain_classes(&dg);
        for (u, v, _, _) in dg.edges() {
            assert!(cc.class_of(u) <= cc.class_of(v));
        }
        let reach: Vec<_> = (0..16).map(|v| reaches(&dg, v)).collect();
        for u in 0..16 {
            for v in 0..16 {
                let same = cc.class_of(u) == cc.class_of(v);
                assert_eq!(same, reach[u][v] && reach[v][u], "{u} {v}");
            }
        }
        assert!(cc.is_recurrent_node(5));
        assert!(!cc.is_recurrent_node(6));
        assert_eq!(cc.recurrent().count(), 4);
    }

    #[test]
    fn long_path_does_not_overflow() {
        let n = 200_000;
        let comp = tarjan(n, |v| (v + 1 < n).then_some(v + 1).into_iter());
        assert_eq!(comp[n - 1], 0);
        assert_eq!(comp[0], (n - 1) as u32);
    }
}
