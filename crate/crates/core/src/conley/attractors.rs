use serde::Serialize;

use super::digraph::BoxDigraph;
use super::scc::ChainClasses;

pub const DOWNSET_CAP: usize = 1 << 12;

/// A grid attractor and its dual repellor, as sets of digraph nodes.
///
/// `downset` lists the recurrent classes inside the attractor; it is closed
/// under reachability. The attractor consists of the boxes lying on a path
/// from the downset back into it, so each of its boxes has a successor and
/// a predecessor inside it; the dual repellor is the same construction for
/// the complementary recurrent classes.
#[derive(Debug, Clone, Serialize)]
pub struct AttractorPair {
    pub downset: Vec<usize>,
    pub attractor: Vec<usize>,
    pub dual_repellor: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractorLattice {
    /// Pairs with a nonempty attractor.
    pub pairs: Vec<AttractorPair>,
    /// False when more than `DOWNSET_CAP` downsets exist; `pairs` is then a
    /// prefix of the enumeration.
    pub complete: bool,
    /// Whether the recurrent nodes are exactly the intersection of all
    /// `A u A*` (the empty attractor included). `None` if incomplete.
    pub identity_holds: Option<bool>,
}

struct BitSet {
    words: usize,
    bits: Vec<u64>,
}

impl BitSet {
    fn new(rows: usize, width: usize) -> Self {
        let words = width.div_ceil(64).max(1);
        BitSet { words, bits: vec![0; rows * words] }
    }
    fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words..(r + 1) * self.words]
    }
    fn set(&mut self, r: usize, i: usize) {
        self.bits[r * self.words + i / 64] |= 1 << (i % 64);
    }
    fn or_into(&mut self, dst: usize, src: usize) {
        let w = self.words;
        for k in 0..w {
            let v = self.bits[src * w + k];
            self.bits[dst * w + k] |= v;
        }
    }
}

fn meets(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

fn meets_complement(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & !y != 0)
}

/// Enumerate attractor / dual repellor pairs from downsets of the recurrent
/// classes, capped at `DOWNSET_CAP`.
pub fn attractor_pairs(dg: &BoxDigraph, cc: &ChainClasses) -> AttractorLattice {
    let classes = cc.classes();
    let nc = classes.len();
    let rec: Vec<usize> = cc.recurrent().map(|c| c.id).collect();
    let m = rec.len();
    let mut rank = vec![usize::MAX; nc];
    for (i, &c) in rec.iter().enumerate() {
        rank[c] = i;
    }
    // Condensation edges.
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nc];
    for (u, v, _, _) in dg.edges() {
        if v == dg.exit() {
            continue;
        }
        let (a, b) = (cc.class_of(u), cc.class_of(v));
        if a != b {
            succ[a].push(b);
        }
    }
    for s in succ.iter_mut() {
        s.sort_unstable();
        s.dedup();
    }
    // reach[c]: recurrent classes reachable from c; anc[c]: those reaching c.
    let mut reach = BitSet::new(nc, m);
    let mut anc = BitSet::new(nc, m);
    for c in (0..nc).rev() {
        if rank[c] != usize::MAX {
            reach.set(c, rank[c]);
        }
        for &d in &succ[c] {
            reach.or_into(c, d);
        }
    }
    for c in 0..nc {
        if rank[c] != usize::MAX {
            anc.set(c, rank[c]);
        }
        for &d in &succ[c] {
            anc.or_into(d, c);
        }
    }
    let downsets = enumerate_downsets(&rec, &reach, DOWNSET_CAP);
    let complete = downsets.len() <= DOWNSET_CAP;
    let mut covered = vec![true; nc];
    let mut pairs = Vec::new();
    for d in downsets.iter().take(DOWNSET_CAP) {
        let mut a_classes = Vec::new();
        let mut r_classes = Vec::new();
        for c in 0..nc {
            let in_a = meets(anc.row(c), d) && meets(reach.row(c), d);
            let in_r = meets_complement(anc.row(c), d) && meets_complement(reach.row(c), d);
            debug_assert!(!(in_a && in_r));
            if in_a {
                a_classes.push(c);
            }
            if in_r {
                r_classes.push(c);
            }
            if !in_a && !in_r {
                covered[c] = false;
            }
        }
        if a_classes.is_empty() {
            continue;
        }
        let expand = |cs: &[usize]| {
            let mut nodes: Vec<usize> = cs.iter().flat_map(|&c| classes[c].nodes.iter().copied()).collect();
            nodes.sort_unstable();
            nodes
        };
        let downset = (0..m).filter(|&i| d[i / 64] >> (i % 64) & 1 == 1).map(|i| rec[i]).collect();
        pairs.push(AttractorPair { downset, attractor: expand(&a_classes), dual_repellor: expand(&r_classes) });
    }
    let identity_holds = complete.then(|| (0..nc).all(|c| covered[c] == classes[c].recurrent));
    AttractorLattice { pairs, complete, identity_holds }
}

/// Downsets of the recurrent classes (sets closed under reachability), as
/// bitsets over recurrent ranks. Stops after `cap + 1` sets.
fn enumerate_downsets(rec: &[usize], reach: &BitSet, cap: usize) -> Vec<Vec<u64>> {
    let m = rec.len();
    let words = reach.words;
    let mut out = Vec::new();
    let mut current = vec![0u64; words];
    // Decide classes from the sink end so that descendants come first.
    fn go(
        i: usize,
        rec: &[usize],
        reach: &BitSet,
        current: &mut Vec<u64>,
        out: &mut Vec<Vec<u64>>,
        cap: usize,
    ) {
        if out.len() > cap {
            return;
        }
        if i == 0 {
            out.push(current.clone());
            return;
        }
        let k = i - 1;
        go(k, rec, reach, current, out, cap);
        let row = reach.row(rec[k]);
        let closed = row.iter().zip(current.iter()).enumerate().all(|(w, (r, c))| {
            let own = if w == k / 64 { 1u64 << (k % 64) } else { 0 };
            (r & !own) & !c == 0
        });
        if closed {
            current[k / 64] |= 1 << (k % 64);
            go(k, rec, reach, current, out, cap);
            current[k / 64] &= !(1 << (k % 64));
        }
    }
    go(m, rec, reach, &mut current, &mut out, cap);
    out
}
