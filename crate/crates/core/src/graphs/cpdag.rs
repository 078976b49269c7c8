use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::dag::{topological_order_of, WeightedDag};
use crate::error::{Error, Result};

/// One edge of a partially directed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edge {
    Directed(usize, usize),
    /// Stored with the smaller endpoint first.
    Undirected(usize, usize),
}

/// Completed partially directed graph: compelled edges directed, reversible
/// edges undirected.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cpdag {
    p: usize,
    directed: BTreeSet<(usize, usize)>,
    undirected: BTreeSet<(usize, usize)>,
}

#[inline]
fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Cpdag {
    pub fn empty(p: usize) -> Self {
        Self { p, ..Self::default() }
    }

    /// Checks that no pair is listed twice and that the directed part is
    /// acyclic.
    pub fn from_parts(
        p: usize,
        directed: impl IntoIterator<Item = (usize, usize)>,
        undirected: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut g = Self::empty(p);
        for (u, v) in directed {
            g.check_new(u, v)?;
            g.directed.insert((u, v));
        }
        for (u, v) in undirected {
            g.check_new(u, v)?;
            g.undirected.insert(key(u, v));
        }
        topological_order_of(p, g.directed.iter().copied())?;
        Ok(g)
    }

    fn check_new(&self, u: usize, v: usize) -> Result<()> {
        if u >= self.p || v >= self.p || u == v {
            return Err(Error::InvalidConfig(format!("invalid edge {u}-{v} for p = {}", self.p)));
        }
        if self.adjacent(u, v) {
            return Err(Error::InvalidConfig(format!("pair {u}-{v} listed twice")));
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn directed(&self) -> &BTreeSet<(usize, usize)> {
        &self.directed
    }

    pub fn undirected(&self) -> &BTreeSet<(usize, usize)> {
        &self.undirected
    }

    pub fn num_edges(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.directed.contains(&(u, v))
            || self.directed.contains(&(v, u))
            || self.undirected.contains(&key(u, v))
    }

    /// The edge between `u` and `v`, if any.
    pub fn edge(&self, u: usize, v: usize) -> Option<Edge> {
        if self.directed.contains(&(u, v)) {
            Some(Edge::Directed(u, v))
        } else if self.directed.contains(&(v, u)) {
            Some(Edge::Directed(v, u))
        } else if self.undirected.contains(&key(u, v)) {
            let (a, b) = key(u, v);
            Some(Edge::Undirected(a, b))
        } else {
            None
        }
    }

    /// All edges, directed ones first, each group in index order.
    pub fn edges(&self) -> Vec<Edge> {
        self.directed
            .iter()
            .map(|&(u, v)| Edge::Directed(u, v))
            .chain(self.undirected.iter().map(|&(u, v)| Edge::Undirected(u, v)))
            .collect()
    }

    /// Unordered adjacent pairs `(min, max)`.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.directed.iter().map(|&(u, v)| key(u, v)).chain(self.undirected.iter().copied()).collect()
    }
}

/// Mutable partially directed graph used while orienting edges.
///
/// `link[u·p + v]` is set when there is an edge between `u` and `v` without an
/// arrowhead at `u`; an undirected edge sets both directions, `u → v` only
/// the first.
#[derive(Debug, Clone)]
pub(crate) struct Pdag {
    p: usize,
    link: Vec<bool>,
}

impl Pdag {
    /// Undirected graph on the given skeleton.
    pub(crate) fn from_skeleton(p: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self { p, link: vec![false; p * p] };
        for (u, v) in pairs {
            g.link[u * p + v] = true;
            g.link[v * p + u] = true;
        }
        g
    }

    #[inline]
    fn l(&self, u: usize, v: usize) -> bool {
        self.link[u * self.p + v]
    }

    #[inline]
    pub(crate) fn adjacent(&self, u: usize, v: usize) -> bool {
        self.l(u, v) || self.l(v, u)
    }

    #[inline]
    pub(crate) fn is_directed(&self, u: usize, v: usize) -> bool {
        self.l(u, v) && !self.l(v, u)
    }

    #[inline]
    pub(crate) fn is_undirected(&self, u: usize, v: usize) -> bool {
        self.l(u, v) && self.l(v, u)
    }

    /// Turns the edge between `u` and `v` into `u → v`.
    pub(crate) fn orient(&mut self, u: usize, v: usize) {
        debug_assert!(self.adjacent(u, v));
        self.link[u * self.p + v] = true;
        self.link[v * self.p + u] = false;
    }

    pub(crate) fn unorient(&mut self, u: usize, v: usize) {
        self.link[u * self.p + v] = true;
        self.link[v * self.p + u] = true;
    }

    /// Orients `a → c ← b` for every listed triple. An edge claimed in both
    /// directions by different triples stays undirected.
    pub(crate) fn orient_colliders(&mut self, triples: &[(usize, usize, usize)]) {
        let mut claims: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &(a, c, b) in triples {
            claims.insert((a, c));
            claims.insert((b, c));
        }
        for &(u, v) in &claims {
            if !claims.contains(&(v, u)) && self.is_undirected(u, v) {
                self.orient(u, v);
            }
        }
    }

    /// Applies Meek's rules R1–R3 to closure. Each round collects every
    /// implied orientation from the current graph and applies them together;
    /// an edge implied in both directions in the same round is left alone.
    pub(crate) fn meek_closure(&mut self) {
        let p = self.p;
        loop {
            let mut proposals: BTreeSet<(usize, usize)> = BTreeSet::new();
            for b in 0..p {
                for c in 0..p {
                    if b != c && self.is_undirected(b, c) && self.implies(b, c) {
                        proposals.insert((b, c));
                    }
                }
            }
            let mut changed = false;
            for &(b, c) in &proposals {
                if !proposals.contains(&(c, b)) && self.is_undirected(b, c) {
                    self.orient(b, c);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Whether one of R1–R3 forces the undirected edge `b – c` to `b → c`.
    fn implies(&self, b: usize, c: usize) -> bool {
        let p = self.p;
        // R1: a → b – c with a, c non-adjacent.
        if (0..p).any(|a| a != c && self.is_directed(a, b) && !self.adjacent(a, c)) {
            return true;
        }
        // R2: b → a → c.
        if (0..p).any(|a| self.is_directed(b, a) && self.is_directed(a, c)) {
            return true;
        }
        // R3: b – a1 → c and b – a2 → c with a1, a2 non-adjacent.
        let mids: Vec<usize> = (0..p)
            .filter(|&a| a != c && self.is_undirected(b, a) && self.is_directed(a, c))
            .collect();
        for (i, &a1) in mids.iter().enumerate() {
            for &a2 in &mids[i + 1..] {
                if !self.adjacent(a1, a2) {
                    return true;
                }
            }
        }
        false
    }

    /// Directed edges lying on a directed cycle (both ends in one strongly
    /// connected component of the directed part).
    pub(crate) fn cyclic_directed_edges(&self) -> Vec<(usize, usize)> {
        let comp = self.directed_components();
        let p = self.p;
        let mut out = Vec::new();
        for u in 0..p {
            for v in 0..p {
                if u != v && self.is_directed(u, v) && comp[u] == comp[v] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Makes every directed edge on a directed cycle undirected.
    pub(crate) fn demote_cycles(&mut self) {
        for (u, v) in self.cyclic_directed_edges() {
            self.unorient(u, v);
        }
    }

    /// Strongly connected components of the directed part (iterative Tarjan).
    fn directed_components(&self) -> Vec<usize> {
        let p = self.p;
        const UNSEEN: usize = usize::MAX;
        let mut index = vec![UNSEEN; p];
        let mut low = vec![0; p];
        let mut on_stack = vec![false; p];
        let mut comp = vec![UNSEEN; p];
        let mut stack = Vec::new();
        let mut next_index = 0;
        let mut next_comp = 0;
        for root in 0..p {
            if index[root] != UNSEEN {
                continue;
            }
            // Call stack of (node, next child candidate).
            let mut calls = vec![(root, 0usize)];
            index[root] = next_index;
            low[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(top) = calls.last_mut() {
                let u = top.0;
                let mut child = None;
                while top.1 < p {
                    let v = top.1;
                    top.1 += 1;
                    if v == u || !self.is_directed(u, v) {
                        continue;
                    }
                    if index[v] == UNSEEN {
                        child = Some(v);
                        break;
                    } else if on_stack[v] {
                        low[u] = low[u].min(index[v]);
                    }
                }
                if let Some(v) = child {
                    index[v] = next_index;
                    low[v] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    calls.push((v, 0));
                    continue;
                }
                calls.pop();
                if let Some(&(parent, _)) = calls.last() {
                    low[parent] = low[parent].min(low[u]);
                }
                if low[u] == index[u] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == u {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
        comp
    }

    pub(crate) fn to_cpdag(&self) -> Cpdag {
        let p = self.p;
        let mut g = Cpdag::empty(p);
        for u in 0..p {
            for v in 0..p {
                if u == v {
                    continue;
                }
                if self.is_directed(u, v) {
                    g.directed.insert((u, v));
                } else if u < v && self.is_undirected(u, v) {
                    g.undirected.insert((u, v));
                }
            }
        }
        g
    }
}

/// Unshielded colliders `a → c ← b` of a DAG, as `(a, c, b)` with `a < b`.
pub fn v_structures(dag: &WeightedDag) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for c in 0..dag.p() {
        let ps = dag.parents(c);
        for (i, &a) in ps.iter().enumerate() {
            for &b in &ps[i + 1..] {
                if !dag.has_edge(a, b) && !dag.has_edge(b, a) {
                    out.push((a, c, b));
                }
            }
        }
    }
    out
}

/// Equivalence class of a DAG: v-structures oriented, then Meek's rules to
/// closure.
pub fn dag_to_cpdag(dag: &WeightedDag) -> Cpdag {
    let mut g = Pdag::from_skeleton(dag.p(), dag.edges());
    g.orient_colliders(&v_structures(dag));
    g.meek_closure();
    g.to_cpdag()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let chain = WeightedDag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let g = dag_to_cpdag(&chain);
        assert!(g.directed().is_empty());
        assert_eq!(g.undirected().len(), 2);

        let collider = WeightedDag::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        let g = dag_to_cpdag(&collider);
        assert_eq!(g.directed().iter().copied().collect::<Vec<_>>(), vec![(0, 2), (1, 2)]);
        assert!(g.undirected().is_empty());

        assert_eq!(dag_to_cpdag(&WeightedDag::empty(4)), Cpdag::empty(4));

        // Collider followed by a chain: R1 propagates 2 → 3.
        let g = dag_to_cpdag(&WeightedDag::from_edges(4, &[(0, 2), (1, 2), (2, 3)]).unwrap());
        assert!(g.directed().contains(&(2, 3)));
    }

    #[test]
    fn cpdag_invariants() {
        assert!(Cpdag::from_parts(3, [(0, 1)], [(1, 0)]).is_err());
        assert!(Cpdag::from_parts(3, [(0, 1), (1, 2), (2, 0)], []).is_err());
        let g = Cpdag::from_parts(3, [(0, 1)], [(2, 1)]).unwrap();
        assert_eq!(g.edge(1, 2), Some(Edge::Undirected(1, 2)));
        assert_eq!(g.edge(1, 0), Some(Edge::Directed(0, 1)));
        assert_eq!(g.edge(0, 2), None);
    }

    #[test]
    fn cycle_demotion() {
        let mut g = Pdag::from_skeleton(4, [(0, 1), (1, 2), (2, 0), (2, 3)]);
        g.orient(0, 1);
        g.orient(1, 2);
        g.orient(2, 0);
        g.orient(2, 3);
        g.demote_cycles();
        let c = g.to_cpdag();
        assert_eq!(c.directed().iter().copied().collect::<Vec<_>>(), vec![(2, 3)]);
        assert_eq!(c.undirected().len(), 3);
    }

    #[test]
    fn conflicting_colliders_stay_undirected() {
        // 0 → 1 ← 2 and 1 → 2 ← 3 disagree about 1 – 2.
        let mut g = Pdag::from_skeleton(4, [(0, 1), (1, 2), (2, 3)]);
        g.orient_colliders(&[(0, 1, 2), (1, 2, 3)]);
        assert!(g.is_undirected(1, 2));
        assert!(g.is_directed(0, 1) && g.is_directed(3, 2));
    }
}
