use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Weight magnitudes are drawn uniformly from this interval, with a random sign.
pub const WEIGHT_RANGE: (f64, f64) = (0.6, 0.9);

/// DAG over `p` nodes with a coefficient `β_kj` for every edge `k → j`.
///
/// `weights[(k, j)]` holds `β_kj`; column `j` is the coefficient vector of
/// node `j`. Parent lists are kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDag {
    parents: Vec<Vec<usize>>,
    weights: Matrix,
}

impl WeightedDag {
    /// Graph without edges.
    pub fn empty(p: usize) -> Self {
        Self { parents: vec![Vec::new(); p], weights: Matrix::zeros(p, p) }
    }

    /// Builds a DAG from `(parent, child)` pairs, with zero weights.
    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut dag = Self::empty(p);
        for &(u, v) in edges {
            if u >= p || v >= p || u == v {
                return Err(Error::InvalidConfig(format!("invalid edge {u} -> {v} for p = {p}")));
            }
            if dag.parents[v].contains(&u) {
                return Err(Error::InvalidConfig(format!("duplicate edge {u} -> {v}")));
            }
            if dag.parents[u].contains(&v) {
                return Err(Error::Cycle);
            }
            dag.parents[v].push(u);
        }
        for ps in &mut dag.parents {
            ps.sort_unstable();
        }
        topological_order(&dag)?;
        Ok(dag)
    }

    /// Builds a DAG from `(parent, child, β)` triples.
    pub fn from_weighted_edges(p: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        let mut dag = Self::from_edges(p, &pairs)?;
        for &(u, v, w) in edges {
            dag.weights[(u, v)] = w;
        }
        Ok(dag)
    }

    pub fn p(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, j: usize) -> &[usize] {
        &self.parents[j]
    }

    pub fn parent_sets(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.parents[v].binary_search(&u).is_ok()
    }

    pub fn num_edges(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Edges `(parent, child)` sorted by child, then parent.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(v, ps)| ps.iter().map(move |&u| (u, v)))
            .collect()
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[(u, v)]
    }

    /// `p × p` coefficient matrix, column `j` being `β_j`.
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn set_weight(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        if !self.has_edge(u, v) {
            return Err(Error::InvalidConfig(format!("no edge {u} -> {v} to weight")));
        }
        self.weights[(u, v)] = w;
        Ok(())
    }
}

/// Random DAG with exactly `num_edges` edges: nodes are put in a random order
/// and the edges are a uniform sample of the order-respecting pairs.
pub fn random_dag<R: Rng + ?Sized>(p: usize, num_edges: usize, rng: &mut R) -> Result<WeightedDag> {
    let max = p * p.saturating_sub(1) / 2;
    if num_edges > max {
        return Err(Error::TooManyEdges { requested: num_edges, max });
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(rng);
    let mut dag = WeightedDag::empty(p);
    for idx in index::sample(rng, max, num_edges).into_iter() {
        let (a, b) = pair_from_index(idx, p);
        dag.parents[order[b]].push(order[a]);
    }
    for ps in &mut dag.parents {
        ps.sort_unstable();
    }
    Ok(dag)
}

/// Maps `0..p(p−1)/2` onto rank pairs `(a, b)` with `a < b`.
fn pair_from_index(mut idx: usize, p: usize) -> (usize, usize) {
    let mut a = 0;
    loop {
        let row = p - 1 - a;
        if idx < row {
            return (a, a + 1 + idx);
        }
        idx -= row;
        a += 1;
    }
}

/// Copy of `dag` with every edge weight drawn from `±U[0.6, 0.9]`.
pub fn sample_weights<R: Rng + ?Sized>(dag: &WeightedDag, rng: &mut R) -> WeightedDag {
    let mut out = dag.clone();
    out.weights = Matrix::zeros(dag.p(), dag.p());
    for (u, v) in dag.edges() {
        let mag = rng.random_range(WEIGHT_RANGE.0..=WEIGHT_RANGE.1);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        out.weights[(u, v)] = sign * mag;
    }
    out
}

/// Kahn's algorithm, always releasing the smallest ready index first so the
/// order is a deterministic function of the graph.
pub fn topological_order(dag: &WeightedDag) -> Result<Vec<usize>> {
    topological_order_of(dag.p(), dag.edges().into_iter())
}

pub(crate) fn topological_order_of(
    p: usize,
    edges: impl Iterator<Item = (usize, usize)>,
) -> Result<Vec<usize>> {
    let mut children = vec![Vec::new(); p];
    let mut indeg = vec![0usize; p];
    for (u, v) in edges {
        children[u].push(v);
        indeg[v] += 1;
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..p).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(p);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for &v in &children[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(Reverse(v));
            }
        }
    }
    if order.len() == p {
        Ok(order)
    } else {
        Err(Error::Cycle)
    }
}
