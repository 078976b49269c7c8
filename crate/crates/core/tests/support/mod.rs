//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use depdag_core::gaussnum::BlockCovariance;
use depdag_core::graphs::{topological_order, WeightedDag};
use depdag_core::synth::BlockPartition;
use depdag_core::Matrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// `x ⟂ y | z` in the DAG, via the moral graph of the ancestral set.
pub fn d_separated(p: usize, edges: &[(usize, usize)], x: usize, y: usize, z: &[usize]) -> bool {
    let mut parents = vec![Vec::new(); p];
    for &(u, v) in edges {
        parents[v].push(u);
    }
    let mut anc = vec![false; p];
    let mut stack: Vec<usize> = [x, y].iter().chain(z).copied().collect();
    while let Some(v) = stack.pop() {
        if !anc[v] {
            anc[v] = true;
            stack.extend(parents[v].iter().copied());
        }
    }
    let mut adj = vec![BTreeSet::new(); p];
    for v in (0..p).filter(|&v| anc[v]) {
        for (i, &a) in parents[v].iter().enumerate() {
            adj[a].insert(v);
            adj[v].insert(a);
            for &b in &parents[v][i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
    }
    let blocked: BTreeSet<usize> = z.iter().copied().collect();
    let mut seen = vec![false; p];
    let mut stack = vec![x];
    seen[x] = true;
    while let Some(v) = stack.pop() {
        if v == y {
            return false;
        }
        for &w in &adj[v] {
            if !seen[w] && !blocked.contains(&w) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    true
}

/// Every DAG on `p ≤ 5` labelled nodes, as sorted edge lists.
pub fn all_dags(p: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|u| (u + 1..p).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    // Each pair is absent, forward or backward.
    let total = 3usize.pow(pairs.len() as u32);
    for mut code in 0..total {
        let mut edges = Vec::new();
        for &(u, v) in &pairs {
            match code % 3 {
                1 => edges.push((u, v)),
                2 => edges.push((v, u)),
                _ => {}
            }
            code /= 3;
        }
        if WeightedDag::from_edges(p, &edges).is_ok() {
            edges.sort_unstable();
            out.push(edges);
        }
    }
    out
}

/// All d-separation statements of a DAG, as a bit vector.
pub fn independence_signature(p: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut sig = Vec::new();
    for x in 0..p {
        for y in x + 1..p {
            let rest: Vec<usize> = (0..p).filter(|&v| v != x && v != y).collect();
            for mask in 0..(1u32 << rest.len()) {
                let z: Vec<usize> = rest.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &v)| v).collect();
                sig.push(d_separated(p, edges, x, y, &z));
            }
        }
    }
    sig
}

/// CPDAG of every DAG on `p` nodes from brute-force Markov equivalence
/// classes: an edge is directed iff every member of the class agrees on it.
/// Returns `(dag edges, directed, undirected)` triples.
pub fn brute_force_cpdags(p: usize) -> Vec<(Vec<(usize, usize)>, BTreeSet<(usize, usize)>, BTreeSet<(usize, usize)>)> {
    let dags = all_dags(p);
    let mut classes: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    for (k, d) in dags.iter().enumerate() {
        classes.entry(independence_signature(p, d)).or_default().push(k);
    }
    let mut out = Vec::new();
    for members in classes.values() {
        let sets: Vec<BTreeSet<(usize, usize)>> = members.iter().map(|&k| dags[k].iter().copied().collect()).collect();
        let mut directed = BTreeSet::new();
        let mut undirected = BTreeSet::new();
        for &(u, v) in &sets[0] {
            if sets.iter().all(|s| s.contains(&(u, v))) {
                directed.insert((u, v));
            } else {
                undirected.insert((u.min(v), u.max(v)));
            }
        }
        for &k in members {
            out.push((dags[k].clone(), directed.clone(), undirected.clone()));
        }
    }
    out
}

/// `n` rows from the linear Gaussian SEM `x_v = Σ w_uv x_u + e_v`.
pub fn gaussian_sem<R: Rng + ?Sized>(dag: &WeightedDag, n: usize, rng: &mut R) -> Matrix {
    let order = topological_order(dag).expect("acyclic");
    let mut data = Matrix::zeros(n, dag.p());
    for &v in &order {
        for i in 0..n {
            let mut val: f64 = StandardNormal.sample(rng);
            for &u in dag.parents(v) {
                val += dag.weight(u, v) * data[(i, u)];
            }
            data[(i, v)] = val;
        }
    }
    data
}

/// Random correlation matrix (`A Aᵀ + δI`, rescaled to unit diagonal).
pub fn random_correlation<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Matrix {
    let a = Matrix::from_fn(size, size, |_, _| rng.random_range(-1.0..1.0));
    let mut s = a.matmul(&a.transpose()).unwrap();
    for i in 0..size {
        s[(i, i)] += 0.1;
    }
    let d: Vec<f64> = (0..size).map(|i| s[(i, i)].sqrt()).collect();
    Matrix::from_fn(size, size, |i, j| if i == j { 1.0 } else { s[(i, j)] / (d[i] * d[j]) })
}

fn cholesky(a: &Matrix) -> Matrix {
    let s = a.rows();
    let mut l = Matrix::zeros(s, s);
    for j in 0..s {
        let d = a[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        l[(j, j)] = d.sqrt();
        for i in j + 1..s {
            l[(i, j)] = (a[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>()) / l[(j, j)];
        }
    }
    l
}

/// Largest per-entry deviation of the empirical covariance of `W ε` from
/// the identity, with `ε ~ N(0, Σ)` drawn independently of the library.
pub fn whitening_error<R: Rng + ?Sized>(block: &Matrix, draws: usize, rng: &mut R) -> f64 {
    let s = block.rows();
    let sigma = BlockCovariance::new(BlockPartition::from_sizes(vec![s]).unwrap(), vec![block.clone()]).unwrap();
    let l = cholesky(block);
    let w = sigma.whitener();
    let mut acc = Matrix::zeros(s, s);
    let mut v = vec![0.0; s];
    for _ in 0..draws {
        let z: Vec<f64> = (0..s).map(|_| StandardNormal.sample(rng)).collect();
        for i in 0..s {
            v[i] = (0..=i).map(|k| l[(i, k)] * z[k]).sum();
        }
        w.apply_in_place(&mut v);
        for i in 0..s {
            for j in 0..s {
                acc[(i, j)] += v[i] * v[j];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..s {
        for j in 0..s {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc[(i, j)] / draws as f64 - target).abs());
        }
    }
    worst
}
