use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::citest::{CiParams, CiTester, FisherZ, GSquared};
use crate::graphs::{Cpdag, Pdag};
use crate::matrix::Matrix;
use crate::synth::BinaryDataset;

/// Result of one PC run.
#[derive(Debug, Clone)]
pub struct PcOutput {
    pub cpdag: Cpdag,
    /// Every separating set found at the level where each edge was removed,
    /// keyed by `(i, j)` with `i < j`.
    pub sepsets: BTreeMap<(usize, usize), Vec<Vec<usize>>>,
    pub tests_run: usize,
}

/// Order-independent ("stable") PC.
///
/// Skeleton: at level `ℓ` the adjacency sets are frozen, and an edge `i – j`
/// is removed if some `ℓ`-subset of the frozen neighbours of `i` or of `j`
/// separates them. All separating `ℓ`-subsets are kept for that edge.
///
/// Orientation: an unshielded triple `a – c – b` becomes `a → c ← b` when `c`
/// lies in fewer than half of the recorded separating sets of `(a, b)`;
/// colliders that disagree on an edge leave it undirected. Meek's rules then
/// run to closure, and any directed edge left on a directed cycle is made
/// undirected.
pub fn pc<T: CiTester + ?Sized>(test: &T, params: &CiParams) -> PcOutput {
    let p = test.num_vars();
    let mut adj: Vec<BTreeSet<usize>> = (0..p).map(|i| (0..p).filter(|&j| j != i).collect()).collect();
    let mut sepsets: BTreeMap<(usize, usize), Vec<Vec<usize>>> = BTreeMap::new();
    let mut tests_run = 0;

    for level in 0..=params.max_cond {
        let frozen = adj.clone();
        let any_testable = (0..p).any(|i| frozen[i].len() > level);
        if !any_testable {
            break;
        }
        let mut removals = Vec::new();
        for i in 0..p {
            for &j in frozen[i].iter().filter(|&&j| j > i) {
                let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
                let mut tried: BTreeSet<Vec<usize>> = BTreeSet::new();
                for (a, b) in [(i, j), (j, i)] {
                    let pool: Vec<usize> = frozen[a].iter().copied().filter(|&k| k != b).collect();
                    for_each_subset(&pool, level, |s| {
                        if !tried.insert(s.to_vec()) {
                            return;
                        }
                        tests_run += 1;
                        if test.p_value(i, j, s) > params.alpha {
                            found.insert(s.to_vec());
                        }
                    });
                }
                if !found.is_empty() {
                    removals.push(((i, j), found.into_iter().collect::<Vec<_>>()));
                }
            }
        }
        for ((i, j), sets) in removals {
            adj[i].remove(&j);
            adj[j].remove(&i);
            sepsets.insert((i, j), sets);
        }
    }

    let skeleton = (0..p).flat_map(|i| adj[i].iter().filter(move |&&j| j > i).map(move |&j| (i, j)));
    let mut g = Pdag::from_skeleton(p, skeleton);
    let mut colliders = Vec::new();
    for c in 0..p {
        let nb: Vec<usize> = adj[c].iter().copied().collect();
        for (x, &a) in nb.iter().enumerate() {
            for &b in &nb[x + 1..] {
                if adj[a].contains(&b) {
                    continue;
                }
                let sets = sepsets.get(&(a, b)).map_or(&[][..], Vec::as_slice);
                let with_c = sets.iter().filter(|s| s.contains(&c)).count();
                if 2 * with_c < sets.len() {
                    colliders.push((a, c, b));
                }
            }
        }
    }
    g.orient_colliders(&colliders);
    g.meek_closure();
    g.demote_cycles();
    PcOutput { cpdag: g.to_cpdag(), sepsets, tests_run }
}

/// PC with Fisher-z tests on continuous `n × p` data.
pub fn pc_fisher_z(data: &Matrix, params: &CiParams) -> Cpdag {
    pc(&FisherZ::new(data), params).cpdag
}

/// PC with G² tests on binary data.
pub fn pc_g_squared(data: &BinaryDataset, params: &CiParams) -> Cpdag {
    pc(&GSquared::new(data), params).cpdag
}

/// Calls `f` on every `k`-subset of `pool` (in lexicographic index order).
fn for_each_subset(pool: &[usize], k: usize, mut f: impl FnMut(&[usize])) {
    if k > pool.len() {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<usize> = alloc::vec![0; k];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = pool[i];
        }
        f(&buf);
        // Advance to the next combination.
        let mut t = k;
        loop {
            if t == 0 {
                return;
            }
            t -= 1;
            if idx[t] < pool.len() - k + t {
                break;
            }
            if t == 0 {
                return;
            }
        }
        idx[t] += 1;
        for u in t + 1..k {
            idx[u] = idx[u - 1] + 1;
        }
    }
}
