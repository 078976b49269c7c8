use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::graphs::Cpdag;
use crate::pclearn::{pc_g_squared, CiParams};
use crate::synth::BinaryDataset;

/// Sorted parent list for every node.
pub type ParentSets = Vec<Vec<usize>>;

/// Parent sets of a DAG in the class of `cpdag`.
///
/// Uses the Dor–Tarsi construction: repeatedly remove a sink whose undirected
/// neighbours are adjacent to all its other neighbours, directing those
/// undirected edges into it. If no such node exists the graph has no
/// consistent extension; the remaining undirected edges are then oriented
/// along a smallest-index-first topological order of the remaining directed
/// edges, which keeps the result acyclic.
pub fn parents_from_cpdag(cpdag: &Cpdag) -> ParentSets {
    let p = cpdag.p();
    let mut parents: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); p];
    let mut children: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); p];
    let mut undirected: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); p];
    for &(u, v) in cpdag.directed() {
        parents[v].insert(u);
        children[u].insert(v);
    }
    for &(u, v) in cpdag.undirected() {
        undirected[u].insert(v);
        undirected[v].insert(u);
    }
    let mut out: Vec<BTreeSet<usize>> = parents.clone();
    let mut alive: BTreeSet<usize> = (0..p).collect();

    let adjacent = |parents: &[BTreeSet<usize>],
                    children: &[BTreeSet<usize>],
                    undirected: &[BTreeSet<usize>],
                    a: usize,
                    b: usize| {
        parents[a].contains(&b) || children[a].contains(&b) || undirected[a].contains(&b)
    };

    while !alive.is_empty() {
        let candidate = alive.iter().copied().find(|&x| {
            if !children[x].is_empty() {
                return false;
            }
            let nbrs: Vec<usize> = parents[x].iter().chain(undirected[x].iter()).copied().collect();
            undirected[x].iter().all(|&y| {
                nbrs.iter().all(|&z| z == y || adjacent(&parents, &children, &undirected, y, z))
            })
        });
        let Some(x) = candidate else { break };
        for y in core::mem::take(&mut undirected[x]) {
            undirected[y].remove(&x);
            out[x].insert(y);
        }
        for y in core::mem::take(&mut parents[x]) {
            children[y].remove(&x);
        }
        alive.remove(&x);
    }

    if !alive.is_empty() {
        let order = fallback_order(&alive, &children);
        let rank: Vec<usize> = {
            let mut r = vec![usize::MAX; p];
            for (k, &v) in order.iter().enumerate() {
                r[v] = k;
            }
            r
        };
        for &u in &alive {
            for &v in &undirected[u] {
                if rank[u] < rank[v] {
                    out[v].insert(u);
                }
            }
        }
    }
    out.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Topological order of the directed edges among `alive`, smallest index first.
fn fallback_order(alive: &BTreeSet<usize>, children: &[BTreeSet<usize>]) -> Vec<usize> {
    let mut indeg: alloc::collections::BTreeMap<usize, usize> = alive.iter().map(|&v| (v, 0)).collect();
    for &u in alive {
        for v in &children[u] {
            if let Some(d) = indeg.get_mut(v) {
                *d += 1;
            }
        }
    }
    let mut ready: BTreeSet<usize> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&v, _)| v).collect();
    let mut order = Vec::with_capacity(alive.len());
    while let Some(u) = ready.pop_first() {
        order.push(u);
        for v in &children[u] {
            if let Some(d) = indeg.get_mut(v) {
                *d -= 1;
                if *d == 0 {
                    ready.insert(*v);
                }
            }
        }
    }
    // The directed part of a CPDAG is acyclic, so every node is placed; keep
    // any leftovers (malformed input) in index order regardless.
    for &v in alive {
        if !order.contains(&v) {
            order.push(v);
        }
    }
    order
}

/// Initial parent sets: PC with G² tests on the binary data, extended to a
/// DAG.
pub fn initial_parents(x: &BinaryDataset, params: &CiParams) -> ParentSets {
    parents_from_cpdag(&pc_g_squared(x, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{dag_to_cpdag, topological_order, WeightedDag};

    fn to_dag(p: usize, parents: &ParentSets) -> WeightedDag {
        let edges: Vec<(usize, usize)> =
            parents.iter().enumerate().flat_map(|(v, ps)| ps.iter().map(move |&u| (u, v))).collect();
        WeightedDag::from_edges(p, &edges).unwrap()
    }

    #[test]
    fn extension_stays_in_class() {
        let dags = [
            WeightedDag::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap(),
            WeightedDag::from_edges(4, &[(0, 2), (1, 2), (2, 3)]).unwrap(),
            WeightedDag::from_edges(5, &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)]).unwrap(),
            WeightedDag::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap(),
        ];
        for dag in &dags {
            let cpdag = dag_to_cpdag(dag);
            let ext = to_dag(dag.p(), &parents_from_cpdag(&cpdag));
            assert!(topological_order(&ext).is_ok());
            assert_eq!(dag_to_cpdag(&ext), cpdag);
        }
    }

    #[test]
    fn inextendible_graph_falls_back_acyclically() {
        // An undirected 4-cycle has no extension without a new v-structure.
        let cycle = Cpdag::from_parts(4, [], [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let parents = parents_from_cpdag(&cycle);
        let dag = to_dag(4, &parents);
        assert_eq!(dag.num_edges(), 4);
        assert!(topological_order(&dag).is_ok());
    }

    #[test]
    fn empty_graph_has_no_parents() {
        assert!(parents_from_cpdag(&Cpdag::empty(3)).iter().all(Vec::is_empty));
    }
}
