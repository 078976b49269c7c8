use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

// Supplies f64 math without std; redundant when std is linked in.
#[allow(unused_imports)]
use num_traits::Float;


use super::citest::CiParams;
use super::pc::{pc_fisher_z, pc_g_squared};
use crate::error::{Error, Result};
use crate::graphs::{Cpdag, Edge, Pdag};
use crate::matrix::Matrix;
use crate::synth::BinaryDataset;

/// How the final CPDAG is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Strategy {
    /// PC with G² tests on the raw binary data.
    Baseline,
    /// PC with Fisher-z tests on the mean of the decorrelated datasets.
    Average,
    /// Edge vote over PC runs on each decorrelated dataset.
    Consensus,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Baseline, Strategy::Average, Strategy::Consensus];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Baseline => "baseline",
            Strategy::Average => "average",
            Strategy::Consensus => "consensus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.name().eq_ignore_ascii_case(s))
    }
}

/// Elementwise mean of equally shaped matrices.
pub fn average_dataset(datasets: &[Matrix]) -> Result<Matrix> {
    let first = datasets.first().ok_or_else(|| Error::MissingInput("no datasets to average".into()))?;
    let (n, p) = (first.rows(), first.cols());
    if let Some(bad) = datasets.iter().find(|d| d.rows() != n || d.cols() != p) {
        return Err(Error::DimensionMismatch(format!(
            "dataset of shape {}x{} among {n}x{p} datasets",
            bad.rows(),
            bad.cols()
        )));
    }
    let m = datasets.len() as f64;
    Ok(Matrix::from_fn(n, p, |i, j| datasets.iter().map(|d| d[(i, j)]).sum::<f64>() / m))
}

#[derive(Default, Clone, Copy)]
struct Votes {
    present: usize,
    forward: usize,
    backward: usize,
    undirected: usize,
}

/// Majority vote over CPDAGs.
///
/// An adjacency is kept if at least `⌈threshold·M⌉` graphs contain it. It is
/// directed `u → v` only when strictly more graphs say `u → v` than say
/// `v → u` or leave it undirected; otherwise it is undirected. If the directed
/// edges form a cycle, the cyclic edge with the fewest votes is made
/// undirected until none remains.
pub fn consensus_cpdag(cpdags: &[Cpdag], threshold: f64) -> Result<Cpdag> {
    let first = cpdags.first().ok_or_else(|| Error::MissingInput("no graphs to combine".into()))?;
    let p = first.p();
    if cpdags.iter().any(|g| g.p() != p) {
        return Err(Error::DimensionMismatch("graphs have different node counts".into()));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidConfig(format!("consensus threshold {threshold} outside (0, 1]")));
    }
    let needed = ((threshold * cpdags.len() as f64) - 1e-9).ceil().max(1.0) as usize;

    let mut votes: BTreeMap<(usize, usize), Votes> = BTreeMap::new();
    for g in cpdags {
        for e in g.edges() {
            match e {
                Edge::Directed(u, v) => {
                    let k = (u.min(v), u.max(v));
                    let entry = votes.entry(k).or_default();
                    entry.present += 1;
                    if u < v {
                        entry.forward += 1;
                    } else {
                        entry.backward += 1;
                    }
                }
                Edge::Undirected(u, v) => {
                    let entry = votes.entry((u, v)).or_default();
                    entry.present += 1;
                    entry.undirected += 1;
                }
            }
        }
    }

    let accepted: Vec<((usize, usize), Votes)> =
        votes.into_iter().filter(|(_, v)| v.present >= needed).collect();
    let mut g = Pdag::from_skeleton(p, accepted.iter().map(|&(k, _)| k));
    let mut support: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &((u, v), t) in &accepted {
        if t.forward > t.backward && t.forward > t.undirected {
            g.orient(u, v);
            support.insert((u, v), t.forward);
        } else if t.backward > t.forward && t.backward > t.undirected {
            g.orient(v, u);
            support.insert((v, u), t.backward);
        }
    }
    loop {
        let cyclic = g.cyclic_directed_edges();
        let Some(&weakest) = cyclic.iter().min_by_key(|&&e| (support.get(&e).copied().unwrap_or(0), e))
        else {
            break;
        };
        g.unorient(weakest.0, weakest.1);
    }
    Ok(g.to_cpdag())
}

/// Learns a CPDAG with the given strategy. `decorrelated` holds the `n × p`
/// decorrelated datasets and may be empty for the baseline.
pub fn run_strategy(
    x: &BinaryDataset,
    decorrelated: &[Matrix],
    strategy: Strategy,
    params: &CiParams,
) -> Result<Cpdag> {
    params.validate()?;
    match strategy {
        Strategy::Baseline => Ok(pc_g_squared(x, params)),
        Strategy::Average => Ok(pc_fisher_z(&average_dataset(decorrelated)?, params)),
        Strategy::Consensus => {
            if decorrelated.is_empty() {
                return Err(Error::MissingInput("consensus needs decorrelated datasets".into()));
            }
            let graphs: Vec<Cpdag> = decorrelated.iter().map(|d| pc_fisher_z(d, params)).collect();
            consensus_cpdag(&graphs, 0.5)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn g(p: usize, d: &[(usize, usize)], u: &[(usize, usize)]) -> Cpdag {
        Cpdag::from_parts(p, d.iter().copied(), u.iter().copied()).unwrap()
    }

    #[test]
    fn averaging() {
        let a = Matrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64 - 1.5);
        assert_eq!(average_dataset(core::slice::from_ref(&a)).unwrap(), a);
        let mut neg = a.clone();
        neg.map_inplace(|v| -v);
        assert_eq!(average_dataset(&[a.clone(), neg]).unwrap(), Matrix::zeros(3, 2));
        assert!(average_dataset(&[]).is_err());
        assert!(average_dataset(&[a, Matrix::zeros(2, 2)]).is_err());
    }

    #[test]
    fn identical_graphs_are_a_fixed_point() {
        let base = g(4, &[(0, 2), (1, 2)], &[(2, 3)]);
        for k in 1..6 {
            assert_eq!(consensus_cpdag(&vec![base.clone(); k], 0.5).unwrap(), base);
        }
    }

    #[test]
    fn half_is_enough() {
        let with = g(3, &[], &[(0, 1)]);
        let without = Cpdag::empty(3);
        let mut list = vec![with.clone(); 4];
        list.extend(vec![without.clone(); 6]);
        assert_eq!(consensus_cpdag(&list, 0.5).unwrap().num_edges(), 0);
        let mut list = vec![with; 5];
        list.extend(vec![without; 5]);
        assert_eq!(consensus_cpdag(&list, 0.5).unwrap().num_edges(), 1);
    }

    #[test]
    fn tied_orientation_is_undirected() {
        let mut list = vec![g(2, &[(0, 1)], &[]); 3];
        list.extend(vec![g(2, &[(1, 0)], &[]); 3]);
        let c = consensus_cpdag(&list, 0.5).unwrap();
        assert_eq!(c.edges(), vec![Edge::Undirected(0, 1)]);
        // Plurality of directed votes wins.
        let mut list = vec![g(2, &[(1, 0)], &[]); 3];
        list.extend(vec![g(2, &[], &[(0, 1)]); 2]);
        assert_eq!(consensus_cpdag(&list, 0.5).unwrap().edges(), vec![Edge::Directed(1, 0)]);
    }

    #[test]
    fn cycles_are_broken_at_the_weakest_edge() {
        // Each graph is acyclic, but the votes combine into 0 → 1 → 2 → 0.
        let list = vec![
            g(3, &[(0, 1), (1, 2)], &[(0, 2)]),
            g(3, &[(0, 1), (1, 2)], &[(0, 2)]),
            g(3, &[(0, 1), (2, 0)], &[(1, 2)]),
            g(3, &[(1, 2), (2, 0)], &[(0, 1)]),
            g(3, &[(0, 1), (1, 2), (0, 2)], &[]),
            g(3, &[(2, 0), (0, 1)], &[(1, 2)]),
            g(3, &[(2, 0), (1, 2)], &[(0, 1)]),
        ];
        let c = consensus_cpdag(&list, 0.5).unwrap();
        assert_eq!(c.num_edges(), 3);
        assert!(c.directed().contains(&(0, 1)) && c.directed().contains(&(1, 2)));
        assert_eq!(c.edge(0, 2), Some(Edge::Undirected(0, 2)));
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(Strategy::parse(s.name()), Some(s));
        }
        assert_eq!(Strategy::parse("nope"), None);
    }
}
