use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::CompileError;

use super::LogicCore;

/// Dependency-table rows per core (pre plus post).
pub const DEP_LIMIT: usize = 512;

/// Dependency rows of one core.
///
/// `pre_deps` are the cores that send spikes to this one, `post_deps` the
/// cores this one sends to. Both are sorted ascending. A dependency packet
/// carries the row index the receiver uses for the sender:
/// `start_row[i]` is this core's row in `post_deps` of `pre_deps[i]` (used
/// for START packets), and `finish_row[j]` is its row in `pre_deps` of
/// `post_deps[j]` (used for FINISH packets).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreDeps {
    pub pre_deps: Vec<u32>,
    pub post_deps: Vec<u32>,
    pub start_row: Vec<u16>,
    pub finish_row: Vec<u16>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DepGraph {
    pub cores: Vec<CoreDeps>,
}

impl DepGraph {
    pub fn n_cores(&self) -> usize {
        self.cores.len()
    }

    /// Directed edges `(from, to)`: `from` sends spikes to `to`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.cores
            .iter()
            .enumerate()
            .flat_map(|(a, c)| c.post_deps.iter().map(move |&b| (a as u32, b)))
    }

    pub fn n_edges(&self) -> usize {
        self.cores.iter().map(|c| c.post_deps.len()).sum()
    }

    pub fn is_acyclic(&self) -> bool {
        let n = self.cores.len();
        let mut indeg: Vec<usize> = self.cores.iter().map(|c| c.pre_deps.len()).collect();
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(a) = ready.pop() {
            seen += 1;
            for &b in &self.cores[a].post_deps {
                indeg[b as usize] -= 1;
                if indeg[b as usize] == 0 {
                    ready.push(b as usize);
                }
            }
        }
        seen == n
    }

    /// Check that pre and post lists mirror each other and the row indices
    /// point back correctly.
    pub fn validate(&self) -> Result<(), CompileError> {
        let n = self.cores.len() as u32;
        for (a, c) in self.cores.iter().enumerate() {
            let a = a as u32;
            if c.start_row.len() != c.pre_deps.len() || c.finish_row.len() != c.post_deps.len() {
                return Err(CompileError::Invalid(format!("core {a}: row table length mismatch")));
            }
            for list in [&c.pre_deps, &c.post_deps] {
                if list.windows(2).any(|w| w[0] >= w[1]) || list.iter().any(|&x| x >= n || x == a) {
                    return Err(CompileError::Invalid(format!("core {a}: malformed dependency list")));
                }
            }
            for (&b, &row) in c.post_deps.iter().zip(&c.finish_row) {
                if self.cores[b as usize].pre_deps.get(row as usize) != Some(&a) {
                    return Err(CompileError::Invalid(format!("edge {a}->{b}: bad finish row")));
                }
            }
            for (&b, &row) in c.pre_deps.iter().zip(&c.start_row) {
                if self.cores[b as usize].post_deps.get(row as usize) != Some(&a) {
                    return Err(CompileError::Invalid(format!("edge {b}->{a}: bad start row")));
                }
            }
        }
        Ok(())
    }
}

/// Build the dependency graph implied by inter-core synapses.
pub fn extract_deps(cores: &[LogicCore], limit: usize) -> Result<DepGraph, CompileError> {
    let n = cores.len();
    let mut post: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    let mut pre: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    for c in cores {
        for f in c.fanout.iter().flatten() {
            if f.core != c.id {
                post[c.id as usize].insert(f.core);
                pre[f.core as usize].insert(c.id);
            }
        }
    }
    for (i, (p, q)) in pre.iter().zip(&post).enumerate() {
        let count = p.len() + q.len();
        if count > limit {
            return Err(CompileError::TooManyDependencies { core: i as u32, count, limit });
        }
    }
    let pre: Vec<Vec<u32>> = pre.into_iter().map(|s| s.into_iter().collect()).collect();
    let post: Vec<Vec<u32>> = post.into_iter().map(|s| s.into_iter().collect()).collect();
    let row_of = |list: &[u32], x: u32| list.binary_search(&x).expect("mirrored edge") as u16;
    let cores = (0..n)
        .map(|a| CoreDeps {
            start_row: pre[a].iter().map(|&b| row_of(&post[b as usize], a as u32)).collect(),
            finish_row: post[a].iter().map(|&b| row_of(&pre[b as usize], a as u32)).collect(),
            pre_deps: pre[a].clone(),
            post_deps: post[a].clone(),
        })
        .collect();
    Ok(DepGraph { cores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::Fanout;
    use crate::fixed::Fix;

    /// Cores with one neuron each and the given inter-core edges.
    fn cores_with_edges(n: usize, edges: &[(u32, u32)]) -> Vec<LogicCore> {
        let mut cores: Vec<LogicCore> = (0..n)
            .map(|id| LogicCore {
                id: id as u32,
                neuron_ids: vec![id as u32],
                fanout: vec![Vec::new()],
                synapses: Vec::new(),
            })
            .collect();
        for &(a, b) in edges {
            cores[a as usize].fanout[0].push(Fanout { core: b, synapse: 0, weight: Fix::ONE, delay: 1 });
        }
        cores
    }

    #[test]
    fn diamond() {
        let g = extract_deps(&cores_with_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3), (1, 3)]), DEP_LIMIT)
            .unwrap();
        assert_eq!(g.cores[0].post_deps, vec![1, 2]);
        assert_eq!(g.cores[3].pre_deps, vec![1, 2]);
        assert_eq!(g.cores[2].finish_row, vec![1]);
        assert_eq!(g.cores[1].start_row, vec![0]);
        assert_eq!(g.n_edges(), 4);
        assert!(g.is_acyclic());
        g.validate().unwrap();
    }

    #[test]
    fn self_edges_are_not_dependencies() {
        let g = extract_deps(&cores_with_edges(2, &[(0, 0), (1, 1)]), DEP_LIMIT).unwrap();
        assert_eq!(g.n_edges(), 0);
    }

    #[test]
    fn cycle_detected() {
        let g = extract_deps(&cores_with_edges(3, &[(0, 1), (1, 2), (2, 0)]), DEP_LIMIT).unwrap();
        assert!(!g.is_acyclic());
        g.validate().unwrap();
    }

    #[test]
    fn limit_enforced() {
        let mut edges: Vec<(u32, u32)> = (1..4).map(|b| (0, b)).collect();
        edges.extend([(4, 0), (5, 0)]);
        match extract_deps(&cores_with_edges(6, &edges), 4) {
            Err(CompileError::TooManyDependencies { core: 0, count: 5, limit: 4 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn corrupted_rows_rejected() {
        let mut g = extract_deps(&cores_with_edges(3, &[(0, 2), (1, 2)]), DEP_LIMIT).unwrap();
        g.cores[1].finish_row[0] = 0;
        assert!(g.validate().is_err());
    }
}
