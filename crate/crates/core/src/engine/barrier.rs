use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::noc::{Coord, Grid};

/// How the global barrier of the sync and speculative modes is realised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarrierKind {
    /// Barrier messages climb a spanning tree of the mesh to a root core and
    /// the release travels back down; both directions use the NoC.
    #[default]
    Tree,
    /// Zero-cost release the cycle the simulator sees the NoC drained.
    Ideal,
}

impl fmt::Display for BarrierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BarrierKind::Tree => "tree",
            BarrierKind::Ideal => "ideal",
        })
    }
}

impl FromStr for BarrierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tree" => Ok(BarrierKind::Tree),
            "ideal" => Ok(BarrierKind::Ideal),
            _ => Err(format!("unknown barrier `{s}` (expected tree or ideal)")),
        }
    }
}

/// Spanning tree over the placed cores. Gathering runs along columns to the
/// root's row, then along that row to the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarrierTree {
    pub root: u32,
    pub parent: Vec<Option<u32>>,
    pub children: Vec<Vec<u32>>,
}

impl BarrierTree {
    pub fn new(grid: Grid, coords: &[Coord]) -> Self {
        let n = coords.len();
        let mut core_at = vec![None; grid.cells()];
        for (i, &c) in coords.iter().enumerate() {
            core_at[grid.index(c)] = Some(i as u32);
        }
        // Core with the smallest total distance to all others; lowest id on ties.
        let root = (0..n)
            .min_by_key(|&i| coords.iter().map(|c| u64::from(c.manhattan(coords[i]))).sum::<u64>())
            .unwrap_or(0);
        let r = coords.get(root).copied().unwrap_or(Coord::new(0, 0));
        let step = |c: Coord| -> Coord {
            if c.y != r.y {
                Coord::new(c.x, if c.y > r.y { c.y - 1 } else { c.y + 1 })
            } else {
                Coord::new(if c.x > r.x { c.x - 1 } else { c.x + 1 }, c.y)
            }
        };
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        for (i, &c) in coords.iter().enumerate() {
            if i == root {
                continue;
            }
            // Skip routers without a core.
            let mut at = step(c);
            let p = loop {
                if let Some(p) = core_at[grid.index(at)] {
                    break p;
                }
                at = step(at);
            };
            parent[i] = Some(p);
            children[p as usize].push(i as u32);
        }
        BarrierTree { root: root as u32, parent, children }
    }

    /// Longest root-to-leaf path, in tree edges.
    pub fn depth(&self) -> usize {
        (0..self.parent.len())
            .map(|mut i| {
                let mut d = 0;
                while let Some(p) = self.parent[i] {
                    i = p as usize;
                    d += 1;
                }
                d
            })
            .max()
            .unwrap_or(0)
    }
}
