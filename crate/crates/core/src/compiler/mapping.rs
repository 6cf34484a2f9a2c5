use serde::{Deserialize, Serialize};

use crate::error::CompileError;
use crate::noc::{Coord, Grid};

use super::DepGraph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingKind {
    /// Row-major order.
    Plain,
    #[default]
    Hilbert,
}

impl std::str::FromStr for MappingKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(MappingKind::Plain),
            "hilbert" => Ok(MappingKind::Hilbert),
            _ => Err(format!("unknown mapping {s:?} (plain|hilbert)")),
        }
    }
}

/// Physical router of every logic core.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Placement {
    pub coords: Vec<Coord>,
}

impl Placement {
    pub fn validate(&self, grid: Grid) -> Result<(), CompileError> {
        let mut used = vec![false; grid.cells()];
        for (core, &c) in self.coords.iter().enumerate() {
            if !grid.contains(c) {
                return Err(CompileError::Invalid(format!("core {core} placed outside {grid} at {c}")));
            }
            let cell = &mut used[grid.index(c)];
            if *cell {
                return Err(CompileError::Invalid(format!("two cores placed at {c}")));
            }
            *cell = true;
        }
        Ok(())
    }
}

fn check_fits(n_cores: usize, grid: Grid) -> Result<(), CompileError> {
    if n_cores > grid.cells() {
        return Err(CompileError::TooManyCores { cores: n_cores, cells: grid.cells() });
    }
    Ok(())
}

pub fn map_plain(n_cores: usize, grid: Grid) -> Result<Placement, CompileError> {
    check_fits(n_cores, grid)?;
    Ok(Placement { coords: (0..n_cores).map(|i| grid.coord(i)).collect() })
}

/// Position `d` along the Hilbert curve filling an `n`x`n` square.
pub fn hilbert_d2xy(n: u32, d: u32) -> Coord {
    let (mut x, mut y) = (0u32, 0u32);
    let mut t = d;
    let mut s = 1u32;
    while s < n {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        if ry == 0 {
            if rx == 1 {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
        s *= 2;
    }
    Coord::new(x, y)
}

/// Consecutive core ids follow the Hilbert curve, so cores that are close in
/// id (and, for layered partitions, usually connected) land close on the
/// mesh. Falls back to plain order when the grid is not a power-of-two
/// square.
pub fn map_hilbert(n_cores: usize, grid: Grid) -> Result<Placement, CompileError> {
    check_fits(n_cores, grid)?;
    if grid.w != grid.h || !grid.w.is_power_of_two() {
        log::warn!("hilbert mapping needs a power-of-two square grid, {grid} uses plain order");
        return map_plain(n_cores, grid);
    }
    Ok(Placement {
        coords: (0..n_cores as u32).map(|d| hilbert_d2xy(grid.w, d)).collect(),
    })
}

pub fn map(kind: MappingKind, n_cores: usize, grid: Grid) -> Result<Placement, CompileError> {
    match kind {
        MappingKind::Plain => map_plain(n_cores, grid),
        MappingKind::Hilbert => map_hilbert(n_cores, grid),
    }
}

/// Mean hop count over dependency edges; 0 for a graph without edges.
pub fn avg_dep_distance(placement: &Placement, deps: &DepGraph) -> f64 {
    let (mut sum, mut count) = (0u64, 0u64);
    for (a, b) in deps.edges() {
        sum += u64::from(placement.coords[a as usize].manhattan(placement.coords[b as usize]));
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum as f64 / count as f64
    }
}
