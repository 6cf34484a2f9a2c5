use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub x: u32,
    pub y: u32,
}

impl Coord {
    pub const fn new(x: u32, y: u32) -> Self {
        Coord { x, y }
    }

    pub fn manhattan(self, other: Coord) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Mesh dimensions, written `WxH`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub w: u32,
    pub h: u32,
}

impl Grid {
    pub const fn new(w: u32, h: u32) -> Self {
        Grid { w, h }
    }

    pub fn cells(self) -> usize {
        self.w as usize * self.h as usize
    }

    pub fn contains(self, c: Coord) -> bool {
        c.x < self.w && c.y < self.h
    }

    pub fn index(self, c: Coord) -> usize {
        c.y as usize * self.w as usize + c.x as usize
    }

    pub fn coord(self, index: usize) -> Coord {
        Coord::new((index % self.w as usize) as u32, (index / self.w as usize) as u32)
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::new(4, 4)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.w, self.h)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s
            .trim()
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("grid {s:?} is not WxH"))?;
        let w: u32 = w.parse().map_err(|_| format!("bad grid width in {s:?}"))?;
        let h: u32 = h.parse().map_err(|_| format!("bad grid height in {s:?}"))?;
        if w == 0 || h == 0 {
            return Err(format!("grid {s:?} has an empty dimension"));
        }
        Ok(Grid { w, h })
    }
}

impl TryFrom<String> for Grid {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> Self {
        g.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parse() {
        assert_eq!("16x8".parse::<Grid>().unwrap(), Grid::new(16, 8));
        assert!("16".parse::<Grid>().is_err());
        assert!("0x4".parse::<Grid>().is_err());
        assert_eq!(Grid::new(4, 4).coord(5), Coord::new(1, 1));
        assert_eq!(Grid::new(4, 4).index(Coord::new(1, 1)), 5);
    }
}
