//! Grid coordinates and line directions.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

/// A grid position. Signed so that parsed records can carry off-board values
/// until they are checked against a concrete board.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// `self + k * dir`
    #[inline]
    pub fn step(self, dir: Direction, k: i32) -> Coord {
        let (dx, dy) = dir.delta();
        Coord::new(self.x + k * dx, self.y + k * dy)
    }

    #[inline]
    pub fn in_bounds(self, size: usize) -> bool {
        let n = size as i32;
        self.x >= 0 && self.y >= 0 && self.x < n && self.y < n
    }
}

impl Add<Direction> for Coord {
    type Output = Coord;

    fn add(self, dir: Direction) -> Coord {
        self.step(dir, 1)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// One of the four line directions. A line and its reverse share a direction,
/// so only the four "forward" vectors exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    E,
    S,
    SE,
    NE,
}

impl Direction {
    /// All directions in action-space block order.
    pub const ALL: [Direction; 4] = [Direction::E, Direction::S, Direction::SE, Direction::NE];

    #[inline]
    pub const fn delta(self) -> (i32, i32) {
        match self {
            Direction::E => (1, 0),
            Direction::S => (0, 1),
            Direction::SE => (1, 1),
            Direction::NE => (1, -1),
        }
    }

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn name(self) -> &'static str {
        match self {
            Direction::E => "E",
            Direction::S => "S",
            Direction::SE => "SE",
            Direction::NE => "NE",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown direction `{0}` (expected E, S, SE or NE)")]
pub struct ParseDirectionError(pub String);

impl FromStr for Direction {
    type Err = ParseDirectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "E" => Ok(Direction::E),
            "S" => Ok(Direction::S),
            "SE" => Ok(Direction::SE),
            "NE" => Ok(Direction::NE),
            other => Err(ParseDirectionError(other.to_string())),
        }
    }
}

/// A line position on the grid: five points `origin + k * dir`, `k` in `0..5`.
/// The origin is the endpoint reached first when walking along `dir`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    pub origin: Coord,
    pub dir: Direction,
}

impl Line {
    pub const LEN: usize = 5;

    pub const fn new(origin: Coord, dir: Direction) -> Self {
        Self { origin, dir }
    }

    pub fn points(self) -> [Coord; 5] {
        std::array::from_fn(|k| self.origin.step(self.dir, k as i32))
    }

    pub fn contains(self, p: Coord) -> bool {
        self.points().contains(&p)
    }

    pub fn in_bounds(self, size: usize) -> bool {
        self.origin.in_bounds(size) && self.origin.step(self.dir, 4).in_bounds(size)
    }
}
