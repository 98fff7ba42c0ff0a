//! Board state, legality and move generation for Morpion Solitaire.
//!
//! Cells are stored in flat bit grids indexed `y * size + x`. Line usage is
//! tracked per direction in two forms:
//!
//! * point usage: point `p` belongs to a drawn line of direction `d` (5D rule);
//! * segment usage: the unit segment `p -> p + d` is drawn (5T rule).
//!
//! Segments are kept in both variants since no variant lets two lines share
//! one. Point bits are only kept for 5D; under 5T two same-direction lines may
//! share an endpoint, so point usage is derived from the segments instead.

use std::fmt;

use crate::geometry::{Coord, Direction, Line};

/// Side length of the bounding box of the starting cross.
pub const CROSS_SPAN: usize = 10;

/// Smallest board that holds the cross with one free cell on every side.
pub const MIN_BOARD_SIZE: usize = CROSS_SPAN + 2;

/// Number of dots in the starting cross.
pub const INITIAL_DOTS: usize = 36;

/// Proven upper bound on the length of any 5D game.
pub const MAX_SCORE_5D: usize = 121;

/// Rows of the Greek cross, relative to its bounding box.
const CROSS_ROWS: [&[i32]; 10] = [
    &[3, 4, 5, 6],
    &[3, 6],
    &[3, 6],
    &[0, 1, 2, 3, 6, 7, 8, 9],
    &[0, 9],
    &[0, 9],
    &[0, 1, 2, 3, 6, 7, 8, 9],
    &[3, 6],
    &[3, 6],
    &[3, 4, 5, 6],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Variant {
    /// Disjoint: a point may belong to at most one line per direction.
    #[serde(rename = "5D")]
    FiveD,
    /// Touching: same-direction lines may share an endpoint but not a segment.
    #[serde(rename = "5T")]
    FiveT,
}

impl Variant {
    pub const fn name(self) -> &'static str {
        match self {
            Variant::FiveD => "5D",
            Variant::FiveT => "5T",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "5D" | "5d" => Ok(Variant::FiveD),
            "5T" | "5t" => Ok(Variant::FiveT),
            other => Err(format!("unknown variant `{other}` (expected 5D or 5T)")),
        }
    }
}

/// One move: a line placement together with the dot it adds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub origin: Coord,
    pub dir: Direction,
    pub new_dot: Coord,
}

impl Move {
    pub const fn new(origin: Coord, dir: Direction, new_dot: Coord) -> Self {
        Self { origin, dir, new_dot }
    }

    pub const fn line(&self) -> Line {
        Line::new(self.origin, self.dir)
    }

    pub fn points(&self) -> [Coord; 5] {
        self.line().points()
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dot {} line {} from {}",
            self.new_dot, self.dir, self.origin
        )
    }
}

/// Why a move was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IllegalReason {
    /// Part of the line lies outside the board.
    OutOfBounds,
    /// The new dot is not one of the five line points.
    NewDotOffLine,
    /// The new dot is already on the board.
    NewDotOccupied,
    /// The line does not have exactly four existing dots; carries the count found.
    DotCount(u8),
    /// 5D: a line point already belongs to a line of this direction.
    PointReuse(Direction),
    /// 5T: a unit segment of the line is already drawn.
    SegmentOverlap(Direction),
}

impl fmt::Display for IllegalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IllegalReason::OutOfBounds => f.write_str("line out of bounds"),
            IllegalReason::NewDotOffLine => f.write_str("new dot not on line"),
            IllegalReason::NewDotOccupied => f.write_str("new dot already occupied"),
            IllegalReason::DotCount(n) => {
                write!(f, "dot count mismatch: {n} of 4 required dots present")
            }
            IllegalReason::PointReuse(d) => write!(f, "point reuse in direction {d}"),
            IllegalReason::SegmentOverlap(d) => write!(f, "segment overlap in direction {d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoardError {
    #[error("board size {size} is too small (minimum {MIN_BOARD_SIZE})")]
    BoardTooSmall { size: usize },
    #[error("illegal move ({mv}): {reason}")]
    IllegalMove { mv: Move, reason: IllegalReason },
    #[error("nothing to undo")]
    NothingToUndo,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct BitGrid {
    words: Vec<u64>,
}

impl BitGrid {
    fn new(cells: usize) -> Self {
        Self { words: vec![0; cells.div_ceil(64)] }
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    fn clear(&mut self, i: usize) {
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// A Morpion Solitaire position on a bounded `size x size` grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Board {
    size: usize,
    variant: Variant,
    occupied: BitGrid,
    point_used: [BitGrid; 4],
    segment_used: [BitGrid; 4],
    history: Vec<Move>,
}

impl Board {
    /// The starting position: the 36-dot Greek cross centred on the board.
    pub fn new(size: usize, variant: Variant) -> Result<Self, BoardError> {
        if size < MIN_BOARD_SIZE {
            return Err(BoardError::BoardTooSmall { size });
        }
        let cells = size * size;
        let mut board = Board {
            size,
            variant,
            occupied: BitGrid::new(cells),
            point_used: std::array::from_fn(|_| BitGrid::new(cells)),
            segment_used: std::array::from_fn(|_| BitGrid::new(cells)),
            history: Vec::new(),
        };
        for p in initial_dots(size) {
            let i = board.cell(p);
            board.occupied.set(i);
        }
        Ok(board)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn score(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[Move] {
        &self.history
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.count()
    }

    #[inline]
    fn cell(&self, p: Coord) -> usize {
        debug_assert!(p.in_bounds(self.size));
        p.y as usize * self.size + p.x as usize
    }

    /// False for off-board coordinates.
    pub fn is_occupied(&self, p: Coord) -> bool {
        p.in_bounds(self.size) && self.occupied.get(self.cell(p))
    }

    /// Whether `p` lies on a drawn line of direction `dir`.
    pub fn point_used(&self, p: Coord, dir: Direction) -> bool {
        if !p.in_bounds(self.size) {
            return false;
        }
        match self.variant {
            Variant::FiveD => self.point_used[dir.index()].get(self.cell(p)),
            Variant::FiveT => {
                let before = p.step(dir, -1);
                self.segment_used(p, dir) || self.segment_used(before, dir)
            }
        }
    }

    /// Whether the unit segment `p -> p + dir` is drawn.
    pub fn segment_used(&self, p: Coord, dir: Direction) -> bool {
        p.in_bounds(self.size) && self.segment_used[dir.index()].get(self.cell(p))
    }

    /// Full legality check with the reason for rejection.
    pub fn check(&self, m: &Move) -> Result<(), IllegalReason> {
        let line = m.line();
        if !line.in_bounds(self.size) {
            return Err(IllegalReason::OutOfBounds);
        }
        let points = line.points();
        if !points.contains(&m.new_dot) {
            return Err(IllegalReason::NewDotOffLine);
        }
        if self.is_occupied(m.new_dot) {
            return Err(IllegalReason::NewDotOccupied);
        }
        let present = points.iter().filter(|&&p| self.is_occupied(p)).count();
        if present != 4 {
            return Err(IllegalReason::DotCount(present as u8));
        }
        match self.variant {
            Variant::FiveD => {
                if points.iter().any(|&p| self.point_used(p, m.dir)) {
                    return Err(IllegalReason::PointReuse(m.dir));
                }
            }
            Variant::FiveT => {
                if points[..4].iter().any(|&p| self.segment_used(p, m.dir)) {
                    return Err(IllegalReason::SegmentOverlap(m.dir));
                }
            }
        }
        Ok(())
    }

    pub fn is_legal(&self, m: &Move) -> bool {
        self.check(m).is_ok()
    }

    /// Resolves a line position to a move on this board: the line must have
    /// exactly one empty point, which becomes the new dot. Variant rules are
    /// not checked here.
    pub fn move_for_line(&self, line: Line) -> Option<Move> {
        if !line.in_bounds(self.size) {
            return None;
        }
        let mut empty = None;
        for p in line.points() {
            if !self.is_occupied(p) {
                if empty.is_some() {
                    return None;
                }
                empty = Some(p);
            }
        }
        empty.map(|dot| Move::new(line.origin, line.dir, dot))
    }

    /// All legal moves, direction-major (E, S, SE, NE) then origin row-major.
    pub fn legal_moves(&self) -> Vec<Move> {
        let mut out = Vec::new();
        self.legal_moves_into(&mut out);
        out
    }

    pub fn legal_moves_into(&self, out: &mut Vec<Move>) {
        out.clear();
        let n = self.size;
        let mut occ_run = vec![0u8; n * n];
        let mut used_run = vec![0u8; n * n];
        for dir in Direction::ALL {
            let (dx, dy) = dir.delta();
            // Suffix counts along `dir`: run[p] = count over p, p+d, p+2d, ...
            // A window of k cells starting at o then sums to run[o] - run[o + k*d].
            let used_grid = match self.variant {
                Variant::FiveD => &self.point_used[dir.index()],
                Variant::FiveT => &self.segment_used[dir.index()],
            };
            let window_used = match self.variant {
                Variant::FiveD => 5,
                Variant::FiveT => 4,
            };
            let ys: Box<dyn Iterator<Item = usize>> = if dy > 0 {
                Box::new((0..n).rev())
            } else {
                Box::new(0..n)
            };
            for y in ys {
                for x in (0..n).rev() {
                    let i = y * n + x;
                    let (nx, ny) = (x as i32 + dx, y as i32 + dy);
                    let (o, u) = if nx >= 0 && ny >= 0 && (nx as usize) < n && (ny as usize) < n {
                        let j = ny as usize * n + nx as usize;
                        (occ_run[j], used_run[j])
                    } else {
                        (0, 0)
                    };
                    occ_run[i] = o + self.occupied.get(i) as u8;
                    used_run[i] = u + used_grid.get(i) as u8;
                }
            }
            let at = |run: &[u8], x: i32, y: i32| -> u8 {
                if x >= 0 && y >= 0 && (x as usize) < n && (y as usize) < n {
                    run[y as usize * n + x as usize]
                } else {
                    0
                }
            };
            let (y_lo, y_hi) = match dir {
                Direction::E => (0, n),
                Direction::S | Direction::SE => (0, n - 4),
                Direction::NE => (4, n),
            };
            let x_hi = if dir == Direction::S { n } else { n - 4 };
            for y in y_lo..y_hi {
                for x in 0..x_hi {
                    let (xi, yi) = (x as i32, y as i32);
                    let occ = at(&occ_run, xi, yi) - at(&occ_run, xi + 5 * dx, yi + 5 * dy);
                    if occ != 4 {
                        continue;
                    }
                    let k = window_used as i32;
                    let used = at(&used_run, xi, yi) - at(&used_run, xi + k * dx, yi + k * dy);
                    if used != 0 {
                        continue;
                    }
                    let origin = Coord::new(xi, yi);
                    let new_dot = (0..5)
                        .map(|k| origin.step(dir, k))
                        .find(|&p| !self.occupied.get(self.cell(p)))
                        .expect("window with four dots has one gap");
                    out.push(Move::new(origin, dir, new_dot));
                }
            }
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.legal_moves().is_empty()
    }

    /// Plays `m` in place.
    pub fn apply(&mut self, m: Move) -> Result<(), BoardError> {
        self.check(&m)
            .map_err(|reason| BoardError::IllegalMove { mv: m, reason })?;
        let d = m.dir.index();
        let points = m.points();
        let dot = self.cell(m.new_dot);
        self.occupied.set(dot);
        if self.variant == Variant::FiveD {
            for p in points {
                let i = self.cell(p);
                self.point_used[d].set(i);
            }
        }
        for p in &points[..4] {
            let i = self.cell(*p);
            self.segment_used[d].set(i);
        }
        self.history.push(m);
        if self.variant == Variant::FiveD {
            assert!(
                self.history.len() <= MAX_SCORE_5D,
                "5D game exceeded the proven bound of {MAX_SCORE_5D} moves"
            );
        }
        Ok(())
    }

    /// Takes back the last move.
    pub fn undo(&mut self) -> Result<Move, BoardError> {
        let m = self.history.pop().ok_or(BoardError::NothingToUndo)?;
        let d = m.dir.index();
        let points = m.points();
        let dot = self.cell(m.new_dot);
        self.occupied.clear(dot);
        if self.variant == Variant::FiveD {
            for p in points {
                let i = self.cell(p);
                self.point_used[d].clear(i);
            }
        }
        for p in &points[..4] {
            let i = self.cell(*p);
            self.segment_used[d].clear(i);
        }
        Ok(m)
    }

    /// Replays `moves` on a fresh board of the same size and variant.
    pub fn replay(size: usize, variant: Variant, moves: &[Move]) -> Result<Self, BoardError> {
        let mut board = Board::new(size, variant)?;
        for &m in moves {
            board.apply(m)?;
        }
        Ok(board)
    }

    /// Re-derives every invariant from the move history. Used by tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.occupied_count() != INITIAL_DOTS + self.score() {
            return Err(format!(
                "occupied {} != {} + score {}",
                self.occupied_count(),
                INITIAL_DOTS,
                self.score()
            ));
        }
        if self.variant == Variant::FiveD && self.score() > MAX_SCORE_5D {
            return Err(format!("score {} above bound", self.score()));
        }
        let mut points = std::collections::HashSet::new();
        let mut segments = std::collections::HashSet::new();
        for m in &self.history {
            let pts = m.points();
            for p in pts {
                if !self.is_occupied(p) {
                    return Err(format!("line point {p} is empty"));
                }
                if !points.insert((p, m.dir)) && self.variant == Variant::FiveD {
                    return Err(format!("point {p} reused in direction {}", m.dir));
                }
            }
            for p in &pts[..4] {
                if !segments.insert((*p, m.dir)) {
                    return Err(format!("segment at {p} reused in direction {}", m.dir));
                }
            }
        }
        Ok(())
    }
}

/// The 36 starting dots for a board of side `size`, centred with offset
/// `floor((size - 10) / 2)`.
pub fn initial_dots(size: usize) -> Vec<Coord> {
    let offset = (size.saturating_sub(CROSS_SPAN) / 2) as i32;
    CROSS_ROWS
        .iter()
        .enumerate()
        .flat_map(|(y, xs)| {
            xs.iter()
                .map(move |&x| Coord::new(x + offset, y as i32 + offset))
        })
        .collect()
}
