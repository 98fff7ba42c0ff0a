//! Fixed addressing of line positions for policy vectors.
//!
//! Layout, for a board of side `n`:
//!
//! ```text
//! E   origins x in [0, n-5], y in [0, n-1]    n*(n-4) entries
//! S   origins x in [0, n-1], y in [0, n-5]    n*(n-4) entries
//! SE  origins x in [0, n-5], y in [0, n-5]    (n-4)^2 entries
//! NE  origins x in [0, n-5], y in [4, n-1]    (n-4)^2 entries
//! ```
//!
//! Each block is row-major (y outer, x inner).

use crate::board::Move;
use crate::geometry::{Coord, Direction, Line};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActionError {
    #[error("action index {index} out of range for board {size} (limit {limit})")]
    InvalidActionIndex { index: usize, size: usize, limit: usize },
    #[error("line {0:?} is not inside the board")]
    LineOutOfBounds(Line),
}

/// Size of the action space, `2n(n-4) + 2(n-4)^2`.
pub const fn action_count(n: usize) -> usize {
    2 * n * (n - 4) + 2 * (n - 4) * (n - 4)
}

/// (first y, block width, block height)
const fn block_shape(dir: Direction, n: usize) -> (usize, usize, usize) {
    match dir {
        Direction::E => (0, n - 4, n),
        Direction::S => (0, n, n - 4),
        Direction::SE => (0, n - 4, n - 4),
        Direction::NE => (4, n - 4, n - 4),
    }
}

const fn block_start(dir: Direction, n: usize) -> usize {
    let long = n * (n - 4);
    let short = (n - 4) * (n - 4);
    match dir {
        Direction::E => 0,
        Direction::S => long,
        Direction::SE => 2 * long,
        Direction::NE => 2 * long + short,
    }
}

pub fn line_index(line: Line, n: usize) -> Result<usize, ActionError> {
    if !line.in_bounds(n) {
        return Err(ActionError::LineOutOfBounds(line));
    }
    let (y0, width, _) = block_shape(line.dir, n);
    let x = line.origin.x as usize;
    let y = line.origin.y as usize - y0;
    Ok(block_start(line.dir, n) + y * width + x)
}

/// Index of a move's line. Moves produced by a board of side `n` are always
/// in range.
pub fn action_index(m: &Move, n: usize) -> usize {
    line_index(m.line(), n).expect("move line lies on the board")
}

pub fn index_to_line(index: usize, n: usize) -> Result<Line, ActionError> {
    let limit = action_count(n);
    if index >= limit {
        return Err(ActionError::InvalidActionIndex { index, size: n, limit });
    }
    let dir = Direction::ALL
        .into_iter()
        .rev()
        .find(|&d| block_start(d, n) <= index)
        .expect("block E starts at zero");
    let (y0, width, _) = block_shape(dir, n);
    let offset = index - block_start(dir, n);
    let origin = Coord::new((offset % width) as i32, (offset / width + y0) as i32);
    Ok(Line::new(origin, dir))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_counts() {
        assert_eq!(action_count(22), 1440);
        assert_eq!(action_count(16), 672);
        assert_eq!(action_count(20), 1152);
    }

    #[test]
    fn bijection_covers_every_in_bounds_line() {
        for n in [6, 12, 16] {
            let mut seen = vec![false; action_count(n)];
            let mut lines = 0;
            for dir in Direction::ALL {
                for y in 0..n as i32 {
                    for x in 0..n as i32 {
                        let line = Line::new(Coord::new(x, y), dir);
                        if !line.in_bounds(n) {
                            assert!(line_index(line, n).is_err());
                            continue;
                        }
                        let i = line_index(line, n).unwrap();
                        assert!(!seen[i]);
                        seen[i] = true;
                        lines += 1;
                        assert_eq!(index_to_line(i, n).unwrap(), line);
                    }
                }
            }
            assert_eq!(lines, action_count(n));
        }
    }

    #[test]
    fn out_of_range_index() {
        assert!(matches!(
            index_to_line(1440, 22),
            Err(ActionError::InvalidActionIndex { index: 1440, .. })
        ));
    }

    #[test]
    fn ordering_matches_direction_major_row_major() {
        let n = 16;
        let lines: Vec<Line> = (0..action_count(n)).map(|i| index_to_line(i, n).unwrap()).collect();
        for w in lines.windows(2) {
            let key = |l: &Line| (l.dir, l.origin.y, l.origin.x);
            assert!(key(&w[0]) < key(&w[1]));
        }
    }
}
