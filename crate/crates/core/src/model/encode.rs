use crate::board::Board;
use crate::geometry::{Coord, Direction};

/// Planes per encoded position: occupancy, one point-usage plane per
/// direction, and a constant plane.
pub const ENCODING_PLANES: usize = 6;

/// Binary feature planes of one position, plane-major then row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateEncoding {
    pub size: usize,
    pub planes: Vec<u8>,
}

impl StateEncoding {
    pub fn plane(&self, k: usize) -> &[u8] {
        let cells = self.size * self.size;
        &self.planes[k * cells..(k + 1) * cells]
    }
}

pub fn encode(board: &Board) -> StateEncoding {
    let n = board.size();
    let cells = n * n;
    let mut planes = vec![0u8; ENCODING_PLANES * cells];
    for y in 0..n {
        for x in 0..n {
            let p = Coord::new(x as i32, y as i32);
            let i = y * n + x;
            planes[i] = board.is_occupied(p) as u8;
            for d in Direction::ALL {
                planes[(1 + d.index()) * cells + i] = board.point_used(p, d) as u8;
            }
            planes[5 * cells + i] = 1;
        }
    }
    StateEncoding { size: n, planes }
}
