//! Uniformly random games, used as a baseline and for benchmarks.

use rand::Rng;

use crate::board::{Board, BoardError, Variant};

/// Plays uniformly random legal moves from `board` until none remain.
pub fn random_playout_from<R: Rng + ?Sized>(mut board: Board, rng: &mut R) -> Board {
    let mut moves = Vec::new();
    loop {
        board.legal_moves_into(&mut moves);
        if moves.is_empty() {
            return board;
        }
        let m = moves[rng.random_range(0..moves.len())];
        board.apply(m).expect("generated move is legal");
    }
}

/// A random game from the initial cross.
pub fn random_playout<R: Rng + ?Sized>(size: usize, variant: Variant, rng: &mut R) -> Result<Board, BoardError> {
    Ok(random_playout_from(Board::new(size, variant)?, rng))
}
