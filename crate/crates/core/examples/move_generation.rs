//! Walks through the rules: the starting cross, legal moves, applying and
//! undoing, and why a candidate move is rejected.

use morpion_r2::{Board, Coord, Direction, Move, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for variant in [Variant::FiveD, Variant::FiveT] {
        let mut board = Board::new(16, variant)?;
        println!("{variant}: {} dots, {} legal moves", board.occupied_count(), board.legal_moves().len());

        let first = Move::new(Coord::new(3, 6), Direction::E, Coord::new(7, 6));
        board.apply(first)?;
        println!("  played {first}");

        let touching = Move::new(Coord::new(7, 6), Direction::E, Coord::new(8, 6));
        match board.check(&touching) {
            Ok(()) => println!("  {touching} is legal"),
            Err(reason) => println!("  {touching} is illegal: {reason}"),
        }
        let overlapping = Move::new(Coord::new(4, 6), Direction::E, Coord::new(8, 6));
        if let Err(reason) = board.check(&overlapping) {
            println!("  {overlapping} is illegal: {reason}");
        }

        let undone = board.undo()?;
        println!("  undid {undone}, back to {} legal moves", board.legal_moves().len());
    }
    Ok(())
}
