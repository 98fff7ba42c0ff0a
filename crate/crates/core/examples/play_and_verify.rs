//! Plays a random game, saves it as a solution record, reads it back and
//! verifies it.
//!
//! cargo run --example play_and_verify -- [board] [5D|5T] [seed]

use morpion_r2::playout::random_playout;
use morpion_r2::render::text_grid;
use morpion_r2::{SolutionRecord, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let size: usize = args.next().map_or(Ok(16), |s| s.parse())?;
    let variant: Variant = args.next().map_or(Ok(Variant::FiveD), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse())?;

    let board = random_playout(size, variant, &mut ChaCha8Rng::seed_from_u64(seed))?;
    println!("{}", text_grid(&board));

    let record = SolutionRecord::from_board(&board);
    let path = std::env::temp_dir().join(format!("morpion-{variant}-{size}-{seed}.rec"));
    record.write(&path)?;
    let score = SolutionRecord::read(&path)?.verify()?;
    println!("random {variant} game on {size}x{size}: {score} moves, record at {}", path.display());
    Ok(())
}
