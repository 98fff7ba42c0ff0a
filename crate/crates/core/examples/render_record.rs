//! Renders a solution record, or a fresh random game when no path is given,
//! as a text grid and an SVG file.
//!
//! cargo run --example render_record -- [record.rec] [steps]

use morpion_r2::playout::random_playout;
use morpion_r2::render::{svg, text_grid};
use morpion_r2::{SolutionRecord, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let record = match args.next() {
        Some(path) => SolutionRecord::read(path)?,
        None => SolutionRecord::from_board(&random_playout(16, Variant::FiveT, &mut ChaCha8Rng::seed_from_u64(3))?),
    };
    let steps = args.next().map(|s| s.parse()).transpose()?;
    let board = record.replay(steps)?;
    print!("{}", text_grid(&board));
    let out = std::env::temp_dir().join("morpion-render.svg");
    std::fs::write(&out, svg(&board))?;
    println!("{} of {} moves drawn, SVG at {}", board.score(), record.len(), out.display());
    Ok(())
}
