//! A short self-play training run on a small board, checkpointed to a
//! temporary directory.
//!
//! cargo run --release --example selfplay_loop -- [iterations]

use morpion_r2::model::ModelConfig;
use morpion_r2::selfplay::{train_loop, TrainLoopConfig, METRICS_HEADER};
use morpion_r2::Variant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let iterations: usize = std::env::args().nth(1).map_or(Ok(3), |s| s.parse())?;
    let cfg = TrainLoopConfig {
        iterations,
        episodes: 8,
        board: 16,
        variant: Variant::FiveD,
        reward_capacity: 50,
        record_simulations: 30,
        seed: 1,
        model: ModelConfig { channels: 16, blocks: 2, epochs: 2, ..ModelConfig::default() },
        ..TrainLoopConfig::default()
    };
    let dir = std::env::temp_dir().join("morpion-selfplay-example");
    println!("{METRICS_HEADER}");
    let outcome = train_loop(&cfg, Some(&dir), false, |m| println!("{}", m.csv_row()))?;
    let best = outcome.best.map_or(0, |r| r.len());
    println!("best record {best} moves; checkpoint, metrics and record in {}", dir.display());
    Ok(())
}
