//! Tree search from the starting cross with an untrained network, against a
//! reward threshold taken from random games.
//!
//! cargo run --release --example tree_search -- [simulations]

use morpion_r2::mcts::{argmax, best_line, search, SearchParams};
use morpion_r2::model::{ModelConfig, PolicyValueModel};
use morpion_r2::playout::random_playout;
use morpion_r2::{index_to_line, Board, RankedRewardConfig, RewardList, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let simulations: usize = std::env::args().nth(1).map_or(Ok(100), |s| s.parse())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let net = PolicyValueModel::for_board(16, ModelConfig { channels: 16, blocks: 2, ..ModelConfig::default() }, &mut rng);

    let mut rewards = RewardList::new(100)?;
    for _ in 0..100 {
        rewards.record_score(random_playout(16, Variant::FiveD, &mut rng)?.score() as u32);
    }
    let snapshot = rewards.snapshot(&RankedRewardConfig::default());
    println!("threshold from random games: {:?}", snapshot.threshold);

    let root = Board::new(16, Variant::FiveD)?;
    let params = SearchParams::with_simulations(simulations);
    let result = search(&root, &net, &params, &snapshot, &mut rng)?;
    let mut visits = result.visits.clone();
    visits.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    for &(a, n) in visits.iter().take(5) {
        let line = index_to_line(a as usize, 16)?;
        println!("  {} {:>2}: {n} visits", line.origin, line.dir);
    }
    println!("most visited action {}", argmax(&result.policy));

    let record = best_line(&root, &net, &params, &snapshot, &mut rng)?;
    println!("full game with {simulations} simulations per move: score {}", record.verify()?);
    Ok(())
}
