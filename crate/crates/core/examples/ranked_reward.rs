//! Turns raw game scores into +1/-1 rewards against a percentile of recent
//! scores.

use morpion_r2::playout::random_playout;
use morpion_r2::{rank, RankedRewardConfig, RewardList, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RankedRewardConfig::new(0.75)?;
    let mut list = RewardList::new(20)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for game in 1..=30 {
        let score = random_playout(16, Variant::FiveD, &mut rng)?.score() as u32;
        list.record_score(score);
        let threshold = list.threshold(&cfg)?;
        let z = rank(score, threshold, &mut rng);
        println!("game {game:>2}: score {score:>3}  threshold {threshold:>3}  reward {z:+}");
    }
    let (lo, hi) = list.min_max().unwrap_or_default();
    println!("list holds the last {} scores, range {lo}..={hi}", list.len());
    Ok(())
}
