//! Builds a policy-value network, fits it to a handful of labelled positions
//! and round-trips it through a checkpoint file.

use morpion_r2::model::{
    encode, legal_mask, load_checkpoint_for_board, masked_policy, save_checkpoint, ModelConfig, PolicyValueModel,
    TrainingExample,
};
use morpion_r2::playout::random_playout;
use morpion_r2::{action_count, action_index, Board, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = ModelConfig { channels: 16, blocks: 2, epochs: 30, batch_size: 16, learning_rate: 0.02, ..ModelConfig::default() };
    let mut net = PolicyValueModel::for_board(16, cfg, &mut rng);
    println!("{} parameters", net.param_count());

    // Label every position of one random game with the move that was played.
    let game = random_playout(16, Variant::FiveD, &mut rng)?;
    let mut board = Board::new(16, Variant::FiveD)?;
    let mut examples = Vec::new();
    for &m in game.history() {
        let mut pi = vec![0.0; action_count(16)];
        pi[action_index(&m, 16)] = 1.0;
        examples.push(TrainingExample { encoding: encode(&board), pi, z: 1 });
        board.apply(m)?;
    }

    let report = net.train(&examples, &cfg, &mut rng);
    println!("loss per epoch: {:.3} -> {:.3}", report.epoch_losses[0], report.final_loss());

    let start = Board::new(16, Variant::FiveD)?;
    let (raw, value) = net.predict_board(&start)?;
    let policy = masked_policy(&raw, &legal_mask(&start))?;
    let first = action_index(&game.history()[0], 16);
    println!("start position: value {value:.3}, probability of the recorded first move {:.3}", policy[first]);

    let path = std::env::temp_dir().join("morpion-example.ckpt");
    save_checkpoint(&net, &path)?;
    let loaded: PolicyValueModel = load_checkpoint_for_board(&path, 16)?;
    assert_eq!(loaded.predict_board(&start)?, net.predict_board(&start)?);
    println!("checkpoint written to {} and reloaded", path.display());
    Ok(())
}
