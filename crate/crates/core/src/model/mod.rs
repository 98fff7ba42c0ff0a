//! The policy-value model: position encoding, network, masking, training and
//! checkpoints.

mod checkpoint;
mod encode;
mod net;
mod scalar;
mod train;

use serde::{Deserialize, Serialize};

pub use checkpoint::{load_checkpoint, load_checkpoint_for_board, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use encode::{encode, StateEncoding, ENCODING_PLANES};
pub use net::{Arch, Layout, PolicyValueNet, Tensor};
pub use scalar::Scalar;
pub use train::{Sample, TrainReport, TrainingExample};

use crate::board::Board;

/// Probabilities over the full action space of one board size.
pub type PolicyVector = Vec<f32>;

/// The network used for play and training.
pub type PolicyValueModel = PolicyValueNet<f32>;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("no legal actions to mask onto")]
    NoLegalActions,
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub channels: usize,
    pub blocks: usize,
    pub l2: f64,
    pub policy_channels: usize,
    pub value_hidden: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            batch_size: 64,
            learning_rate: 0.005,
            dropout: 0.3,
            channels: 32,
            blocks: 4,
            l2: 1e-4,
            policy_channels: 8,
            value_hidden: 64,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: &str| Err(ModelError::InvalidConfig(msg.to_string()));
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch size must be positive");
        }
        if self.channels == 0 || self.policy_channels == 0 || self.value_hidden == 0 {
            return bad("layer widths must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad("l2 coefficient must be finite and non-negative");
        }
        Ok(())
    }
}

impl<F: Scalar> PolicyValueNet<F> {
    /// A fresh network for boards of side `size`, taking the standard encoding.
    pub fn for_board<R: rand::Rng + ?Sized>(size: usize, config: ModelConfig, rng: &mut R) -> Self {
        Self::new(Arch::new(size, ENCODING_PLANES, &config), config, rng)
    }

    /// Raw policy over all actions (before masking) and value in `[-1, 1]`.
    pub fn predict(&self, enc: &StateEncoding) -> Result<(PolicyVector, f32), ModelError> {
        if enc.size != self.arch().size {
            return Err(ModelError::ShapeMismatch { expected: self.arch().size, found: enc.size });
        }
        let input: Vec<F> = enc.planes.iter().map(|&b| F::from_f64(b as f64)).collect();
        self.evaluate_input(&input)
    }

    pub fn predict_board(&self, board: &Board) -> Result<(PolicyVector, f32), ModelError> {
        self.predict(&encode(board))
    }
}

/// Zeroes illegal entries and renormalises. Falls back to uniform over the
/// legal actions when they carry no mass.
pub fn masked_policy(raw: &[f32], legal: &[bool]) -> Result<PolicyVector, ModelError> {
    if raw.len() != legal.len() {
        return Err(ModelError::ShapeMismatch { expected: legal.len(), found: raw.len() });
    }
    let count = legal.iter().filter(|&&l| l).count();
    if count == 0 {
        return Err(ModelError::NoLegalActions);
    }
    let total: f64 = raw
        .iter()
        .zip(legal)
        .filter(|(_, &l)| l)
        .map(|(&p, _)| p.max(0.0) as f64)
        .sum();
    let out = if total > 0.0 && total.is_finite() {
        raw.iter()
            .zip(legal)
            .map(|(&p, &l)| if l { (p.max(0.0) as f64 / total) as f32 } else { 0.0 })
            .collect()
    } else {
        let u = 1.0 / count as f32;
        legal.iter().map(|&l| if l { u } else { 0.0 }).collect()
    };
    Ok(out)
}

/// Legal-action mask for `board` in action-space order.
pub fn legal_mask(board: &Board) -> Vec<bool> {
    let mut mask = vec![false; crate::action::action_count(board.size())];
    for m in board.legal_moves() {
        mask[crate::action::action_index(&m, board.size())] = true;
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Variant;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_config() -> ModelConfig {
        ModelConfig { channels: 8, blocks: 1, ..ModelConfig::default() }
    }

    #[test]
    fn masking_rules() {
        let raw = vec![0.25f32; 4];
        let legal = [true, false, true, true];
        let masked = masked_policy(&raw, &legal).unwrap();
        for (i, p) in masked.iter().enumerate() {
            let want = if legal[i] { 1.0 / 3.0 } else { 0.0 };
            assert!((p - want).abs() < 1e-6);
        }
        assert_eq!(masked_policy(&masked, &legal).unwrap(), masked);

        let raw = vec![0.0, 1.0, 0.0, 0.0];
        let fallback = masked_policy(&raw, &legal).unwrap();
        assert_eq!(fallback[1], 0.0);
        assert!((fallback[0] - 1.0 / 3.0).abs() < 1e-6);

        assert!(matches!(masked_policy(&raw, &[false; 4]), Err(ModelError::NoLegalActions)));
    }

    #[test]
    fn predict_outputs_distribution_and_bounded_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = PolicyValueModel::for_board(16, small_config(), &mut rng);
        let mut board = Board::new(16, Variant::FiveD).unwrap();
        for _ in 0..4 {
            let (policy, value) = net.predict_board(&board).unwrap();
            let sum: f64 = policy.iter().map(|&p| p as f64).sum();
            assert!((sum - 1.0).abs() < 1e-5);
            assert!(policy.iter().all(|&p| p >= 0.0));
            assert!((-1.0..=1.0).contains(&value));
            let m = board.legal_moves()[0];
            board.apply(m).unwrap();
        }
    }

    #[test]
    fn predict_rejects_other_board_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = PolicyValueModel::for_board(16, small_config(), &mut rng);
        let board = Board::new(20, Variant::FiveD).unwrap();
        assert!(matches!(net.predict_board(&board), Err(ModelError::ShapeMismatch { .. })));
    }

    #[test]
    fn predict_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = PolicyValueModel::for_board(16, small_config(), &mut rng);
        let board = Board::new(16, Variant::FiveD).unwrap();
        assert_eq!(net.predict_board(&board).unwrap(), net.predict_board(&board).unwrap());
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        assert!(ModelConfig { dropout: 1.0, ..ModelConfig::default() }.validate().is_err());
        assert!(ModelConfig { batch_size: 0, ..ModelConfig::default() }.validate().is_err());
    }
}
