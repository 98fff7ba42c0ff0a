//! Ranked reward: binarise a game score against a percentile of recent scores.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_CAPACITY: usize = 200;
pub const DEFAULT_ALPHA: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RankedError {
    #[error("reward list is empty")]
    EmptyRewardList,
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("reward list capacity must be positive")]
    ZeroCapacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedRewardConfig {
    pub alpha: f64,
}

impl RankedRewardConfig {
    pub fn new(alpha: f64) -> Result<Self, RankedError> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self { alpha })
        } else {
            Err(RankedError::InvalidAlpha(alpha))
        }
    }
}

impl Default for RankedRewardConfig {
    fn default() -> Self {
        Self { alpha: DEFAULT_ALPHA }
    }
}

/// Bounded FIFO of recent game scores. Insertion order is kept so eviction is
/// by age.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardList {
    capacity: usize,
    entries: VecDeque<u32>,
}

impl RewardList {
    pub fn new(capacity: usize) -> Result<Self, RankedError> {
        if capacity == 0 {
            return Err(RankedError::ZeroCapacity);
        }
        Ok(Self { capacity, entries: VecDeque::with_capacity(capacity) })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Oldest first.
    pub fn entries(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().copied()
    }

    pub fn record_score(&mut self, score: u32) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(score);
    }

    /// The score at sorted index `min(floor(alpha * len), len - 1)`.
    pub fn threshold(&self, cfg: &RankedRewardConfig) -> Result<u32, RankedError> {
        if self.entries.is_empty() {
            return Err(RankedError::EmptyRewardList);
        }
        let mut sorted: Vec<u32> = self.entries.iter().copied().collect();
        sorted.sort_unstable();
        Ok(sorted[threshold_index(sorted.len(), cfg.alpha)])
    }

    pub fn min_max(&self) -> Option<(u32, u32)> {
        let min = self.entries.iter().min()?;
        let max = self.entries.iter().max()?;
        Some((*min, *max))
    }

    /// Immutable view handed to search workers.
    pub fn snapshot(&self, cfg: &RankedRewardConfig) -> RewardSnapshot {
        RewardSnapshot { threshold: self.threshold(cfg).ok() }
    }
}

fn threshold_index(len: usize, alpha: f64) -> usize {
    ((alpha * len as f64).floor() as usize).min(len - 1)
}

/// Frozen threshold used to value terminal positions during search. `None`
/// before any game has been recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RewardSnapshot {
    pub threshold: Option<u32>,
}

impl RewardSnapshot {
    pub fn with_threshold(threshold: u32) -> Self {
        Self { threshold: Some(threshold) }
    }

    /// Ranked value of a finished game. Without a threshold every score counts
    /// as neutral.
    pub fn terminal_value<R: Rng + ?Sized>(&self, score: u32, rng: &mut R) -> f32 {
        match self.threshold {
            Some(t) => f32::from(rank(score, t, rng)),
            None => 0.0,
        }
    }
}

/// `+1` above the threshold, `-1` below, a fair coin on a tie.
pub fn rank<R: Rng + ?Sized>(score: u32, threshold: u32, rng: &mut R) -> i8 {
    use std::cmp::Ordering::*;
    match score.cmp(&threshold) {
        Greater => 1,
        Less => -1,
        Equal => {
            if rng.random_bool(0.5) {
                1
            } else {
                -1
            }
        }
    }
}
