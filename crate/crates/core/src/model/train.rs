//! Minibatch SGD on `(z - v)^2 - pi . log p + l2 * |theta|^2`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::encode::StateEncoding;
use super::net::PolicyValueNet;
use super::scalar::Scalar;
use super::ModelConfig;

/// One stored position with its policy target and ranked reward.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub encoding: StateEncoding,
    pub pi: Vec<f32>,
    pub z: i8,
}

/// A training example converted to the network's scalar type.
#[derive(Debug, Clone)]
pub struct Sample<F> {
    pub input: Vec<F>,
    pub pi: Vec<F>,
    pub z: F,
}

impl<F: Scalar> Sample<F> {
    pub fn from_example(ex: &TrainingExample) -> Self {
        Self {
            input: ex.encoding.planes.iter().map(|&b| F::from_f64(b as f64)).collect(),
            pi: ex.pi.iter().map(|&p| F::from_f64(p as f64)).collect(),
            z: F::from_f64(ex.z as f64),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean minibatch loss of each epoch, penalty included.
    pub epoch_losses: Vec<f64>,
    pub batches: usize,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(f64::NAN)
    }
}

fn example_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

impl<F: Scalar> PolicyValueNet<F> {
    fn penalty(&self, l2: f64) -> F {
        let sq = self.params.iter().fold(F::zero(), |s, &p| s + p * p);
        F::from_f64(l2) * sq
    }

    /// Mean batch loss plus weight penalty. With `dropout_seed`, example `i`
    /// draws its dropout masks from a stream derived from `(seed, i)`, so
    /// repeated calls see identical masks.
    pub fn batch_loss(&self, batch: &[Sample<F>], l2: f64, dropout_seed: Option<u64>) -> F {
        let scale = F::from_f64(1.0 / batch.len() as f64);
        let data = batch.iter().enumerate().fold(F::zero(), |acc, (i, s)| {
            let cache = match dropout_seed {
                Some(seed) => self.forward(&s.input, Some(&mut example_rng(seed, i))),
                None => self.forward::<ChaCha8Rng>(&s.input, None),
            };
            let (v, ce) = Self::example_loss(&cache, &s.pi, s.z);
            acc + (v + ce) * scale
        });
        data + self.penalty(l2)
    }

    /// [`Self::batch_loss`] together with its gradient.
    pub fn loss_and_gradient(&self, batch: &[Sample<F>], l2: f64, dropout_seed: Option<u64>) -> (F, Vec<F>) {
        let scale = F::from_f64(1.0 / batch.len() as f64);
        let mut grad = vec![F::zero(); self.params.len()];
        let mut data = F::zero();
        for (i, s) in batch.iter().enumerate() {
            let cache = match dropout_seed {
                Some(seed) => self.forward(&s.input, Some(&mut example_rng(seed, i))),
                None => self.forward::<ChaCha8Rng>(&s.input, None),
            };
            let (v, ce) = Self::example_loss(&cache, &s.pi, s.z);
            data += (v + ce) * scale;
            self.backward(&cache, &s.pi, s.z, scale, &mut grad);
        }
        let coeff = F::from_f64(2.0 * l2);
        for (g, &p) in grad.iter_mut().zip(&self.params) {
            *g += coeff * p;
        }
        (data + self.penalty(l2), grad)
    }

    /// Runs `cfg.epochs` epochs of shuffled minibatch SGD. Each epoch walks
    /// the examples in a fresh random order, `ceil(len / batch)` batches.
    pub fn train<R: Rng + ?Sized>(&mut self, examples: &[TrainingExample], cfg: &ModelConfig, rng: &mut R) -> TrainReport {
        let mut report = TrainReport::default();
        if examples.is_empty() {
            return report;
        }
        let lr = F::from_f64(cfg.learning_rate);
        let mut order: Vec<usize> = (0..examples.len()).collect();
        for _ in 0..cfg.epochs {
            order.shuffle(rng);
            let mut total = 0.0;
            let mut batches = 0;
            for chunk in order.chunks(cfg.batch_size.max(1)) {
                let batch: Vec<Sample<F>> = chunk.iter().map(|&i| Sample::from_example(&examples[i])).collect();
                let seed = rng.random::<u64>();
                let (loss, grad) = self.loss_and_gradient(&batch, cfg.l2, Some(seed));
                for (p, g) in self.params.iter_mut().zip(&grad) {
                    *p -= lr * *g;
                }
                total += loss.to_f64();
                batches += 1;
            }
            report.epoch_losses.push(total / batches as f64);
            report.batches += batches;
        }
        report
    }

    /// Mean loss over `examples` in inference mode.
    pub fn evaluate_loss(&self, examples: &[TrainingExample]) -> f64 {
        let batch: Vec<Sample<F>> = examples.iter().map(Sample::from_example).collect();
        self.batch_loss(&batch, self.config().l2, None).to_f64()
    }
}
