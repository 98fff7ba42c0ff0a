#![allow(dead_code)]

use std::collections::BTreeSet;

use morpion_r2::board::initial_dots;
use morpion_r2::{Board, Coord, Direction, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(origin x, origin y, direction index, new dot x, new dot y)`.
pub type Candidate = (i32, i32, usize, i32, i32);

fn points(x: i32, y: i32, dir: Direction) -> [(i32, i32); 5] {
    let (dx, dy) = dir.delta();
    std::array::from_fn(|k| (x + dx * k as i32, y + dy * k as i32))
}

/// Every legal move of `board`, found by trying every possible line and
/// checking the rules against the move history only.
pub fn brute_force_moves(board: &Board) -> BTreeSet<Candidate> {
    let n = board.size() as i32;
    let mut dots: BTreeSet<(i32, i32)> = initial_dots(board.size()).iter().map(|c| (c.x, c.y)).collect();
    let mut drawn: Vec<(Direction, BTreeSet<(i32, i32)>)> = Vec::new();
    for m in board.history() {
        dots.insert((m.new_dot.x, m.new_dot.y));
        drawn.push((m.dir, points(m.origin.x, m.origin.y, m.dir).into_iter().collect()));
    }
    let mut out = BTreeSet::new();
    for dir in Direction::ALL {
        for y in 0..n {
            for x in 0..n {
                let pts = points(x, y, dir);
                if pts.iter().any(|&(px, py)| px < 0 || py < 0 || px >= n || py >= n) {
                    continue;
                }
                let empty: Vec<_> = pts.iter().filter(|p| !dots.contains(p)).collect();
                if empty.len() != 1 {
                    continue;
                }
                let limit = match board.variant() {
                    Variant::FiveD => 1,
                    Variant::FiveT => 2,
                };
                let blocked = drawn
                    .iter()
                    .filter(|(d, _)| *d == dir)
                    .any(|(_, line)| pts.iter().filter(|p| line.contains(p)).count() >= limit);
                if !blocked {
                    out.insert((x, y, dir.index(), empty[0].0, empty[0].1));
                }
            }
        }
    }
    out
}

pub fn engine_moves(board: &Board) -> BTreeSet<Candidate> {
    board
        .legal_moves()
        .iter()
        .map(|m| (m.origin.x, m.origin.y, m.dir.index(), m.new_dot.x, m.new_dot.y))
        .collect()
}

/// A position reached by a random number of uniformly random moves.
pub fn random_position(size: usize, variant: Variant, rng: &mut ChaCha8Rng) -> Board {
    let mut board = Board::new(size, variant).unwrap();
    let stop = rng.random_range(0..=80);
    for _ in 0..stop {
        let moves = board.legal_moves();
        if moves.is_empty() {
            break;
        }
        board.apply(moves[rng.random_range(0..moves.len())]).unwrap();
    }
    board
}

/// `(file, first bad step, reason)` for every illegal record in the corpus.
pub const ILLEGAL_CORPUS: &[(&str, usize, &str)] = &[
    ("illegal_point_reuse_se_step7.rec", 7, "point reuse in direction SE"),
    ("illegal_touching_5d_step2.rec", 2, "point reuse in direction E"),
    ("illegal_overlap_5t_step2.rec", 2, "segment overlap in direction E"),
    ("illegal_dot_count_step1.rec", 1, "dot count mismatch: 0 of 4 required dots present"),
    ("illegal_out_of_bounds_step2.rec", 2, "line out of bounds"),
    ("illegal_occupied_step1.rec", 1, "new dot already occupied"),
    ("illegal_off_line_step1.rec", 1, "new dot not on line"),
];

pub fn data_record(name: &str) -> morpion_r2::SolutionRecord {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    morpion_r2::SolutionRecord::read(path).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn coord(x: i32, y: i32) -> Coord {
    Coord::new(x, y)
}

pub mod grad {
    use morpion_r2::model::{Arch, ModelConfig, PolicyValueNet, Sample};
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    pub const STEP: f64 = 1e-5;
    pub const MAX_REL_ERR: f64 = 1e-4;

    /// Production architecture at toy size, in f64.
    pub fn toy_net(seed: u64) -> PolicyValueNet<f64> {
        let cfg = ModelConfig {
            channels: 4,
            blocks: 2,
            policy_channels: 3,
            value_hidden: 8,
            dropout: 0.3,
            l2: 1e-3,
            ..ModelConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = PolicyValueNet::<f64>::new(Arch::new(6, 3, &cfg), cfg, &mut rng);
        // Keeps ReLU inputs off their kink at zero.
        let noise = Normal::new(0.0, 0.1).unwrap();
        for p in net.params_mut() {
            *p += noise.sample(&mut rng);
        }
        net
    }

    pub fn toy_batch(net: &PolicyValueNet<f64>, rng: &mut ChaCha8Rng, len: usize) -> Vec<Sample<f64>> {
        let a = *net.arch();
        (0..len)
            .map(|_| {
                let input = (0..a.in_planes * a.cells())
                    .map(|_| if rng.random_bool(0.4) { 1.0 } else { 0.0 })
                    .collect();
                let raw: Vec<f64> = (0..a.actions()).map(|_| rng.random::<f64>().powi(3)).collect();
                let total: f64 = raw.iter().sum();
                let pi = raw.iter().map(|r| r / total).collect();
                let z = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                Sample { input, pi, z }
            })
            .collect()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        let scale = a.abs().max(b.abs());
        if scale < 1e-9 {
            (a - b).abs()
        } else {
            (a - b).abs() / scale
        }
    }

    /// Compares backprop with central differences on `count` random
    /// parameters. Returns the relative error of each one checked.
    pub fn check(seed: u64, count: usize) -> Vec<(usize, f64, f64, f64)> {
        let net = toy_net(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let batch = toy_batch(&net, &mut rng, 3);
        let l2 = net.config().l2;
        let dropout_seed = Some(seed.wrapping_mul(31) + 7);
        let (_, grad) = net.loss_and_gradient(&batch, l2, dropout_seed);
        let mut probe = net.clone();
        sample(&mut rng, net.param_count(), count)
            .iter()
            .map(|i| {
                let orig = probe.params()[i];
                probe.params_mut()[i] = orig + STEP;
                let up = probe.batch_loss(&batch, l2, dropout_seed);
                probe.params_mut()[i] = orig - STEP;
                let down = probe.batch_loss(&batch, l2, dropout_seed);
                probe.params_mut()[i] = orig;
                let numeric = (up - down) / (2.0 * STEP);
                (i, grad[i], numeric, rel_err(grad[i], numeric))
            })
            .collect()
    }
}
