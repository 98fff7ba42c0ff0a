//! Single-player PUCT search.
//!
//! Each simulation descends from the root by
//! `argmax_a q(a) + c * p(a) * sqrt(sum_b n(b)) / (1 + n(a))`, lowest action
//! index winning ties, until it reaches an unexpanded or finished position.
//! New positions are valued by the [`Evaluator`]; finished games are valued by
//! their ranked reward against a frozen threshold. Values are backed up
//! unchanged along the path since there is no opponent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::action::{action_count, action_index, index_to_line};
use crate::board::{Board, Move};
use crate::model::{masked_policy, ModelError, PolicyValueNet, PolicyVector, Scalar};
use crate::ranked::RewardSnapshot;
use crate::record::SolutionRecord;

/// Anything that can score a position: raw policy over the full action space
/// plus a value in `[-1, 1]`.
pub trait Evaluator: Sync {
    fn evaluate(&self, board: &Board) -> Result<(PolicyVector, f32), ModelError>;
}

impl<F: Scalar> Evaluator for PolicyValueNet<F> {
    fn evaluate(&self, board: &Board) -> Result<(PolicyVector, f32), ModelError> {
        self.predict_board(board)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, board: &Board) -> Result<(PolicyVector, f32), ModelError> {
        (**self).evaluate(board)
    }
}

/// Uniform priors and a neutral value everywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformEvaluator;

impl Evaluator for UniformEvaluator {
    fn evaluate(&self, board: &Board) -> Result<(PolicyVector, f32), ModelError> {
        let a = action_count(board.size());
        Ok((vec![1.0 / a as f32; a], 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletNoise {
    pub alpha: f32,
    pub fraction: f32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub simulations: usize,
    pub c_puct: f32,
    /// Root prior noise; off unless set.
    pub dirichlet: Option<DirichletNoise>,
    /// Independent trees whose visit distributions are averaged.
    pub root_trees: usize,
}

impl SearchParams {
    /// Simulations per move for the once-per-iteration record attempt.
    pub const RECORD_SIMULATIONS: usize = 20_000;
    /// Simulations per move when search is used during self-play.
    pub const SELFPLAY_SIMULATIONS: usize = 100;

    pub fn with_simulations(simulations: usize) -> Self {
        Self { simulations, ..Self::default() }
    }
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            simulations: Self::RECORD_SIMULATIONS,
            c_puct: 1.0,
            dirichlet: None,
            root_trees: 1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("cannot search from a finished position")]
    TerminalRoot,
    #[error("search needs at least one simulation")]
    NoSimulations,
    #[error(transparent)]
    Model(#[from] ModelError),
}

const NO_CHILD: u32 = u32::MAX;

struct Node {
    moves: Vec<Move>,
    actions: Vec<u32>,
    prior: Vec<f32>,
    visits: Vec<u32>,
    value_sum: Vec<f32>,
    children: Vec<u32>,
    total: u32,
}

impl Node {
    fn terminal() -> Self {
        Node {
            moves: Vec::new(),
            actions: Vec::new(),
            prior: Vec::new(),
            visits: Vec::new(),
            value_sum: Vec::new(),
            children: Vec::new(),
            total: 0,
        }
    }

    fn is_terminal(&self) -> bool {
        self.moves.is_empty()
    }

    fn select(&self, c_puct: f32) -> usize {
        let sqrt_total = (self.total as f32).sqrt();
        let mut best = 0;
        let mut best_score = f32::NEG_INFINITY;
        for i in 0..self.moves.len() {
            let n = self.visits[i];
            let q = if n > 0 { self.value_sum[i] / n as f32 } else { 0.0 };
            let score = q + c_puct * self.prior[i] * sqrt_total / (1.0 + n as f32);
            if score > best_score {
                best_score = score;
                best = i;
            }
        }
        best
    }
}

struct Tree<'a, E: ?Sized> {
    nodes: Vec<Node>,
    evaluator: &'a E,
    rewards: RewardSnapshot,
}

impl<'a, E: Evaluator + ?Sized> Tree<'a, E> {
    /// Expands the position on `board`, returning the node id and its value.
    fn expand<R: Rng + ?Sized>(&mut self, board: &Board, rng: &mut R) -> Result<(u32, f32), ModelError> {
        let moves = board.legal_moves();
        let id = self.nodes.len() as u32;
        if moves.is_empty() {
            self.nodes.push(Node::terminal());
            let v = self.rewards.terminal_value(board.score() as u32, rng);
            return Ok((id, v));
        }
        let (raw, value) = self.evaluator.evaluate(board)?;
        let n = board.size();
        let actions: Vec<u32> = moves.iter().map(|m| action_index(m, n) as u32).collect();
        let mut mask = vec![false; raw.len()];
        for &a in &actions {
            mask[a as usize] = true;
        }
        let masked = masked_policy(&raw, &mask)?;
        let prior = actions.iter().map(|&a| masked[a as usize]).collect();
        let k = moves.len();
        self.nodes.push(Node {
            moves,
            actions,
            prior,
            visits: vec![0; k],
            value_sum: vec![0.0; k],
            children: vec![NO_CHILD; k],
            total: 0,
        });
        Ok((id, value.clamp(-1.0, 1.0)))
    }

    fn simulate<R: Rng + ?Sized>(&mut self, board: &mut Board, c_puct: f32, rng: &mut R) -> Result<(), ModelError> {
        let mut path: Vec<(u32, usize)> = Vec::new();
        let mut node = 0u32;
        let value = loop {
            let i = self.nodes[node as usize].select(c_puct);
            path.push((node, i));
            let m = self.nodes[node as usize].moves[i];
            board.apply(m).expect("search only plays generated moves");
            let child = self.nodes[node as usize].children[i];
            if child == NO_CHILD {
                let (id, v) = self.expand(board, rng)?;
                self.nodes[node as usize].children[i] = id;
                break v;
            }
            node = child;
            if self.nodes[node as usize].is_terminal() {
                break self.rewards.terminal_value(board.score() as u32, rng);
            }
        };
        for &(id, i) in &path {
            let n = &mut self.nodes[id as usize];
            n.visits[i] += 1;
            n.value_sum[i] += value;
            n.total += 1;
            board.undo().expect("path moves were applied");
        }
        Ok(())
    }
}

fn add_dirichlet<R: Rng + ?Sized>(prior: &mut [f32], noise: DirichletNoise, rng: &mut R) {
    let gamma = Gamma::new(noise.alpha as f64, 1.0).expect("positive dirichlet alpha");
    let draws: Vec<f64> = prior.iter().map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total <= 0.0 {
        return;
    }
    for (p, d) in prior.iter_mut().zip(draws) {
        *p = (1.0 - noise.fraction) * *p + noise.fraction * (d / total) as f32;
    }
}

/// Visit counts at the root after one search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub policy: PolicyVector,
    pub visits: Vec<(u32, u32)>,
}

fn search_tree<E: Evaluator + ?Sized, R: Rng + ?Sized>(
    root: &Board,
    evaluator: &E,
    params: &SearchParams,
    rewards: &RewardSnapshot,
    rng: &mut R,
) -> Result<SearchResult, SearchError> {
    let mut tree = Tree { nodes: Vec::new(), evaluator, rewards: *rewards };
    let mut board = root.clone();
    tree.expand(&board, rng)?;
    if tree.nodes[0].is_terminal() {
        return Err(SearchError::TerminalRoot);
    }
    if let Some(noise) = params.dirichlet {
        add_dirichlet(&mut tree.nodes[0].prior, noise, rng);
    }
    for _ in 0..params.simulations {
        tree.simulate(&mut board, params.c_puct, rng)?;
    }
    let root_node = &tree.nodes[0];
    let mut policy = vec![0.0; action_count(root.size())];
    let total = root_node.total.max(1) as f32;
    for (&a, &n) in root_node.actions.iter().zip(&root_node.visits) {
        policy[a as usize] = n as f32 / total;
    }
    let visits = root_node.actions.iter().copied().zip(root_node.visits.iter().copied()).collect();
    Ok(SearchResult { policy, visits })
}

/// Runs `params.simulations` simulations from `root` and returns the root
/// visit distribution. With `root_trees > 1`, that many independent trees are
/// searched in parallel and their distributions averaged.
pub fn search<E: Evaluator + ?Sized, R: Rng + ?Sized>(
    root: &Board,
    evaluator: &E,
    params: &SearchParams,
    rewards: &RewardSnapshot,
    rng: &mut R,
) -> Result<SearchResult, SearchError> {
    if params.simulations == 0 {
        return Err(SearchError::NoSimulations);
    }
    if params.root_trees <= 1 {
        return search_tree(root, evaluator, params, rewards, rng);
    }
    let seeds: Vec<u64> = (0..params.root_trees).map(|_| rng.random()).collect();
    let results: Vec<SearchResult> = seeds
        .par_iter()
        .map(|&s| search_tree(root, evaluator, params, rewards, &mut ChaCha8Rng::seed_from_u64(s)))
        .collect::<Result<_, _>>()?;
    let k = results.len() as f32;
    let mut policy = vec![0.0; action_count(root.size())];
    for r in &results {
        for (p, q) in policy.iter_mut().zip(&r.policy) {
            *p += q / k;
        }
    }
    let mut visits = results[0].visits.clone();
    for r in &results[1..] {
        for (v, w) in visits.iter_mut().zip(&r.visits) {
            v.1 += w.1;
        }
    }
    Ok(SearchResult { policy, visits })
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(policy: &[f32]) -> usize {
    let mut best = 0;
    for (i, &p) in policy.iter().enumerate() {
        if p > policy[best] {
            best = i;
        }
    }
    best
}

/// Resolves an action index to the move it denotes on `board`.
pub fn action_to_move(board: &Board, action: usize) -> Option<Move> {
    let line = index_to_line(action, board.size()).ok()?;
    board.move_for_line(line).filter(|m| board.is_legal(m))
}

/// Plays from `root` to the end, searching afresh before every move and
/// taking the most visited action.
pub fn best_line<E: Evaluator + ?Sized, R: Rng + ?Sized>(
    root: &Board,
    evaluator: &E,
    params: &SearchParams,
    rewards: &RewardSnapshot,
    rng: &mut R,
) -> Result<SolutionRecord, SearchError> {
    if root.is_terminal() {
        return Err(SearchError::TerminalRoot);
    }
    let mut board = root.clone();
    while !board.is_terminal() {
        let result = search(&board, evaluator, params, rewards, rng)?;
        let m = action_to_move(&board, argmax(&result.policy)).expect("visited actions are legal");
        board.apply(m).expect("legal move");
    }
    Ok(SolutionRecord::from_board(&board))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Variant;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(17)
    }

    #[test]
    fn single_simulation_visits_first_action() {
        let board = Board::new(16, Variant::FiveD).unwrap();
        let params = SearchParams::with_simulations(1);
        let r = search(&board, &UniformEvaluator, &params, &RewardSnapshot::default(), &mut rng()).unwrap();
        let first = action_index(&board.legal_moves()[0], 16);
        assert_eq!(r.policy[first], 1.0);
        assert_eq!(r.policy.iter().filter(|&&p| p > 0.0).count(), 1);
    }

    #[test]
    fn visit_distribution_is_legal_and_normalised() {
        let mut board = Board::new(16, Variant::FiveT).unwrap();
        let mut r = rng();
        for step in 0..6 {
            let params = SearchParams::with_simulations(30 + step);
            let res = search(&board, &UniformEvaluator, &params, &RewardSnapshot::with_threshold(10), &mut r).unwrap();
            let sum: f32 = res.policy.iter().sum();
            assert!((sum - 1.0).abs() < 1e-5);
            let total: u32 = res.visits.iter().map(|v| v.1).sum();
            assert_eq!(total as usize, params.simulations);
            for (a, p) in res.policy.iter().enumerate() {
                if *p > 0.0 {
                    assert!(action_to_move(&board, a).is_some());
                }
            }
            let m = board.legal_moves()[step % 3];
            board.apply(m).unwrap();
        }
    }

    #[test]
    fn terminal_root_is_an_error() {
        let mut board = Board::new(12, Variant::FiveD).unwrap();
        while let Some(&m) = board.legal_moves().first() {
            board.apply(m).unwrap();
        }
        let err = search(&board, &UniformEvaluator, &SearchParams::with_simulations(5), &RewardSnapshot::default(), &mut rng());
        assert!(matches!(err, Err(SearchError::TerminalRoot)));
    }

    #[test]
    fn search_is_reproducible() {
        let board = Board::new(16, Variant::FiveD).unwrap();
        let params = SearchParams { simulations: 200, root_trees: 2, ..SearchParams::default() };
        let snap = RewardSnapshot::with_threshold(20);
        let a = search(&board, &UniformEvaluator, &params, &snap, &mut rng()).unwrap();
        let b = search(&board, &UniformEvaluator, &params, &snap, &mut rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dirichlet_noise_keeps_distribution() {
        let mut prior = vec![0.25f32; 4];
        add_dirichlet(&mut prior, DirichletNoise { alpha: 0.3, fraction: 0.25 }, &mut rng());
        assert!((prior.iter().sum::<f32>() - 1.0).abs() < 1e-5);
        assert!(prior.iter().all(|&p| p > 0.0));
    }
}
