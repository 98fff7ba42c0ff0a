//! Acceptance suite. Each criterion prints one PASS/FAIL line to stderr
//! (outside the test harness's capture) and then asserts. Criteria run one at
//! a time so their wall-clock budgets are measured without interference.

mod common;

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use common::{brute_force_moves, data_record, engine_moves, random_position, rng, ILLEGAL_CORPUS};
use morpion_r2::board::MAX_SCORE_5D;
use morpion_r2::mcts::{best_line, SearchParams};
use morpion_r2::model::{ModelConfig, PolicyValueModel};
use morpion_r2::playout::random_playout;
use morpion_r2::record::RecordError;
use morpion_r2::selfplay::{train_loop, SelfPlayMode, TrainLoopConfig};
use morpion_r2::{rank, Board, RankedRewardConfig, RewardList, SolutionRecord, Variant};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: u32, title: &str, pass: bool, detail: &str) {
    let line = format!("acceptance {id} {} {title}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{}", line.trim_end());
}

fn within(elapsed: Duration, budget_secs: u64) -> bool {
    elapsed <= Duration::from_secs(budget_secs)
}

#[test]
fn criterion_1_rules_oracle() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for size in [16, 20, 22] {
        for (vi, v) in [Variant::FiveD, Variant::FiveT].into_iter().enumerate() {
            let mut r = rng(1_000 * size as u64 + vi as u64);
            for i in 0..1000 {
                let board = random_position(size, v, &mut r);
                if engine_moves(&board) != brute_force_moves(&board) {
                    mismatches.push(format!("{size}/{v}/#{i}"));
                }
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches.is_empty() && within(elapsed, 60);
    report(
        1,
        "legal moves match brute force",
        pass,
        &format!(
            "{checked} positions, {} mismatches{}, {:.1}s (limit 60s)",
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first {m})")).unwrap_or_default(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_2_upper_bound() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut r = rng(2);
    let mut max = 0;
    let mut failures = 0;
    const GAMES: usize = 100_000;
    for _ in 0..GAMES {
        let board = random_playout(22, Variant::FiveD, &mut r).unwrap();
        let score = board.score();
        max = max.max(score);
        let replayed = SolutionRecord::from_board(&board).verify();
        if score > MAX_SCORE_5D || replayed.ok() != Some(score) {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = failures == 0 && within(elapsed, 300);
    report(
        2,
        "5D playouts bounded by 121 and replay exactly",
        pass,
        &format!("{GAMES} games, max score {max}, {failures} failures, {:.1}s (limit 300s)", elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_3_ranked_reward() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut r = rng(3);
    let cases_ok = rank(31, 30, &mut r) == 1 && rank(29, 30, &mut r) == -1 && rank(0, 121, &mut r) == -1;

    const DRAWS: usize = 10_000;
    let mut tie_rng = rng(33);
    let ties: Vec<i8> = (0..DRAWS).map(|_| rank(40, 40, &mut tie_rng)).collect();
    let plus = ties.iter().filter(|&&z| z == 1).count() as f64 / DRAWS as f64;
    let ties_ok = ties.iter().all(|&z| z == 1 || z == -1) && (0.47..=0.53).contains(&plus);

    let cfg = RankedRewardConfig::new(0.75).unwrap();
    let mut list = RewardList::new(200).unwrap();
    let mut all = Vec::new();
    for _ in 0..350 {
        let s = r.random_range(1..=121u32);
        list.record_score(s);
        all.push(s);
    }
    let mut last: Vec<u32> = all[all.len() - 200..].to_vec();
    last.sort_unstable();
    let threshold = list.threshold(&cfg).unwrap();
    let threshold_ok = list.len() == 200 && threshold == last[150];

    report(
        3,
        "ranked reward cases, tie frequency, threshold index",
        cases_ok && ties_ok && threshold_ok,
        &format!(
            "strict cases {cases_ok}, tie +1 frequency {plus:.4} (window 0.47..0.53), threshold {threshold} vs sorted[150] {}",
            last[150]
        ),
    );
}

#[test]
fn criterion_4_gradient() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let results = common::grad::check(7, 150);
    let worst = results.iter().map(|r| r.3).fold(0.0, f64::max);
    let pass = results.len() >= 100 && worst <= common::grad::MAX_REL_ERR;
    report(
        4,
        "analytic gradient matches central differences",
        pass,
        &format!("{} parameters, worst relative error {worst:.3e} (limit 1e-4)", results.len()),
    );
}

#[test]
fn criterion_5_search_lift() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    const GAMES: u64 = 50;
    let cfg = ModelConfig { channels: 16, blocks: 2, ..ModelConfig::default() };
    let net = PolicyValueModel::for_board(16, cfg, &mut rng(5));

    let mut baseline = RewardList::new(200).unwrap();
    for s in 0..200 {
        baseline.record_score(random_playout(16, Variant::FiveD, &mut rng(50_000 + s)).unwrap().score() as u32);
    }
    let snapshot = baseline.snapshot(&RankedRewardConfig::default());

    let params = SearchParams::with_simulations(100);
    let root = Board::new(16, Variant::FiveD).unwrap();
    let mut diffs = Vec::new();
    let (mut random_total, mut search_total) = (0.0, 0.0);
    for g in 0..GAMES {
        let random = random_playout(16, Variant::FiveD, &mut rng(g)).unwrap().score() as f64;
        let searched = best_line(&root, &net, &params, &snapshot, &mut rng(g)).unwrap().verify().unwrap() as f64;
        random_total += random;
        search_total += searched;
        diffs.push(searched - random);
    }
    let n = GAMES as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = mean / (var / n).sqrt();
    let critical = StudentsT::new(0.0, 1.0, n - 1.0).unwrap().inverse_cdf(0.95);
    let elapsed = start.elapsed();
    let pass = t > critical && within(elapsed, 600);
    report(
        5,
        "search beats random playouts",
        pass,
        &format!(
            "mean search {:.2} vs random {:.2} over {GAMES} paired games, t = {t:.2} (critical {critical:.3}), {:.1}s (limit 600s)",
            search_total / n,
            random_total / n,
            elapsed.as_secs_f64()
        ),
    );
}

fn median(mut v: Vec<u32>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

#[test]
fn criterion_6_training_trend() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let cfg = TrainLoopConfig {
        iterations: 10,
        episodes: 20,
        reward_capacity: 50,
        board: 16,
        variant: Variant::FiveD,
        mode: SelfPlayMode::Direct,
        record_simulations: 50,
        seed: 6,
        workers: 1,
        model: ModelConfig { channels: 16, blocks: 2, ..ModelConfig::default() },
        ..TrainLoopConfig::default()
    };
    let out = train_loop(&cfg, None, false, |_| {}).unwrap();
    let pooled = |range: std::ops::Range<usize>| median(out.metrics[range].iter().flat_map(|m| m.scores.clone()).collect());
    let (early, late) = (pooled(0..3), pooled(7..10));
    let elapsed = start.elapsed();
    let pass = late >= early && within(elapsed, 1800);
    report(
        6,
        "episode scores do not fall during training",
        pass,
        &format!("median score iterations 1-3 {early}, iterations 8-10 {late}, {:.1}s (limit 1800s)", elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_7_resume() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let cfg = TrainLoopConfig {
        iterations: 4,
        episodes: 3,
        board: 16,
        record_simulations: 10,
        seed: 7,
        workers: 1,
        model: ModelConfig { channels: 8, blocks: 1, epochs: 2, ..ModelConfig::default() },
        ..TrainLoopConfig::default()
    };
    let whole = tempfile::tempdir().unwrap();
    train_loop(&cfg, Some(whole.path()), false, |_| {}).unwrap();

    let split = tempfile::tempdir().unwrap();
    train_loop(&TrainLoopConfig { iterations: 2, ..cfg }, Some(split.path()), false, |_| {}).unwrap();
    train_loop(&TrainLoopConfig { workers: 2, ..cfg }, Some(split.path()), true, |_| {}).unwrap();

    let same = |name: &str| std::fs::read(whole.path().join(name)).unwrap() == std::fs::read(split.path().join(name)).unwrap();
    let metrics = std::fs::read_to_string(split.path().join("metrics.csv")).unwrap();
    let rows = metrics.lines().count() - 1;
    let pass = same("metrics.csv") && same("model.ckpt") && same("best.rec") && rows == 4;
    report(
        7,
        "interrupted and resumed run matches uninterrupted run",
        pass,
        &format!(
            "metrics identical {}, model identical {}, best record identical {}, {rows} rows",
            same("metrics.csv"),
            same("model.ckpt"),
            same("best.rec")
        ),
    );
}

#[test]
fn criterion_8_records() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut r = rng(8);
    let mut bad_round_trips = 0;
    const GAMES: usize = 1000;
    for i in 0..GAMES {
        let size = [16, 20, 22][i % 3];
        let v = if i % 2 == 0 { Variant::FiveD } else { Variant::FiveT };
        let board = random_playout(size, v, &mut r).unwrap();
        let text = SolutionRecord::from_board(&board).to_text();
        let ok = SolutionRecord::parse(&text).map(|rec| rec.verify().ok() == Some(board.score())).unwrap_or(false);
        if !ok {
            bad_round_trips += 1;
        }
    }
    let mut corpus_failures = Vec::new();
    for &(file, step, reason) in ILLEGAL_CORPUS {
        match data_record(file).verify() {
            Err(RecordError::IllegalRecordMove { step: s, reason: got }) if s == step && got.to_string() == reason => {}
            other => corpus_failures.push(format!("{file}: {other:?}")),
        }
    }
    let pass = bad_round_trips == 0 && corpus_failures.is_empty();
    report(
        8,
        "record round trip and illegal corpus",
        pass,
        &format!(
            "{GAMES} games, {bad_round_trips} round-trip failures; {} illegal records, {} misreported {:?}",
            ILLEGAL_CORPUS.len(),
            corpus_failures.len(),
            corpus_failures
        ),
    );
}
