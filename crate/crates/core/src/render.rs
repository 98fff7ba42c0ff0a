//! Text and SVG drawings of a position. Starting dots are hollow, played dots
//! carry their step number, and every drawn line is shown.

use std::fmt::Write as _;

use crate::board::{initial_dots, Board};
use crate::geometry::Coord;

const CELL: i32 = 24;
const MARGIN: i32 = 16;

/// One row per board row, three characters per cell: `.` empty, `o` starting
/// dot, otherwise the step number that placed the dot.
pub fn text_grid(board: &Board) -> String {
    let n = board.size();
    let steps = step_numbers(board);
    let mut out = String::with_capacity(n * (3 * n + 1));
    for y in 0..n {
        for x in 0..n {
            let p = Coord::new(x as i32, y as i32);
            match steps[y * n + x] {
                Some(0) => out.push_str("  o"),
                Some(k) => write!(out, "{k:>3}").unwrap(),
                None => out.push_str("  ."),
            }
            debug_assert_eq!(steps[y * n + x].is_some(), board.is_occupied(p));
        }
        out.push('\n');
    }
    out
}

/// `Some(0)` for starting dots, `Some(k)` for the dot added at step `k`.
fn step_numbers(board: &Board) -> Vec<Option<usize>> {
    let n = board.size();
    let mut steps = vec![None; n * n];
    for p in initial_dots(n) {
        steps[p.y as usize * n + p.x as usize] = Some(0);
    }
    for (i, m) in board.history().iter().enumerate() {
        steps[m.new_dot.y as usize * n + m.new_dot.x as usize] = Some(i + 1);
    }
    steps
}

fn px(v: i32) -> i32 {
    MARGIN + v * CELL
}

pub fn svg(board: &Board) -> String {
    let n = board.size() as i32;
    let side = 2 * MARGIN + (n - 1) * CELL;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{side}" height="{side}" fill="white"/>"#).unwrap();

    writeln!(out, r##"<g stroke="#e0e0e0" stroke-width="1">"##).unwrap();
    for i in 0..n {
        let (a, b, c) = (px(i), px(0), px(n - 1));
        writeln!(out, r#"<line x1="{a}" y1="{b}" x2="{a}" y2="{c}"/>"#).unwrap();
        writeln!(out, r#"<line x1="{b}" y1="{a}" x2="{c}" y2="{a}"/>"#).unwrap();
    }
    out.push_str("</g>\n");

    writeln!(out, r##"<g stroke="#202020" stroke-width="2" stroke-linecap="round">"##).unwrap();
    for m in board.history() {
        let end = m.origin.step(m.dir, 4);
        writeln!(
            out,
            r#"<line class="{}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            m.dir,
            px(m.origin.x),
            px(m.origin.y),
            px(end.x),
            px(end.y)
        )
        .unwrap();
    }
    out.push_str("</g>\n");

    writeln!(out, r##"<g fill="white" stroke="#202020" stroke-width="2">"##).unwrap();
    for p in initial_dots(board.size()) {
        writeln!(out, r#"<circle cx="{}" cy="{}" r="6"/>"#, px(p.x), px(p.y)).unwrap();
    }
    out.push_str("</g>\n");

    writeln!(
        out,
        r##"<g font-family="sans-serif" font-size="9" text-anchor="middle" dominant-baseline="central">"##
    )
    .unwrap();
    for (i, m) in board.history().iter().enumerate() {
        let (cx, cy) = (px(m.new_dot.x), px(m.new_dot.y));
        writeln!(out, r##"<circle cx="{cx}" cy="{cy}" r="8" fill="#1f4e9c"/>"##).unwrap();
        writeln!(out, r#"<text x="{cx}" y="{cy}" fill="white">{}</text>"#, i + 1).unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    out
}
