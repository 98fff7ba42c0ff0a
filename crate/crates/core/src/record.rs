//! Text solution records: a header naming variant and board size, then one
//! move per line.
//!
//! ```text
//! morpion-record v1
//! variant=5D board=22
//! 1 13 8 E 9 8
//! 2 ...
//! ```
//!
//! Move lines are `<step> <new_x> <new_y> <dir> <origin_x> <origin_y>`.

use std::fmt::Write as _;
use std::path::Path;

use crate::board::{Board, BoardError, IllegalReason, Move, Variant, MIN_BOARD_SIZE};
use crate::geometry::{Coord, Direction};

pub const RECORD_MAGIC: &str = "morpion-record v1";

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("illegal move at step {step}: {reason}")]
    IllegalRecordMove { step: usize, reason: IllegalReason },
    #[error("invalid board: {0}")]
    Board(#[from] BoardError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionRecord {
    pub variant: Variant,
    pub size: usize,
    pub moves: Vec<Move>,
}

impl SolutionRecord {
    pub fn from_board(board: &Board) -> Self {
        Self {
            variant: board.variant(),
            size: board.size(),
            moves: board.history().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{RECORD_MAGIC}").unwrap();
        writeln!(out, "variant={} board={}", self.variant, self.size).unwrap();
        for (i, m) in self.moves.iter().enumerate() {
            writeln!(
                out,
                "{} {} {} {} {} {}",
                i + 1,
                m.new_dot.x,
                m.new_dot.y,
                m.dir,
                m.origin.x,
                m.origin.y
            )
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, RecordError> {
        let err = |line: usize, reason: String| RecordError::Parse { line, reason };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

        let (_, magic) = lines.next().ok_or_else(|| err(1, "empty record".into()))?;
        if magic.trim() != RECORD_MAGIC {
            return Err(err(1, format!("expected `{RECORD_MAGIC}`, found `{magic}`")));
        }

        let (_, header) = lines
            .next()
            .ok_or_else(|| err(2, "missing `variant=.. board=..` header".into()))?;
        let mut variant = None;
        let mut size = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("variant", v)) => variant = Some(v.parse::<Variant>().map_err(|e| err(2, e))?),
                Some(("board", v)) => {
                    let n: usize = v
                        .parse()
                        .map_err(|_| err(2, format!("invalid board size `{v}`")))?;
                    if n < MIN_BOARD_SIZE {
                        return Err(err(2, format!("board size {n} below {MIN_BOARD_SIZE}")));
                    }
                    size = Some(n);
                }
                _ => return Err(err(2, format!("unexpected header field `{field}`"))),
            }
        }
        let variant = variant.ok_or_else(|| err(2, "header lacks variant".into()))?;
        let size = size.ok_or_else(|| err(2, "header lacks board size".into()))?;

        let mut moves = Vec::new();
        for (line_no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(err(line_no, format!("expected 6 fields, found {}", fields.len())));
            }
            let int = |s: &str, what: &str| -> Result<i32, RecordError> {
                s.parse::<i32>()
                    .map_err(|_| err(line_no, format!("invalid {what} `{s}`")))
            };
            let step = int(fields[0], "step")?;
            if step != moves.len() as i32 + 1 {
                return Err(err(
                    line_no,
                    format!("expected step {}, found {step}", moves.len() + 1),
                ));
            }
            let new_dot = Coord::new(int(fields[1], "x")?, int(fields[2], "y")?);
            let dir: Direction = fields[3].parse().map_err(|e| err(line_no, format!("{e}")))?;
            let origin = Coord::new(int(fields[4], "origin x")?, int(fields[5], "origin y")?);
            moves.push(Move::new(origin, dir, new_dot));
        }
        Ok(Self { variant, size, moves })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, RecordError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), RecordError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Replays the first `steps` moves (all when `None`) on a fresh board.
    pub fn replay(&self, steps: Option<usize>) -> Result<Board, RecordError> {
        let mut board = Board::new(self.size, self.variant)?;
        let upto = steps.unwrap_or(self.moves.len()).min(self.moves.len());
        for (i, m) in self.moves[..upto].iter().enumerate() {
            board
                .check(m)
                .map_err(|reason| RecordError::IllegalRecordMove { step: i + 1, reason })?;
            board.apply(*m)?;
        }
        Ok(board)
    }

    /// Replays every move from the starting cross and returns the final score.
    pub fn verify(&self) -> Result<usize, RecordError> {
        Ok(self.replay(None)?.score())
    }
}
