//! File formats for datasets and traces, plus a text renderer.
//!
//! Writers are deterministic: identical inputs produce byte-identical
//! files. Readers validate every invariant of the carried type and
//! reject files that violate them.

use crate::env::{car_x, lane_band, Action, GameConfig};
use crate::experiments::{GameTrace, ScenarioResult, ScenarioSpec};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum TraceIoError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation: {0}")]
    Validation(String),
}

fn parse_err(line: usize, msg: impl Into<String>) -> TraceIoError {
    TraceIoError::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn actions_to_string(actions: &[Action]) -> String {
    actions.iter().map(|a| a.to_digit()).collect()
}

pub fn parse_actions(s: &str) -> Result<Vec<Action>, TraceIoError> {
    s.chars()
        .map(|c| {
            Action::from_digit(c)
                .ok_or_else(|| TraceIoError::Validation(format!("invalid action digit {c:?}")))
        })
        .collect()
}

/// One CSV row of the scenario dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetRow {
    pub seed: u64,
    pub start_t: u32,
    pub length: u32,
    pub actions: String,
    pub all_up: bool,
    pub solvable: bool,
}

impl DatasetRow {
    pub fn from_record(spec: ScenarioSpec, result: Option<&ScenarioResult>) -> DatasetRow {
        match result {
            Some(r) => DatasetRow {
                seed: spec.seed,
                start_t: spec.start_t,
                length: r.length,
                actions: actions_to_string(&r.actions),
                all_up: r.all_up,
                solvable: true,
            },
            None => DatasetRow {
                seed: spec.seed,
                start_t: spec.start_t,
                length: 0,
                actions: String::new(),
                all_up: false,
                solvable: false,
            },
        }
    }

    fn check(&self, line: usize) -> Result<(), TraceIoError> {
        if let Some(c) = self
            .actions
            .chars()
            .find(|&c| Action::from_digit(c).is_none())
        {
            return Err(parse_err(line, format!("invalid action digit {c:?}")));
        }
        if self.solvable {
            if self.length as usize != self.actions.len() {
                return Err(parse_err(
                    line,
                    format!(
                        "length {} does not match {} actions",
                        self.length,
                        self.actions.len()
                    ),
                ));
            }
            let only_up = !self.actions.is_empty() && self.actions.chars().all(|c| c == '1');
            if self.all_up != only_up {
                return Err(parse_err(line, "all_up flag contradicts the actions"));
            }
        }
        Ok(())
    }
}

const DATASET_HEADER: &str = "seed,start_t,length,actions,all_up,solvable";

pub fn dataset_to_string(rows: &[DatasetRow]) -> String {
    let mut out = String::new();
    out.push_str(DATASET_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.seed, r.start_t, r.length, r.actions, r.all_up, r.solvable
        );
    }
    out
}

pub fn write_dataset(rows: &[DatasetRow], path: impl AsRef<Path>) -> Result<(), TraceIoError> {
    for (i, r) in rows.iter().enumerate() {
        r.check(i + 2)?;
    }
    std::fs::write(path, dataset_to_string(rows))?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<DatasetRow>, TraceIoError> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text)
}

pub fn parse_dataset(text: &str) -> Result<Vec<DatasetRow>, TraceIoError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == DATASET_HEADER => {}
        Some((_, h)) => return Err(parse_err(1, format!("bad header {h:?}"))),
        None => return Err(parse_err(1, "empty file")),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(parse_err(
                line_no,
                format!("expected 6 fields, got {}", fields.len()),
            ));
        }
        let row = DatasetRow {
            seed: fields[0]
                .parse()
                .map_err(|e| parse_err(line_no, format!("seed: {e}")))?,
            start_t: fields[1]
                .parse()
                .map_err(|e| parse_err(line_no, format!("start_t: {e}")))?,
            length: fields[2]
                .parse()
                .map_err(|e| parse_err(line_no, format!("length: {e}")))?,
            actions: fields[3].to_string(),
            all_up: fields[4]
                .parse()
                .map_err(|e| parse_err(line_no, format!("all_up: {e}")))?,
            solvable: fields[5]
                .parse()
                .map_err(|e| parse_err(line_no, format!("solvable: {e}")))?,
        };
        row.check(line_no)?;
        rows.push(row);
    }
    Ok(rows)
}

/// JSON mirror of a [`GameTrace`]; actions as a digit string.
#[derive(Serialize, Deserialize)]
struct TraceJson {
    seed: u64,
    actions: String,
    score: u32,
    crossings: Vec<(u32, u32)>,
    y_series: Vec<i32>,
}

pub fn trace_to_string(trace: &GameTrace) -> String {
    let json = TraceJson {
        seed: trace.seed,
        actions: actions_to_string(&trace.actions),
        score: trace.score,
        crossings: trace.crossings.clone(),
        y_series: trace.y_series.clone(),
    };
    let mut out = serde_json::to_string_pretty(&json).expect("trace serializes");
    out.push('\n');
    out
}

pub fn write_trace(trace: &GameTrace, path: impl AsRef<Path>) -> Result<(), TraceIoError> {
    std::fs::write(path, trace_to_string(trace))?;
    Ok(())
}

pub fn parse_trace(text: &str) -> Result<GameTrace, TraceIoError> {
    let json: TraceJson = serde_json::from_str(text).map_err(|e| TraceIoError::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let actions = parse_actions(&json.actions)?;
    if json.y_series.len() != actions.len() + 1 {
        return Err(TraceIoError::Validation(format!(
            "y_series has {} entries for {} actions",
            json.y_series.len(),
            actions.len()
        )));
    }
    if json.score as usize != json.crossings.len() {
        return Err(TraceIoError::Validation(format!(
            "score {} does not match {} crossings",
            json.score,
            json.crossings.len()
        )));
    }
    Ok(GameTrace {
        seed: json.seed,
        actions,
        score: json.score,
        crossings: json.crossings,
        y_series: json.y_series,
    })
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<GameTrace, TraceIoError> {
    parse_trace(&std::fs::read_to_string(path)?)
}

const FRAME_COLS: u32 = 80;

/// Render one timestep of a trace as a fixed-width text frame: the top
/// strip, the ten lanes from top lane down, and the start strip. Cars
/// are drawn at their scaled X; the chicken sits at the fixed column the
/// collision window covers.
///
/// Panics if `t` is outside `0..=trace.actions.len()`.
pub fn render_ascii(trace: &GameTrace, t: u32, config: &GameConfig) -> String {
    assert!(
        (t as usize) < trace.y_series.len(),
        "render_ascii: t out of range"
    );
    let y = trace.y_series[t as usize];
    let score = trace
        .crossings
        .iter()
        .filter(|&&(start, len)| start + len <= t)
        .count();
    let lanes = config.num_lanes();
    let top_lo = lane_band(lanes - 1, config).1 + 1;

    let col = |x: u32| -> usize { (x * FRAME_COLS / config.x_range) as usize };
    let chicken_col = col((config.collide_x_lo + config.collide_x_hi) / 2);
    let chicken_row: isize = if y >= top_lo {
        -1 // top strip
    } else if y < config.lane_base {
        lanes as isize // start strip
    } else {
        let lane = ((y - config.lane_base) / config.lane_width_step) as usize;
        (lanes - 1 - lane.min(lanes - 1)) as isize
    };

    let mut out = String::new();
    let _ = writeln!(out, "t={t:>5}  y={y:>3}  score={score}");
    let border: String = format!("+{}+", "-".repeat(FRAME_COLS as usize));
    out.push_str(&border);
    out.push('\n');

    let put = |row_chars: &mut Vec<char>, idx: usize, mark: char| {
        row_chars[idx] = if row_chars[idx] == ' ' { mark } else { '*' };
    };
    // Top strip, lanes high to low, start strip.
    for row in -1..=(lanes as isize) {
        let mut chars = vec![' '; FRAME_COLS as usize];
        if (0..lanes as isize).contains(&row) {
            let lane = lanes - 1 - row as usize;
            let marker = if config.directions[lane] > 0 {
                '>'
            } else {
                '<'
            };
            put(&mut chars, col(car_x(trace.seed, lane, t, config)), marker);
        }
        if row == chicken_row {
            put(&mut chars, chicken_col, '@');
        }
        out.push('|');
        out.extend(chars);
        out.push_str("|\n");
    }
    out.push_str(&border);
    out.push('\n');
    out
}
