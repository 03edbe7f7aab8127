//! A deterministic re-implementation of the ten-lane Freeway control
//! problem, an A* oracle that computes minimum-timestep road crossings
//! and optimal full-game scores, and batch harnesses that generate
//! crossing datasets and baseline tables.
//!
//! Everything is a pure function of declared inputs: car positions
//! depend only on `(seed, lane, timestep)`, chicken movement on the seed
//! and the full action history, so any recorded action sequence replays
//! bit-exactly.

pub mod detrng;
pub mod env;
pub mod experiments;
pub mod oracle;
pub mod trace_io;

pub use env::{
    car_x, collision_at, encode_ram, game_length, lane_band, replay, reset, step, Action,
    ConfigError, GameConfig, GameOver, GameState, StepResult,
};
pub use experiments::{
    always_up_baseline, generate_dataset, length_histogram, play_full_game, sample_scenarios,
    solve_scenario, GameTrace, ScenarioResult, ScenarioSpec,
};
pub use oracle::{
    heuristic, reconstruct_path, solve_crossing, AstarSolver, CrossingSolution, NodeGraph, NodeKey,
    NodeKind, NodeRecord, OracleError,
};
pub use trace_io::{
    read_dataset, read_trace, render_ascii, write_dataset, write_trace, DatasetRow, TraceIoError,
};
