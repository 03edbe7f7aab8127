//! Batch harnesses: the single-crossing scenario dataset, the full-game
//! oracle runner, and the always-up baseline.

use crate::detrng::{draw_uniform, stream_init, stream_mix, SAMPLE_TAG};
use crate::env::{game_length, reset, step, Action, GameConfig};
use crate::oracle::{solve_crossing, OracleError};
use rayon::prelude::*;
use std::collections::BTreeSet;

/// One scenario of the single-crossing experiment: wait out `start_t`
/// timesteps, then cross as fast as possible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub start_t: u32,
}

/// Largest scenario seed drawn by the sampler.
pub const SCENARIO_SEED_MAX: u64 = 999_999;
/// Largest scenario starting timestep drawn by the sampler.
pub const SCENARIO_START_T_MAX: u32 = 2_500;

/// Default seed list for batch full-game runs: 0 through 4, then every
/// multiple of 50 up to 1000. Quick checks use just the first five.
pub const FULL_GAME_SEEDS: [u64; 25] = [
    0, 1, 2, 3, 4, 50, 100, 150, 200, 250, 300, 350, 400, 450, 500, 550, 600, 650, 700, 750, 800,
    850, 900, 950, 1000,
];

/// A solved scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioResult {
    pub spec: ScenarioSpec,
    pub length: u32,
    pub actions: Vec<Action>,
    pub all_up: bool,
}

/// Solve one scenario: `start_t` stay-actions, then the shortest
/// crossing. `None` means no crossing fits before the game ends.
pub fn solve_scenario(spec: ScenarioSpec, config: &GameConfig) -> Option<ScenarioResult> {
    let prefix = vec![Action::Stay; spec.start_t as usize];
    match solve_crossing(spec.seed, &prefix, config) {
        Ok(sol) => {
            let all_up = !sol.actions.is_empty() && sol.actions.iter().all(|&a| a == Action::Up);
            Some(ScenarioResult {
                spec,
                length: sol.length,
                actions: sol.actions,
                all_up,
            })
        }
        Err(OracleError::NoPath) => None,
        Err(e) => panic!("scenario {spec:?} violated solver preconditions: {e}"),
    }
}

/// Draw `n` distinct scenario specs, deterministically from
/// `sampling_seed`, returned sorted by `(seed, start_t)`.
pub fn sample_scenarios(n: usize, sampling_seed: u64) -> Vec<ScenarioSpec> {
    assert!(n >= 1, "sample_scenarios: n must be positive");
    assert!(
        n as u64 <= (SCENARIO_SEED_MAX + 1) * u64::from(SCENARIO_START_T_MAX + 1),
        "sample_scenarios: n exceeds the scenario space"
    );
    let mut st = stream_init(sampling_seed, SAMPLE_TAG);
    let mut specs = BTreeSet::new();
    while specs.len() < n {
        st = stream_mix(st, 0);
        let seed = draw_uniform(st, SCENARIO_SEED_MAX + 1);
        st = stream_mix(st, 1);
        let start_t = draw_uniform(st, u64::from(SCENARIO_START_T_MAX) + 1) as u32;
        specs.insert(ScenarioSpec { seed, start_t });
    }
    specs.into_iter().collect()
}

/// Sample and solve `n` scenarios. Solves are independent and run on the
/// current rayon pool; the output order is always sorted by spec, so the
/// result is byte-for-byte reproducible regardless of worker count.
pub fn generate_dataset(
    n: usize,
    sampling_seed: u64,
    config: &GameConfig,
) -> Vec<(ScenarioSpec, Option<ScenarioResult>)> {
    let specs = sample_scenarios(n, sampling_seed);
    specs
        .into_par_iter()
        .map(|spec| (spec, solve_scenario(spec, config)))
        .collect()
}

/// A complete played game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameTrace {
    pub seed: u64,
    pub actions: Vec<Action>,
    pub score: u32,
    /// `(start_t, length)` per crossing, where `start_t` is the timestep
    /// the chicken became controllable on the bottom strip.
    pub crossings: Vec<(u32, u32)>,
    /// Chicken Y before the first action and after every step.
    pub y_series: Vec<i32>,
}

/// Play a whole game optimally: repeatedly solve a crossing from the
/// accumulated action prefix, then hold up through the post-crossing
/// paralysis, until no further crossing fits. The tail is padded with up
/// actions to the end of the game.
pub fn play_full_game(seed: u64, config: &GameConfig) -> GameTrace {
    let len = game_length(seed, config);
    let mut actions: Vec<Action> = Vec::new();
    let mut state = reset(seed, config);

    'game: while state.t < len {
        match solve_crossing(seed, &actions, config) {
            Ok(sol) => {
                for &a in &sol.actions {
                    step(&mut state, a, config).expect("solution within game length");
                    actions.push(a);
                }
                while state.cooldown > 0 {
                    if state.t >= len {
                        break 'game;
                    }
                    step(&mut state, Action::Up, config).expect("cooldown burn in bounds");
                    actions.push(Action::Up);
                }
            }
            Err(OracleError::NoPath) => {
                while state.t < len {
                    step(&mut state, Action::Up, config).expect("padding in bounds");
                    actions.push(Action::Up);
                }
                break;
            }
            Err(e) => panic!("full-game solve violated preconditions: {e}"),
        }
    }

    trace_from_actions(seed, actions, config)
}

/// Derive the trace record (score, crossings, Y series) by replaying an
/// action sequence from a fresh session.
pub fn trace_from_actions(seed: u64, actions: Vec<Action>, config: &GameConfig) -> GameTrace {
    let mut state = reset(seed, config);
    let mut y_series = Vec::with_capacity(actions.len() + 1);
    y_series.push(state.y);
    let mut crossings = Vec::new();
    let mut seg_start = 0u32;
    for &a in &actions {
        let r = step(&mut state, a, config).expect("trace actions within game length");
        y_series.push(state.y);
        if r.crossed {
            crossings.push((seg_start, r.t_after - seg_start));
            seg_start = r.t_after + config.cool_top;
        }
    }
    GameTrace {
        seed,
        actions,
        score: state.score,
        crossings,
        y_series,
    }
}

/// Score of the agent that inputs up at every timestep.
pub fn always_up_baseline(seed: u64, config: &GameConfig) -> u32 {
    let len = game_length(seed, config);
    let mut state = reset(seed, config);
    for _ in 0..len {
        step(&mut state, Action::Up, config).expect("baseline within game length");
    }
    state.score
}

/// Bucket solved-scenario lengths into `bin_width`-wide bins; returns
/// `(bin_lo, count)` sorted by bin, counts summing to the input size.
pub fn length_histogram(results: &[ScenarioResult], bin_width: u32) -> Vec<(u32, u32)> {
    assert!(
        bin_width >= 1,
        "length_histogram: bin_width must be positive"
    );
    let mut bins = std::collections::BTreeMap::new();
    for r in results {
        *bins.entry(r.length / bin_width * bin_width).or_insert(0u32) += 1;
    }
    bins.into_iter().collect()
}
