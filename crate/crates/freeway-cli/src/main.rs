use clap::{Parser, Subcommand};
use freeway::experiments;
use freeway::trace_io::{self, DatasetRow};
use freeway::{oracle, Action, GameConfig, OracleError};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "freeway",
    version,
    about = "Deterministic freeway-crossing simulator, A* crossing oracle, and batch experiment runner"
)]
struct Cli {
    /// Markovian test dynamics: no car jitter, fixed step size of 3.
    #[arg(long, global = true)]
    deterministic_mode: bool,

    /// Disable the solver's speculative all-up chain expansion.
    #[arg(long, global = true)]
    no_rollout: bool,

    /// Worker threads for batch commands (0 uses all cores). Changes
    /// wall time only, never any output byte.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// TOML file overriding any subset of the dynamics constants.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Print the effective config as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Shortest single crossing after waiting out a starting timestep.
    Solve {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        start_t: u32,
    },
    /// Play a full game optimally and emit its trace as JSON.
    Play {
        #[arg(long)]
        seed: u64,
        /// Write the trace here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Always-up baseline scores over an inclusive seed range.
    Baseline {
        /// Range such as 0..99 (both ends included).
        #[arg(long)]
        seeds: String,
    },
    /// Generate a deterministic crossing-scenario dataset as CSV.
    Dataset {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        sampling_seed: u64,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Render stored trace frames as ASCII.
    Render {
        #[arg(long, value_name = "PATH")]
        trace: PathBuf,
        /// Timestep to draw (0..=steps).
        #[arg(long)]
        t: Option<u32>,
        /// Draw every frame of the trace in order.
        #[arg(long)]
        animate: bool,
    },
}

enum CliError {
    /// Bad invocation or inputs; exits 2.
    Usage(String),
    /// The computation itself had no answer or failed; exits 1.
    Domain(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn domain(msg: impl Into<String>) -> CliError {
    CliError::Domain(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config(cli: &Cli) -> Result<GameConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| usage(format!("bad config {}: {e}", path.display())))?
        }
        None => GameConfig::default(),
    };
    if cli.deterministic_mode {
        config.deterministic_mode = true;
    }
    if cli.no_rollout {
        config.rollout = false;
    }
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn worker_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| usage(format!("cannot build worker pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(&cli)?;
    if cli.print_config {
        print!(
            "{}",
            toml::to_string_pretty(&config).expect("config serializes")
        );
        return Ok(());
    }
    let command = cli
        .command
        .ok_or_else(|| usage("missing subcommand; try --help"))?;

    match command {
        Command::Solve { seed, start_t } => cmd_solve(seed, start_t, &config),
        Command::Play { seed, out } => cmd_play(seed, out.as_deref(), &config),
        Command::Baseline { seeds } => cmd_baseline(&seeds, cli.workers, &config),
        Command::Dataset {
            n,
            sampling_seed,
            out,
        } => cmd_dataset(n, sampling_seed, &out, cli.workers, &config),
        Command::Render { trace, t, animate } => cmd_render(&trace, t, animate, &config),
    }
}

fn cmd_solve(seed: u64, start_t: u32, config: &GameConfig) -> Result<(), CliError> {
    let prefix = vec![Action::Stay; start_t as usize];
    let sol = oracle::solve_crossing(seed, &prefix, config).map_err(|e| match e {
        OracleError::NoPath => domain(e.to_string()),
        OracleError::GameOver(_) => domain(e.to_string()),
        other => usage(other.to_string()),
    })?;
    println!("length\t{}", sol.length);
    println!("actions\t{}", trace_io::actions_to_string(&sol.actions));
    println!("nodes_expanded\t{}", sol.nodes_expanded);
    println!("nodes_created\t{}", sol.nodes_created);
    Ok(())
}

fn cmd_play(seed: u64, out: Option<&std::path::Path>, config: &GameConfig) -> Result<(), CliError> {
    let trace = experiments::play_full_game(seed, config);
    match out {
        Some(path) => {
            trace_io::write_trace(&trace, path)
                .map_err(|e| domain(format!("writing trace: {e}")))?;
            println!(
                "seed\t{}\nscore\t{}\nsteps\t{}\nout\t{}",
                trace.seed,
                trace.score,
                trace.actions.len(),
                path.display()
            );
        }
        None => print!("{}", trace_io::trace_to_string(&trace)),
    }
    Ok(())
}

fn parse_seed_range(text: &str) -> Result<(u64, u64), CliError> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| usage(format!("bad seed range {text:?}; expected LO..HI")))?;
    let lo: u64 = lo
        .parse()
        .map_err(|e| usage(format!("bad seed range {text:?}: {e}")))?;
    let hi: u64 = hi
        .parse()
        .map_err(|e| usage(format!("bad seed range {text:?}: {e}")))?;
    if lo > hi {
        return Err(usage(format!("bad seed range {text:?}: empty")));
    }
    Ok((lo, hi))
}

fn cmd_baseline(seeds: &str, workers: usize, config: &GameConfig) -> Result<(), CliError> {
    let (lo, hi) = parse_seed_range(seeds)?;
    let pool = worker_pool(workers)?;
    let scores: Vec<(u64, u32)> = pool.install(|| {
        (lo..=hi)
            .into_par_iter()
            .map(|seed| (seed, experiments::always_up_baseline(seed, config)))
            .collect()
    });
    println!("seed\tscore");
    for (seed, score) in &scores {
        println!("{seed}\t{score}");
    }
    let mut distribution: BTreeMap<u32, u32> = BTreeMap::new();
    for &(_, score) in &scores {
        *distribution.entry(score).or_insert(0) += 1;
    }
    println!();
    println!("score\tseeds");
    for (score, count) in distribution {
        println!("{score}\t{count}");
    }
    Ok(())
}

fn cmd_dataset(
    n: usize,
    sampling_seed: u64,
    out: &std::path::Path,
    workers: usize,
    config: &GameConfig,
) -> Result<(), CliError> {
    if n == 0 {
        return Err(usage("dataset requires --n >= 1"));
    }
    let pool = worker_pool(workers)?;
    let records = pool.install(|| experiments::generate_dataset(n, sampling_seed, config));
    let rows: Vec<DatasetRow> = records
        .iter()
        .map(|(spec, result)| DatasetRow::from_record(*spec, result.as_ref()))
        .collect();
    trace_io::write_dataset(&rows, out).map_err(|e| domain(format!("writing dataset: {e}")))?;

    let solved: Vec<_> = records.iter().filter_map(|(_, r)| r.as_ref()).collect();
    let all_up = solved.iter().filter(|r| r.all_up).count();
    let mean_length = if solved.is_empty() {
        0.0
    } else {
        solved.iter().map(|r| f64::from(r.length)).sum::<f64>() / solved.len() as f64
    };
    println!("n\t{n}");
    println!("solvable\t{}", solved.len());
    println!("all_up\t{all_up}");
    println!("mean_length\t{mean_length:.2}");
    println!("out\t{}", out.display());
    Ok(())
}

fn cmd_render(
    path: &std::path::Path,
    t: Option<u32>,
    animate: bool,
    config: &GameConfig,
) -> Result<(), CliError> {
    let trace = trace_io::read_trace(path)
        .map_err(|e| usage(format!("reading trace {}: {e}", path.display())))?;
    let max_t = trace.actions.len() as u32;
    match (t, animate) {
        (Some(_), true) => Err(usage("--t and --animate are mutually exclusive")),
        (None, false) => Err(usage("render requires --t or --animate")),
        (Some(t), false) => {
            if t > max_t {
                return Err(usage(format!("--t {t} out of range 0..={max_t}")));
            }
            print!("{}", trace_io::render_ascii(&trace, t, config));
            Ok(())
        }
        (None, true) => {
            for t in 0..=max_t {
                print!("{}", trace_io::render_ascii(&trace, t, config));
                println!();
            }
            Ok(())
        }
    }
}
