use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsg_core::checks::run_checks;
use rsg_core::oracle::{Oracle, OracleConfig};
use rsg_core::presets::{reference_game, bench_preset, BENCH_PRESETS};
use rsg_core::sim::output::write_batch_outputs;
use rsg_core::sim::{run_batch, BatchSpec};
use rsg_core::{GameInstance, RunConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "rsg", version, about = "Repeated Stackelberg game learning simulator")]
struct Cli {
    /// Worker threads for batch runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the batch described by a TOML or JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run one of the named reference presets on the 3x3 game.
    Bench {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(BENCH_PRESETS))]
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the randomized property suites.
    Check {
        /// Only run suites whose name contains this string.
        #[arg(long)]
        only: Option<String>,
    },
    /// Write a game instance as JSON.
    GenGame {
        #[arg(value_enum)]
        preset: GamePreset,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GamePreset {
    /// The built-in 3x3 game with six follower types.
    #[value(name = "appendixC", alias = "appendix-c")]
    Reference,
    Random,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Number of independent runs S.
    #[arg(long)]
    iterations: Option<usize>,
    /// Base seed; run r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Oracle tolerance (default 1/sqrt(H)).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Perturbation scale (default from the learner's schedule).
    #[arg(long)]
    nu: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.iterations {
            cfg.iterations = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        if self.epsilon.is_some() {
            cfg.epsilon = self.epsilon;
        }
        if self.nu.is_some() {
            cfg.nu = self.nu;
        }
    }
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: e.to_string(),
    }
}

fn runtime_err(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: e.to_string(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run { config, overrides } => {
            let mut cfg = RunConfig::from_file(&config).map_err(config_err)?;
            overrides.apply(&mut cfg);
            run_config(cfg)
        }
        Command::Bench { name, overrides } => {
            let mut cfg = bench_preset(&name).map_err(config_err)?;
            overrides.apply(&mut cfg);
            run_config(cfg)
        }
        Command::Check { only } => check(only.as_deref()),
        Command::GenGame {
            preset,
            out,
            n,
            m,
            k,
            eta,
            seed,
        } => {
            let game = match preset {
                GamePreset::Reference => reference_game(),
                GamePreset::Random => GameInstance::random(n, m, k, eta, seed).map_err(config_err)?,
            };
            match out {
                Some(path) => {
                    game.save(&path).map_err(runtime_err)?;
                    println!("wrote {}", path.display());
                }
                None => println!("{}", game.to_json()),
            }
            Ok(())
        }
    }
}

fn run_config(cfg: RunConfig) -> Result<(), Failure> {
    cfg.check_static().map_err(config_err)?;
    let game = cfg.game.load().map_err(config_err)?;
    let episode = cfg.episode_spec(&game).map_err(config_err)?;
    let out_dir = cfg
        .output
        .clone()
        .unwrap_or_else(|| Path::new("out").join(&cfg.name));

    let started = Instant::now();
    let oracle = Oracle::new(&game, cfg.response, &OracleConfig::default()).map_err(runtime_err)?;
    let spec = BatchSpec {
        episode,
        adversary: cfg.adversary.clone(),
        iterations: cfg.iterations,
        base_seed: cfg.seed,
    };
    println!(
        "{}: {} x {} rounds, {} / {} followers, memory {}, adversary {}, eps {:.6}, nu {:.6e}",
        cfg.name,
        spec.iterations,
        spec.episode.horizon,
        cfg.algorithm,
        cfg.response,
        cfg.memory,
        cfg.adversary,
        spec.episode.epsilon,
        spec.episode.nu
    );
    let batch = run_batch(&game, &oracle, &spec).map_err(runtime_err)?;
    let title = format!("{} (S = {}, H = {})", cfg.name, spec.iterations, spec.episode.horizon);
    let files = write_batch_outputs(&out_dir, &batch, &title).map_err(runtime_err)?;
    let cfg_path = out_dir.join("config.toml");
    std::fs::write(&cfg_path, cfg.to_toml()).map_err(|e| runtime_err(format!("{}: {e}", cfg_path.display())))?;

    let last = batch.mean_regret.len() - 1;
    println!(
        "final mean regret {:.4} (std {:.4}), bound {:.4}",
        batch.mean_regret[last],
        batch.std_regret[last],
        batch.final_bound()
    );
    if let Some(d) = batch.mean_drift(1) {
        println!("mean ||x^(t+1) - x^t||_1 = {d:.4e}");
    }
    println!(
        "wrote {} files to {} in {:.1}s",
        files.len() + 1,
        out_dir.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn check(only: Option<&str>) -> Result<(), Failure> {
    let outcomes = run_checks(only);
    if outcomes.is_empty() {
        return Err(config_err(format!("no property suite matches `{}`", only.unwrap_or(""))));
    }
    let mut failed = 0;
    for o in &outcomes {
        println!("{} {:<24} {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("{} passed, {} failed", outcomes.len() - failed, failed);
    if failed > 0 {
        Err(runtime_err(format!("{failed} property suite(s) failed")))
    } else {
        Ok(())
    }
}
