use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use matchlab_cli::bundle::reproduce;
use matchlab_cli::config::ImsimRunConfig;
use matchlab_cli::{tables, DEFAULT_SEED};
use matchlab_core::exante::{exact_distribution, monte_carlo_correlated, CorrelatedUtilityConfig, ExactOptions};
use matchlab_core::imsim::{
    build_snapshots, compute_metrics, generate_population, read_snapshot_dir, read_truth, run_clearinghouse,
    write_snapshot_dir, write_truth,
};
use matchlab_core::linker::{link_snapshots, read_trajectory_csv, score_linkage, write_trajectory_csv};
use matchlab_core::{audit_stability, run_da, run_tcdm, Mechanism, ProblemInstance, RoundBudget};
use serde_json::json;

/// Exit status when a run completes but an acceptance check fails.
const CHECK_FAILED: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "matchlab", version, about = "Matching mechanisms under time constraints")]
struct Cli {
    /// Seed for every random draw of the run.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file, or output directory for `imsim` and `reproduce`; stdout
    /// when omitted for single-file outputs.
    #[arg(long, global = true, visible_alias = "outdir")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Student-proposing deferred acceptance on an instance file.
    Da {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Round-by-round TCDM trajectory under straightforward play.
    Tcdm {
        #[arg(long)]
        instance: PathBuf,
        /// Round budget; runs to convergence when omitted.
        #[arg(long)]
        rounds: Option<u32>,
    },
    /// Exact rank distributions for every priority position.
    Exante {
        #[command(flatten)]
        market: Market,
        #[arg(long, value_enum)]
        mechanism: MechanismArg,
    },
    /// Simulated rank CDFs under correlated preferences, both mechanisms.
    Mc {
        #[command(flatten)]
        market: Market,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 2000)]
        sims: usize,
    },
    /// Staggered-closing clearinghouse simulation with hourly snapshots.
    Imsim {
        /// Run configuration (JSON); demo values when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Reconstruct trajectories from a snapshot directory.
    Link {
        #[arg(long)]
        snapshots: PathBuf,
    },
    /// Score a trajectory file against a ground-truth sidecar.
    LinkScore {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Write the full artifact bundle and evaluate every acceptance check.
    Reproduce,
}

#[derive(Args, Debug)]
struct Market {
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Comma-separated college capacities.
    #[arg(long, value_delimiter = ',', default_value = "1,1,1,1")]
    caps: Vec<u32>,
    /// TCDM round budget.
    #[arg(long, default_value_t = 2)]
    rounds: u32,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MechanismArg {
    Tcdm,
    Da,
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout().write_all(bytes).context("writing to stdout"),
    }
}

fn emit_json(out: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    emit(out, &bytes)
}

fn require_dir(out: Option<&Path>, command: &str) -> Result<PathBuf> {
    match out {
        Some(dir) => Ok(dir.to_path_buf()),
        None => bail!("`{command}` needs --out <DIR>"),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Da { instance } => {
            let inst = ProblemInstance::load(&instance)?;
            let m = run_da(&inst);
            let audit = audit_stability(&inst, &m)?;
            emit_json(
                out,
                &json!({"mechanism": "DA", "matching": m.to_json(&inst), "stable": audit.is_stable}),
            )?;
        }
        Command::Tcdm { instance, rounds } => {
            let inst = ProblemInstance::load(&instance)?;
            let budget = match rounds {
                Some(0) => bail!("--rounds must be at least 1"),
                Some(t) => RoundBudget::Limited(t),
                None => RoundBudget::Unbounded,
            };
            emit_json(out, &run_tcdm(&inst, budget).to_json(&inst))?;
        }
        Command::Exante { market, mechanism } => {
            let mech = match mechanism {
                MechanismArg::Da => Mechanism::Da,
                MechanismArg::Tcdm if market.rounds == 0 => bail!("--rounds must be at least 1"),
                MechanismArg::Tcdm => Mechanism::Tcdm { rounds: market.rounds },
            };
            let dists = exact_distribution(market.n, &market.caps, mech, &ExactOptions::default())?;
            emit(out, &tables::exact_csv(&dists)?)?;
        }
        Command::Mc { market, delta, sims } => {
            let cfg = CorrelatedUtilityConfig {
                delta,
                num_sims: sims,
                seed: cli.seed,
            };
            let result = monte_carlo_correlated(market.n, &market.caps, market.rounds, &cfg)?;
            emit(out, &tables::cdf_csv(&[result])?)?;
        }
        Command::Imsim { config } => {
            let dir = require_dir(out, "imsim")?;
            let cfg = match config {
                Some(path) => ImsimRunConfig::load(&path)?,
                None => ImsimRunConfig::default(),
            };
            let schedule = cfg.schedule();
            let pop = generate_population(&cfg.population, cli.seed)?;
            let run = run_clearinghouse(&pop, &schedule, &cfg.clearinghouse.with_seed(cli.seed))?;
            let metrics = compute_metrics(&pop, &schedule, &run);
            let (set, truth) = build_snapshots(&pop, &run);
            let snapshots = dir.join("snapshots");
            write_snapshot_dir(&snapshots, &set, &schedule)?;
            write_truth(&dir.join("truth.csv"), &set, &truth)?;
            emit_json(
                Some(&dir.join("metrics.json")),
                &json!({"seed": cli.seed, "config": cfg, "metrics": metrics}),
            )?;
            eprintln!(
                "{} students, {} hours -> {}",
                pop.num_students(),
                set.hours.len(),
                dir.display()
            );
        }
        Command::Link { snapshots } => {
            let Some(path) = out else {
                bail!("`link` needs --out <FILE>")
            };
            let (set, schedule) = read_snapshot_dir(&snapshots)?;
            let result = link_snapshots(&set, &schedule);
            for w in &result.warnings {
                let at = w.university.as_deref().map(|u| format!(" {u}")).unwrap_or_default();
                eprintln!("warning: hour {}{at}: {}", w.hour, w.message);
            }
            write_trajectory_csv(path, &result)?;
            eprintln!(
                "{} ids, {} opened before the last hour, {} change events",
                result.num_ids(),
                result.new_id_count,
                result.change_events.len()
            );
        }
        Command::LinkScore { result, truth } => {
            let linked = read_trajectory_csv(&result)?;
            let truth = read_truth(&truth, &linked.shape())?;
            emit_json(out, &serde_json::to_value(score_linkage(&linked, &truth)?)?)?;
        }
        Command::Reproduce => {
            let dir = require_dir(out, "reproduce")?;
            let bundle = reproduce(cli.seed)?;
            bundle.write(&dir)?;
            for c in &bundle.checks {
                println!("{c}");
            }
            if !bundle.passed() {
                return Ok(ExitCode::from(CHECK_FAILED));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are validation errors; help and version are not
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
