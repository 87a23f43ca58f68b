use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hypdiam_core::harness::{
    fmt_f64, graph_table, lattice_table, peel_table, run_peel_trials, run_scaling_sweep, run_verification_suites,
    surface_rows, surface_table, EllPolicy, ExperimentConfig, PeelParams, Suite, SurfaceParams,
};
use hypdiam_core::hexagon::build_hexagon;

/// Diameter experiments for random hyperbolic surfaces glued from pants.
#[derive(Debug, Parser)]
#[command(name = "hypdiam", version)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Root seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    emit: Option<PathBuf>,

    /// JSON experiment config; explicit flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hexagon constants for one cuff length, as JSON.
    Hexagon {
        #[arg(long)]
        ell: f64,
    },
    /// Ball counts of the reflection orbit and the counting-bound checks.
    Lattice {
        #[arg(long)]
        ell: f64,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 0.5)]
        grid_step: f64,
    },
    /// Connectivity and diameter of configuration-model graphs.
    Graph {
        #[arg(long)]
        genus: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Diameter estimates of random surfaces at one genus.
    Surface {
        #[arg(long)]
        genus: Option<u64>,
        /// Cuff length or `auto`.
        #[arg(long)]
        ell: Option<EllPolicy>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        rcap: Option<f64>,
        /// Fill the wall_ms column.
        #[arg(long)]
        timing: bool,
    },
    /// Peeling explorations with per-run audits.
    Peel {
        #[arg(long)]
        genus: Option<u64>,
        #[arg(long)]
        ell: Option<EllPolicy>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Run verification batteries; exit status 1 on any failure.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
    },
    /// Diameter scaling sweep across genera.
    Sweep {
        /// Comma-separated genus list.
        #[arg(long, value_delimiter = ',')]
        genus: Option<Vec<u64>>,
        #[arg(long)]
        ell: Option<EllPolicy>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        rcap: Option<f64>,
        #[arg(long)]
        timing: bool,
        /// Write the per-genus summary as JSON here (stderr otherwise).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn load_config(global: &Global) -> Result<Option<ExperimentConfig>> {
    global
        .config
        .as_deref()
        .map(|p| ExperimentConfig::from_json_file(p).with_context(|| format!("reading config {}", p.display())))
        .transpose()
}

fn single_genus(flag: Option<u64>, cfg: &Option<ExperimentConfig>) -> Result<u64> {
    match (flag, cfg) {
        (Some(g), _) => Ok(g),
        (None, Some(c)) if c.genus.len() == 1 => Ok(c.genus[0]),
        (None, Some(_)) => bail!("config lists several genera; pass --genus"),
        (None, None) => bail!("--genus is required"),
    }
}

fn write_json(value: &serde_json::Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Rounds to 12 significant digits for JSON output.
fn num(x: f64) -> serde_json::Value {
    serde_json::json!(fmt_f64(x).parse::<f64>().unwrap_or(x))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = load_config(&cli.global)?;
    let defaults = cfg.clone().unwrap_or_default();
    let seed = cli.global.seed.unwrap_or(defaults.seed);
    let emit = cli.global.emit.clone().or(defaults.emit.clone());
    if let Some(n) = cli.global.threads.or(defaults.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let trials = |flag: Option<u64>| flag.unwrap_or(defaults.trials);

    match cli.command {
        Command::Hexagon { ell } => {
            let s = build_hexagon(ell)?.summary();
            let value = serde_json::json!({
                "ell": num(s.ell),
                "s": num(s.s),
                "t": num(s.t),
                "c_ell": num(s.c_ell),
                "c_prime": num(s.c_prime),
                "rho": num(s.rho),
                "pants_radius": num(s.pants_radius),
                "seam_length": num(s.seam_length),
            });
            write_json(&value, emit.as_deref())?;
        }
        Command::Lattice { ell, radius, grid_step } => {
            lattice_table(ell, radius, grid_step)?.emit(emit.as_deref())?;
        }
        Command::Graph { genus, trials: t } => {
            let genus = single_genus(genus, &cfg)?;
            graph_table(genus, trials(t), seed)?.emit(emit.as_deref())?;
        }
        Command::Surface {
            genus,
            ell,
            trials: t,
            rcap,
            timing,
        } => {
            let p = SurfaceParams {
                genus: single_genus(genus, &cfg)?,
                ell: ell.unwrap_or(defaults.ell),
                trials: trials(t),
                seed,
                rcap: rcap.or(defaults.rcap),
                timing: timing || defaults.timing,
            };
            if let EllPolicy::Fixed(ell) = p.ell {
                build_hexagon(ell)?;
            }
            surface_table(&p, &surface_rows(&p)).emit(emit.as_deref())?;
        }
        Command::Peel {
            genus,
            ell,
            epsilon,
            k,
            trials: t,
        } => {
            let p = PeelParams {
                genus: single_genus(genus, &cfg)?,
                ell: ell.unwrap_or(defaults.ell),
                epsilon: epsilon.unwrap_or(defaults.epsilon),
                k: k.unwrap_or(defaults.k),
                trials: trials(t),
                seed,
            };
            let rows = run_peel_trials(&p)?;
            peel_table(&p, &rows)?.emit(emit.as_deref())?;
        }
        Command::Verify { suite } => {
            let report = run_verification_suites(suite);
            for s in &report.suites {
                for c in &s.checks {
                    eprintln!("[{}] {:?}: {} ({})", if c.passed { "pass" } else { "FAIL" }, s.suite, c.name, c.detail);
                }
            }
            write_json(&serde_json::to_value(&report)?, emit.as_deref())?;
            if !report.passed {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Sweep {
            genus,
            ell,
            trials: t,
            rcap,
            timing,
            summary,
        } => {
            let sweep_cfg = ExperimentConfig {
                genus: genus.unwrap_or(defaults.genus.clone()),
                ell: ell.unwrap_or(defaults.ell),
                trials: trials(t),
                seed,
                rcap: rcap.or(defaults.rcap),
                timing: timing || defaults.timing,
                ..defaults.clone()
            };
            sweep_cfg.validate()?;
            let result = run_scaling_sweep(&sweep_cfg)?;
            result.table(&sweep_cfg).emit(emit.as_deref())?;
            let summary_json = serde_json::to_value(&result.summary)?;
            match summary {
                Some(p) => write_json(&summary_json, Some(&p))?,
                None => eprintln!("{}", serde_json::to_string_pretty(&summary_json)?),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
