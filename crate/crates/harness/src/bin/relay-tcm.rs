use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relay_tcm_harness::config::{read_config, SweepConfig};
use relay_tcm_harness::output::{manifest_path, write_csv, Manifest};
use relay_tcm_harness::reports::{analyze, run_bounds, run_capacity};
use relay_tcm_harness::{
    compare_ideal_vs_nonideal, run_ber_sweep, run_uncoded_sweep, BoundsConfig, CapacityConfig,
    ChannelConfig, HarnessError, Result,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "relay-tcm", version, about = "Relay TCM simulation and analysis")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML config file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Start from a built-in campaign instead (fig11_text, fig11_caption).
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the output path of the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FileArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// BER sweep of a coded scheme.
    SimulateBer(SweepArgs),
    /// BER sweep of uncoded PSK (`code = "uncoded"`).
    SimulateUncoded(SweepArgs),
    /// Near-ML decoding against the ideal-link decoder on the same frames.
    CompareIdeal(SweepArgs),
    /// JSON report of a code's distance metrics.
    Analyze {
        /// Catalog name or trellis file.
        code: String,
        /// Variance ratio σ²_sd/σ²_rd; default from the link variances.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        sd_db: f64,
        #[arg(long, default_value_t = 15.0)]
        rd_db: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of PEP bounds for the minimum-diversity pairs.
    Bounds(FileArgs),
    /// CSV of capacity bounds.
    Capacity(FileArgs),
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig> {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), _) => read_config(path)?,
        (None, Some(name)) => SweepConfig::preset(name)?,
        (None, None) => return Err(HarnessError::config("give --config or --preset")),
    };
    if a.out.is_some() {
        cfg.output = a.out.clone();
    }
    Ok(cfg)
}

fn emit<R: Serialize, C: Serialize>(
    command: &str,
    out: Option<&Path>,
    rows: &[R],
    config: &C,
    seed: u64,
    wall: Vec<f64>,
) -> Result<()> {
    match out {
        Some(path) => {
            write_csv(path, rows)?;
            let mut m = Manifest::new(command, seed, config, rows.len());
            m.wall_time_s = wall;
            m.write(&manifest_path(path))?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in rows {
                w.serialize(r)?;
            }
            w.flush().map_err(|source| HarnessError::Io {
                path: "stdout".into(),
                source,
            })?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    }
    match cli.cmd {
        Cmd::SimulateBer(a) => {
            let cfg = sweep_config(&a)?;
            let recs = run_ber_sweep(&cfg)?;
            let wall = recs.iter().map(|r| r.wall_time_s).collect();
            emit("simulate-ber", cfg.output.as_deref(), &recs, &cfg, cfg.seed, wall)
        }
        Cmd::SimulateUncoded(a) => {
            let cfg = sweep_config(&a)?;
            let recs = run_uncoded_sweep(&cfg)?;
            let wall = recs.iter().map(|r| r.wall_time_s).collect();
            emit("simulate-uncoded", cfg.output.as_deref(), &recs, &cfg, cfg.seed, wall)
        }
        Cmd::CompareIdeal(a) => {
            let cfg = sweep_config(&a)?;
            let recs = compare_ideal_vs_nonideal(&cfg)?;
            emit("compare-ideal", cfg.output.as_deref(), &recs, &cfg, cfg.seed, Vec::new())
        }
        Cmd::Analyze {
            code,
            gamma,
            sd_db,
            rd_db,
            out,
        } => {
            let report = analyze(&code, gamma, &ChannelConfig::new(sd_db, rd_db, rd_db))?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|source| HarnessError::Io {
                    path: path.display().to_string(),
                    source,
                }),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Cmd::Bounds(a) => {
            let mut cfg: BoundsConfig = read_config(&a.config)?;
            if a.out.is_some() {
                cfg.output = a.out;
            }
            let rows = run_bounds(&cfg)?;
            emit("bounds", cfg.output.as_deref(), &rows, &cfg, cfg.seed, Vec::new())
        }
        Cmd::Capacity(a) => {
            let mut cfg: CapacityConfig = read_config(&a.config)?;
            if a.out.is_some() {
                cfg.output = a.out;
            }
            let rows = run_capacity(&cfg)?;
            emit("capacity", cfg.output.as_deref(), &rows, &cfg, cfg.seed, Vec::new())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
