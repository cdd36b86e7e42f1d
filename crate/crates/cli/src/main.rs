use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use otfs_radar::PilotStrategy;
use otfs_sim::config::{Baseline, ExperimentConfig, ScenarioMode};
use otfs_sim::experiment::{roc_sweep, run_crlb_sweep, run_experiment};
use otfs_sim::output::{crlb_csv, detections_csv, estimates_csv, failures_csv, heatmap_csv, roc_csv, write_experiment, write_file};
use otfs_sim::scenario::sample_scenario;
use otfs_sim::trial::{process_map, received_correlation};
use otfs_sim::SimResult;

#[derive(Parser)]
#[command(name = "otfs-radar", version, about = "OTFS delay-Doppler radar simulation")]
struct Cli {
    /// Base RNG seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Extra `key=value` settings, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    targets: Option<usize>,
    #[arg(long)]
    pilot: Option<PilotStrategy>,
    #[arg(long)]
    mode: Option<ScenarioMode>,
    #[arg(long)]
    p_fa: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// SNR sweep to metrics.csv, crlb.csv, failures.csv and manifest.txt.
    Simulate {
        #[command(flatten)]
        o: Overrides,
        /// Comma-separated SNR list in dB.
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<String>,
        #[arg(long)]
        baseline: Option<Baseline>,
    },
    /// Single frame to detections.csv.
    Detect {
        #[command(flatten)]
        o: Overrides,
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        snr: f64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Single frame to estimates.csv.
    Estimate {
        #[command(flatten)]
        o: Overrides,
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        snr: f64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// CRLB sweep to crlb.csv.
    Crlb {
        #[command(flatten)]
        o: Overrides,
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<String>,
    },
    /// False-alarm sweep to roc.csv for OTFS and the OFDM periodogram.
    Roc {
        #[command(flatten)]
        o: Overrides,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        snr: f64,
        /// Comma-separated false-alarm probabilities.
        #[arg(long, default_value = "1e-6,1e-5,1e-4,1e-3,1e-2")]
        p_fas: String,
    },
    /// |V| of one frame to heatmap.csv.
    Heatmap {
        #[command(flatten)]
        o: Overrides,
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        snr: f64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
}

fn parse_list(s: &str) -> SimResult<Vec<f64>> {
    let mut cfg = ExperimentConfig::default();
    cfg.set("snr_sweep_db", s)?;
    Ok(cfg.snr_sweep_db)
}

fn build_config(cli: &Cli, o: &Overrides) -> SimResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
    }
    for a in &o.set {
        cfg.set_assignment(a)?;
    }
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    if let Some(t) = o.trials {
        cfg.trials_per_point = t;
    }
    if let Some(p) = o.targets {
        cfg.target_count = p;
    }
    if let Some(p) = o.pilot {
        cfg.pilot_strategy = p;
    }
    if let Some(m) = o.mode {
        cfg.scenario_mode = m;
    }
    if let Some(p) = o.p_fa {
        cfg.cfar.p_fa = p;
    }
    Ok(cfg)
}

fn single_frame(cfg: &ExperimentConfig, snr: f64, trial: usize) -> SimResult<(otfs_radar::Scenario<f64>, otfs_radar::CorrelationMap<f64>)> {
    cfg.validate()?;
    let mut s = sample_scenario(cfg, trial)?;
    s.snr_db = snr;
    let (_, v) = received_correlation(&s)?;
    Ok((s, v))
}

fn run(cli: &Cli) -> SimResult<Vec<PathBuf>> {
    let dir = &cli.out_dir;
    match &cli.command {
        Command::Simulate { o, snr, baseline } => {
            let mut cfg = build_config(cli, o)?;
            if let Some(s) = snr {
                cfg.snr_sweep_db = parse_list(s)?;
            }
            if let Some(b) = baseline {
                cfg.baseline = *b;
            }
            let report = run_experiment(&cfg, cli.workers)?;
            for f in &report.failures {
                eprintln!("trial {} failed: {}", f.trial, f.message);
            }
            write_experiment(&report, dir)
        }
        Command::Detect { o, snr, trial } => {
            let cfg = build_config(cli, o)?;
            let (s, v) = single_frame(&cfg, *snr, *trial)?;
            let r = process_map(&s, &v, &cfg.cfar)?;
            Ok(vec![write_file(dir, "detections.csv", &detections_csv(&r.detections, s.grid.n_doppler()))?])
        }
        Command::Estimate { o, snr, trial } => {
            let cfg = build_config(cli, o)?;
            let (s, v) = single_frame(&cfg, *snr, *trial)?;
            let r = process_map(&s, &v, &cfg.cfar)?;
            Ok(vec![write_file(dir, "estimates.csv", &estimates_csv(&r.estimates, &s.grid))?])
        }
        Command::Crlb { o, snr } => {
            let mut cfg = build_config(cli, o)?;
            if let Some(s) = snr {
                cfg.snr_sweep_db = parse_list(s)?;
            }
            let (rows, failures) = run_crlb_sweep(&cfg, cli.workers)?;
            Ok(vec![
                write_file(dir, "crlb.csv", &crlb_csv(&rows))?,
                write_file(dir, "failures.csv", &failures_csv(&failures))?,
            ])
        }
        Command::Roc { o, snr, p_fas } => {
            let cfg = build_config(cli, o)?;
            let p = parse_list(p_fas)?;
            let (points, failures) = roc_sweep(&cfg, *snr, &p, cli.workers)?;
            Ok(vec![
                write_file(dir, "roc.csv", &roc_csv(&points))?,
                write_file(dir, "failures.csv", &failures_csv(&failures))?,
            ])
        }
        Command::Heatmap { o, snr, trial } => {
            let cfg = build_config(cli, o)?;
            let (_, v) = single_frame(&cfg, *snr, *trial)?;
            Ok(vec![write_file(dir, "heatmap.csv", &heatmap_csv(&v))?])
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
