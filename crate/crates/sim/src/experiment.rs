//! SNR sweeps, ROC sweeps and CRLB sweeps over many trials.
//!
//! Trials run in parallel; every random draw is keyed by `(seed, trial)` and
//! results are reduced in trial order, so output does not depend on the
//! number of workers. All SNR points share each trial's targets, frame and
//! unit-variance noise realisation.

use otfs_radar::crlb::crlb_for_frame;
use otfs_radar::{noise_variance, CfarConfig, FrameGrid, Scenario};
use rayon::prelude::*;

use crate::baseline::{integer_estimates, ofdm_periodogram_map};
use crate::config::{Baseline, ExperimentConfig};
use crate::error::{SimError, SimResult};
use crate::metrics::{match_targets, CrlbAccumulator, IndexRmse, MetricsAccumulator, MetricsRow};
use crate::scenario::sample_scenario;
use crate::trial::{process_map, received_correlation, TrialRecord};

/// A trial (or one SNR point of it) that could not be completed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub trial: usize,
    /// `None` when the scenario itself could not be drawn.
    pub snr_db: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<MetricsRow>,
    pub index_rmse: Vec<IndexRmse>,
    /// OFDM periodogram rows when the baseline is enabled.
    pub baseline_rows: Option<Vec<MetricsRow>>,
    pub crlb_rows: Vec<CrlbRow>,
    pub failures: Vec<TrialFailure>,
}

/// One row of the CRLB sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrlbRow {
    pub snr_db: f64,
    pub kappa_bound: f64,
    pub iota_bound: f64,
    pub range_bound_m2: f64,
    pub velocity_bound_mps2: f64,
}

impl CrlbRow {
    pub const HEADER: [&'static str; 5] = ["snr_db", "kappa_bound", "iota_bound", "range_bound_m2", "velocity_bound_mps2"];

    pub fn values(&self) -> [f64; 5] {
        [self.snr_db, self.kappa_bound, self.iota_bound, self.range_bound_m2, self.velocity_bound_mps2]
    }

    fn from_accumulator(acc: &CrlbAccumulator, snr_db: f64, grid: &FrameGrid<f64>) -> Self {
        let sigma2 = noise_variance(snr_db);
        let (kappa_bound, iota_bound) = acc.bounds(sigma2);
        let (range_bound_m2, velocity_bound_mps2) = acc.physical_bounds(sigma2, grid);
        CrlbRow {
            snr_db,
            kappa_bound,
            iota_bound,
            range_bound_m2,
            velocity_bound_mps2,
        }
    }
}

/// Run `f` on a pool of `workers` threads (`0` = rayon default).
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> SimResult<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

struct TrialOutcome {
    otfs: Vec<Option<TrialRecord>>,
    baseline: Vec<Option<TrialRecord>>,
    crlb: Option<CrlbAccumulator>,
    failures: Vec<TrialFailure>,
}

fn at_snr(scenario: &Scenario<f64>, snr_db: f64) -> Scenario<f64> {
    Scenario {
        snr_db,
        ..scenario.clone()
    }
}

/// Unit-noise CRLB contribution of one trial; `None` for singular Fisher.
pub fn trial_crlb(scenario: &Scenario<f64>) -> SimResult<Option<CrlbAccumulator>> {
    if scenario.targets.is_empty() {
        return Ok(None);
    }
    let x = scenario.transmit_frame(crate::trial::frame_seed(scenario));
    match crlb_for_frame(&x, &scenario.targets, &scenario.grid, 1.0) {
        Ok(report) => {
            let mut acc = CrlbAccumulator::default();
            acc.add(&report, &scenario.targets);
            Ok(Some(acc))
        }
        Err(otfs_radar::Error::SingularFisher { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn run_one(cfg: &ExperimentConfig, trial: usize) -> TrialOutcome {
    let snrs = &cfg.snr_sweep_db;
    let mut out = TrialOutcome {
        otfs: vec![None; snrs.len()],
        baseline: vec![None; snrs.len()],
        crlb: None,
        failures: Vec::new(),
    };
    let fail = |snr_db: Option<f64>, e: SimError| TrialFailure {
        trial,
        snr_db,
        message: e.to_string(),
    };
    let scenario = match sample_scenario(cfg, trial) {
        Ok(s) => s,
        Err(e) => {
            out.failures.push(fail(None, e));
            return out;
        }
    };
    match trial_crlb(&scenario) {
        Ok(c) => out.crlb = c,
        Err(e) => out.failures.push(fail(None, e)),
    }
    for (i, &snr) in snrs.iter().enumerate() {
        let s = at_snr(&scenario, snr);
        match received_correlation(&s).and_then(|(_, v)| process_map(&s, &v, &cfg.cfar)) {
            Ok(r) => out.otfs[i] = Some(r),
            Err(e) => out.failures.push(fail(Some(snr), e)),
        }
        if cfg.baseline == Baseline::OfdmPeriodogram {
            match ofdm_periodogram_map(&s).and_then(|v| integer_estimates(&s, &v, &cfg.cfar)) {
                Ok(r) => out.baseline[i] = Some(r),
                Err(e) => out.failures.push(fail(Some(snr), e)),
            }
        }
    }
    out
}

/// Full SNR sweep. Failed trials are listed in the report and skipped.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> SimResult<ExperimentReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let outcomes: Vec<TrialOutcome> =
        with_workers(workers, || (0..cfg.trials_per_point).into_par_iter().map(|t| run_one(cfg, t)).collect())?;

    let points = cfg.snr_sweep_db.len();
    let mut otfs = vec![MetricsAccumulator::default(); points];
    let mut base = vec![MetricsAccumulator::default(); points];
    let mut crlb = CrlbAccumulator::default();
    let mut failures = Vec::new();
    for o in &outcomes {
        for i in 0..points {
            if let Some(r) = &o.otfs[i] {
                otfs[i].add(r, &grid);
            }
            if let Some(r) = &o.baseline[i] {
                base[i].add(r, &grid);
            }
        }
        if let Some(c) = &o.crlb {
            crlb.merge(c);
        }
        failures.extend(o.failures.iter().cloned());
    }

    let crlb_rows: Vec<CrlbRow> = cfg
        .snr_sweep_db
        .iter()
        .map(|&snr| CrlbRow::from_accumulator(&crlb, snr, &grid))
        .collect();
    let attach = |acc: &MetricsAccumulator, i: usize| {
        let mut row = acc.row(cfg.snr_sweep_db[i]);
        row.crlb_kappa = crlb_rows[i].kappa_bound;
        row.crlb_iota = crlb_rows[i].iota_bound;
        row
    };
    Ok(ExperimentReport {
        config: cfg.clone(),
        rows: (0..points).map(|i| attach(&otfs[i], i)).collect(),
        index_rmse: (0..points).map(|i| otfs[i].index_rmse(cfg.snr_sweep_db[i])).collect(),
        baseline_rows: (cfg.baseline == Baseline::OfdmPeriodogram)
            .then(|| (0..points).map(|i| attach(&base[i], i)).collect()),
        crlb_rows,
        failures,
    })
}

/// CRLB sweep only (no detection).
pub fn run_crlb_sweep(cfg: &ExperimentConfig, workers: usize) -> SimResult<(Vec<CrlbRow>, Vec<TrialFailure>)> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let parts: Vec<Result<Option<CrlbAccumulator>, TrialFailure>> = with_workers(workers, || {
        (0..cfg.trials_per_point)
            .into_par_iter()
            .map(|t| {
                sample_scenario(cfg, t).and_then(|s| trial_crlb(&s)).map_err(|e| TrialFailure {
                    trial: t,
                    snr_db: None,
                    message: e.to_string(),
                })
            })
            .collect()
    })?;
    let mut acc = CrlbAccumulator::default();
    let mut failures = Vec::new();
    for p in parts {
        match p {
            Ok(Some(c)) => acc.merge(&c),
            Ok(None) => {}
            Err(f) => failures.push(f),
        }
    }
    let rows = cfg
        .snr_sweep_db
        .iter()
        .map(|&snr| CrlbRow::from_accumulator(&acc, snr, &grid))
        .collect();
    Ok((rows, failures))
}

/// Detector operating point for one false-alarm setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub method: RocMethod,
    pub p_fa: f64,
    pub detection_rate: f64,
    pub false_alarm_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RocMethod {
    Otfs,
    OfdmPeriodogram,
}

impl RocMethod {
    pub fn name(self) -> &'static str {
        match self {
            RocMethod::Otfs => "otfs",
            RocMethod::OfdmPeriodogram => "ofdm_periodogram",
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct RocCounts {
    truths: usize,
    matched: usize,
    false_alarms: usize,
    cells: usize,
}

fn roc_counts(record: &TrialRecord, grid: &FrameGrid<f64>) -> RocCounts {
    let m = match_targets(&record.estimates, &record.truth, grid);
    RocCounts {
        truths: record.truth.len(),
        matched: m.pairs.len(),
        false_alarms: m.unmatched_estimates.len(),
        cells: record.cells,
    }
}

/// Sweep `p_fas` at one SNR for the OTFS detector and the OFDM baseline,
/// reusing each trial's maps across all thresholds.
pub fn roc_sweep(cfg: &ExperimentConfig, snr_db: f64, p_fas: &[f64], workers: usize) -> SimResult<(Vec<RocPoint>, Vec<TrialFailure>)> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let cfars: Vec<CfarConfig> = p_fas.iter().map(|&p| CfarConfig { p_fa: p, ..cfg.cfar }).collect();
    for c in &cfars {
        c.validate(grid.n_doppler(), grid.m_delay())?;
    }
    type PerTrial = Result<Vec<(RocCounts, RocCounts)>, TrialFailure>;
    let per_trial: Vec<PerTrial> = with_workers(workers, || {
        (0..cfg.trials_per_point)
            .into_par_iter()
            .map(|t| {
                let run = || -> SimResult<Vec<(RocCounts, RocCounts)>> {
                    let s = at_snr(&sample_scenario(cfg, t)?, snr_db);
                    let (_, v) = received_correlation(&s)?;
                    let p = ofdm_periodogram_map(&s)?;
                    cfars
                        .iter()
                        .map(|c| {
                            Ok((
                                roc_counts(&process_map(&s, &v, c)?, &grid),
                                roc_counts(&integer_estimates(&s, &p, c)?, &grid),
                            ))
                        })
                        .collect()
                };
                run().map_err(|e| TrialFailure {
                    trial: t,
                    snr_db: Some(snr_db),
                    message: e.to_string(),
                })
            })
            .collect()
    })?;
    let mut otfs = vec![RocCounts::default(); p_fas.len()];
    let mut ofdm = vec![RocCounts::default(); p_fas.len()];
    let mut failures = Vec::new();
    for r in per_trial {
        match r {
            Ok(v) => {
                for (i, (a, b)) in v.into_iter().enumerate() {
                    for (acc, c) in [(&mut otfs[i], a), (&mut ofdm[i], b)] {
                        acc.truths += c.truths;
                        acc.matched += c.matched;
                        acc.false_alarms += c.false_alarms;
                        acc.cells += c.cells;
                    }
                }
            }
            Err(f) => failures.push(f),
        }
    }
    let point = |method, p_fa, c: &RocCounts| RocPoint {
        method,
        p_fa,
        detection_rate: if c.truths > 0 { c.matched as f64 / c.truths as f64 } else { f64::NAN },
        false_alarm_rate: if c.cells > 0 { c.false_alarms as f64 / c.cells as f64 } else { f64::NAN },
    };
    let mut points: Vec<RocPoint> = p_fas.iter().zip(&otfs).map(|(&p, c)| point(RocMethod::Otfs, p, c)).collect();
    points.extend(p_fas.iter().zip(&ofdm).map(|(&p, c)| point(RocMethod::OfdmPeriodogram, p, c)));
    Ok((points, failures))
}
