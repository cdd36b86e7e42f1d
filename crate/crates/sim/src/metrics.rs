//! Estimate-to-truth matching and per-SNR metrics.

use otfs_radar::grid::circular_diff;
use otfs_radar::{FractionalEstimate, FrameGrid, Target};

use crate::trial::TrialRecord;

/// Largest DD distance (cells) at which an estimate may claim a truth.
pub const MATCH_GATE: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub estimate: usize,
    pub truth: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    pub pairs: Vec<MatchPair>,
    pub unmatched_estimates: Vec<usize>,
    pub unmatched_truths: Vec<usize>,
}

/// Greedy global matching on the torus: all candidate pairs within the gate
/// are sorted by distance (ties by index) and taken while both ends are free.
/// Positions are `(doppler_index, delay_index)`.
pub fn match_positions(estimates: &[(f64, f64)], truth: &[(f64, f64)], dims: (usize, usize)) -> Matching {
    let (n, m) = dims;
    let mut candidates = Vec::new();
    for (i, e) in estimates.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            let dk = circular_diff(e.0, t.0, n);
            let dl = circular_diff(e.1, t.1, m);
            let d = dk.hypot(dl);
            if d <= MATCH_GATE {
                candidates.push(MatchPair {
                    estimate: i,
                    truth: j,
                    distance: d,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.estimate.cmp(&b.estimate))
            .then(a.truth.cmp(&b.truth))
    });
    let mut est_used = vec![false; estimates.len()];
    let mut truth_used = vec![false; truth.len()];
    let mut pairs = Vec::new();
    for c in candidates {
        if !est_used[c.estimate] && !truth_used[c.truth] {
            est_used[c.estimate] = true;
            truth_used[c.truth] = true;
            pairs.push(c);
        }
    }
    Matching {
        pairs,
        unmatched_estimates: (0..estimates.len()).filter(|&i| !est_used[i]).collect(),
        unmatched_truths: (0..truth.len()).filter(|&j| !truth_used[j]).collect(),
    }
}

pub fn match_targets(estimates: &[FractionalEstimate<f64>], truth: &[Target<f64>], grid: &FrameGrid<f64>) -> Matching {
    let e: Vec<_> = estimates.iter().map(|e| (e.doppler_index, e.delay_index)).collect();
    let t: Vec<_> = truth.iter().map(|t| (t.doppler_index, t.delay_index)).collect();
    match_positions(&e, &t, grid.dims())
}

/// One row of the metrics CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub snr_db: f64,
    pub detection_rate: f64,
    /// False alarms per cell per frame.
    pub false_alarm_rate: f64,
    pub rmse_range_m: f64,
    pub rmse_velocity_mps: f64,
    pub nmse_kappa: f64,
    pub nmse_iota: f64,
    pub crlb_kappa: f64,
    pub crlb_iota: f64,
}

impl MetricsRow {
    pub const HEADER: [&'static str; 9] = [
        "snr_db",
        "detection_rate",
        "false_alarm_rate",
        "rmse_range_m",
        "rmse_velocity_mps",
        "nmse_kappa",
        "nmse_iota",
        "crlb_kappa",
        "crlb_iota",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.snr_db,
            self.detection_rate,
            self.false_alarm_rate,
            self.rmse_range_m,
            self.rmse_velocity_mps,
            self.nmse_kappa,
            self.nmse_iota,
            self.crlb_kappa,
            self.crlb_iota,
        ]
    }
}

/// Index-domain RMSE over matched pairs, refined versus integer-only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexRmse {
    pub snr_db: f64,
    pub pairs: usize,
    pub fractional: f64,
    pub integer: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}

/// Running sums behind [`MetricsRow`] and [`IndexRmse`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsAccumulator {
    pub frames: usize,
    pub cells: usize,
    pub truths: usize,
    pub matched: usize,
    pub false_alarms: usize,
    pub sq_range: f64,
    pub sq_velocity: f64,
    pub sq_kappa_err: f64,
    pub sq_iota_err: f64,
    pub sq_kappa: f64,
    pub sq_iota: f64,
    pub sq_index_frac: f64,
    pub sq_index_int: f64,
}

impl MetricsAccumulator {
    pub fn add(&mut self, record: &TrialRecord, grid: &FrameGrid<f64>) {
        let (n, m) = grid.dims();
        let matching = match_targets(&record.estimates, &record.truth, grid);
        self.frames += 1;
        self.cells += record.cells;
        self.truths += record.truth.len();
        self.matched += matching.pairs.len();
        self.false_alarms += matching.unmatched_estimates.len();
        let dr = grid.range_resolution();
        let dv = grid.velocity_resolution();
        for p in &matching.pairs {
            let e = &record.estimates[p.estimate];
            let t = &record.truth[p.truth];
            let dk = circular_diff(e.doppler_index, t.doppler_index, n);
            let dl = circular_diff(e.delay_index, t.delay_index, m);
            self.sq_range += (dl * dr).powi(2);
            self.sq_velocity += (dk * dv).powi(2);
            self.sq_kappa_err += dk * dk;
            self.sq_iota_err += dl * dl;
            self.sq_kappa += t.kappa().powi(2);
            self.sq_iota += t.iota().powi(2);
            self.sq_index_frac += dk * dk + dl * dl;
            let dk_int = circular_diff(e.doppler_bin(n) as f64, t.doppler_index, n);
            let dl_int = circular_diff(e.l as f64, t.delay_index, m);
            self.sq_index_int += dk_int * dk_int + dl_int * dl_int;
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.frames += other.frames;
        self.cells += other.cells;
        self.truths += other.truths;
        self.matched += other.matched;
        self.false_alarms += other.false_alarms;
        self.sq_range += other.sq_range;
        self.sq_velocity += other.sq_velocity;
        self.sq_kappa_err += other.sq_kappa_err;
        self.sq_iota_err += other.sq_iota_err;
        self.sq_kappa += other.sq_kappa;
        self.sq_iota += other.sq_iota;
        self.sq_index_frac += other.sq_index_frac;
        self.sq_index_int += other.sq_index_int;
    }

    /// Row with NaN in every column that has no data; CRLB columns NaN.
    pub fn row(&self, snr_db: f64) -> MetricsRow {
        let matched = self.matched as f64;
        MetricsRow {
            snr_db,
            detection_rate: ratio(matched, self.truths as f64),
            false_alarm_rate: ratio(self.false_alarms as f64, self.cells as f64),
            rmse_range_m: ratio(self.sq_range, matched).sqrt(),
            rmse_velocity_mps: ratio(self.sq_velocity, matched).sqrt(),
            nmse_kappa: if self.matched > 0 { ratio(self.sq_kappa_err, self.sq_kappa) } else { f64::NAN },
            nmse_iota: if self.matched > 0 { ratio(self.sq_iota_err, self.sq_iota) } else { f64::NAN },
            crlb_kappa: f64::NAN,
            crlb_iota: f64::NAN,
        }
    }

    pub fn index_rmse(&self, snr_db: f64) -> IndexRmse {
        let matched = self.matched as f64;
        IndexRmse {
            snr_db,
            pairs: self.matched,
            fractional: ratio(self.sq_index_frac, matched).sqrt(),
            integer: ratio(self.sq_index_int, matched).sqrt(),
        }
    }
}

/// Metrics for one SNR point from its trial records, in order.
pub fn compute_metrics(records: &[TrialRecord], grid: &FrameGrid<f64>, snr_db: f64) -> MetricsRow {
    let mut acc = MetricsAccumulator::default();
    for r in records {
        acc.add(r, grid);
    }
    acc.row(snr_db)
}

/// Per-trial CRLB at unit noise variance, pooled like the NMSE.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CrlbAccumulator {
    pub trials: usize,
    pub targets: usize,
    pub kappa_sum: f64,
    pub iota_sum: f64,
    pub kappa_norm2: f64,
    pub iota_norm2: f64,
}

impl CrlbAccumulator {
    pub fn add(&mut self, report: &otfs_radar::CrlbReport, targets: &[Target<f64>]) {
        self.trials += 1;
        self.targets += targets.len();
        self.kappa_sum += report.kappa_crlb().iter().sum::<f64>();
        self.iota_sum += report.iota_crlb().iter().sum::<f64>();
        self.kappa_norm2 += targets.iter().map(|t| t.kappa().powi(2)).sum::<f64>();
        self.iota_norm2 += targets.iter().map(|t| t.iota().powi(2)).sum::<f64>();
    }

    pub fn merge(&mut self, other: &Self) {
        self.trials += other.trials;
        self.targets += other.targets;
        self.kappa_sum += other.kappa_sum;
        self.iota_sum += other.iota_sum;
        self.kappa_norm2 += other.kappa_norm2;
        self.iota_norm2 += other.iota_norm2;
    }

    /// `(κ bound, ι bound)` at noise variance `sigma2`.
    pub fn bounds(&self, sigma2: f64) -> (f64, f64) {
        (sigma2 * ratio(self.kappa_sum, self.kappa_norm2), sigma2 * ratio(self.iota_sum, self.iota_norm2))
    }

    /// Mean per-target `(range m², velocity (m/s)²)` variance bounds.
    pub fn physical_bounds(&self, sigma2: f64, grid: &FrameGrid<f64>) -> (f64, f64) {
        let t = self.targets as f64;
        let dr = grid.range_resolution();
        let dv = grid.velocity_resolution();
        (
            sigma2 * ratio(self.iota_sum, t) * dr * dr,
            sigma2 * ratio(self.kappa_sum, t) * dv * dv,
        )
    }
}
