//! OFDM periodogram reference detector.
//!
//! QPSK symbols sit directly on the time-frequency grid. Targets act with
//! integer-rounded indices as per-symbol and per-subcarrier phase ramps,
//!
//! ```text
//! Y[n, m] = Σᵢ hᵢ e^{j2π(kᵢ n/N − lᵢ m/M)} X[n, m] + Z[n, m]
//! ```
//!
//! and the periodogram is `|P[k, l]|²` with
//! `P[k, l] = Σ_{n,m} Y[n, m] X*[n, m] e^{−j2π(kn/N − lm/M)}`.

use otfs_radar::fft2::Fft2;
use otfs_radar::seed::{derive_seed, stream};
use otfs_radar::target::nearest_bin;
use otfs_radar::{add_noise, detect_targets, generate_qpsk_frame, CfarConfig, Complex, CorrelationMap, Scenario};
use otfs_radar::fractional::FractionalEstimate;
use otfs_radar::fft2::FftDirection;

use crate::error::SimResult;
use crate::trial::TrialRecord;

/// Complex periodogram `P` (so `|P|²` is the detection statistic).
pub fn ofdm_periodogram_map(scenario: &Scenario<f64>) -> SimResult<CorrelationMap<f64>> {
    scenario.validate()?;
    let grid = &scenario.grid;
    let (n, m) = grid.dims();
    let x = generate_qpsk_frame(grid, derive_seed(scenario.rng_seed, stream::BASELINE_FRAME, 0));
    let bins: Vec<(f64, f64, Complex<f64>)> = scenario
        .targets
        .iter()
        .map(|t| (t.doppler_bin() as f64, t.delay_bin() as f64, t.gain))
        .collect();
    let mut y = x.clone();
    for a in 0..n {
        for b in 0..m {
            let response = bins.iter().fold(Complex::new(0.0, 0.0), |acc, &(k, l, h)| {
                let phase = std::f64::consts::TAU * (k * a as f64 / n as f64 - l * b as f64 / m as f64);
                acc + h * Complex::from_polar(1.0, phase)
            });
            y[(a, b)] = response * x[(a, b)];
        }
    }
    let y = add_noise(&y, scenario.snr_db, derive_seed(scenario.rng_seed, stream::BASELINE_NOISE, 0));
    let mut z = otfs_radar::DdMatrix::from_fn(n, m, |a, b| y[(a, b)] * x[(a, b)].conj());
    let fft = Fft2::new(n, m);
    fft.along_doppler(&mut z, FftDirection::Forward);
    fft.along_delay(&mut z, FftDirection::Inverse);
    Ok(CorrelationMap::new(z))
}

/// Integer-grid estimates for each detection of the periodogram.
pub fn integer_estimates(scenario: &Scenario<f64>, map: &CorrelationMap<f64>, cfar: &CfarConfig) -> SimResult<TrialRecord> {
    let detections = detect_targets(map, cfar)?;
    let n = scenario.grid.n_doppler();
    let mn = scenario.grid.cells() as f64;
    let estimates = detections
        .detections
        .iter()
        .map(|d| {
            let signed = if d.k < n.div_ceil(2) { d.k as f64 } else { d.k as f64 - n as f64 };
            FractionalEstimate {
                k: d.k,
                l: d.l,
                kappa: 0.0,
                iota: 0.0,
                doppler_index: signed,
                delay_index: d.l as f64,
                kappa_clamped: false,
                iota_clamped: false,
                zero_denominator: false,
            }
        })
        .collect();
    let gains = detections.detections.iter().map(|d| map.v[(d.k, d.l)] / mn).collect();
    Ok(TrialRecord {
        truth: scenario.targets.clone(),
        detections,
        estimates,
        gains,
        cells: scenario.grid.cells(),
    })
}

pub fn ofdm_periodogram_baseline(scenario: &Scenario<f64>, cfar: &CfarConfig) -> SimResult<TrialRecord> {
    integer_estimates(scenario, &ofdm_periodogram_map(scenario)?, cfar)
}

/// Rounded bin of a target, as used by the baseline channel.
pub fn rounded_cell(scenario: &Scenario<f64>, i: usize) -> (usize, usize) {
    let t = &scenario.targets[i];
    let g = &scenario.grid;
    (g.doppler_row(nearest_bin(t.doppler_index)), g.delay_col(nearest_bin(t.delay_index)))
}
