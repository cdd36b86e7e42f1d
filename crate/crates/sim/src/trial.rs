//! One Monte Carlo trial: frame, channel, noise, correlation, detection and
//! refinement.

use otfs_radar::fractional::refine_detections;
use otfs_radar::seed::{derive_seed, stream};
use otfs_radar::{
    add_noise, apply_channel, build_effective_channel, detect_targets, estimate_gain, CfarConfig, Complex,
    CorrelationMap, Correlator, DdMatrix, DetectionList, FractionalEstimate, Scenario, Target,
};

use crate::error::SimResult;

/// Everything a trial produced, plus its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub truth: Vec<Target<f64>>,
    pub detections: DetectionList<f64>,
    pub estimates: Vec<FractionalEstimate<f64>>,
    /// `V[k, l] / (MN)` at each detection.
    pub gains: Vec<Complex<f64>>,
    /// Cells per frame.
    pub cells: usize,
}

/// Seed of the transmit frame of `scenario`.
pub fn frame_seed(scenario: &Scenario<f64>) -> u64 {
    derive_seed(scenario.rng_seed, stream::FRAME, 0)
}

/// Seed of the noise of `scenario`; independent of the SNR.
pub fn noise_seed(scenario: &Scenario<f64>) -> u64 {
    derive_seed(scenario.rng_seed, stream::NOISE, 0)
}

/// Transmit frame and correlation map of one noisy reception.
pub fn received_correlation(scenario: &Scenario<f64>) -> SimResult<(DdMatrix<f64>, CorrelationMap<f64>)> {
    scenario.validate()?;
    let grid = &scenario.grid;
    let x = scenario.transmit_frame(frame_seed(scenario));
    let chan = build_effective_channel(&scenario.targets, grid)?;
    let y = add_noise(&apply_channel(&x, &chan, grid)?, scenario.snr_db, noise_seed(scenario));
    let v = Correlator::for_grid(grid).correlate(&y, &x)?;
    Ok((x, v))
}

/// Detect and refine on a precomputed map.
pub fn process_map(scenario: &Scenario<f64>, v: &CorrelationMap<f64>, cfar: &CfarConfig) -> SimResult<TrialRecord> {
    let detections = detect_targets(v, cfar)?;
    let estimates = refine_detections(v, &detections)?;
    let gains = detections.detections.iter().map(|d| estimate_gain(v, d.k, d.l)).collect();
    Ok(TrialRecord {
        truth: scenario.targets.clone(),
        detections,
        estimates,
        gains,
        cells: scenario.grid.cells(),
    })
}

pub fn run_trial(scenario: &Scenario<f64>, cfar: &CfarConfig) -> SimResult<TrialRecord> {
    let (_, v) = received_correlation(scenario)?;
    process_map(scenario, &v, cfar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use otfs_radar::{FrameGrid, PilotStrategy};

    fn scenario(targets: Vec<Target<f64>>, snr_db: f64, pilot: PilotStrategy) -> Scenario<f64> {
        Scenario {
            grid: FrameGrid::unit(32, 32).unwrap(),
            targets,
            snr_db,
            rng_seed: 9,
            pilot_strategy: pilot,
        }
    }

    #[test]
    fn noiseless_integer_target() {
        let target = vec![Target::new(Complex::new(0.0, 1.0), 12.0, -5.0)];
        let s = scenario(target.clone(), f64::INFINITY, PilotStrategy::OnePilot);
        let r = run_trial(&s, &CfarConfig::default()).unwrap();
        assert_eq!(r.detections.cells(), vec![(27, 12)]);
        assert!(r.estimates[0].kappa.abs() < 1e-9 && r.estimates[0].iota.abs() < 1e-9);
        assert!((r.gains[0].norm() - 1.0).abs() < 1e-9);

        // Random data leaves sidelobes of order √(MN) next to the MN peak.
        let s = scenario(target, f64::INFINITY, PilotStrategy::FullPilot);
        let r = run_trial(&s, &CfarConfig::default()).unwrap();
        assert_eq!(r.detections.cells(), vec![(27, 12)]);
        let bound = 3.0 / (32.0f64 * 32.0).sqrt();
        assert!(r.estimates[0].kappa.abs() < bound && r.estimates[0].iota.abs() < bound);
    }

    #[test]
    fn same_seed_same_record() {
        let s = scenario(
            vec![Target::new(Complex::new(1.0, 0.0), 3.3, 4.4)],
            5.0,
            PilotStrategy::FullPilot,
        );
        let cfar = CfarConfig::with_p_fa(1e-3);
        assert_eq!(run_trial(&s, &cfar).unwrap(), run_trial(&s, &cfar).unwrap());
    }
}
