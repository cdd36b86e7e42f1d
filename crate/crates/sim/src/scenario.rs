//! Per-trial scenario draws.

use std::collections::HashSet;
use std::f64::consts::TAU;

use otfs_radar::seed::{derive_seed, stream};
use otfs_radar::{Complex, FrameGrid, Scenario, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, ScenarioMode};
use crate::error::{SimError, SimResult};

/// Draw limit for [`ScenarioMode::DistinctRows`].
pub const MAX_DRAWS: usize = 1000;

/// Fixed layout used by [`ScenarioMode::Reference`]: `(delay, Doppler storage index)`.
pub const REFERENCE_LAYOUT: [(f64, f64); 4] = [(14.29, 11.72), (7.0, 2.0), (3.37, 5.06), (11.12, 22.65)];

/// Largest delay and |Doppler| index a drawn target may take.
pub fn index_caps(cfg: &ExperimentConfig, grid: &FrameGrid<f64>) -> (f64, f64) {
    let l_cap = grid.range_to_delay_index(cfg.max_range_m);
    let k_cap = grid.velocity_to_doppler_index(cfg.max_speed_kmh / 3.6).abs();
    let l_max = l_cap.min((grid.m_delay() - 1) as f64 - 1e-9).max(0.0);
    let k_max = k_cap.min(grid.n_doppler() as f64 / 2.0 - 1e-9);
    (l_max, k_max)
}

fn random_gain(rng: &mut ChaCha8Rng) -> Complex<f64> {
    Complex::from_polar(1.0, rng.random_range(0.0..TAU))
}

fn occupies_distinct_rows(targets: &[Target<f64>], grid: &FrameGrid<f64>) -> bool {
    let mut rows = HashSet::new();
    let mut cols = HashSet::new();
    targets.iter().all(|t| {
        let (k, l) = t.storage_cell(grid);
        rows.insert(k) && cols.insert(l)
    })
}

/// Seed identifying trial `trial` of `cfg`; shared by every SNR point.
pub fn trial_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    derive_seed(cfg.rng_seed, stream::SCENARIO, trial as u64)
}

/// Targets for trial `trial`. Deterministic in `(cfg, trial)`. The returned
/// scenario carries the first SNR of the sweep.
pub fn sample_scenario(cfg: &ExperimentConfig, trial: usize) -> SimResult<Scenario<f64>> {
    let grid = cfg.grid()?;
    let seed = trial_seed(cfg, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l_max, k_max) = index_caps(cfg, &grid);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<Target<f64>> {
        (0..cfg.target_count)
            .map(|_| {
                let delay = rng.random_range(0.0..=l_max);
                let doppler = rng.random_range(-k_max..=k_max);
                Target::new(random_gain(rng), delay, doppler)
            })
            .collect()
    };
    let targets = match cfg.scenario_mode {
        ScenarioMode::Random => draw(&mut rng),
        ScenarioMode::DistinctRows => {
            let mut found = None;
            for _ in 0..MAX_DRAWS {
                let t = draw(&mut rng);
                if occupies_distinct_rows(&t, &grid) {
                    found = Some(t);
                    break;
                }
            }
            found.ok_or(SimError::RetryExhausted { attempts: MAX_DRAWS })?
        }
        ScenarioMode::Reference => REFERENCE_LAYOUT
            .iter()
            .map(|&(delay, doppler)| {
                Target::from_storage_indices(random_gain(&mut rng), delay, doppler, grid.n_doppler())
            })
            .collect(),
    };
    let scenario = Scenario {
        grid,
        targets,
        snr_db: cfg.snr_sweep_db.first().copied().unwrap_or(f64::INFINITY),
        rng_seed: seed,
        pilot_strategy: cfg.pilot_strategy,
    };
    scenario.validate()?;
    Ok(scenario)
}
