//! Monte Carlo harness for OTFS radar sensing: scenario draws, the trial
//! pipeline, matching and metrics, an OFDM periodogram reference, SNR/ROC/CRLB
//! sweeps and CSV output.

pub mod baseline;
pub mod config;
pub mod error;
pub mod experiment;
pub mod format;
pub mod metrics;
pub mod output;
pub mod scenario;
pub mod trial;

pub use baseline::ofdm_periodogram_baseline;
pub use config::{Baseline, ExperimentConfig, ScenarioMode};
pub use error::{SimError, SimResult};
pub use experiment::{roc_sweep, run_crlb_sweep, run_experiment, CrlbRow, ExperimentReport, RocPoint, TrialFailure};
pub use metrics::{compute_metrics, match_targets, Matching, MetricsRow};
pub use scenario::sample_scenario;
pub use trial::{run_trial, TrialRecord};
