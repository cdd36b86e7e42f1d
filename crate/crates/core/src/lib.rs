//! Delay-Doppler radar sensing on OTFS frames.
//!
//! Channel synthesis with fractional delay and Doppler, the unitary
//! ISFFT/SFFT modem, 2D circular correlation, CA-CFAR detection,
//! fractional index refinement and Cramér-Rao bounds.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the scalar.

pub mod channel;
pub mod correlator;
pub mod crlb;
pub mod detector;
pub mod error;
pub mod fft2;
pub mod fractional;
pub mod grid;
pub mod matrix;
pub mod modem;
pub mod sampling;
pub mod scalar;
pub mod seed;
pub mod target;

pub use channel::{add_noise, apply_channel, build_effective_channel, noise_variance, Convolver, EffectiveChannel};
pub use correlator::{correlate, correlation_mean_check, CorrelationMap, Correlator};
pub use crlb::{crlb_bounds, crlb_for_frame, fisher_matrix, mean_frame_jacobian, noiseless_mean_frame, CrlbReport};
pub use detector::{cfar_alpha, cfar_threshold_map, detect_targets, estimate_gain, CfarConfig, Detection, DetectionList};
pub use error::{Error, Result};
pub use fractional::{estimate_iota, estimate_kappa, pick_neighbor, refine_detections, Axis, FractionalEstimate};
pub use grid::{FrameGrid, SPEED_OF_LIGHT};
pub use matrix::{DdMatrix, RealMap};
pub use modem::{isfft, sfft, tf_channel_crosscheck, TfMatrix};
pub use num_complex::Complex;
pub use scalar::Real;
pub use seed::derive_seed;
pub use target::{generate_one_pilot_frame, generate_qpsk_frame, PilotStrategy, Scenario, Target};

pub type FrameGrid64 = FrameGrid<f64>;
pub type FrameGrid32 = FrameGrid<f32>;
pub type DdMatrix64 = DdMatrix<f64>;
pub type DdMatrix32 = DdMatrix<f32>;
pub type Target64 = Target<f64>;
pub type Target32 = Target<f32>;
pub type Scenario64 = Scenario<f64>;
pub type Scenario32 = Scenario<f32>;
pub type CorrelationMap64 = CorrelationMap<f64>;
pub type CorrelationMap32 = CorrelationMap<f32>;
pub type Complex64 = Complex<f64>;
pub type Complex32 = Complex<f32>;
