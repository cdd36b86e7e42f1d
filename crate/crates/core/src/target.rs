//! Point scatterers, scenarios and transmit-frame generation.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::FrameGrid;
use crate::matrix::DdMatrix;
use crate::scalar::Real;

/// One point scatterer with complex gain and real-valued grid indices.
///
/// The delay index is non-negative; the Doppler index is signed. Each index
/// splits into the nearest integer bin plus a fraction in `[-0.5, 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target<T> {
    pub gain: Complex<T>,
    pub delay_index: T,
    pub doppler_index: T,
}

/// Nearest integer with ties rounded up, so the fraction lands in `[-0.5, 0.5)`.
#[inline]
pub fn nearest_bin<T: Real>(x: T) -> isize {
    (x + T::of(0.5)).floor().to_isize().expect("index fits isize")
}

impl<T: Real> Target<T> {
    pub fn new(gain: Complex<T>, delay_index: T, doppler_index: T) -> Self {
        Self {
            gain,
            delay_index,
            doppler_index,
        }
    }

    /// Target from physical range (m) and radial velocity (m/s).
    pub fn from_physical(gain: Complex<T>, range_m: T, velocity_mps: T, grid: &FrameGrid<T>) -> Self {
        Self::new(
            gain,
            grid.range_to_delay_index(range_m),
            grid.velocity_to_doppler_index(velocity_mps),
        )
    }

    /// Target whose Doppler index is given in storage convention `[0, N)`;
    /// values at or above `N/2` are mapped to their negative alias.
    pub fn from_storage_indices(gain: Complex<T>, delay_index: T, doppler_storage: T, n_doppler: usize) -> Self {
        let n = T::of_usize(n_doppler);
        let doppler = if doppler_storage >= n / T::of(2.0) {
            doppler_storage - n
        } else {
            doppler_storage
        };
        Self::new(gain, delay_index, doppler)
    }

    pub fn delay_bin(&self) -> isize {
        nearest_bin(self.delay_index)
    }

    pub fn doppler_bin(&self) -> isize {
        nearest_bin(self.doppler_index)
    }

    /// Fractional delay `ι ∈ [-0.5, 0.5)`.
    pub fn iota(&self) -> T {
        self.delay_index - T::of_isize(self.delay_bin())
    }

    /// Fractional Doppler `κ ∈ [-0.5, 0.5)`.
    pub fn kappa(&self) -> T {
        self.doppler_index - T::of_isize(self.doppler_bin())
    }

    pub fn is_integer(&self) -> bool {
        self.iota() == T::zero() && self.kappa() == T::zero()
    }

    /// Storage cell `(k, l)` of the nearest grid point.
    pub fn storage_cell(&self, grid: &FrameGrid<T>) -> (usize, usize) {
        (grid.doppler_row(self.doppler_bin()), grid.delay_col(self.delay_bin()))
    }

    pub fn range_m(&self, grid: &FrameGrid<T>) -> T {
        grid.delay_index_to_range(self.delay_index)
    }

    pub fn velocity_mps(&self, grid: &FrameGrid<T>) -> T {
        grid.doppler_index_to_velocity(self.doppler_index)
    }

    /// Check `delay ∈ [0, M-1)` and `doppler ∈ [-N/2, N/2)`.
    pub fn validate(&self, grid: &FrameGrid<T>) -> Result<()> {
        let m = T::of_usize(grid.m_delay());
        let half_n = T::of_usize(grid.n_doppler()) / T::of(2.0);
        if !(self.gain.re.is_finite() && self.gain.im.is_finite()) {
            return Err(Error::NonFinite(format!("target gain {}", self.gain)));
        }
        if !(self.delay_index >= T::zero() && self.delay_index < m - T::one()) {
            return Err(Error::TargetOutOfRange(format!(
                "delay index {} outside [0, {})",
                self.delay_index,
                m - T::one()
            )));
        }
        if !(self.doppler_index >= -half_n && self.doppler_index < half_n) {
            return Err(Error::TargetOutOfRange(format!(
                "Doppler index {} outside [{}, {})",
                self.doppler_index, -half_n, half_n
            )));
        }
        Ok(())
    }
}

/// Placement of transmit symbols in the DD frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PilotStrategy {
    /// Every DD cell carries a unit-power QPSK symbol.
    FullPilot,
    /// A single pilot at `(0, 0)` carrying the whole frame energy.
    OnePilot,
}

impl PilotStrategy {
    pub fn name(self) -> &'static str {
        match self {
            PilotStrategy::FullPilot => "full_pilot",
            PilotStrategy::OnePilot => "one_pilot",
        }
    }
}

impl std::str::FromStr for PilotStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "full_pilot" | "fullpilot" | "full" => Ok(PilotStrategy::FullPilot),
            "one_pilot" | "onepilot" | "one" => Ok(PilotStrategy::OnePilot),
            other => Err(format!("unknown pilot strategy '{other}'")),
        }
    }
}

impl std::fmt::Display for PilotStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to synthesize one received frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub grid: FrameGrid<T>,
    pub targets: Vec<Target<T>>,
    /// Per-entry SNR; `+∞` means noiseless.
    pub snr_db: T,
    pub rng_seed: u64,
    pub pilot_strategy: PilotStrategy,
}

impl<T: Real> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_nan() || self.snr_db == T::neg_infinity() {
            return Err(Error::NonFinite(format!("snr_db = {}", self.snr_db)));
        }
        self.targets.iter().try_for_each(|t| t.validate(&self.grid))
    }

    /// Transmit frame for this scenario's strategy, seeded by `seed`.
    pub fn transmit_frame(&self, seed: u64) -> DdMatrix<T> {
        match self.pilot_strategy {
            PilotStrategy::FullPilot => generate_qpsk_frame(&self.grid, seed),
            PilotStrategy::OnePilot => generate_one_pilot_frame(&self.grid),
        }
    }
}

/// Uniform i.i.d. unit-power QPSK symbols `(±1 ± j)/√2`, deterministic in `seed`.
pub fn generate_qpsk_frame<T: Real>(grid: &FrameGrid<T>, seed: u64) -> DdMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = T::FRAC_1_SQRT_2();
    DdMatrix::from_fn(grid.n_doppler(), grid.m_delay(), |_, _| {
        let bits: u8 = rng.random_range(0..4);
        let re = if bits & 1 == 0 { a } else { -a };
        let im = if bits & 2 == 0 { a } else { -a };
        Complex::new(re, im)
    })
}

/// Single pilot of amplitude `√(MN)` at `(0, 0)`, zeros elsewhere.
pub fn generate_one_pilot_frame<T: Real>(grid: &FrameGrid<T>) -> DdMatrix<T> {
    let mut x = DdMatrix::zeros_for(grid);
    x[(0, 0)] = Complex::new(T::of_usize(grid.cells()).sqrt(), T::zero());
    x
}
