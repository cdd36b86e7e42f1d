//! OTFS frame geometry and the mapping between grid indices and physical units.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Geometry of one OTFS frame: `N` Doppler bins (time slots) by `M` delay
/// bins (subcarriers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameGrid<T> {
    n_doppler: usize,
    m_delay: usize,
    subcarrier_spacing: T,
    slot_duration: T,
    carrier_freq: T,
}

impl<T: Real> FrameGrid<T> {
    /// Grid with the slot duration tied to the subcarrier spacing, `T = 1/Δf`.
    pub fn new(n_doppler: usize, m_delay: usize, subcarrier_spacing: T, carrier_freq: T) -> Result<Self> {
        Self::with_slot_duration(
            n_doppler,
            m_delay,
            subcarrier_spacing,
            T::one() / subcarrier_spacing,
            carrier_freq,
        )
    }

    pub fn with_slot_duration(
        n_doppler: usize,
        m_delay: usize,
        subcarrier_spacing: T,
        slot_duration: T,
        carrier_freq: T,
    ) -> Result<Self> {
        if n_doppler < 2 || m_delay < 2 {
            return Err(Error::InvalidGrid(format!(
                "need N >= 2 and M >= 2, got N={n_doppler}, M={m_delay}"
            )));
        }
        let positive = |x: T| x.is_finite() && x > T::zero();
        if !positive(subcarrier_spacing) {
            return Err(Error::InvalidGrid(format!(
                "subcarrier spacing must be positive, got {subcarrier_spacing}"
            )));
        }
        if !positive(slot_duration) {
            return Err(Error::InvalidGrid(format!(
                "slot duration must be positive, got {slot_duration}"
            )));
        }
        if !positive(carrier_freq) {
            return Err(Error::InvalidGrid(format!(
                "carrier frequency must be positive, got {carrier_freq}"
            )));
        }
        Ok(Self {
            n_doppler,
            m_delay,
            subcarrier_spacing,
            slot_duration,
            carrier_freq,
        })
    }

    /// Unit-spacing grid (`Δf = 1`, `T = 1`, `f_c = 1`): convenient when only
    /// index arithmetic matters.
    pub fn unit(n_doppler: usize, m_delay: usize) -> Result<Self> {
        Self::new(n_doppler, m_delay, T::one(), T::one())
    }

    #[inline]
    pub fn n_doppler(&self) -> usize {
        self.n_doppler
    }

    #[inline]
    pub fn m_delay(&self) -> usize {
        self.m_delay
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.n_doppler, self.m_delay)
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.n_doppler * self.m_delay
    }

    pub fn subcarrier_spacing(&self) -> T {
        self.subcarrier_spacing
    }

    pub fn slot_duration(&self) -> T {
        self.slot_duration
    }

    pub fn carrier_freq(&self) -> T {
        self.carrier_freq
    }

    /// Delay resolution `1/(M Δf)` in seconds.
    pub fn delay_resolution(&self) -> T {
        T::one() / (T::of_usize(self.m_delay) * self.subcarrier_spacing)
    }

    /// Doppler resolution `1/(N T)` in Hz.
    pub fn doppler_resolution(&self) -> T {
        T::one() / (T::of_usize(self.n_doppler) * self.slot_duration)
    }

    /// Factor `s` such that `ν τ = s · k_ν · l_τ`, i.e. `1/(M N T Δf)`.
    ///
    /// Equals `1/(MN)` when `T Δf = 1`.
    pub fn phase_scale(&self) -> T {
        T::one()
            / (T::of_usize(self.cells()) * self.slot_duration * self.subcarrier_spacing)
    }

    /// Range covered by one delay bin, `c / (2 M Δf)`.
    pub fn range_resolution(&self) -> T {
        T::of(SPEED_OF_LIGHT) * self.delay_resolution() / T::of(2.0)
    }

    /// Radial speed covered by one Doppler bin, `c / (2 f_c N T)`.
    pub fn velocity_resolution(&self) -> T {
        T::of(SPEED_OF_LIGHT) * self.doppler_resolution() / (T::of(2.0) * self.carrier_freq)
    }

    pub fn delay_index_to_range(&self, delay_index: T) -> T {
        delay_index * self.range_resolution()
    }

    pub fn doppler_index_to_velocity(&self, doppler_index: T) -> T {
        doppler_index * self.velocity_resolution()
    }

    pub fn range_to_delay_index(&self, range_m: T) -> T {
        range_m / self.range_resolution()
    }

    pub fn velocity_to_doppler_index(&self, velocity_mps: T) -> T {
        velocity_mps / self.velocity_resolution()
    }

    /// Largest unambiguous range, `c / (2 Δf)`.
    pub fn max_unambiguous_range(&self) -> T {
        self.range_resolution() * T::of_usize(self.m_delay)
    }

    /// Largest unambiguous radial speed, `c / (4 f_c T)` (half the Doppler span).
    pub fn max_unambiguous_speed(&self) -> T {
        self.velocity_resolution() * T::of_usize(self.n_doppler) / T::of(2.0)
    }

    /// Signed Doppler index of storage row `k`: `k` if `k < N/2`, else `k - N`.
    pub fn signed_doppler(&self, k: usize) -> isize {
        let n = self.n_doppler as isize;
        let k = k as isize;
        if 2 * k < n {
            k
        } else {
            k - n
        }
    }

    /// Storage row of a (possibly negative) integer Doppler index.
    pub fn doppler_row(&self, k: isize) -> usize {
        wrap_index(k, self.n_doppler)
    }

    /// Storage column of an integer delay index.
    pub fn delay_col(&self, l: isize) -> usize {
        wrap_index(l, self.m_delay)
    }
}

/// `[i]_n`: non-negative remainder of `i` modulo `n`.
#[inline]
pub fn wrap_index(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Signed circular difference `a - b` reduced to `[-n/2, n/2)`.
pub fn circular_diff<T: Real>(a: T, b: T, n: usize) -> T {
    let period = T::of_usize(n);
    let d = a - b;
    d - period * (d / period + T::of(0.5)).floor()
}
