//! Unitary ISFFT/SFFT pair between the delay-Doppler and time-frequency grids.
//!
//! ```text
//! X_TF[n, m] = 1/√(NM) Σ_{k,l} X_DD[k, l] e^{+j2π(nk/N − ml/M)}
//! Y_DD[k, l] = 1/√(NM) Σ_{n,m} Y_TF[n, m] e^{−j2π(nk/N − ml/M)}
//! ```

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft2::Fft2;
use crate::grid::FrameGrid;
use crate::matrix::DdMatrix;
use crate::scalar::Real;
use crate::target::Target;

/// Time-frequency matrix indexed `[n (time slot), m (subcarrier)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TfMatrix<T>(DdMatrix<T>);

impl<T: Real> TfMatrix<T> {
    pub fn from_storage(m: DdMatrix<T>) -> Self {
        Self(m)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        Self(DdMatrix::from_fn(rows, cols, f))
    }

    pub fn storage(&self) -> &DdMatrix<T> {
        &self.0
    }

    pub fn into_storage(self) -> DdMatrix<T> {
        self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn frobenius_norm(&self) -> T {
        self.0.frobenius_norm()
    }
}

impl<T> Index<(usize, usize)> for TfMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, idx: (usize, usize)) -> &Complex<T> {
        &self.0[idx]
    }
}

impl<T> IndexMut<(usize, usize)> for TfMatrix<T> {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex<T> {
        &mut self.0[idx]
    }
}

fn unitary_scale<T: Real>(m: &mut DdMatrix<T>) {
    let s = T::one() / T::of_usize(m.rows() * m.cols()).sqrt();
    for z in m.as_mut_slice() {
        *z *= s;
    }
}

/// Inverse symplectic finite Fourier transform (DD → TF).
pub fn isfft<T: Real>(x_dd: &DdMatrix<T>) -> TfMatrix<T> {
    let (n, m) = x_dd.dims();
    let fft = Fft2::new(n, m);
    let mut out = x_dd.clone();
    fft.along_doppler(&mut out, FftDirection::Inverse);
    fft.along_delay(&mut out, FftDirection::Forward);
    unitary_scale(&mut out);
    TfMatrix(out)
}

/// Symplectic finite Fourier transform (TF → DD).
pub fn sfft<T: Real>(y_tf: &TfMatrix<T>) -> DdMatrix<T> {
    let (n, m) = y_tf.dims();
    let fft = Fft2::new(n, m);
    let mut out = y_tf.0.clone();
    fft.along_doppler(&mut out, FftDirection::Forward);
    fft.along_delay(&mut out, FftDirection::Inverse);
    unitary_scale(&mut out);
    out
}

/// [`isfft`] with a dimension check against `grid`.
pub fn isfft_on<T: Real>(x_dd: &DdMatrix<T>, grid: &FrameGrid<T>) -> Result<TfMatrix<T>> {
    x_dd.ensure_dims(grid.dims())?;
    Ok(isfft(x_dd))
}

/// [`sfft`] with a dimension check against `grid`.
pub fn sfft_on<T: Real>(y_tf: &TfMatrix<T>, grid: &FrameGrid<T>) -> Result<DdMatrix<T>> {
    y_tf.0.ensure_dims(grid.dims())?;
    Ok(sfft(y_tf))
}

/// Apply integer-index targets in the TF domain and return to DD.
///
/// Each target multiplies the TF frame by `h e^{−j2πντ} e^{j2πν nT} e^{−j2π mΔf τ}`.
/// For on-grid targets this is exactly the DD circular shift produced by
/// [`crate::channel::apply_channel`].
pub fn tf_channel_crosscheck<T: Real>(
    x_dd: &DdMatrix<T>,
    targets: &[Target<T>],
    grid: &FrameGrid<T>,
) -> Result<DdMatrix<T>> {
    x_dd.ensure_dims(grid.dims())?;
    for (index, t) in targets.iter().enumerate() {
        t.validate(grid)?;
        if !t.is_integer() {
            return Err(Error::FractionalTargetUnsupported { index });
        }
    }
    let x_tf = isfft(x_dd);
    let (n_slots, n_sub) = grid.dims();
    let nu_tau_scale = grid.phase_scale();
    let y_tf = TfMatrix::from_fn(n_slots, n_sub, |n, m| {
        let response = targets.iter().fold(Complex::new(T::zero(), T::zero()), |acc, t| {
            // ν nT = k_ν n / N and mΔf τ = m l_τ / M for any T, Δf.
            let doppler = t.doppler_index * T::of_usize(n) / T::of_usize(n_slots);
            let delay = t.delay_index * T::of_usize(m) / T::of_usize(n_sub);
            let nu_tau = nu_tau_scale * t.doppler_index * t.delay_index;
            acc + t.gain * Complex::from_polar(T::one(), T::TAU() * (doppler - delay - nu_tau))
        });
        response * x_tf[(n, m)]
    });
    Ok(sfft(&y_tf))
}
