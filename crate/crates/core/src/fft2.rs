//! Separable 2D DFTs on [`DdMatrix`] storage, backed by `rustfft`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub use rustfft::FftDirection;

use crate::matrix::DdMatrix;
use crate::scalar::Real;

/// Unnormalized DFT plans for an `rows x cols` matrix.
///
/// `Forward` uses `e^{-j2π…}`, `Inverse` uses `e^{+j2π…}`; neither scales.
pub struct Fft2<T: Real> {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<T>>,
    row_inv: Arc<dyn Fft<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
}

impl<T: Real> Fft2<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft(cols, FftDirection::Forward),
            row_inv: planner.plan_fft(cols, FftDirection::Inverse),
            col_fwd: planner.plan_fft(rows, FftDirection::Forward),
            col_inv: planner.plan_fft(rows, FftDirection::Inverse),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Transform every row (the delay axis, length `cols`).
    pub fn along_delay(&self, m: &mut DdMatrix<T>, direction: FftDirection) {
        debug_assert_eq!(m.dims(), (self.rows, self.cols));
        let plan = match direction {
            FftDirection::Forward => &self.row_fwd,
            FftDirection::Inverse => &self.row_inv,
        };
        plan.process(m.as_mut_slice());
    }

    /// Transform every column (the Doppler axis, length `rows`).
    pub fn along_doppler(&self, m: &mut DdMatrix<T>, direction: FftDirection) {
        debug_assert_eq!(m.dims(), (self.rows, self.cols));
        let plan = match direction {
            FftDirection::Forward => &self.col_fwd,
            FftDirection::Inverse => &self.col_inv,
        };
        let (rows, cols) = (self.rows, self.cols);
        let mut column = vec![Complex::new(T::zero(), T::zero()); rows];
        let data = m.as_mut_slice();
        for l in 0..cols {
            for k in 0..rows {
                column[k] = data[k * cols + l];
            }
            plan.process(&mut column);
            for k in 0..rows {
                data[k * cols + l] = column[k];
            }
        }
    }

    pub fn forward(&self, m: &mut DdMatrix<T>) {
        self.along_delay(m, FftDirection::Forward);
        self.along_doppler(m, FftDirection::Forward);
    }

    pub fn inverse(&self, m: &mut DdMatrix<T>) {
        self.along_delay(m, FftDirection::Inverse);
        self.along_doppler(m, FftDirection::Inverse);
    }
}
