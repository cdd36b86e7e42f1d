//! Dense row-major matrices over the delay-Doppler torus.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{wrap_index, FrameGrid};
use crate::scalar::Real;

/// `N x M` complex matrix indexed `[k, l]`: row `k` is the Doppler bin,
/// column `l` the delay bin.
#[derive(Debug, Clone, PartialEq)]
pub struct DdMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DdMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn zeros_for(grid: &FrameGrid<T>) -> Self {
        Self::zeros(grid.n_doppler(), grid.m_delay())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for k in 0..rows {
            for l in 0..cols {
                data.push(f(k, l));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: (rows, cols),
                got: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex<T>> {
        self.data.iter()
    }

    /// Entry at integer offsets wrapped onto the torus, `[[k]_N, [l]_M]`.
    #[inline]
    pub fn get_wrapped(&self, k: isize, l: isize) -> Complex<T> {
        self[(wrap_index(k, self.rows), wrap_index(l, self.cols))]
    }

    pub fn ensure_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() == dims {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dims,
                got: self.dims(),
            })
        }
    }

    pub fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        self.ensure_dims(other.dims())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        self.map(|z| z * factor)
    }

    /// `self + factor * other`.
    pub fn add_scaled(&mut self, other: &Self, factor: Complex<T>) -> Result<()> {
        self.ensure_same_dims(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
        Ok(())
    }

    /// `Σ |x|²`.
    pub fn energy(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn frobenius_norm(&self) -> T {
        self.energy().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// `‖self − reference‖_F / ‖reference‖_F`, or the absolute difference
    /// norm when the reference is zero.
    pub fn relative_error(&self, reference: &Self) -> T {
        let diff = self
            .data
            .iter()
            .zip(&reference.data)
            .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr())
            .sqrt();
        let norm = reference.frobenius_norm();
        if norm > T::zero() {
            diff / norm
        } else {
            diff
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Circular shift: `out[k, l] = self[[k − dk]_N, [l − dl]_M]`.
    pub fn circular_shift(&self, dk: isize, dl: isize) -> Self {
        Self::from_fn(self.rows, self.cols, |k, l| {
            self.get_wrapped(k as isize - dk, l as isize - dl)
        })
    }

    /// `|x|²` per entry.
    pub fn power(&self) -> RealMap<T> {
        RealMap {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    /// `|x|` per entry.
    pub fn magnitude(&self) -> RealMap<T> {
        RealMap {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.norm()).collect(),
        }
    }

    /// Lossy conversion to another scalar type.
    pub fn cast<U: Real>(&self) -> DdMatrix<U> {
        DdMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::of(z.re.as_f64()), U::of(z.im.as_f64())))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for DdMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (k, l): (usize, usize)) -> &Complex<T> {
        debug_assert!(k < self.rows && l < self.cols);
        &self.data[k * self.cols + l]
    }
}

impl<T> IndexMut<(usize, usize)> for DdMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (k, l): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(k < self.rows && l < self.cols);
        &mut self.data[k * self.cols + l]
    }
}

/// Real-valued `N x M` map (powers, thresholds).
#[derive(Debug, Clone, PartialEq)]
pub struct RealMap<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> RealMap<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for k in 0..rows {
            for l in 0..cols {
                data.push(f(k, l));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get_wrapped(&self, k: isize, l: isize) -> T {
        self[(wrap_index(k, self.rows), wrap_index(l, self.cols))]
    }

    pub fn max(&self) -> T {
        self.data.iter().fold(T::neg_infinity(), |acc, &x| acc.max(x))
    }

    /// Row-major position and value of the largest entry (first on ties).
    pub fn argmax(&self) -> ((usize, usize), T) {
        let mut best = 0;
        for (i, &x) in self.data.iter().enumerate() {
            if x > self.data[best] {
                best = i;
            }
        }
        ((best / self.cols, best % self.cols), self.data[best])
    }
}

impl<T> Index<(usize, usize)> for RealMap<T> {
    type Output = T;

    #[inline]
    fn index(&self, (k, l): (usize, usize)) -> &T {
        debug_assert!(k < self.rows && l < self.cols);
        &self.data[k * self.cols + l]
    }
}

impl<T> IndexMut<(usize, usize)> for RealMap<T> {
    #[inline]
    fn index_mut(&mut self, (k, l): (usize, usize)) -> &mut T {
        debug_assert!(k < self.rows && l < self.cols);
        &mut self.data[k * self.cols + l]
    }
}
