//! 2D delay-Doppler pulse compression.
//!
//! ```text
//! V[k, l] = Σ_{n,m} Y*[n, m] · X[[n − k]_N, [m − l]_M]
//! ```
//!
//! Evaluated through the cross-correlation theorem:
//! `conj(V) = IDFT2(DFT2(Y) · conj(DFT2(X))) / (NM)`.

use num_complex::Complex;

use crate::channel::{add_noise, apply_channel, build_effective_channel};
use crate::error::{Error, Result};
use crate::fft2::Fft2;
use crate::grid::FrameGrid;
use crate::matrix::{DdMatrix, RealMap};
use crate::scalar::Real;
use crate::seed::{derive_seed, stream};
use crate::target::Scenario;

/// Complex correlation map `V` over the DD grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMap<T> {
    pub v: DdMatrix<T>,
}

impl<T: Real> CorrelationMap<T> {
    pub fn new(v: DdMatrix<T>) -> Self {
        Self { v }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.v.dims()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.v.rows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.v.cols()
    }

    /// `|V[[k]_N, [l]_M]|`.
    #[inline]
    pub fn magnitude_at(&self, k: isize, l: isize) -> T {
        self.v.get_wrapped(k, l).norm()
    }

    /// Detection statistic `|V|²`.
    pub fn power(&self) -> RealMap<T> {
        self.v.power()
    }

    pub fn magnitude(&self) -> RealMap<T> {
        self.v.magnitude()
    }

    /// `V / c` for every entry.
    pub fn normalized(&self, c: T) -> DdMatrix<T> {
        self.v.scale(Complex::new(T::one() / c, T::zero()))
    }
}

/// Reusable FFT correlator for one grid size.
pub struct Correlator<T: Real> {
    fft: Fft2<T>,
}

impl<T: Real> Correlator<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            fft: Fft2::new(rows, cols),
        }
    }

    pub fn for_grid(grid: &FrameGrid<T>) -> Self {
        Self::new(grid.n_doppler(), grid.m_delay())
    }

    /// Forward spectrum of the transmit frame, reusable across received frames.
    pub fn reference_spectrum(&self, x: &DdMatrix<T>) -> Result<DdMatrix<T>> {
        x.ensure_dims(self.fft.dims())?;
        let mut s = x.clone();
        self.fft.forward(&mut s);
        Ok(s)
    }

    pub fn correlate(&self, y: &DdMatrix<T>, x: &DdMatrix<T>) -> Result<CorrelationMap<T>> {
        y.ensure_same_dims(x)?;
        let spectrum = self.reference_spectrum(x)?;
        self.correlate_with_spectrum(y, &spectrum)
    }

    pub fn correlate_with_spectrum(&self, y: &DdMatrix<T>, x_spectrum: &DdMatrix<T>) -> Result<CorrelationMap<T>> {
        y.ensure_dims(self.fft.dims())?;
        x_spectrum.ensure_dims(self.fft.dims())?;
        let mut r = y.clone();
        self.fft.forward(&mut r);
        for (a, b) in r.as_mut_slice().iter_mut().zip(x_spectrum.as_slice()) {
            *a *= b.conj();
        }
        self.fft.inverse(&mut r);
        let (n, m) = self.fft.dims();
        let norm = T::one() / T::of_usize(n * m);
        for z in r.as_mut_slice() {
            *z = z.conj() * norm;
        }
        Ok(CorrelationMap::new(r))
    }
}

/// 2D circular correlation of received `y` against transmitted `x`.
pub fn correlate<T: Real>(y: &DdMatrix<T>, x: &DdMatrix<T>) -> Result<CorrelationMap<T>> {
    y.ensure_same_dims(x)?;
    Correlator::new(y.rows(), y.cols()).correlate(y, x)
}

/// Monte Carlo summary of `V / (MN)` against its expectation `h_ω*`.
#[derive(Debug, Clone)]
pub struct CorrelationMeanReport<T> {
    pub trials: usize,
    /// `conj(h_ω)`.
    pub expected: DdMatrix<T>,
    /// Sample mean of `V / (MN)`.
    pub mean: DdMatrix<T>,
    /// Unbiased sample variance `E|V/(MN) − mean|²` per bin.
    pub variance: RealMap<T>,
    pub max_abs_deviation: T,
    /// Largest `|mean − expected| / sqrt(variance / trials)` over all bins.
    /// Bins with zero sample variance count as 0 if they match exactly and
    /// `+∞` otherwise.
    pub max_standard_score: T,
}

impl<T: Real> CorrelationMeanReport<T> {
    pub fn mean_variance(&self) -> T {
        let s = self.variance.as_slice();
        s.iter().fold(T::zero(), |a, &b| a + b) / T::of_usize(s.len())
    }
}

/// Average `V/(MN)` over `trials` independent frames of `scenario`.
///
/// Frames and noise are drawn from seeds derived from `scenario.rng_seed`.
pub fn correlation_mean_check<T: Real>(scenario: &Scenario<T>, trials: usize) -> Result<CorrelationMeanReport<T>> {
    if trials < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 trials, got {trials}")));
    }
    scenario.validate()?;
    let grid = &scenario.grid;
    let chan = build_effective_channel(&scenario.targets, grid)?;
    let correlator = Correlator::for_grid(grid);
    let mn = T::of_usize(grid.cells());

    let (rows, cols) = grid.dims();
    let mut sum = DdMatrix::zeros(rows, cols);
    let mut sum_sq = RealMap::filled(rows, cols, T::zero());
    let one = Complex::new(T::one(), T::zero());
    for trial in 0..trials as u64 {
        let x = scenario.transmit_frame(derive_seed(scenario.rng_seed, stream::FRAME, trial));
        let y = apply_channel(&x, &chan, grid)?;
        let y = add_noise(&y, scenario.snr_db, derive_seed(scenario.rng_seed, stream::NOISE, trial));
        let v = correlator.correlate(&y, &x)?.normalized(mn);
        sum.add_scaled(&v, one)?;
        for k in 0..rows {
            for l in 0..cols {
                sum_sq[(k, l)] += v[(k, l)].norm_sqr();
            }
        }
    }

    let t = T::of_usize(trials);
    let mean = sum.scale(Complex::new(T::one() / t, T::zero()));
    let expected = chan.h_omega.conj();
    let variance = RealMap::from_fn(rows, cols, |k, l| {
        let v = (sum_sq[(k, l)] - t * mean[(k, l)].norm_sqr()) / (t - T::one());
        v.max(T::zero())
    });
    let mut max_abs_deviation = T::zero();
    let mut max_standard_score = T::zero();
    for k in 0..rows {
        for l in 0..cols {
            let dev = (mean[(k, l)] - expected[(k, l)]).norm();
            max_abs_deviation = max_abs_deviation.max(dev);
            let se = (variance[(k, l)] / t).sqrt();
            let score = if se > T::zero() {
                dev / se
            } else if dev <= T::of(1e-12) * (T::one() + expected[(k, l)].norm()) {
                T::zero()
            } else {
                T::infinity()
            };
            max_standard_score = max_standard_score.max(score);
        }
    }
    Ok(CorrelationMeanReport {
        trials,
        expected,
        mean,
        variance,
        max_abs_deviation,
        max_standard_score,
    })
}
