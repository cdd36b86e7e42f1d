//! Dirichlet sampling kernels of the rectangular-window OTFS channel.
//!
//! ```text
//! G(x) = (1/N) Σ_{k'=0}^{N-1} e^{-j2π x k'/N} = e^{-jπx(N-1)/N} · sin(πx) / (N sin(πx/N))
//! F(y) = (1/M) Σ_{l'=0}^{M-1} e^{+j2π y l'/M} = conj(G_M(y))
//! ω(dk, dl) = G(dk) · F(dl)
//! ```
//!
//! Both kernels are `N`- (resp. `M`-) periodic in their real argument, so the
//! argument is first reduced to `[-N/2, N/2]`; the only removable singularity
//! left is at zero.

use num_complex::Complex;

use crate::grid::FrameGrid;
use crate::scalar::Real;

/// Reduce `x` modulo `n` into `[-n/2, n/2]`.
#[inline]
fn reduce<T: Real>(x: T, n: usize) -> T {
    let period = T::of_usize(n);
    x - period * (x / period).round()
}

/// Real amplitude `sin(πr)/(n sin(πr/n))` of the reduced argument.
#[inline]
fn amplitude<T: Real>(r: T, n: usize) -> T {
    if r == T::zero() {
        return T::one();
    }
    let nf = T::of_usize(n);
    let pr = T::PI() * r;
    pr.sin() / (nf * (pr / nf).sin())
}

/// Derivative of [`amplitude`] with respect to `r`.
fn amplitude_derivative<T: Real>(r: T, n: usize) -> T {
    let nf = T::of_usize(n);
    let pi = T::PI();
    // Below eps^(1/4) the closed form loses digits to cancellation; the
    // even Taylor series is exact to O(r^5) there.
    let small = T::epsilon().sqrt().sqrt();
    if r.abs() < small {
        let a = pi * pi * r * r;
        let b = a / (nf * nf);
        let da = T::of(2.0) * pi * pi * r;
        let db = da / (nf * nf);
        return -(da - db) / T::of(6.0) + a * da / T::of(60.0)
            - (da * b + a * db) / T::of(36.0)
            + T::of(7.0 / 180.0) * b * db;
    }
    let pr = pi * r;
    let s = (pr / nf).sin();
    pi * (pr.cos() * s - pr.sin() * (pr / nf).cos() / nf) / (nf * s * s)
}

/// Doppler kernel `G(x)` for an `n`-point Doppler axis.
pub fn sampling_g<T: Real>(x: T, n: usize) -> Complex<T> {
    debug_assert!(n >= 1);
    let r = reduce(x, n);
    if r == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    let nf = T::of_usize(n);
    let phase = -T::PI() * r * (nf - T::one()) / nf;
    Complex::from_polar(amplitude(r, n), phase)
}

/// Delay kernel `F(y)` for an `m`-point delay axis.
pub fn sampling_f<T: Real>(y: T, m: usize) -> Complex<T> {
    sampling_g(y, m).conj()
}

/// `dG/dx`.
pub fn sampling_g_derivative<T: Real>(x: T, n: usize) -> Complex<T> {
    let r = reduce(x, n);
    let nf = T::of_usize(n);
    let slope = T::PI() * (nf - T::one()) / nf;
    let rotation = Complex::from_polar(T::one(), -slope * r);
    rotation * Complex::new(amplitude_derivative(r, n), -slope * amplitude(r, n))
}

/// `dF/dy`.
pub fn sampling_f_derivative<T: Real>(y: T, m: usize) -> Complex<T> {
    sampling_g_derivative(y, m).conj()
}

/// Separable sampling function `ω(dk, dl) = G(dk) F(dl)` on `grid`.
pub fn sampling_omega<T: Real>(dk: T, dl: T, grid: &FrameGrid<T>) -> Complex<T> {
    sampling_g(dk, grid.n_doppler()) * sampling_f(dl, grid.m_delay())
}

/// `G(k − x)` for every integer `k ∈ [0, n)`.
pub fn g_row<T: Real>(x: T, n: usize) -> Vec<Complex<T>> {
    (0..n).map(|k| sampling_g(T::of_usize(k) - x, n)).collect()
}

/// `F(l − y)` for every integer `l ∈ [0, m)`.
pub fn f_row<T: Real>(y: T, m: usize) -> Vec<Complex<T>> {
    (0..m).map(|l| sampling_f(T::of_usize(l) - y, m)).collect()
}
