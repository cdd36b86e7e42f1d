//! Brute-force oracles shared by the integration and acceptance tests.
//!
//! Everything here is written from the defining sums, with no FFTs and no
//! closed forms, so it can check the fast paths independently.
#![allow(dead_code)]

use std::f64::consts::TAU;

use otfs_radar::{Complex, DdMatrix, FrameGrid, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries uniform in the unit square of the complex plane, centred at 0.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DdMatrix<f64> {
    DdMatrix::from_fn(n, m, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_gain(rng: &mut ChaCha8Rng) -> C64 {
    C64::from_polar(rng.random_range(0.2..1.5), rng.random_range(0.0..TAU))
}

/// Target with fractional delay in `[0, M−1)` and Doppler in `[−N/2, N/2)`.
pub fn random_target(rng: &mut ChaCha8Rng, grid: &FrameGrid<f64>) -> Target<f64> {
    let (n, m) = grid.dims();
    let delay = rng.random_range(0.0..(m - 1) as f64);
    let doppler = rng.random_range(-(n as f64) / 2.0..(n as f64) / 2.0 - 1e-9);
    Target::new(random_gain(rng), delay, doppler)
}

/// `(1/N) Σ_q e^{−j2π x q / N}`.
pub fn literal_g(x: f64, n: usize) -> C64 {
    let s: C64 = (0..n)
        .map(|q| C64::from_polar(1.0, -TAU * x * q as f64 / n as f64))
        .sum();
    s / n as f64
}

/// `(1/M) Σ_p e^{+j2π y p / M}`.
pub fn literal_f(y: f64, m: usize) -> C64 {
    let s: C64 = (0..m)
        .map(|p| C64::from_polar(1.0, TAU * y * p as f64 / m as f64))
        .sum();
    s / m as f64
}

/// `h_ω[k,l] = Σ_i h_i e^{−j2π ν_i τ_i} G(k − k_νi) F(l − l_τi)` with `ν τ`
/// taken from the physical grid spacings.
pub fn literal_h_omega(targets: &[Target<f64>], grid: &FrameGrid<f64>) -> DdMatrix<f64> {
    let (n, m) = grid.dims();
    DdMatrix::from_fn(n, m, |k, l| {
        targets
            .iter()
            .map(|t| {
                let nu = t.doppler_index * grid.doppler_resolution();
                let tau = t.delay_index * grid.delay_resolution();
                t.gain
                    * C64::from_polar(1.0, -TAU * nu * tau)
                    * literal_g(k as f64 - t.doppler_index, n)
                    * literal_f(l as f64 - t.delay_index, m)
            })
            .sum()
    })
}

/// `Y[k,l] = Σ_{n,m} X[n,m] h[[k−n]_N, [l−m]_M]`.
pub fn direct_convolution(x: &DdMatrix<f64>, h: &DdMatrix<f64>) -> DdMatrix<f64> {
    let (rows, cols) = x.dims();
    DdMatrix::from_fn(rows, cols, |k, l| {
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..rows {
            for m in 0..cols {
                acc += x[(n, m)] * h[((k + rows - n) % rows, (l + cols - m) % cols)];
            }
        }
        acc
    })
}

/// `V[k,l] = Σ_{n,m} Y*[n,m] X[[n−k]_N, [m−l]_M]`.
pub fn direct_correlation(y: &DdMatrix<f64>, x: &DdMatrix<f64>) -> DdMatrix<f64> {
    let (rows, cols) = y.dims();
    DdMatrix::from_fn(rows, cols, |k, l| {
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..rows {
            for m in 0..cols {
                acc += y[(n, m)].conj() * x[((n + rows - k) % rows, (m + cols - l) % cols)];
            }
        }
        acc
    })
}

/// Noiseless received frame built entirely from the literal sums.
pub fn literal_received(x: &DdMatrix<f64>, targets: &[Target<f64>], grid: &FrameGrid<f64>) -> DdMatrix<f64> {
    direct_convolution(x, &literal_h_omega(targets, grid))
}

pub fn relative_frobenius(a: &DdMatrix<f64>, reference: &DdMatrix<f64>) -> f64 {
    let num: f64 = a.iter().zip(reference.iter()).map(|(p, q)| (p - q).norm_sqr()).sum();
    let den: f64 = reference.iter().map(|q| q.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Inner product `Σ a* b`.
pub fn inner(a: &DdMatrix<f64>, b: &DdMatrix<f64>) -> C64 {
    a.iter().zip(b.iter()).map(|(p, q)| p.conj() * q).sum()
}
