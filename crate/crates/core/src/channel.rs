//! Delay-Doppler effective channel and the noisy input-output relation.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::fft2::Fft2;
use crate::grid::FrameGrid;
use crate::matrix::DdMatrix;
use crate::sampling::{f_row, g_row};
use crate::scalar::Real;
use crate::target::Target;

/// Sampled DD-domain channel `h_ω[k, l]` together with the targets it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel<T> {
    pub h_omega: DdMatrix<T>,
    pub source_targets: Vec<Target<T>>,
}

/// `e^{-j2π ν τ}` for one target, with `ν τ = k_ν l_τ / (M N T Δf)`.
pub fn target_phase<T: Real>(target: &Target<T>, grid: &FrameGrid<T>) -> Complex<T> {
    let angle = -T::TAU() * grid.phase_scale() * target.doppler_index * target.delay_index;
    Complex::from_polar(T::one(), angle)
}

/// Contribution of a single target, `h · e^{-j2πντ} · G(k − k_ν) F(l − l_τ)`.
pub fn target_kernel<T: Real>(target: &Target<T>, grid: &FrameGrid<T>) -> DdMatrix<T> {
    let g = g_row(target.doppler_index, grid.n_doppler());
    let f = f_row(target.delay_index, grid.m_delay());
    let amp = target.gain * target_phase(target, grid);
    DdMatrix::from_fn(grid.n_doppler(), grid.m_delay(), |k, l| amp * g[k] * f[l])
}

/// Sum the per-target sampled kernels into `h_ω`.
pub fn build_effective_channel<T: Real>(
    targets: &[Target<T>],
    grid: &FrameGrid<T>,
) -> Result<EffectiveChannel<T>> {
    let mut h_omega = DdMatrix::zeros_for(grid);
    let one = Complex::new(T::one(), T::zero());
    for t in targets {
        t.validate(grid)?;
        h_omega.add_scaled(&target_kernel(t, grid), one)?;
    }
    Ok(EffectiveChannel {
        h_omega,
        source_targets: targets.to_vec(),
    })
}

/// Reusable 2D circular convolution on a fixed grid.
pub struct Convolver<T: Real> {
    fft: Fft2<T>,
}

impl<T: Real> Convolver<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            fft: Fft2::new(rows, cols),
        }
    }

    pub fn for_grid(grid: &FrameGrid<T>) -> Self {
        Self::new(grid.n_doppler(), grid.m_delay())
    }

    /// Forward spectrum of `kernel`, for repeated convolutions with it.
    pub fn spectrum(&self, kernel: &DdMatrix<T>) -> Result<DdMatrix<T>> {
        kernel.ensure_dims(self.fft.dims())?;
        let mut s = kernel.clone();
        self.fft.forward(&mut s);
        Ok(s)
    }

    /// `out[k, l] = Σ_{n,m} x[n, m] · h[[k−n]_N, [l−m]_M]`.
    pub fn convolve(&self, x: &DdMatrix<T>, kernel: &DdMatrix<T>) -> Result<DdMatrix<T>> {
        let spectrum = self.spectrum(kernel)?;
        self.convolve_with_spectrum(x, &spectrum)
    }

    pub fn convolve_with_spectrum(&self, x: &DdMatrix<T>, spectrum: &DdMatrix<T>) -> Result<DdMatrix<T>> {
        x.ensure_dims(self.fft.dims())?;
        spectrum.ensure_dims(self.fft.dims())?;
        let mut y = x.clone();
        self.fft.forward(&mut y);
        for (a, &b) in y.as_mut_slice().iter_mut().zip(spectrum.as_slice()) {
            *a *= b;
        }
        self.fft.inverse(&mut y);
        let (n, m) = self.fft.dims();
        let norm = T::one() / T::of_usize(n * m);
        for z in y.as_mut_slice() {
            *z *= norm;
        }
        Ok(y)
    }
}

/// Noiseless received frame `Y = X ⊛ h_ω` on the DD torus.
pub fn apply_channel<T: Real>(
    x: &DdMatrix<T>,
    chan: &EffectiveChannel<T>,
    grid: &FrameGrid<T>,
) -> Result<DdMatrix<T>> {
    x.ensure_dims(grid.dims())?;
    chan.h_omega.ensure_dims(grid.dims())?;
    Convolver::for_grid(grid).convolve(x, &chan.h_omega)
}

/// Per-entry noise variance `σ² = 10^(−snr_db/10)` for unit signal power.
pub fn noise_variance<T: Real>(snr_db: T) -> T {
    T::of(10.0).powf(-snr_db / T::of(10.0))
}

/// Add i.i.d. `CN(0, σ²)` noise. `snr_db = +∞` returns the input unchanged.
pub fn add_noise<T: Real>(y: &DdMatrix<T>, snr_db: T, seed: u64) -> DdMatrix<T> {
    if snr_db == T::infinity() {
        return y.clone();
    }
    add_noise_with_variance(y, noise_variance(snr_db), seed)
}

pub fn add_noise_with_variance<T: Real>(y: &DdMatrix<T>, sigma2: T, seed: u64) -> DdMatrix<T> {
    let mut out = y.clone();
    if sigma2 == T::zero() {
        return out;
    }
    let std = (sigma2 / T::of(2.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for z in out.as_mut_slice() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *z += Complex::new(T::of(re), T::of(im)) * std;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::sampling_g;
    use crate::target::generate_qpsk_frame;
    use std::f64::consts::PI;

    fn one() -> Complex<f64> {
        Complex::new(1.0, 0.0)
    }

    fn grid(n: usize, m: usize) -> FrameGrid<f64> {
        FrameGrid::unit(n, m).unwrap()
    }

    #[test]
    fn identity_target_is_a_delta() {
        let g = grid(8, 8);
        let ch = build_effective_channel(&[Target::new(one(), 0.0, 0.0)], &g).unwrap();
        for k in 0..8 {
            for l in 0..8 {
                let expect = if (k, l) == (0, 0) { one() } else { Complex::new(0.0, 0.0) };
                assert!((ch.h_omega[(k, l)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn integer_target_carries_phase_term() {
        let g = grid(32, 32);
        let ch = build_effective_channel(&[Target::new(one(), 5.0, 2.0)], &g).unwrap();
        let expect = Complex::from_polar(1.0, -2.0 * PI * 10.0 / 1024.0);
        assert!((ch.h_omega[(2, 5)] - expect).norm() < 1e-12);
        let leak: f64 = ch.h_omega.energy() - 1.0;
        assert!(leak.abs() < 1e-12);
    }

    #[test]
    fn fractional_doppler_leaks_into_neighbours() {
        let g = grid(32, 32);
        let ch = build_effective_channel(&[Target::new(one(), 5.0, 2.3)], &g).unwrap();
        let a = ch.h_omega[(2, 5)].norm();
        let b = ch.h_omega[(3, 5)].norm();
        assert!((a - sampling_g(-0.3, 32).norm()).abs() < 1e-12);
        assert!((b - sampling_g(0.7, 32).norm()).abs() < 1e-12);
        let ratio = a / b;
        assert!((ratio / (0.7 / 0.3) - 1.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn negative_doppler_wraps() {
        let g = grid(16, 16);
        let ch = build_effective_channel(&[Target::new(one(), 3.0, -2.0)], &g).unwrap();
        assert!((ch.h_omega[(14, 3)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_targets() {
        let g = grid(16, 16);
        assert!(build_effective_channel(&[Target::new(one(), 15.5, 0.0)], &g).is_err());
        assert!(build_effective_channel(&[Target::new(one(), 1.0, 8.0)], &g).is_err());
    }

    #[test]
    fn energy_bounded_by_gains() {
        let g = grid(16, 16);
        let targets = [
            Target::new(Complex::new(0.5, 0.5), 3.3, 1.2),
            Target::new(Complex::new(-1.0, 0.2), 9.7, -4.45),
        ];
        let ch = build_effective_channel(&targets, &g).unwrap();
        let single: f64 = targets
            .iter()
            .map(|t| build_effective_channel(&[*t], &g).unwrap().h_omega.energy())
            .sum();
        let gains: f64 = targets.iter().map(|t| t.gain.norm_sqr()).sum();
        assert!(single <= gains + 1e-12);
        // cross terms can add energy, but never more than the incoherent sum bound
        assert!(ch.h_omega.energy() <= 2.0 * gains);
    }

    #[test]
    fn apply_identity_and_shift() {
        let g = grid(16, 8);
        let x = generate_qpsk_frame(&g, 5);
        let id = build_effective_channel(&[Target::new(one(), 0.0, 0.0)], &g).unwrap();
        assert!(apply_channel(&x, &id, &g).unwrap().max_abs_diff(&x) < 1e-12);

        let h = Complex::new(0.3, -0.8);
        let t = Target::new(h, 3.0, -2.0);
        let ch = build_effective_channel(&[t], &g).unwrap();
        let y = apply_channel(&x, &ch, &g).unwrap();
        let expect = x.circular_shift(-2, 3).scale(h * target_phase(&t, &g));
        assert!(y.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn apply_rejects_mismatched_frame() {
        let g = grid(8, 8);
        let ch = build_effective_channel(&[], &g).unwrap();
        let x = DdMatrix::<f64>::zeros(8, 4);
        assert!(apply_channel(&x, &ch, &g).is_err());
    }

    #[test]
    fn noiseless_sentinel_is_bit_exact() {
        let g = grid(8, 8);
        let x = generate_qpsk_frame(&g, 1);
        assert_eq!(add_noise(&x, f64::INFINITY, 9), x);
    }

    #[test]
    fn noise_statistics_at_zero_db() {
        // 10^5 samples: variance of the sample variance is ~1/n, so 3σ ≈ 0.01.
        let g = grid(100, 1000);
        let z = add_noise(&DdMatrix::zeros_for(&g), 0.0, 42);
        let n = z.as_slice().len() as f64;
        let var = z.energy() / n;
        assert!((0.99..=1.01).contains(&var), "var {var}");
        let var_re: f64 = z.iter().map(|c| c.re * c.re).sum::<f64>() / n;
        let var_im: f64 = z.iter().map(|c| c.im * c.im).sum::<f64>() / n;
        assert!((var_re / 0.5 - 1.0).abs() < 0.02, "re {var_re}");
        assert!((var_im / 0.5 - 1.0).abs() < 0.02, "im {var_im}");
    }

    #[test]
    fn noise_is_seeded() {
        let g = grid(4, 4);
        let y = DdMatrix::zeros_for(&g);
        assert_eq!(add_noise(&y, 3.0, 1), add_noise(&y, 3.0, 1));
        assert_ne!(add_noise(&y, 3.0, 1), add_noise(&y, 3.0, 2));
    }

    #[test]
    fn single_precision_channel() {
        let g = FrameGrid::<f32>::unit(8, 8).unwrap();
        let t = Target::new(Complex::new(1.0_f32, 0.0), 2.0, 1.0);
        let ch = build_effective_channel(&[t], &g).unwrap();
        assert!((ch.h_omega[(1, 2)].norm() - 1.0).abs() < 1e-5);
    }
}
