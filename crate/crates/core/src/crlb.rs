//! Fisher information and Cramér-Rao bounds for the fractional parameters
//! `θ = [κ₁..κ_P, ι₁..ι_P]`.
//!
//! The noiseless mean frame is `U = Σᵢ hᵢ cᵢ X ⊛ (Gᵢ ⊗ Fᵢ)` with
//! `cᵢ = e^{−j2π s k_ν l_τ}`. Its partials are
//!
//! ```text
//! ∂U/∂κᵢ = hᵢ cᵢ [ −j2π s l_τ · X ⊛ (Gᵢ ⊗ Fᵢ) − X ⊛ (G'ᵢ ⊗ Fᵢ) ]
//! ∂U/∂ιᵢ = hᵢ cᵢ [ −j2π s k_ν · X ⊛ (Gᵢ ⊗ Fᵢ) − X ⊛ (Gᵢ ⊗ F'ᵢ) ]
//! ```
//!
//! and under circular complex Gaussian noise of per-entry variance `σ²`,
//! `I(θ) = (2/σ²) Re{Jᴴ J}`.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::channel::{apply_channel, build_effective_channel, target_phase, Convolver};
use crate::error::{Error, Result};
use crate::grid::FrameGrid;
use crate::matrix::DdMatrix;
use crate::sampling::{sampling_f, sampling_f_derivative, sampling_g, sampling_g_derivative};
use crate::scalar::Real;
use crate::target::Target;

/// Largest Fisher condition number accepted before inversion.
pub const MAX_CONDITION: f64 = 1e12;

/// Noise-free received frame `U_DD` for `targets`.
pub fn noiseless_mean_frame<T: Real>(x: &DdMatrix<T>, targets: &[Target<T>], grid: &FrameGrid<T>) -> Result<DdMatrix<T>> {
    let chan = build_effective_channel(targets, grid)?;
    apply_channel(x, &chan, grid)
}

/// `∂U/∂θ_p` for every parameter, columns ordered `[κ₁..κ_P, ι₁..ι_P]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFrameJacobian<T> {
    pub columns: Vec<DdMatrix<T>>,
}

impl<T: Real> MeanFrameJacobian<T> {
    pub fn parameter_count(&self) -> usize {
        self.columns.len()
    }

    pub fn target_count(&self) -> usize {
        self.columns.len() / 2
    }

    pub fn kappa_column(&self, i: usize) -> &DdMatrix<T> {
        &self.columns[i]
    }

    pub fn iota_column(&self, i: usize) -> &DdMatrix<T> {
        &self.columns[self.target_count() + i]
    }
}

fn outer<T: Real>(g: &[Complex<T>], f: &[Complex<T>]) -> DdMatrix<T> {
    DdMatrix::from_fn(g.len(), f.len(), |k, l| g[k] * f[l])
}

pub fn mean_frame_jacobian<T: Real>(
    x: &DdMatrix<T>,
    targets: &[Target<T>],
    grid: &FrameGrid<T>,
) -> Result<MeanFrameJacobian<T>> {
    x.ensure_dims(grid.dims())?;
    let (n, m) = grid.dims();
    let conv = Convolver::for_grid(grid);
    let s = grid.phase_scale();
    let p = targets.len();
    let mut kappa_cols = Vec::with_capacity(p);
    let mut iota_cols = Vec::with_capacity(p);
    for t in targets {
        t.validate(grid)?;
        let g: Vec<_> = (0..n).map(|k| sampling_g(T::of_usize(k) - t.doppler_index, n)).collect();
        let dg: Vec<_> = (0..n)
            .map(|k| sampling_g_derivative(T::of_usize(k) - t.doppler_index, n))
            .collect();
        let f: Vec<_> = (0..m).map(|l| sampling_f(T::of_usize(l) - t.delay_index, m)).collect();
        let df: Vec<_> = (0..m)
            .map(|l| sampling_f_derivative(T::of_usize(l) - t.delay_index, m))
            .collect();

        let amp = t.gain * target_phase(t, grid);
        let base = conv.convolve(x, &outer(&g, &f))?;
        let dk = conv.convolve(x, &outer(&dg, &f))?;
        let dl = conv.convolve(x, &outer(&g, &df))?;

        let j2pi = Complex::new(T::zero(), -T::TAU() * s);
        let phase_k = j2pi * t.delay_index;
        let phase_l = j2pi * t.doppler_index;
        let col_k = DdMatrix::from_fn(n, m, |a, b| amp * (phase_k * base[(a, b)] - dk[(a, b)]));
        let col_l = DdMatrix::from_fn(n, m, |a, b| amp * (phase_l * base[(a, b)] - dl[(a, b)]));
        kappa_cols.push(col_k);
        iota_cols.push(col_l);
    }
    kappa_cols.extend(iota_cols);
    Ok(MeanFrameJacobian { columns: kappa_cols })
}

/// `I_ij = (2/σ²) Σ Re{∂u/∂θᵢ · conj(∂u/∂θⱼ)}`, accumulated in `f64`.
pub fn fisher_matrix<T: Real>(jac: &MeanFrameJacobian<T>, sigma2: f64) -> Result<DMatrix<f64>> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise variance must be positive, got {sigma2}")));
    }
    let q = jac.parameter_count();
    let cols: Vec<Vec<Complex<f64>>> = jac
        .columns
        .iter()
        .map(|c| c.iter().map(|z| Complex::new(z.re.as_f64(), z.im.as_f64())).collect())
        .collect();
    let mut fisher = DMatrix::zeros(q, q);
    for i in 0..q {
        for j in i..q {
            let acc: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| (a * b.conj()).re).sum();
            let v = 2.0 * acc / sigma2;
            fisher[(i, j)] = v;
            fisher[(j, i)] = v;
        }
    }
    Ok(fisher)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrlbReport {
    pub fisher: DMatrix<f64>,
    /// Diagonal of `I⁻¹`.
    pub per_param_crlb: Vec<f64>,
    /// `Σ_{j≤P} crlb_j / ‖κ‖²`, or the plain sum when `‖κ‖ = 0`.
    pub kappa_bound: f64,
    pub iota_bound: f64,
    pub kappa_normalized: bool,
    pub iota_normalized: bool,
    pub condition: f64,
}

impl CrlbReport {
    pub fn target_count(&self) -> usize {
        self.per_param_crlb.len() / 2
    }

    pub fn kappa_crlb(&self) -> &[f64] {
        &self.per_param_crlb[..self.target_count()]
    }

    pub fn iota_crlb(&self) -> &[f64] {
        &self.per_param_crlb[self.target_count()..]
    }

    /// Mean per-target range variance bound in m².
    pub fn range_variance_m2<T: Real>(&self, grid: &FrameGrid<T>) -> f64 {
        let dr = grid.range_resolution().as_f64();
        mean(self.iota_crlb()) * dr * dr
    }

    /// Mean per-target velocity variance bound in (m/s)².
    pub fn velocity_variance_mps2<T: Real>(&self, grid: &FrameGrid<T>) -> f64 {
        let dv = grid.velocity_resolution().as_f64();
        mean(self.kappa_crlb()) * dv * dv
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Eigenvalue condition number of a symmetric matrix; `∞` if not positive definite.
pub fn symmetric_condition(fisher: &DMatrix<f64>) -> f64 {
    let eig = fisher.clone().symmetric_eigen().eigenvalues;
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || !max.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn min_eigenvalue(fisher: &DMatrix<f64>) -> f64 {
    fisher
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub fn crlb_bounds(fisher: &DMatrix<f64>, true_theta: &[f64]) -> Result<CrlbReport> {
    let q = fisher.nrows();
    if fisher.ncols() != q || !q.is_multiple_of(2) || q == 0 {
        return Err(Error::InvalidArgument(format!(
            "Fisher matrix must be square with even size, got {}x{}",
            fisher.nrows(),
            fisher.ncols()
        )));
    }
    if true_theta.len() != q {
        return Err(Error::ParameterLength {
            expected: q,
            got: true_theta.len(),
        });
    }
    let condition = symmetric_condition(fisher);
    if !(condition < MAX_CONDITION) {
        return Err(Error::SingularFisher { condition });
    }
    let inv = fisher
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::SingularFisher { condition })?;
    let per_param_crlb: Vec<f64> = (0..q).map(|i| inv[(i, i)].max(0.0)).collect();
    let p = q / 2;
    let norm = |s: &[f64]| s.iter().map(|v| v * v).sum::<f64>();
    let sum = |s: &[f64]| s.iter().sum::<f64>();
    let (kn, in_) = (norm(&true_theta[..p]), norm(&true_theta[p..]));
    let (ks, is) = (sum(&per_param_crlb[..p]), sum(&per_param_crlb[p..]));
    Ok(CrlbReport {
        fisher: fisher.clone(),
        kappa_bound: if kn > 0.0 { ks / kn } else { ks },
        iota_bound: if in_ > 0.0 { is / in_ } else { is },
        kappa_normalized: kn > 0.0,
        iota_normalized: in_ > 0.0,
        per_param_crlb,
        condition,
    })
}

/// `θ = [κ₁..κ_P, ι₁..ι_P]` of `targets`.
pub fn fractional_parameters<T: Real>(targets: &[Target<T>]) -> Vec<f64> {
    targets
        .iter()
        .map(|t| t.kappa().as_f64())
        .chain(targets.iter().map(|t| t.iota().as_f64()))
        .collect()
}

/// Jacobian, Fisher and bounds for one frame.
pub fn crlb_for_frame<T: Real>(
    x: &DdMatrix<T>,
    targets: &[Target<T>],
    grid: &FrameGrid<T>,
    sigma2: f64,
) -> Result<CrlbReport> {
    let jac = mean_frame_jacobian(x, targets, grid)?;
    let fisher = fisher_matrix(&jac, sigma2)?;
    crlb_bounds(&fisher, &fractional_parameters(targets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::{generate_one_pilot_frame, generate_qpsk_frame};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// Literal `Σ_i Σ_{k',l'} h c X[k',l'] (1/N)Σ_n e^{..} (1/M)Σ_m e^{..}`.
    fn triple_sum(x: &DdMatrix<f64>, targets: &[Target<f64>], n: usize, m: usize) -> DdMatrix<f64> {
        let g = |v: f64| (0..n).map(|q| Complex::from_polar(1.0, -2.0 * PI * v * q as f64 / n as f64)).sum::<Complex<f64>>() / n as f64;
        let f = |v: f64| (0..m).map(|q| Complex::from_polar(1.0, 2.0 * PI * v * q as f64 / m as f64)).sum::<Complex<f64>>() / m as f64;
        DdMatrix::from_fn(n, m, |k, l| {
            let mut acc = c(0.0, 0.0);
            for t in targets {
                let ph = Complex::from_polar(1.0, -2.0 * PI * t.doppler_index * t.delay_index / (n * m) as f64);
                for kp in 0..n {
                    for lp in 0..m {
                        let dk = k as f64 - kp as f64 - t.doppler_index;
                        let dl = l as f64 - lp as f64 - t.delay_index;
                        acc += t.gain * ph * x[(kp, lp)] * g(dk) * f(dl);
                    }
                }
            }
            acc
        })
    }

    fn random_targets(rng: &mut ChaCha8Rng, p: usize, n: usize) -> Vec<Target<f64>> {
        (0..p)
            .map(|_| {
                let h = Complex::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
                let delay = rng.random_range(1.0..(n as f64 - 2.0));
                let doppler = rng.random_range(-(n as f64) / 2.0 + 1.0..(n as f64) / 2.0 - 1.0);
                Target::new(h, delay, doppler)
            })
            .collect()
    }

    fn perturbed(targets: &[Target<f64>], p: usize, h: f64) -> Vec<Target<f64>> {
        let mut t = targets.to_vec();
        let np = targets.len();
        if p < np {
            t[p].doppler_index += h;
        } else {
            t[p - np].delay_index += h;
        }
        t
    }

    fn finite_difference(x: &DdMatrix<f64>, targets: &[Target<f64>], g: &FrameGrid<f64>, p: usize) -> DdMatrix<f64> {
        let h = 1e-5;
        let up = noiseless_mean_frame(x, &perturbed(targets, p, h), g).unwrap();
        let dn = noiseless_mean_frame(x, &perturbed(targets, p, -h), g).unwrap();
        let mut d = up;
        d.add_scaled(&dn, c(-1.0, 0.0)).unwrap();
        d.scale(c(0.5 / h, 0.0))
    }

    #[test]
    fn mean_frame_trivial_cases() {
        let g = FrameGrid::unit(8, 8).unwrap();
        let x = generate_qpsk_frame(&g, 1);
        assert_eq!(noiseless_mean_frame(&x, &[], &g).unwrap().max_abs(), 0.0);
        let id = noiseless_mean_frame(&x, &[Target::new(c(1.0, 0.0), 0.0, 0.0)], &g).unwrap();
        assert!(id.max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn mean_frame_matches_triple_sum() {
        let g = FrameGrid::unit(8, 8).unwrap();
        let x = generate_qpsk_frame(&g, 4);
        let targets = [Target::new(c(0.8, 0.3), 2.4, 1.7), Target::new(c(-0.2, 0.9), 5.1, -2.35)];
        let u = noiseless_mean_frame(&x, &targets, &g).unwrap();
        assert!(u.relative_error(&triple_sum(&x, &targets, 8, 8)) < 1e-9);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = FrameGrid::unit(16, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..6 {
            let p = 1 + trial % 2;
            let targets = random_targets(&mut rng, p, 16);
            let x = generate_qpsk_frame(&g, trial as u64);
            let jac = mean_frame_jacobian(&x, &targets, &g).unwrap();
            for q in 0..2 * p {
                let fd = finite_difference(&x, &targets, &g, q);
                let err = jac.columns[q].relative_error(&fd);
                assert!(err < 1e-4, "trial {trial} param {q}: {err}");
            }
        }
    }

    #[test]
    fn jacobian_at_integer_one_pilot_target() {
        let g = FrameGrid::unit(16, 16).unwrap();
        let x = generate_one_pilot_frame(&g);
        let targets = [Target::new(c(1.0, 0.0), 0.0, 0.0)];
        let jac = mean_frame_jacobian(&x, &targets, &g).unwrap();
        let fd = finite_difference(&x, &targets, &g, 0);
        let a = jac.kappa_column(0)[(0, 0)].norm();
        let b = fd[(0, 0)].norm();
        assert!((a - b).abs() <= 1e-4 * b.max(1e-12), "{a} vs {b}");
        assert!(jac.kappa_column(0).relative_error(&fd) < 1e-4);
    }

    #[test]
    fn jacobian_is_linear_in_frame() {
        let g = FrameGrid::unit(16, 16).unwrap();
        let x = generate_qpsk_frame(&g, 2);
        let targets = [Target::new(c(0.5, -0.5), 3.3, 2.2)];
        let j1 = mean_frame_jacobian(&x, &targets, &g).unwrap();
        let j2 = mean_frame_jacobian(&x.scale(c(2.0, 0.0)), &targets, &g).unwrap();
        for (a, b) in j1.columns.iter().zip(&j2.columns) {
            assert!(a.scale(c(2.0, 0.0)).max_abs_diff(b) < 1e-12);
        }
    }

    #[test]
    fn jacobian_blocks_decouple() {
        let g = FrameGrid::unit(16, 16).unwrap();
        let x = generate_qpsk_frame(&g, 3);
        let a = Target::new(c(1.0, 0.0), 2.0, 3.0);
        let b = Target::new(c(0.0, 1.0), 9.0, -5.0);
        let both = mean_frame_jacobian(&x, &[a, b], &g).unwrap();
        let alone = mean_frame_jacobian(&x, &[a], &g).unwrap();
        assert!(both.kappa_column(0).max_abs_diff(alone.kappa_column(0)) < 1e-12);
        assert!(both.iota_column(0).max_abs_diff(alone.iota_column(0)) < 1e-12);
    }

    #[test]
    fn fisher_scaling_and_structure() {
        let g = FrameGrid::unit(16, 16).unwrap();
        let x = generate_qpsk_frame(&g, 5);
        let targets = [Target::new(c(1.0, 0.0), 4.2, 1.3), Target::new(c(0.3, 0.7), 10.6, -4.4)];
        let jac = mean_frame_jacobian(&x, &targets, &g).unwrap();
        let f1 = fisher_matrix(&jac, 0.5).unwrap();
        let f2 = fisher_matrix(&jac, 0.25).unwrap();
        assert!((&f2 - &f1 * 2.0).norm() <= 1e-12 * f2.norm());
        assert!((&f1 - f1.transpose()).norm() < 1e-10);
        assert!(min_eigenvalue(&f1) > -1e-8 * f1.trace());

        let r1 = crlb_bounds(&f1, &fractional_parameters(&targets)).unwrap();
        let r2 = crlb_bounds(&f2, &fractional_parameters(&targets)).unwrap();
        assert!((r1.kappa_bound / r2.kappa_bound - 2.0).abs() < 1e-9);
        assert!((r1.iota_bound / r2.iota_bound - 2.0).abs() < 1e-9);
        assert!(r1.per_param_crlb.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn zero_jacobian_gives_zero_fisher() {
        let jac = MeanFrameJacobian {
            columns: vec![DdMatrix::<f64>::zeros(4, 4), DdMatrix::zeros(4, 4)],
        };
        let f = fisher_matrix(&jac, 1.0).unwrap();
        assert_eq!(f, DMatrix::zeros(2, 2));
        assert!(matches!(crlb_bounds(&f, &[0.1, 0.1]), Err(Error::SingularFisher { .. })));
        assert!(fisher_matrix(&jac, 0.0).is_err());
    }

    #[test]
    fn diagonal_fisher_bounds() {
        let (a, b) = (40.0, 250.0);
        let f = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a, b]));
        let r = crlb_bounds(&f, &[0.5, 0.25]).unwrap();
        assert!((r.kappa_bound - (1.0 / a) / 0.25).abs() < 1e-15);
        assert!((r.iota_bound - (1.0 / b) / 0.0625).abs() < 1e-15);
        assert!(r.kappa_normalized && r.iota_normalized);
        assert!(matches!(crlb_bounds(&f, &[0.5]), Err(Error::ParameterLength { .. })));
    }

    #[test]
    fn zero_normaliser_is_flagged() {
        let f = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 8.0]));
        let r = crlb_bounds(&f, &[0.0, 0.2]).unwrap();
        assert!(!r.kappa_normalized && r.iota_normalized);
        assert!((r.kappa_bound - 0.25).abs() < 1e-15);
    }

    #[test]
    fn coincident_targets_are_singular() {
        let g = FrameGrid::unit(16, 16).unwrap();
        let x = generate_qpsk_frame(&g, 6);
        let t = Target::new(c(1.0, 0.0), 5.3, 2.2);
        let err = crlb_for_frame(&x, &[t, t], &g, 1.0).unwrap_err();
        assert!(matches!(err, Error::SingularFisher { .. }));
    }

    #[test]
    fn fisher_matches_monte_carlo_curvature() {
        // E[∂²(‖y − u(θ)‖²/σ²)/∂θ²] at the truth equals the Fisher diagonal.
        let g = FrameGrid::unit(16, 16).unwrap();
        let x = generate_one_pilot_frame(&g);
        let targets = [Target::new(c(1.0, 0.0), 5.0, 3.0)];
        let sigma2 = 0.1;
        let fisher = fisher_matrix(&mean_frame_jacobian(&x, &targets, &g).unwrap(), sigma2).unwrap();
        let u0 = noiseless_mean_frame(&x, &targets, &g).unwrap();
        let h = 1e-3;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for p in 0..2 {
            let up = noiseless_mean_frame(&x, &perturbed(&targets, p, h), &g).unwrap();
            let dn = noiseless_mean_frame(&x, &perturbed(&targets, p, -h), &g).unwrap();
            let draws = 10_000;
            let mut acc = 0.0;
            for _ in 0..draws {
                let mut f = [0.0; 3];
                for (cell, _) in u0.iter().enumerate() {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    let y = u0.as_slice()[cell] + c(re, im) * (sigma2 / 2.0).sqrt();
                    f[0] += (y - up.as_slice()[cell]).norm_sqr();
                    f[1] += (y - u0.as_slice()[cell]).norm_sqr();
                    f[2] += (y - dn.as_slice()[cell]).norm_sqr();
                }
                acc += (f[0] - 2.0 * f[1] + f[2]) / (h * h * sigma2);
            }
            let curvature = acc / draws as f64;
            let rel = curvature / fisher[(p, p)] - 1.0;
            assert!(rel.abs() < 0.1, "param {p}: {curvature} vs {}", fisher[(p, p)]);
        }
    }
}
