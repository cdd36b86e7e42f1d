mod common;

use common::*;
use otfs_radar::crlb::min_eigenvalue;
use otfs_radar::fractional::refine_cell;
use otfs_radar::sampling::{sampling_f, sampling_g};
use otfs_radar::target::nearest_bin;
use otfs_radar::{
    apply_channel, build_effective_channel, cfar_alpha, correlate, detect_targets, fisher_matrix, generate_qpsk_frame,
    isfft, mean_frame_jacobian, sfft, CfarConfig, Complex, CorrelationMap, DdMatrix, FrameGrid, Target,
};
use proptest::prelude::*;

fn grid_size() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![8usize, 16, 32])
}

fn complex() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| C64::new(re, im))
}

fn nonzero_complex() -> impl Strategy<Value = C64> {
    (0.01f64..100.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, a)| C64::from_polar(r, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn doppler_kernel_is_periodic_at_integers(n in 2usize..64, d in -64isize..64, q in -3isize..3) {
        let a = sampling_g(d as f64, n);
        let b = sampling_g((d + q * n as isize) as f64, n);
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn kernels_are_bounded_by_one(x in -500.0f64..500.0, n in 1usize..200) {
        prop_assert!(sampling_g(x, n).norm() <= 1.0 + 1e-12);
        prop_assert!(sampling_f(x, n).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn nearest_bin_split(x in -1000.0f64..1000.0) {
        let frac = x - nearest_bin(x) as f64;
        prop_assert!((-0.5..0.5).contains(&frac));
    }

    #[test]
    fn qpsk_frames_carry_unit_power(n in grid_size(), m in grid_size(), seed in any::<u64>()) {
        let grid = FrameGrid::<f64>::unit(n, m).unwrap();
        let x = generate_qpsk_frame(&grid, seed);
        prop_assert!((x.energy() - (n * m) as f64).abs() < 1e-9);
    }

    #[test]
    fn modem_transforms_are_unitary_inverses(n in grid_size(), m in grid_size(), seed in any::<u64>()) {
        let x = random_matrix(&mut rng(seed), n, m);
        let tf = isfft(&x);
        prop_assert!((tf.frobenius_norm() - x.frobenius_norm()).abs() < 1e-10 * x.frobenius_norm());
        prop_assert!(relative_frobenius(&sfft(&tf), &x) < 1e-12);
    }

    #[test]
    fn channel_is_linear(seed in any::<u64>(), a in complex(), b in complex()) {
        let mut r = rng(seed);
        let grid = FrameGrid::unit(16, 16).unwrap();
        let targets: Vec<Target<f64>> = (0..2).map(|_| random_target(&mut r, &grid)).collect();
        let chan = build_effective_channel(&targets, &grid).unwrap();
        let x1 = random_matrix(&mut r, 16, 16);
        let x2 = random_matrix(&mut r, 16, 16);
        let combo = DdMatrix::from_fn(16, 16, |k, l| a * x1[(k, l)] + b * x2[(k, l)]);
        let lhs = apply_channel(&combo, &chan, &grid).unwrap();
        let y1 = apply_channel(&x1, &chan, &grid).unwrap();
        let y2 = apply_channel(&x2, &chan, &grid).unwrap();
        let rhs = DdMatrix::from_fn(16, 16, |k, l| a * y1[(k, l)] + b * y2[(k, l)]);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }

    #[test]
    fn channel_superposes_over_targets(seed in any::<u64>()) {
        let mut r = rng(seed);
        let grid = FrameGrid::unit(16, 16).unwrap();
        let t1 = random_target(&mut r, &grid);
        let t2 = random_target(&mut r, &grid);
        let both = build_effective_channel(&[t1, t2], &grid).unwrap().h_omega;
        let mut sum = build_effective_channel(&[t1], &grid).unwrap().h_omega;
        sum.add_scaled(&build_effective_channel(&[t2], &grid).unwrap().h_omega, C64::new(1.0, 0.0)).unwrap();
        prop_assert!(both.max_abs_diff(&sum) < 1e-12);
    }

    #[test]
    fn fast_and_direct_convolution_agree(n in grid_size(), m in grid_size(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let grid = FrameGrid::unit(n, m).unwrap();
        let targets: Vec<Target<f64>> = (0..2).map(|_| random_target(&mut r, &grid)).collect();
        let chan = build_effective_channel(&targets, &grid).unwrap();
        let x = random_matrix(&mut r, n, m);
        let fast = apply_channel(&x, &chan, &grid).unwrap();
        prop_assert!(relative_frobenius(&fast, &direct_convolution(&x, &chan.h_omega)) < 1e-12);
    }

    #[test]
    fn correlation_is_conjugate_linear_in_y(seed in any::<u64>(), a in nonzero_complex()) {
        let mut r = rng(seed);
        let y = random_matrix(&mut r, 8, 16);
        let x = random_matrix(&mut r, 8, 16);
        let lhs = correlate(&y.scale(a), &x).unwrap().v;
        let rhs = correlate(&y, &x).unwrap().v.scale(a.conj());
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn shifting_x_shifts_the_map(seed in any::<u64>(), dk in -8isize..8, dl in -8isize..8) {
        let mut r = rng(seed);
        let y = random_matrix(&mut r, 8, 16);
        let x = random_matrix(&mut r, 8, 16);
        let base = correlate(&y, &x).unwrap().v;
        let shifted = correlate(&y, &x.circular_shift(dk, dl)).unwrap().v;
        prop_assert!(shifted.max_abs_diff(&base.circular_shift(-dk, -dl)) < 1e-10);
    }

    #[test]
    fn cfar_alpha_decreases_in_p_fa(n_s in 1usize..5000, a in -12.0f64..-0.5, b in -12.0f64..-0.5) {
        prop_assume!((a - b).abs() > 1e-3);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(cfar_alpha(n_s, 10f64.powf(lo)).unwrap() > cfar_alpha(n_s, 10f64.powf(hi)).unwrap());
    }

    #[test]
    fn detections_ignore_complex_scaling(seed in any::<u64>(), c in nonzero_complex()) {
        let mut r = rng(seed);
        let mut v = random_matrix(&mut r, 32, 32);
        v[(5, 7)] = C64::new(40.0, 3.0);
        let cfg = CfarConfig::default();
        let base = detect_targets(&CorrelationMap::new(v.clone()), &cfg).unwrap();
        let scaled = detect_targets(&CorrelationMap::new(v.scale(c)), &cfg).unwrap();
        prop_assert_eq!(base.cells(), scaled.cells());
    }

    #[test]
    fn refined_fractions_are_bounded_and_scale_free(seed in any::<u64>(), c in nonzero_complex(), k in 0usize..16, l in 0usize..16) {
        let v = random_matrix(&mut rng(seed), 16, 16);
        let base = refine_cell(&CorrelationMap::new(v.clone()), k, l).unwrap();
        let scaled = refine_cell(&CorrelationMap::new(v.scale(c)), k, l).unwrap();
        prop_assert!(base.kappa.abs() <= 0.5 && base.iota.abs() <= 0.5);
        prop_assert!((base.kappa - scaled.kappa).abs() < 1e-9);
        prop_assert!((base.iota - scaled.iota).abs() < 1e-9);
    }

    #[test]
    fn fisher_is_symmetric_and_psd(seed in any::<u64>(), p in 1usize..3, sigma2 in 1e-3f64..10.0) {
        let mut r = rng(seed);
        let grid = FrameGrid::unit(16, 16).unwrap();
        let targets: Vec<Target<f64>> = (0..p).map(|_| random_target(&mut r, &grid)).collect();
        let x = generate_qpsk_frame(&grid, seed);
        let fisher = fisher_matrix(&mean_frame_jacobian(&x, &targets, &grid).unwrap(), sigma2).unwrap();
        prop_assert!((&fisher - fisher.transpose()).norm() < 1e-10 * fisher.norm().max(1.0));
        prop_assert!(min_eigenvalue(&fisher) > -1e-8 * fisher.trace());
    }
}

#[test]
fn f32_pipeline_tracks_f64() {
    let grid64 = FrameGrid::unit(16, 16).unwrap();
    let grid32 = FrameGrid::<f32>::unit(16, 16).unwrap();
    let t64 = Target::new(Complex::new(0.8, -0.3), 5.3, -2.2);
    let t32 = Target::new(Complex::new(0.8f32, -0.3), 5.3, -2.2);
    let x64 = generate_qpsk_frame(&grid64, 9);
    let x32 = generate_qpsk_frame(&grid32, 9);
    let v64 = correlate(&apply_channel(&x64, &build_effective_channel(&[t64], &grid64).unwrap(), &grid64).unwrap(), &x64).unwrap();
    let v32 = correlate(&apply_channel(&x32, &build_effective_channel(&[t32], &grid32).unwrap(), &grid32).unwrap(), &x32).unwrap();
    let diff = v64.v.max_abs_diff(&v32.v.cast::<f64>());
    assert!(diff < 1e-4 * v64.v.max_abs());
}
