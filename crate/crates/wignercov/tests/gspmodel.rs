mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64 as C64;
use wignercov::gspmodel::*;
use wignercov::numgrid::{Kernel, PhaseGrid, Signal};
use wignercov::weyl::kernel_to_resolved_symbol;
use wignercov::Error;

#[test]
fn white_noise_kernel_examples() {
    let g = centered(8, 0.5);
    let k = white_noise_kernel(&g, 1.0).unwrap();
    for a in 0..8 {
        for b in 0..8 {
            let want = if a == b { 2.0 } else { 0.0 };
            assert_eq!(k.get(a, b), C64::new(want, 0.0));
        }
    }
    assert!(matches!(white_noise_kernel(&g, 0.0), Err(Error::Parameter(_))));
    assert!(white_noise_kernel(&g, -1.0).is_err());
    for p in [1.0, 2.0] {
        let sigma = kernel_to_resolved_symbol(&white_noise_kernel(&g, p).unwrap());
        assert!(sigma.values().iter().all(|v| (v - p).norm() < 1e-12));
    }
}

#[test]
fn brownian_kernel_examples() {
    let g = grid(8, 0.5, -1.5);
    let k = brownian_kernel(&g);
    let at = |x: f64, y: f64| {
        let i = |v: f64| ((v + 1.5) / 0.5).round() as usize;
        k.get(i(x), i(y)).re
    };
    assert_eq!(at(1.0, 2.0), 1.0);
    assert_eq!(at(-0.5, 1.0), 0.0);
    assert_eq!(at(2.0, 2.0), 2.0);
    assert_eq!(at(-1.0, -1.5), 0.0);
    assert_eq!(at(0.5, 0.5), 0.5);
}

#[test]
fn stationary_kernel_examples() {
    let g = centered(32, 0.25);
    let mu = SpectralDensity::gaussian((2.0 * PI).sqrt(), 1.0).unwrap();
    let k = stationary_kernel(&g, &mu).unwrap();
    for a in 0..32 {
        assert!((k.get(a, a).re - 1.0).abs() < 1e-8);
        for b in 0..32 {
            let d = g.point(a) - g.point(b);
            assert!((k.get(a, b).re - (-d * d / 2.0).exp()).abs() < 1e-8);
        }
    }
    // the same law through the quadrature path
    let custom = SpectralDensity::custom(|xi| (2.0 * PI).sqrt() * (-xi * xi / 2.0).exp());
    let kc = stationary_kernel(&g, &custom).unwrap();
    let diag = kc.get(0, 0);
    for a in 0..32 {
        assert!((kc.get(a, a) - diag).norm() < 1e-12);
    }
    assert!(max_diff(kc.values(), k.values()) < 1e-3);
    let flat = stationary_kernel(&g, &SpectralDensity::Constant(1.5)).unwrap();
    let wn = white_noise_kernel(&g, 1.5).unwrap();
    assert!(max_diff(flat.values(), wn.values()) < 1e-10);
    let flat_q = stationary_kernel(&g, &SpectralDensity::custom(|_| 1.5)).unwrap();
    assert!(max_diff(flat_q.values(), wn.values()) < 1e-2 * 6.0);
    assert!(stationary_kernel(&g, &SpectralDensity::custom(|xi| xi)).is_err());
}

#[test]
fn frequency_stationary_kernel_is_diagonal() {
    let g = centered(16, 0.5);
    let mu = SpectralDensity::gaussian(1.0, 1.0).unwrap();
    let k = frequency_stationary_kernel(&g, &mu).unwrap();
    for a in 0..16 {
        for b in 0..16 {
            let want = if a == b { mu.eval(-g.point(a)) / 0.5 } else { 0.0 };
            assert!((k.get(a, b).re - want).abs() < 1e-14);
        }
    }
}

#[test]
fn constructed_kernels_are_covariances() {
    let g = grid(24, 0.25, -3.0);
    let kernels = vec![
        white_noise_kernel(&g, 0.7).unwrap(),
        brownian_kernel(&g),
        stationary_kernel(&g, &SpectralDensity::gaussian(1.0, 0.5).unwrap()).unwrap(),
        frequency_stationary_kernel(&g, &SpectralDensity::gaussian(2.0, 1.0).unwrap()).unwrap(),
    ];
    for k in &kernels {
        assert!(k.hermitian_defect() <= 1e-14 * k.max_abs());
        k.validate_covariance().unwrap();
        psd_factor(k).unwrap();
    }
}

#[test]
fn tables_interpolate() {
    let mu = SpectralDensity::table(grid(4, 1.0, 0.0), vec![0.0, 1.0, 3.0, 3.0]).unwrap();
    assert_eq!(mu.eval(1.5), 2.0);
    assert_eq!(mu.eval(0.25), 0.25);
    assert!(SpectralDensity::table(grid(2, 1.0, 0.0), vec![1.0, -1.0]).is_err());
    assert!(SpectralDensity::gaussian(-1.0, 1.0).is_err());
}

#[test]
fn factor_reproduces_kernel() {
    let mut r = rng(1);
    let k = random_psd_kernel(centered(10, 0.5), &mut r);
    let f = psd_factor(&k).unwrap();
    let back = &f.l * f.l.adjoint();
    let m = k.to_matrix();
    assert!((back - &m).camax() < 1e-12 * m.camax());
}

#[test]
fn non_psd_kernel_is_a_model_error() {
    let g = grid(2, 1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let k = Kernel::new(g, vec![z, one, one, z]).unwrap();
    match psd_factor(&k) {
        Err(Error::Model {
            clipped, most_negative, ..
        }) => {
            assert_eq!(clipped, 1);
            assert!((most_negative + 1.0).abs() < 1e-12);
        }
        other => panic!("{other:?}"),
    }
    assert!(ProcessModel::custom(k).is_err());
}

#[test]
fn singular_kernel_is_accepted() {
    let g = centered(8, 0.5);
    let f = random_signal(g, &mut rng(2));
    let k = Kernel::from_fn(g, |a, b| f.values[a] * f.values[b].conj());
    let fac = psd_factor(&k).unwrap();
    assert!(fac.clip_mass <= 1e-10 * k.max_abs() * 8.0);
    let model = ProcessModel::custom(k).unwrap();
    let paths = sample_paths(&model, 4, 1).unwrap();
    // every path is a multiple of f
    for p in &paths {
        let c = p.values[0] / f.values[0];
        assert!(p.values.iter().zip(&f.values).all(|(u, v)| (u - c * v).norm() < 1e-6));
    }
}

#[test]
fn zero_kernel_gives_zero_paths() {
    let g = centered(8, 0.5);
    let model = ProcessModel::custom(Kernel::zeros(g)).unwrap();
    for p in sample_paths(&model, 10, 3).unwrap() {
        assert!(p.values.iter().all(|v| v.norm() == 0.0));
    }
    assert!(sample_paths(&model, 0, 3).is_err());
}

#[test]
fn sampling_is_deterministic() {
    let model = ProcessModel::brownian(grid(16, 0.25, -1.0));
    let s = PathSampler::new(&model).unwrap();
    let a = s.path(42, 7);
    let b = s.path(42, 7);
    assert_eq!(a.values, b.values);
    assert_ne!(s.path(42, 8).values, a.values);
    assert_ne!(s.path(43, 7).values, a.values);
    let batch = sample_paths(&model, 10, 42).unwrap();
    assert_eq!(batch[7].values, a.values);
}

fn moments(paths: &[Signal]) -> (Vec<C64>, Vec<C64>) {
    let n = paths[0].values.len();
    let m = paths.len() as f64;
    let mut cov = vec![C64::new(0.0, 0.0); n * n];
    let mut pseudo = vec![C64::new(0.0, 0.0); n * n];
    for p in paths {
        for a in 0..n {
            for b in 0..n {
                cov[a * n + b] += p.values[a] * p.values[b].conj() / m;
                pseudo[a * n + b] += p.values[a] * p.values[b] / m;
            }
        }
    }
    (cov, pseudo)
}

#[test]
fn white_noise_sample_moments() {
    let model = ProcessModel::white_noise(grid(16, 1.0, -8.0), 1.0).unwrap();
    let m = 20_000;
    let paths = sample_paths(&model, m, 11).unwrap();
    let (cov, pseudo) = moments(&paths);
    let tol = 5.0 / (m as f64).sqrt();
    for a in 0..16 {
        for b in 0..16 {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((cov[a * 16 + b] - want).norm() < tol);
            assert!(pseudo[a * 16 + b].norm() < tol);
        }
    }
}

#[test]
fn covariance_error_halves_when_count_quadruples() {
    // per-entry RMS error over independent repetitions
    let model = ProcessModel::stationary(centered(8, 0.5), SpectralDensity::gaussian(2.0, 1.0).unwrap()).unwrap();
    let k = model.kernel.values().to_vec();
    let reps = 32;
    let rms = |m: usize, base: u64| {
        let mut acc = vec![0.0; 64];
        let mut acc_p = vec![0.0; 64];
        for r in 0..reps {
            let (cov, pseudo) = moments(&sample_paths(&model, m, base + r).unwrap());
            for i in 0..64 {
                acc[i] += (cov[i] - k[i]).norm_sqr() / reps as f64;
                acc_p[i] += pseudo[i].norm_sqr() / reps as f64;
            }
        }
        (acc, acc_p)
    };
    let (e1, p1) = rms(1000, 100);
    let (e4, p4) = rms(4000, 1000);
    let floor = 1e-12;
    for (a, b) in [(&e1, &e4), (&p1, &p4)] {
        let ratios: Vec<f64> = a
            .iter()
            .zip(b.iter())
            .filter(|(x, _)| **x > floor)
            .map(|(x, y)| (x / y).sqrt())
            .collect();
        let ok = ratios.iter().filter(|r| (1.4..=2.8).contains(*r)).count();
        assert!(ok as f64 >= 0.9 * ratios.len() as f64, "{ok}/{}", ratios.len());
    }
}

#[test]
fn brownian_variance_grows_linearly() {
    let g = grid(32, 0.25, -2.0);
    let model = ProcessModel::brownian(g);
    let m = 20_000;
    let paths = sample_paths(&model, m, 5).unwrap();
    for a in 0..32 {
        let x = g.point(a);
        let v: f64 = paths.iter().map(|p| p.values[a].norm_sqr()).sum::<f64>() / m as f64;
        let want = x.max(0.0);
        assert!((v - want).abs() <= 5.0 * want / (m as f64).sqrt() + 1e-12, "{x} {v}");
    }
}

#[test]
fn shift_model_validation_and_degenerate_law() {
    let g = centered(64, 0.25);
    let f = gaussian(g, 0.5);
    assert!(ShiftModel::new(f.clone(), 0.0, 1.0).is_err());
    assert!(ShiftModel::new(f.clone(), 1.0, -1.0).is_err());
    assert!(ShiftModel::new(Signal::zeros(g), 1.0, 1.0).is_err());
    let tiny = ShiftModel::new(f.clone(), MIN_SHIFT_VARIANCE, MIN_SHIFT_VARIANCE).unwrap();
    for p in sample_shift_process(&tiny, 20, 1) {
        assert!(max_diff(&p.values, &f.values) < 1e-3);
    }
    let sm = ShiftModel::new(f, 0.5, 0.5).unwrap();
    assert_eq!(sm.path(9, 3).values, sm.path(9, 3).values);
    assert_eq!(sample_shift_process(&sm, 5, 9)[3].values, sm.path(9, 3).values);
}

#[test]
fn shift_model_mean_energy() {
    // |f|^2 is the N(0, 1/2) density, so the smoothed energy is N(0, a + 1/2)
    let g = centered(128, 0.1);
    let a = 0.8;
    let sm = ShiftModel::new(gaussian(g, 0.0), a, 0.3).unwrap();
    let m = 20_000;
    let paths = sample_shift_process(&sm, m, 21);
    let var = a + 0.5;
    for i in (0..128).step_by(4) {
        let x = g.point(i);
        let e: f64 = paths.iter().map(|p| p.values[i].norm_sqr()).sum::<f64>() / m as f64;
        let want = (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
        assert!((e - want).abs() < 5.0 / (m as f64).sqrt(), "{x} {e} {want}");
    }
}

#[test]
fn names() {
    let g = centered(4, 1.0);
    assert_eq!(ProcessModel::brownian(g).name(), "brownian");
    assert_eq!(ProcessModel::white_noise(g, 1.0).unwrap().name(), "white-noise");
    let _ = PhaseGrid::new(g);
}
