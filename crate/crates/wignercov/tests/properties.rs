mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use wignercov::analysis::exact_wigner_covariance;
use wignercov::montecarlo::MomentAccumulator;
use wignercov::numgrid::{make_grid, Grid1D, PhaseGrid, Signal};
use wignercov::spectral::{dft, row_transform, Direction, LagSeq};
use wignercov::weyl::*;
use wignercov::wigner::{cross_wigner, time_marginal, wigner};

fn grids() -> impl Strategy<Value = Grid1D> {
    (1usize..=8, 0.05f64..1.5, -6.0f64..6.0).prop_map(|(h, dx, x0)| make_grid(2 * h, dx, x0).unwrap())
}

fn scaled(f: &Signal, c: C64) -> Signal {
    Signal::new(f.grid, f.values.iter().map(|v| v * c).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn phase_grid_contract(g in grids()) {
        let pg = PhaseGrid::new(g);
        prop_assert!((pg.dxi() * g.n() as f64 * g.dx() - PI).abs() < 1e-13);
        for a in 0..g.n() {
            prop_assert_eq!(pg.symbol_x(2 * a), g.point(a));
        }
    }

    #[test]
    fn parseval_and_linearity(g in grids(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_signal(g, &mut r);
        let h = random_signal(g, &mut r);
        let big = dft(&f);
        let ex: f64 = f.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.dx();
        let exi: f64 = big.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * big.freq_grid().dx();
        prop_assert!((ex - exi).abs() <= 1e-12 * ex);
        let (a, b) = (cnum(&mut r), cnum(&mut r));
        let comb = Signal::new(g, f.values.iter().zip(&h.values).map(|(x, y)| a * x + b * y).collect()).unwrap();
        let lhs = dft(&comb).values;
        let rhs: Vec<C64> = big.values.iter().zip(&dft(&h).values).map(|(x, y)| a * x + b * y).collect();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * max_abs(&rhs).max(1.0));
    }

    #[test]
    fn row_transform_inverts(g in grids(), odd in any::<bool>(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = g.n();
        let pg = PhaseGrid::new(g);
        let first = if odd { -(n as i64 - 1) } else { -(n as i64 - 2) };
        let c = LagSeq::new(first, (0..n).map(|_| cnum(&mut r)).collect());
        let fwd = row_transform(&c, &pg, Direction::Forward).unwrap();
        let back = row_transform(&LagSeq::new(first, fwd.values), &pg, Direction::Inverse).unwrap();
        prop_assert!(max_diff(&back.values, &c.values) < 1e-12);
    }

    #[test]
    fn wigner_relations(g in grids(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_signal(g, &mut r);
        let h = random_signal(g, &mut r);
        let (a, b) = (cnum(&mut r), cnum(&mut r));
        let base = cross_wigner(&h, &f).unwrap();
        let lhs = cross_wigner(&scaled(&h, a), &scaled(&f, b)).unwrap();
        let rhs: Vec<C64> = base.values().iter().map(|v| v * a * b.conj()).collect();
        prop_assert!(max_diff(lhs.values(), &rhs) <= 1e-12 * max_abs(&rhs).max(1.0));
        let swapped: Vec<C64> = cross_wigner(&f, &h).unwrap().values().iter().map(|v| v.conj()).collect();
        prop_assert!(max_diff(base.values(), &swapped) <= 1e-12 * max_abs(&swapped).max(1.0));
        let m = time_marginal(&wigner(&f));
        for (i, v) in m.iter().enumerate() {
            prop_assert!((v - (2.0 * PI).sqrt() * f.values[i].norm_sqr()).abs() < 1e-12 * 4.0);
        }
    }

    #[test]
    fn weyl_pairing_and_round_trip(g in grids(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_kernel(g, &mut r);
        let sigma = kernel_to_symbol(&k);
        let back = symbol_to_kernel(&sigma);
        prop_assert!(max_diff(back.values(), k.values()) <= 1e-12 * k.max_abs().max(1.0));
        let s = random_field(PhaseGrid::new(g), &mut r);
        let f = random_signal(g, &mut r);
        let h = random_signal(g, &mut r);
        let d = pairing_defect(&s, &f, &h).unwrap();
        prop_assert!(d <= 1e-11 * pairing_scale(&s, &f, &h));
    }

    #[test]
    fn hermitian_kernels_have_real_symbols(g in grids(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_psd_kernel(g, &mut r);
        let sigma = kernel_to_symbol(&k);
        let m = sigma.max_abs();
        prop_assert!(sigma.values().iter().all(|v| v.im.abs() <= 1e-10 * m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn four_axis_round_trip_and_covariance(h in 1usize..=3, dx in 0.1f64..1.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = make_grid(2 * h, dx, -(h as f64) * dx).unwrap();
        let k = random_psd_kernel(g, &mut r);
        let t = exact_wigner_covariance(&k).unwrap();
        prop_assert!(t.hermitian_defect() <= 1e-12 * t.max_abs());
        let ev = wignercov::numgrid::hermitian_eigenvalues(&t.to_matrix());
        let lmax = ev.iter().copied().fold(0.0, f64::max);
        prop_assert!(ev.iter().all(|&l| l >= -1e-8 * lmax));
        let sym = kernel4_to_symbol4(&t);
        let back = symbol4_to_kernel4(&sym).unwrap();
        prop_assert!(max_diff(back.values(), t.values()) <= 1e-12 * t.max_abs());
        let pos = kernel4_to_symbol4_position_first(&t);
        prop_assert!(max_diff(pos.values(), sym.values()) <= 1e-12 * sym.max_abs());
    }

    #[test]
    fn accumulator_merge_any_split(split in 1usize..40, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = make_grid(4, 0.5, -1.0).unwrap();
        let pg = PhaseGrid::new(g);
        let fields: Vec<_> = (0..40).map(|_| wigner(&random_signal(g, &mut r))).collect();
        let subset = vec![(2, 1), (3, 2), (4, 0)];
        let mut whole = MomentAccumulator::new(pg, subset.clone(), None).unwrap();
        let mut a = whole.clone();
        let mut b = whole.clone();
        for (i, f) in fields.iter().enumerate() {
            whole.add(f);
            if i < split { a.add(f) } else { b.add(f) }
        }
        a.merge(&b);
        prop_assert!(max_diff(a.mean().values(), whole.mean().values()) < 1e-12);
        let d = (a.covariance() - whole.covariance()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(d < 1e-12);
    }
}
