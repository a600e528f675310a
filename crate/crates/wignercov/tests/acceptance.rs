//! Acceptance suite: one line per criterion, exit status 1 if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use num_complex::Complex64 as C64;
use wignercov::analysis::*;
use wignercov::gspmodel::{ProcessModel, ShiftModel, SpectralDensity};
use wignercov::montecarlo::*;
use wignercov::numgrid::{hermitian_eigenvalues, Grid1D, Kernel, PhaseGrid, Signal};
use wignercov::weyl::*;
use wignercov::wigner::{time_marginal, wigner, wigner_frame};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn pairing_identity() -> Outcome {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [8, 16, 32] {
        let g = centered(n, 0.5);
        let pg = PhaseGrid::new(g);
        for _ in 0..100 {
            let s = random_field(pg, &mut r);
            let f = random_signal(g, &mut r);
            let h = random_signal(g, &mut r);
            let d = pairing_defect(&s, &f, &h).unwrap() / pairing_scale(&s, &f, &h);
            worst = worst.max(d);
            count += 1;
        }
    }
    outcome(worst <= 1e-11, format!("{count} triples, max defect/scale = {worst:.2e} (tol 1e-11)"))
}

fn round_trips() -> Outcome {
    let mut r = rng(102);
    let mut worst2: f64 = 0.0;
    for n in [2, 8, 16, 32] {
        for _ in 0..5 {
            let k = random_kernel(centered(n, 0.3), &mut r);
            let back = symbol_to_kernel(&kernel_to_symbol(&k));
            worst2 = worst2.max(max_diff(back.values(), k.values()) / k.max_abs());
        }
    }
    let mut worst4: f64 = 0.0;
    for n in [2, 4, 8, 16] {
        let k = random_psd_kernel(centered(n, 0.5), &mut r);
        let t = exact_wigner_covariance(&k).unwrap();
        let back = symbol4_to_kernel4(&kernel4_to_symbol4(&t)).unwrap();
        worst4 = worst4.max(max_diff(back.values(), t.values()) / t.max_abs());
    }
    outcome(
        worst2 <= 1e-12 && worst4 <= 1e-12,
        format!("2-axis max rel {worst2:.2e}, 4-axis max rel {worst4:.2e} (tol 1e-12)"),
    )
}

fn marginal() -> Outcome {
    let mut r = rng(103);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for g in [centered(64, 0.25), centered(16, 0.5), grid(32, 0.3, -2.0)] {
        let mut corpus = vec![gaussian(g, 0.0), hermite1(g), two_gaussians(g), gaussian(g, 1.0)];
        let mut imp = Signal::zeros(g);
        imp.values[3] = C64::new(1.0, 0.0);
        corpus.push(imp);
        for _ in 0..5 {
            corpus.push(random_signal(g, &mut r));
        }
        for f in &corpus {
            let m = time_marginal(&wigner(f));
            for (a, v) in m.iter().enumerate() {
                worst = worst.max((v - (2.0 * PI).sqrt() * f.values[a].norm_sqr()).abs());
            }
            count += 1;
        }
    }
    outcome(worst <= 1e-12, format!("{count} signals, max deviation {worst:.2e} (tol 1e-12)"))
}

fn fourth_moment(k: &Kernel, z: [(usize, bool); 4]) -> C64 {
    let pair = |p: (usize, bool), q: (usize, bool)| match (p.1, q.1) {
        (false, true) => k.get(p.0, q.0),
        (true, false) => k.get(q.0, p.0),
        _ => C64::new(0.0, 0.0),
    };
    pair(z[0], z[1]) * pair(z[2], z[3])
        + pair(z[0], z[2]) * pair(z[1], z[3])
        + pair(z[0], z[3]) * pair(z[1], z[2])
}

fn wick() -> Outcome {
    let mut r = rng(104);
    let mut worst: f64 = 0.0;
    for n in [1, 2, 3] {
        for _ in 0..3 {
            let g = Grid1D::any_size(n, 0.6, -0.4).unwrap();
            let k = random_psd_kernel(g, &mut r);
            let t = exact_wigner_covariance(&k).unwrap();
            let pg = t.pgrid;
            for s in 0..pg.s_count() {
                for q in 0..pg.xi_count() {
                    let fp = wigner_frame(&pg, s, q).unwrap();
                    for s2 in 0..pg.s_count() {
                        for q2 in 0..pg.xi_count() {
                            let fq = wigner_frame(&pg, s2, q2).unwrap();
                            let mut c = C64::new(0.0, 0.0);
                            for &(a, b, va) in &fp.entries {
                                for &(a2, b2, vb) in &fq.entries {
                                    let m4 = fourth_moment(&k, [(a, false), (b, true), (a2, true), (b2, false)]);
                                    c += va * vb.conj() * (m4 - k.get(a, b) * k.get(a2, b2).conj());
                                }
                            }
                            worst = worst.max((t.get(s, q, s2, q2) - c).norm());
                        }
                    }
                }
            }
        }
    }
    let p = 1.7;
    let g = Grid1D::any_size(1, 0.5, 0.0).unwrap();
    let k = Kernel::new(g, vec![C64::new(p / 0.5, 0.0)]).unwrap();
    let var = exact_wigner_covariance(&k).unwrap().get(0, 0, 0, 0).re;
    let scalar = (var - 2.0 * p * p / PI).abs();
    outcome(
        worst <= 1e-10 && scalar <= 1e-10,
        format!("max deviation from Isserlis expansion {worst:.2e}; Var - 2p^2/pi = {scalar:.2e} (tol 1e-10)"),
    )
}

fn white_noise_theorem() -> Outcome {
    let p = 1.0;
    let m = ProcessModel::white_noise(centered(16, 0.5), p).unwrap();
    let syms = interior_symbols(&m.kernel).unwrap();
    let lat = PhaseGrid::new(m.grid).lattice4();
    let worst = syms
        .resolved
        .indices()
        .filter(|&i| lat.in_interior(i))
        .map(|i| (syms.resolved.get(i) - p * p).norm() / (p * p))
        .fold(0.0, f64::max);
    outcome(worst <= 1e-2, format!("n=16, max |sigma_W - p^2| / p^2 on interior = {worst:.2e} (tol 1e-2)"))
}

fn brownian_theorem() -> Outcome {
    let fine = theorem_check(&ProcessModel::brownian(grid(32, 0.25, -2.0))).unwrap();
    let coarse = theorem_check(&ProcessModel::brownian(grid(16, 0.5, -2.0))).unwrap();
    let pass = fine.rel_error_interior <= 0.1 && fine.rel_error_interior < coarse.rel_error_interior;
    outcome(
        pass,
        format!(
            "n=32 dx=0.25 rel L2 {:.3} (tol 0.1); n=16 dx=0.5 rel L2 {:.3} (must exceed); away from edge truncation {:.4} -> {:.4}",
            fine.rel_error_interior, coarse.rel_error_interior, coarse.rel_error_unaffected, fine.rel_error_unaffected
        ),
    )
}

fn stationary_invariance() -> Outcome {
    let g = grid(32, 0.5, -8.0);
    let mu = SpectralDensity::gaussian((2.0 * PI).sqrt(), 1.0).unwrap();
    let st = theorem_check(&ProcessModel::stationary(g, mu.clone()).unwrap()).unwrap();
    let fs = theorem_check(&ProcessModel::frequency_stationary(g, mu).unwrap()).unwrap();
    let a = st.variation[0].max(st.variation[3]);
    let b = fs.variation[1].max(fs.variation[2]);
    outcome(
        a <= 1e-2 && b <= 1e-2,
        format!(
            "stationary variation along x1 {:.2e}, xi2 {:.2e}; frequency-stationary along x2 {:.2e}, xi1 {:.2e} (tol 1e-2)",
            st.variation[0], st.variation[3], fs.variation[1], fs.variation[2]
        ),
    )
}

fn monte_carlo_white_noise() -> Outcome {
    let p = 1.0;
    let model = ProcessModel::white_noise(centered(16, 0.5), p).unwrap();
    let est = estimate_wigner_spectrum(&model, 20_000, 801, Resolution::Resolved).unwrap();
    let within = est
        .mean
        .values()
        .iter()
        .zip(est.stderr.values())
        .filter(|(m, s)| (*m - INV_SQRT_2PI * p).norm() <= 5.0 * s.re)
        .count() as f64
        / est.mean.values().len() as f64;
    let rep = convergence_report(&model, &[10_000, 40_000], 802, Resolution::Resolved).unwrap();
    let cov_err = rep.rows[1].covariance_error;
    let ratio = rep.rows[0].covariance_error / cov_err;
    outcome(
        within >= 0.99 && cov_err <= 0.05 && (1.4..=2.8).contains(&ratio),
        format!(
            "spectrum within 5 stderr at {:.2}% of points (need 99%); covariance rel Frobenius {cov_err:.4} at M=4e4 (tol 0.05); M->4M ratio {ratio:.2} (need [1.4, 2.8])",
            100.0 * within
        ),
    )
}

fn monte_carlo_brownian() -> Outcome {
    let model = ProcessModel::brownian(grid(32, 0.25, -4.0));
    let est = estimate_wigner_spectrum(&model, 20_000, 901, Resolution::Resolved).unwrap();
    let pg = est.mean.pgrid;
    let (mut bad, mut total) = (0, 0);
    let mut zmax: f64 = 0.0;
    for s in pg.s_count() / 4..3 * pg.s_count() / 4 {
        for q in pg.xi_count() / 4..3 * pg.xi_count() / 4 {
            let want = INV_SQRT_2PI * brownian_symbol(pg.symbol_x(s), pg.xi(q));
            let d = (est.mean.get(s, q) - want).norm();
            let se = est.stderr.get(s, q).re;
            total += 1;
            if d > 5.0 * se {
                bad += 1;
                zmax = zmax.max(if se > 0.0 { d / se } else { f64::INFINITY });
            }
        }
    }
    outcome(
        bad == 0,
        format!("{bad} of {total} interior points outside 5 stderr (largest z {zmax:.1})"),
    )
}

fn hudson() -> Outcome {
    let g = centered(64, 0.25);
    let w = wigner(&gaussian(g, 0.0));
    let m = w.max_abs();
    let gmin = w.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min) / m;
    let w = wigner(&hermite1(g));
    let hmin = w.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min) / w.max_abs();
    outcome(
        gmin >= -1e-9 && hmin < -0.01,
        format!("Gaussian min/max {gmin:.2e} (need >= -1e-9); Hermite-1 min/max {hmin:.3} (need < -0.01)"),
    )
}

fn shift_min(f: &Signal, a: f64, b: f64) -> f64 {
    let e = shift_spectrum(&ShiftModel::new(f.clone(), a, b).unwrap()).unwrap();
    e.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min) / e.max_abs()
}

fn shift_nonnegativity() -> Outcome {
    let g = centered(64, 0.25);
    let corpus = [gaussian(g, 0.0), hermite1(g), two_gaussians(g)];
    let laws = [(0.5, 0.5), (0.25, 1.0), (1.0, 0.25), (1.0, 1.0), (0.1, 2.5), (2.0, 0.5)];
    let mut worst = f64::INFINITY;
    for f in &corpus {
        for &(a, b) in &laws {
            worst = worst.min(shift_min(f, a, b));
        }
    }
    let s = 0.05f64.sqrt();
    let witness = shift_min(&corpus[1], s, s);
    outcome(
        worst >= -1e-6 && witness < 0.0,
        format!("min/max over corpus with ab >= 1/4: {worst:.2e} (need >= -1e-6); Hermite-1 at ab = 0.05: {witness:.3}"),
    )
}

fn b_symbol() -> Outcome {
    let mut r = rng(1201);
    let g = centered(8, 0.5);
    let pg = PhaseGrid::new(g);
    let mut worst = f64::INFINITY;
    for _ in 0..5 {
        let k = random_psd_kernel(g, &mut r);
        let a = SymbolEvaluator::Lattice(LatticeSymbol::from_kernel(&k, false));
        let b = build_b_symbol(&a, &pg);
        let m = symbol4_to_kernel4(&b).unwrap().to_matrix();
        let lmax = hermitian_eigenvalues(&m).into_iter().fold(0.0, f64::max);
        worst = worst.min(psd_defect(&m).unwrap() / lmax);
    }
    outcome(worst >= -1e-6, format!("5 kernels at n=8, min eigenvalue / lambda_max = {worst:.2e} (need >= -1e-6)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("pairing identity", pairing_identity),
        ("symbol/kernel round trips", round_trips),
        ("Wigner marginal", marginal),
        ("Wick oracle", wick),
        ("white-noise theorem", white_noise_theorem),
        ("Brownian theorem", brownian_theorem),
        ("stationary invariance", stationary_invariance),
        ("Monte Carlo white noise", monte_carlo_white_noise),
        ("Monte Carlo Brownian spectrum", monte_carlo_brownian),
        ("Hudson direction", hudson),
        ("shift non-negativity", shift_nonnegativity),
        ("b symbol non-negativity", b_symbol),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:2} {} {name}: {} [{:.1}s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
