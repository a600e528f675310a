#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wignercov::numgrid::{make_grid, Grid1D, Kernel, PhaseField, PhaseGrid, Signal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(n: usize, dx: f64, x0: f64) -> Grid1D {
    make_grid(n, dx, x0).unwrap()
}

/// Centred grid of `n` points.
pub fn centered(n: usize, dx: f64) -> Grid1D {
    grid(n, dx, -(n as f64) * dx / 2.0)
}

pub fn cnum(r: &mut impl Rng) -> C64 {
    C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

pub fn random_signal(g: Grid1D, r: &mut impl Rng) -> Signal {
    Signal::new(g, (0..g.n()).map(|_| cnum(r)).collect()).unwrap()
}

pub fn random_kernel(g: Grid1D, r: &mut impl Rng) -> Kernel {
    let n = g.n();
    Kernel::new(g, (0..n * n).map(|_| cnum(r)).collect()).unwrap()
}

/// `L L*` for a random `L`.
pub fn random_psd_kernel(g: Grid1D, r: &mut impl Rng) -> Kernel {
    let n = g.n();
    let l: Vec<C64> = (0..n * n).map(|_| cnum(r)).collect();
    Kernel::from_fn(g, |a, b| (0..n).map(|c| l[a * n + c] * l[b * n + c].conj()).sum())
}

pub fn random_field(pg: PhaseGrid, r: &mut impl Rng) -> PhaseField {
    PhaseField::new(pg, (0..pg.point_count()).map(|_| cnum(r)).collect()).unwrap()
}

pub fn gaussian(g: Grid1D, center: f64) -> Signal {
    let c = std::f64::consts::PI.powf(-0.25);
    Signal::from_real_fn(g, |x| c * (-(x - center).powi(2) / 2.0).exp())
}

/// Normalised first Hermite function.
pub fn hermite1(g: Grid1D) -> Signal {
    let c = std::f64::consts::PI.powf(-0.25) * 2f64.sqrt();
    Signal::from_real_fn(g, |x| c * x * (-x * x / 2.0).exp())
}

/// Two separated Gaussians.
pub fn two_gaussians(g: Grid1D) -> Signal {
    let a = gaussian(g, -1.5);
    let b = gaussian(g, 1.5);
    Signal::new(g, a.values.iter().zip(&b.values).map(|(u, v)| (u + v) / 2f64.sqrt()).collect()).unwrap()
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn rel_l2(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}
