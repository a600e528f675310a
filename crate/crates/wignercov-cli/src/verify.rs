//! Verification suites behind `wignercov verify`.

use std::f64::consts::PI;

use serde::Serialize;
use wignercov::analysis::{exact_wigner_covariance, shift_spectrum, theorem_check};
use wignercov::gspmodel::PathSampler;
use wignercov::weyl::{
    kernel4_to_symbol4, kernel_to_resolved_symbol, kernel_to_symbol, pairing_defect, pairing_scale,
    resolved_symbol_to_kernel, symbol4_to_kernel4, symbol_to_kernel,
};
use wignercov::wigner::{time_marginal, wigner};
use wignercov::{Grid1D, Kernel, PhaseField, PhaseGrid, ProcessModel, ShiftModel, Signal, C64};

use crate::CliError;

#[derive(Serialize, Debug)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    /// `"<="`, `">="` or `"<"`.
    pub comparison: &'static str,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(suite: &'static str, name: &str, value: f64, comparison: &'static str, tolerance: f64) -> Self {
        let pass = match comparison {
            "<=" => value <= tolerance,
            ">=" => value >= tolerance,
            "<" => value < tolerance,
            _ => unreachable!(),
        };
        Self {
            suite,
            name: name.to_string(),
            value,
            comparison,
            tolerance,
            pass,
        }
    }
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Deterministic pseudo-random test vectors drawn as white-noise paths.
struct Draws {
    sampler: PathSampler,
    next: u64,
}

impl Draws {
    fn new(g: Grid1D) -> Result<Self, CliError> {
        let model = ProcessModel::white_noise(g, g.dx())?;
        Ok(Self {
            sampler: PathSampler::new(&model)?,
            next: 0,
        })
    }

    fn signal(&mut self) -> Signal {
        self.next += 1;
        self.sampler.path(0x5eed, self.next)
    }

    fn values(&mut self, len: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(len);
        while out.len() < len {
            out.extend(self.signal().values);
        }
        out.truncate(len);
        out
    }

    fn field(&mut self, pg: PhaseGrid) -> PhaseField {
        PhaseField::new(pg, self.values(pg.point_count())).expect("sized to the phase lattice")
    }

    fn kernel(&mut self, g: Grid1D) -> Kernel {
        Kernel::new(g, self.values(g.n() * g.n())).expect("sized to the grid")
    }

    fn psd_kernel(&mut self, g: Grid1D) -> Kernel {
        let l = self.kernel(g);
        let n = g.n();
        Kernel::from_fn(g, |a, b| (0..n).map(|c| l.get(a, c) * l.get(b, c).conj()).sum())
    }
}

fn gaussian(g: Grid1D, center: f64) -> Signal {
    let c = PI.powf(-0.25);
    Signal::from_real_fn(g, |x| c * (-(x - center).powi(2) / 2.0).exp())
}

fn hermite1(g: Grid1D) -> Signal {
    let c = PI.powf(-0.25) * 2f64.sqrt();
    Signal::from_real_fn(g, |x| c * x * (-x * x / 2.0).exp())
}

fn two_gaussians(g: Grid1D) -> Signal {
    let (a, b) = (gaussian(g, -1.5), gaussian(g, 1.5));
    let v = a.values.iter().zip(&b.values).map(|(u, w)| (u + w) / 2f64.sqrt()).collect();
    Signal::new(g, v).expect("same grid")
}

/// Largest 4-axis grid used by the identity suite.
const MAX_N4: usize = 16;

pub fn identities(g: Grid1D) -> Result<Vec<Check>, CliError> {
    const S: &str = "identities";
    let pg = PhaseGrid::new(g);
    let mut d = Draws::new(g)?;
    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (s, f, h) = (d.field(pg), d.signal(), d.signal());
        worst = worst.max(pairing_defect(&s, &f, &h)? / pairing_scale(&s, &f, &h));
    }
    out.push(Check::new(S, "pairing defect / scale (20 triples)", worst, "<=", 1e-11));

    let (mut raw, mut res): (f64, f64) = (0.0, 0.0);
    for _ in 0..5 {
        let k = d.kernel(g);
        let scale = max_abs(k.values());
        raw = raw.max(max_diff(symbol_to_kernel(&kernel_to_symbol(&k)).values(), k.values()) / scale);
        let back = resolved_symbol_to_kernel(&kernel_to_resolved_symbol(&k));
        res = res.max(max_diff(back.values(), k.values()) / scale);
    }
    out.push(Check::new(S, "kernel -> symbol -> kernel, lattice", raw, "<=", 1e-12));
    out.push(Check::new(S, "kernel -> symbol -> kernel, resolved", res, "<=", 1e-12));

    let g4 = if g.n() > MAX_N4 {
        Grid1D::new(MAX_N4, g.dx(), -(MAX_N4 as f64) * g.dx() / 2.0)?
    } else {
        g
    };
    let t = exact_wigner_covariance(&d.psd_kernel(g4))?;
    let back = symbol4_to_kernel4(&kernel4_to_symbol4(&t))?;
    let e4 = max_diff(back.values(), t.values()) / max_abs(t.values());
    out.push(Check::new(S, &format!("4-axis round trip (n = {})", g4.n()), e4, "<=", 1e-12));

    let mut corpus = vec![gaussian(g, 0.0), hermite1(g), two_gaussians(g)];
    for _ in 0..3 {
        corpus.push(d.signal());
    }
    let mut worst: f64 = 0.0;
    for f in &corpus {
        let m = time_marginal(&wigner(f));
        let scale = max_abs(&f.values).powi(2).max(f64::MIN_POSITIVE);
        for (a, v) in m.iter().enumerate() {
            worst = worst.max((v - (2.0 * PI).sqrt() * f.values[a].norm_sqr()).abs() / scale);
        }
    }
    out.push(Check::new(S, "time marginal deviation / max |f|^2", worst, "<=", 1e-12));
    Ok(out)
}

pub fn theorem(model: &ProcessModel) -> Result<Vec<Check>, CliError> {
    const S: &str = "theorem";
    let r = theorem_check(model)?;
    let name = model.name();
    Ok(vec![
        Check::new(S, &format!("{name}: interior rel L2 error"), r.rel_error_interior, "<=", 1e-2),
        Check::new(S, &format!("{name}: lattice product identity"), r.lattice_identity_error, "<=", 1e-10),
    ])
}

fn min_over_max(f: &PhaseField) -> f64 {
    let m = f.max_abs();
    f.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min) / m
}

pub fn nonneg(g: Grid1D) -> Result<Vec<Check>, CliError> {
    const S: &str = "nonneg";
    let mut out = vec![
        Check::new(S, "Gaussian Wigner min / max", min_over_max(&wigner(&gaussian(g, 0.0))), ">=", -1e-9),
        Check::new(S, "Hermite-1 Wigner min / max (negativity witnessed)", min_over_max(&wigner(&hermite1(g))), "<", 0.0),
    ];
    let corpus = [gaussian(g, 0.0), hermite1(g), two_gaussians(g)];
    let laws = [(0.5, 0.5), (0.25, 1.0), (1.0, 0.25), (1.0, 1.0), (0.1, 2.5), (2.0, 0.5)];
    let mut worst = f64::INFINITY;
    for f in &corpus {
        for &(a, b) in &laws {
            worst = worst.min(min_over_max(&shift_spectrum(&ShiftModel::new(f.clone(), a, b)?)?));
        }
    }
    out.push(Check::new(S, "shift spectrum min / max, ab >= 1/4", worst, ">=", -1e-6));
    let s = 0.05f64.sqrt();
    let witness = min_over_max(&shift_spectrum(&ShiftModel::new(corpus[1].clone(), s, s)?)?);
    out.push(Check::new(S, "shift spectrum min / max, Hermite-1 at ab = 0.05 (negativity witnessed)", witness, "<", 0.0));
    Ok(out)
}
