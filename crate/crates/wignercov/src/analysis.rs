//! Exact second-order statistics of the Wigner distribution of a Gaussian
//! symmetric process, and the product formula for their Weyl symbol.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{param, Result};
use crate::gspmodel::{ProcessKind, ProcessModel, ShiftModel, SpectralDensity};
use crate::numgrid::{CovTensor4, Kernel, PhaseField, PhaseGrid, Region4, Symbol4};
use crate::spectral::{diagonal_lags, HalfGridAxis};
use crate::weyl::{kernel4_to_symbol4_region, kernel_to_symbol, resolve_rows, resolve_symbol4};
use crate::wigner::{wigner, wigner_weight};

/// Which symbol lattice a result lives on; see [`crate::weyl`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Resolution {
    Lattice,
    #[default]
    Resolved,
}

/// `E W(u) = (2 pi)^{-1/2} sigma_u`.
pub fn expected_wigner(k: &Kernel, resolution: Resolution) -> Result<PhaseField> {
    k.validate_covariance()?;
    let mut sigma = kernel_to_symbol(k);
    if resolution == Resolution::Resolved {
        sigma = resolve_rows(&sigma);
    }
    let c = 1.0 / (2.0 * PI).sqrt();
    for v in sigma.values_mut() {
        *v *= c;
    }
    Ok(sigma)
}

/// `Cov(W0[s,k], W0[s',k'])` by Wick's theorem for circular Gaussians:
/// `sum A_p[a,b] K[a,a'] conj(A_q[a',b']) conj(K[b,b'])`.
///
/// Frames are supported on anti-diagonals, so each `(s, s')` block is a
/// product of two lag transforms of `w^2 K[a,a'] conj(K[b,b'])`.
pub fn exact_wigner_covariance(k: &Kernel) -> Result<CovTensor4> {
    k.validate_covariance()?;
    let pgrid = PhaseGrid::new(k.grid);
    let n = pgrid.n();
    let rows = pgrid.s_count();
    let axis = HalfGridAxis::new(n, pgrid.dx());
    let w2 = wigner_weight(pgrid.dx()).powi(2);
    let blocks: Vec<Vec<C64>> = (0..rows * rows)
        .into_par_iter()
        .map(|ps| {
            let (s, s2) = (ps / rows, ps % rows);
            let (f1, c1) = diagonal_lags(n, s);
            let (f2, c2) = diagonal_lags(n, s2);
            // B[m1][k'] = sum_m2 C[m1][m2] exp(+i j' dx xi_k')
            let mut b = vec![C64::new(0.0, 0.0); c1 * n];
            for m1 in 0..c1 {
                let j = f1 + 2 * m1 as i64;
                let (a, bb) = (((s as i64 + j) / 2) as usize, ((s as i64 - j) / 2) as usize);
                for m2 in 0..c2 {
                    let j2 = f2 + 2 * m2 as i64;
                    let (a2, b2) = (((s2 as i64 + j2) / 2) as usize, ((s2 as i64 - j2) / 2) as usize);
                    let c = k.get(a, a2) * k.get(bb, b2).conj() * w2;
                    if c == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for k2 in 0..n {
                        b[m1 * n + k2] += c * axis.phase(j2, k2).conj();
                    }
                }
            }
            let mut block = vec![C64::new(0.0, 0.0); n * n];
            for m1 in 0..c1 {
                let j = f1 + 2 * m1 as i64;
                for kk in 0..n {
                    let ph = axis.phase(j, kk);
                    for k2 in 0..n {
                        block[kk * n + k2] += b[m1 * n + k2] * ph;
                    }
                }
            }
            block
        })
        .collect();
    let mut out = CovTensor4::zeros(pgrid);
    for (ps, block) in blocks.into_iter().enumerate() {
        let (s, s2) = (ps / rows, ps % rows);
        for kk in 0..n {
            for k2 in 0..n {
                out.set(s, kk, s2, k2, block[kk * n + k2]);
            }
        }
    }
    Ok(out)
}

/// A symbol `(x, xi) -> sigma(x, xi)` that can be sampled off the lattice.
#[derive(Clone)]
pub enum SymbolEvaluator {
    Constant(f64),
    ClosedForm(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
    /// Interpolated from a lattice symbol. Every row is a trigonometric
    /// polynomial in `xi` and is evaluated exactly; between rows the value is
    /// linear in `x`, with zero rows beyond the lattice.
    Lattice(LatticeSymbol),
}

impl fmt::Debug for SymbolEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(p) => write!(f, "Constant({p})"),
            Self::ClosedForm(_) => write!(f, "ClosedForm"),
            Self::Lattice(l) => write!(f, "Lattice(resolved: {})", l.resolved),
        }
    }
}

/// Row-wise lag coefficients of a lattice symbol.
#[derive(Debug, Clone)]
pub struct LatticeSymbol {
    pgrid: PhaseGrid,
    resolved: bool,
    /// `(lag, coefficient)` per row; `sigma(row, xi) = sum c exp(-i j dx xi)`.
    rows: Vec<Vec<(i64, C64)>>,
}

impl LatticeSymbol {
    /// `field` is a lattice symbol (as produced by
    /// [`kernel_to_symbol`]); with `resolved` the evaluator reproduces
    /// its resolved rows instead.
    pub fn new(field: &PhaseField, resolved: bool) -> Self {
        let pg = field.pgrid;
        let n = pg.n();
        let axis = HalfGridAxis::new(n, pg.dx());
        let raw: Vec<Vec<(i64, C64)>> = (0..pg.s_count())
            .map(|s| {
                let (first, count) = diagonal_lags(n, s);
                let c = axis.inverse(field.row(s), first, count);
                (0..count).map(|m| (c.lag(m), c.values[m])).collect()
            })
            .collect();
        let rows = if resolved {
            (0..raw.len())
                .map(|s| {
                    let mut acc: Vec<(i64, C64)> = Vec::new();
                    for (d, w) in [(-1i64, 0.25), (0, 0.5), (1, 0.25)] {
                        let r = s as i64 + d;
                        if r < 0 || r >= raw.len() as i64 {
                            continue;
                        }
                        acc.extend(raw[r as usize].iter().map(|&(j, c)| (j, c * w)));
                    }
                    acc
                })
                .collect()
        } else {
            raw
        };
        Self {
            pgrid: pg,
            resolved,
            rows,
        }
    }

    pub fn from_kernel(k: &Kernel, resolved: bool) -> Self {
        Self::new(&kernel_to_symbol(k), resolved)
    }

    fn row_value(&self, r: i64, xi: f64) -> C64 {
        if r < 0 || r as usize >= self.rows.len() {
            return C64::new(0.0, 0.0);
        }
        let dx = self.pgrid.dx();
        self.rows[r as usize]
            .iter()
            .map(|&(j, c)| c * C64::from_polar(1.0, -(j as f64) * dx * xi))
            .sum()
    }

    pub fn eval_complex(&self, x: f64, xi: f64) -> C64 {
        let u = (x - self.pgrid.symbol_x(0)) / (self.pgrid.dx() / 2.0);
        let r0 = u.floor();
        let t = u - r0;
        let r0 = r0 as i64;
        // snap to exact rows so lattice arguments stay exact
        if t.abs() < 1e-9 {
            return self.row_value(r0, xi);
        }
        if (1.0 - t).abs() < 1e-9 {
            return self.row_value(r0 + 1, xi);
        }
        self.row_value(r0, xi) * (1.0 - t) + self.row_value(r0 + 1, xi) * t
    }
}

impl SymbolEvaluator {
    pub fn closed_form(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::ClosedForm(Arc::new(f))
    }

    pub fn from_field(field: &PhaseField, resolved: bool) -> Self {
        Self::Lattice(LatticeSymbol::new(field, resolved))
    }

    /// Real part of the symbol; covariance symbols are real.
    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        self.eval_complex(x, xi).re
    }

    pub fn eval_complex(&self, x: f64, xi: f64) -> C64 {
        match self {
            Self::Constant(p) => C64::new(*p, 0.0),
            Self::ClosedForm(f) => C64::new(f(x, xi), 0.0),
            Self::Lattice(l) => l.eval_complex(x, xi),
        }
    }

    /// Closed form where the model has one, otherwise the resolved lattice
    /// symbol of its kernel.
    pub fn for_model(model: &ProcessModel) -> Self {
        match &model.kind {
            ProcessKind::WhiteNoise { power } => Self::Constant(*power),
            ProcessKind::Brownian => Self::closed_form(brownian_symbol),
            ProcessKind::Stationary(mu) => {
                let mu = mu.clone();
                Self::closed_form(move |_, xi| mu.eval(xi))
            }
            ProcessKind::FrequencyStationary(mu) => {
                let mu = mu.clone();
                Self::closed_form(move |x, _| mu.eval(-x))
            }
            ProcessKind::Custom => {
                Self::Lattice(LatticeSymbol::from_kernel(&model.kernel, true))
            }
        }
    }
}

/// `sigma(x1 - xi2/2, x2 + xi1/2) sigma(x1 + xi2/2, x2 - xi1/2)` on the
/// whole lattice.
pub fn product_formula_symbol(sigma: &SymbolEvaluator, pgrid: &PhaseGrid) -> Symbol4 {
    product_formula_symbol_region(sigma, pgrid, &pgrid.lattice4().full())
}

pub fn product_formula_symbol_region(
    sigma: &SymbolEvaluator,
    pgrid: &PhaseGrid,
    region: &Region4,
) -> Symbol4 {
    let lat = pgrid.lattice4();
    let mut out = Symbol4::zeros(*pgrid, region.clone());
    let idx: Vec<[usize; 4]> = out.indices().collect();
    let vals: Vec<C64> = idx
        .par_iter()
        .map(|&[m, t, q1, q2]| {
            let (x1, x2, xi1, xi2) = (lat.x1(m), lat.x2(t), lat.xi1(q1), lat.xi2(m, q2));
            sigma.eval_complex(x1 - xi2 / 2.0, x2 + xi1 / 2.0)
                * sigma.eval_complex(x1 + xi2 / 2.0, x2 - xi1 / 2.0)
        })
        .collect();
    out.values_mut().copy_from_slice(&vals);
    out
}

/// The symbol `b` built from `a` by the same product rule.
pub fn build_b_symbol(a: &SymbolEvaluator, pgrid: &PhaseGrid) -> Symbol4 {
    product_formula_symbol(a, pgrid)
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

/// Weyl symbol of the Brownian kernel `min(x, y)`:
/// `2 x^2 sinc(x xi)^2` for `x > 0`, zero otherwise.
pub fn brownian_symbol(x: f64, xi: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = sinc(x * xi);
    2.0 * x * x * s * s
}

pub fn brownian_sigma_w(x1: f64, x2: f64, xi1: f64, xi2: f64) -> f64 {
    brownian_symbol(x1 - xi2 / 2.0, x2 + xi1 / 2.0) * brownian_symbol(x1 + xi2 / 2.0, x2 - xi1 / 2.0)
}

/// `mu(x2 + xi1/2) mu(x2 - xi1/2)` at each `[x1, x2, xi1, xi2]`.
pub fn stationary_sigma_w(mu: &SpectralDensity, points: &[[f64; 4]]) -> Vec<f64> {
    points
        .iter()
        .map(|p| mu.eval(p[1] + p[2] / 2.0) * mu.eval(p[1] - p[2] / 2.0))
        .collect()
}

/// `mu_hat(-x1 + xi2/2) mu_hat(-x1 - xi2/2)` at each `[x1, x2, xi1, xi2]`.
pub fn freq_stationary_sigma_w(mu_hat: &SpectralDensity, points: &[[f64; 4]]) -> Vec<f64> {
    points
        .iter()
        .map(|p| mu_hat.eval(-p[0] + p[3] / 2.0) * mu_hat.eval(-p[0] - p[3] / 2.0))
        .collect()
}

/// `E W(u)` of a random time-frequency shift of `f`: the Gaussian density of
/// the shift convolved with `W(f)` on the phase lattice.
pub fn shift_spectrum(model: &ShiftModel) -> Result<PhaseField> {
    if !(model.a > 0.0 && model.b > 0.0) {
        return param("shift variances must be positive");
    }
    let w = wigner(&model.template);
    let pg = w.pgrid;
    let (rows, cols) = (pg.s_count(), pg.xi_count());
    let (hx, hxi) = (pg.dx() / 2.0, pg.dxi());
    let a = model.a.max(crate::gspmodel::MIN_SHIFT_VARIANCE);
    let b = model.b.max(crate::gspmodel::MIN_SHIFT_VARIANCE);
    let gx: Vec<f64> = (0..rows)
        .map(|d| (-(d as f64 * hx).powi(2) / (2.0 * a)).exp() / (2.0 * PI * a).sqrt() * hx)
        .collect();
    let gxi: Vec<f64> = (0..cols)
        .map(|d| (-(d as f64 * hxi).powi(2) / (2.0 * b)).exp() / (2.0 * PI * b).sqrt() * hxi)
        .collect();
    // along x
    let mut tmp = PhaseField::zeros(pg);
    for s in 0..rows {
        for s2 in 0..rows {
            let g = gx[s.abs_diff(s2)];
            if g == 0.0 {
                continue;
            }
            for k in 0..cols {
                let v = tmp.get(s, k) + w.get(s2, k) * g;
                tmp.set(s, k, v);
            }
        }
    }
    // along xi
    let mut out = PhaseField::zeros(pg);
    for s in 0..rows {
        let row = tmp.row(s).to_vec();
        for (k, o) in out.row_mut(s).iter_mut().enumerate() {
            *o = row
                .iter()
                .enumerate()
                .map(|(k2, v)| v * gxi[k.abs_diff(k2)])
                .sum();
        }
    }
    Ok(out)
}

/// Comparison of the exact 4-axis symbol with the product formula.
#[derive(Debug, Clone)]
pub struct TheoremReport {
    /// Relative L2 error of the resolved exact symbol against the product
    /// formula with the model's own symbol, over the interior.
    pub rel_error_interior: f64,
    /// Same error restricted to interior points whose product-formula
    /// arguments `x1 +- xi2/2` stay inside the position grid scaled by 1/2
    /// towards the origin, where kernels such as `min(x, y)` are not cut by
    /// the grid edge.
    pub rel_error_unaffected: f64,
    /// Relative error of the lattice identity (lattice symbol against the
    /// product of lattice symbols): rounding level.
    pub lattice_identity_error: f64,
    /// Spread of the resolved exact symbol over the interior, relative to its
    /// maximum: along each single axis, then jointly over `(x1, xi2)` and
    /// `(x2, xi1)`.
    pub variation: [f64; 4],
    pub variation_x1_xi2: f64,
    pub variation_x2_xi1: f64,
    pub interior_points: usize,
    pub boundary_mask: String,
}

/// Exact 4-axis symbol (lattice and resolved) of a model over the interior.
pub struct InteriorSymbols {
    pub lattice: Symbol4,
    pub resolved: Symbol4,
}

pub fn interior_symbols(k: &Kernel) -> Result<InteriorSymbols> {
    let t = exact_wigner_covariance(k)?;
    let pgrid = t.pgrid;
    let lat = pgrid.lattice4();
    let interior = lat.interior();
    let mut work = interior.grown(2, lat.shape());
    work.ranges[1] = interior.ranges[1].clone();
    work.ranges[2] = interior.ranges[2].clone();
    let raw = kernel4_to_symbol4_region(&t, &work);
    let resolved = resolve_symbol4(&raw, &interior)?;
    Ok(InteriorSymbols {
        lattice: raw.crop(&interior)?,
        resolved,
    })
}

fn rel_l2<'a>(pairs: impl Iterator<Item = (C64, C64)> + 'a) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in pairs {
        num += (a - b).norm_sqr();
        den += b.norm_sqr();
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

/// Largest spread of `sym` over the axes in `axes` with the other axes held
/// fixed, relative to `max |S|`. Real and imaginary parts are spread
/// separately and the larger is reported.
pub fn axis_variation(sym: &Symbol4, axes: &[usize], keep: impl Fn([usize; 4]) -> bool) -> f64 {
    let scale = sym.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let r = sym.region().ranges.clone();
    let stride: Vec<usize> = (0..4).map(|a| if axes.contains(&a) { 0 } else { r[a].len() }).collect();
    let mut groups: std::collections::HashMap<[usize; 4], [f64; 4]> = Default::default();
    for idx in sym.indices() {
        if !keep(idx) {
            continue;
        }
        let mut key = idx;
        for a in 0..4 {
            if stride[a] == 0 {
                key[a] = 0;
            }
        }
        let v = sym.get(idx);
        let e = groups
            .entry(key)
            .or_insert([f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY]);
        e[0] = e[0].min(v.re);
        e[1] = e[1].max(v.re);
        e[2] = e[2].min(v.im);
        e[3] = e[3].max(v.im);
    }
    groups
        .values()
        .map(|e| (e[1] - e[0]).max(e[3] - e[2]))
        .fold(0.0, f64::max)
        / scale
}

pub fn theorem_check(model: &ProcessModel) -> Result<TheoremReport> {
    let syms = interior_symbols(&model.kernel)?;
    let pgrid = syms.resolved.pgrid;
    let lat = pgrid.lattice4();
    let region = syms.resolved.region().clone();
    let formula = product_formula_symbol_region(&SymbolEvaluator::for_model(model), &pgrid, &region);
    let lattice_formula = product_formula_symbol_region(
        &SymbolEvaluator::Lattice(LatticeSymbol::from_kernel(&model.kernel, false)),
        &pgrid,
        &region,
    );
    let idx: Vec<[usize; 4]> = syms
        .resolved
        .indices()
        .filter(|&i| lat.in_interior(i))
        .collect();
    let rel_error_interior = rel_l2(idx.iter().map(|&i| (syms.resolved.get(i), formula.get(i))));
    // arguments x1 +- xi2/2 inside the grid scaled by 1/2 towards the origin
    let g = pgrid.base();
    let (lo, hi) = (g.x0() / 2.0, (g.x0() + g.extent()) / 2.0);
    let unaffected = |i: [usize; 4]| {
        let (x1, xi2) = (lat.x1(i[0]), lat.xi2(i[0], i[3]));
        let (p, m) = (x1 - xi2 / 2.0, x1 + xi2 / 2.0);
        p >= lo && p < hi && m >= lo && m < hi
    };
    let rel_error_unaffected = rel_l2(
        idx.iter()
            .filter(|&&i| unaffected(i))
            .map(|&i| (syms.resolved.get(i), formula.get(i))),
    );
    let lattice_identity_error =
        rel_l2(idx.iter().map(|&i| (syms.lattice.get(i), lattice_formula.get(i))));
    let mut variation = [0.0; 4];
    for (a, v) in variation.iter_mut().enumerate() {
        *v = axis_variation(&syms.resolved, &[a], |i| lat.in_interior(i));
    }
    let variation_x1_xi2 = axis_variation(&syms.resolved, &[0, 3], |i| lat.in_interior(i));
    let variation_x2_xi1 = axis_variation(&syms.resolved, &[1, 2], |i| lat.in_interior(i));
    let r = &region.ranges;
    let boundary_mask = format!(
        "interior: x1 index {}..{}, x2 index {}..{}, xi1 index {}..{}, |xi2| < {}",
        r[0].start,
        r[0].end,
        r[1].start,
        r[1].end,
        r[2].start,
        r[2].end,
        g.extent() / 4.0
    );
    Ok(TheoremReport {
        rel_error_interior,
        rel_error_unaffected,
        lattice_identity_error,
        variation,
        variation_x1_xi2,
        variation_x2_xi1,
        interior_points: idx.len(),
        boundary_mask,
    })
}
