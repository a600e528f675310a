//! Discrete cross-Wigner transform on the half-grid phase lattice.
//!
//! Row `s` sits at `x0 + s dx / 2` and collects the products
//! `g[a] conj(f[b])` with `a + b = s`. The lag `j = a - b` has the parity of
//! `s`, so the y-step inside a row is `2 dx` and the frequency band is
//! `[-pi/(2 dx), pi/(2 dx))`. Samples outside the grid are zero.

use num_complex::Complex64 as C64;

use crate::error::{param, Error, Result};
use crate::numgrid::{PhaseField, PhaseGrid, Signal};
use crate::spectral::{diagonal_lags, HalfGridAxis};

/// `2 dx / sqrt(2 pi)`.
pub fn wigner_weight(dx: f64) -> f64 {
    2.0 * dx / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn cross_wigner(g: &Signal, f: &Signal) -> Result<PhaseField> {
    if !g.grid.same_as(&f.grid) {
        return param("cross-Wigner arguments live on different grids");
    }
    let pgrid = PhaseGrid::new(g.grid);
    let n = pgrid.n();
    let axis = HalfGridAxis::new(n, pgrid.dx());
    let w = wigner_weight(pgrid.dx());
    let mut out = PhaseField::zeros(pgrid);
    let mut lags = Vec::with_capacity(n);
    for s in 0..pgrid.s_count() {
        let (first, count) = diagonal_lags(n, s);
        lags.clear();
        for m in 0..count {
            let j = first + 2 * m as i64;
            let a = ((s as i64 + j) / 2) as usize;
            let b = ((s as i64 - j) / 2) as usize;
            lags.push(g.values[a] * f.values[b].conj() * w);
        }
        axis.forward_into(first, &lags, out.row_mut(s));
    }
    Ok(out)
}

/// Wigner distribution `W(f) = W(f, f)`; it is real, and the rounding-level
/// imaginary parts are removed.
pub fn wigner(f: &Signal) -> PhaseField {
    let mut w = cross_wigner(f, f).expect("a signal shares its own grid");
    let scale = w.max_abs();
    for v in w.values_mut() {
        debug_assert!(v.im.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE));
        v.im = 0.0;
    }
    w
}

/// The quadratic form behind one Wigner value:
/// `W(u)[s, k] = sum_{a,b} A[a, b] u[a] conj(u[b])`, with `A` supported on
/// the anti-diagonal `a + b = s`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerFrame {
    pub pgrid: PhaseGrid,
    pub point: (usize, usize),
    /// Non-zero entries `(a, b, A[a, b])`.
    pub entries: Vec<(usize, usize, C64)>,
}

impl WignerFrame {
    pub fn matrix(&self) -> Vec<C64> {
        let n = self.pgrid.n();
        let mut m = vec![C64::new(0.0, 0.0); n * n];
        for &(a, b, v) in &self.entries {
            m[a * n + b] = v;
        }
        m
    }

    pub fn quadratic_form(&self, u: &Signal) -> C64 {
        self.entries
            .iter()
            .map(|&(a, b, v)| v * u.values[a] * u.values[b].conj())
            .sum()
    }
}

pub fn wigner_frame(pgrid: &PhaseGrid, s: usize, k: usize) -> Result<WignerFrame> {
    if s >= pgrid.s_count() || k >= pgrid.xi_count() {
        return Err(Error::Parameter(format!("phase point ({s}, {k}) out of range")));
    }
    let n = pgrid.n();
    let axis = HalfGridAxis::new(n, pgrid.dx());
    let w = wigner_weight(pgrid.dx());
    let (first, count) = diagonal_lags(n, s);
    let entries = (0..count)
        .map(|m| {
            let j = first + 2 * m as i64;
            let a = ((s as i64 + j) / 2) as usize;
            let b = ((s as i64 - j) / 2) as usize;
            (a, b, axis.phase(j, k) * w)
        })
        .collect();
    Ok(WignerFrame {
        pgrid: *pgrid,
        point: (s, k),
        entries,
    })
}

/// `dxi * sum_k F[2a, k]` for every grid index `a`; for a Wigner field this
/// equals `sqrt(2 pi) |f[a]|^2`.
pub fn time_marginal(f: &PhaseField) -> Vec<f64> {
    let pg = f.pgrid;
    (0..pg.n())
        .map(|a| pg.dxi() * f.row(2 * a).iter().map(|v| v.re).sum::<f64>())
        .collect()
}
