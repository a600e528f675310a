//! Continuum-normalized Fourier transforms on grids.
//!
//! `F[k] = (dx / sqrt(2 pi)) sum_a f[a] exp(-i x_a xi_k)` on the centered
//! full band `xi_k = (k - n/2) 2 pi / (n dx)`, plus the per-row lag
//! transforms of the half-grid phase lattice.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::{param, Result};
use crate::numgrid::{Grid1D, PhaseField, PhaseGrid, Signal};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Samples of a Fourier transform on the full band of a position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqSignal {
    /// Position grid the transform was taken on.
    pub space: Grid1D,
    pub values: Vec<C64>,
}

impl FreqSignal {
    /// Frequency grid: spacing `2 pi / (n dx)`, starting at `-n/2` steps.
    pub fn freq_grid(&self) -> Grid1D {
        full_band_grid(&self.space)
    }
}

pub fn full_band_grid(space: &Grid1D) -> Grid1D {
    let n = space.n();
    let dxi = 2.0 * PI / (n as f64 * space.dx());
    Grid1D::new(n, dxi, -((n / 2) as f64) * dxi).expect("derived grid is valid")
}

/// Direct O(n^2) transform.
pub fn dft_direct(f: &Signal) -> FreqSignal {
    let g = f.grid;
    let fg = full_band_grid(&g);
    let values = (0..g.n())
        .map(|k| {
            let xi = fg.point(k);
            let acc: C64 = f
                .values
                .iter()
                .enumerate()
                .map(|(a, v)| v * C64::from_polar(1.0, -g.point(a) * xi))
                .sum();
            acc * g.dx() * INV_SQRT_2PI
        })
        .collect();
    FreqSignal {
        space: g,
        values,
    }
}

pub fn idft_direct(big_f: &FreqSignal) -> Signal {
    let g = big_f.space;
    let fg = big_f.freq_grid();
    let values = (0..g.n())
        .map(|a| {
            let x = g.point(a);
            let acc: C64 = big_f
                .values
                .iter()
                .enumerate()
                .map(|(k, v)| v * C64::from_polar(1.0, x * fg.point(k)))
                .sum();
            acc * fg.dx() * INV_SQRT_2PI
        })
        .collect();
    Signal { grid: g, values }
}

/// FFT form of [`dft_direct`].
pub fn dft(f: &Signal) -> FreqSignal {
    let g = f.grid;
    let n = g.n();
    let fg = full_band_grid(&g);
    let mut buf: Vec<C64> = f
        .values
        .iter()
        .enumerate()
        .map(|(a, v)| if a % 2 == 0 { *v } else { -v })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= C64::from_polar(g.dx() * INV_SQRT_2PI, -g.x0() * fg.point(k));
    }
    FreqSignal {
        space: g,
        values: buf,
    }
}

pub fn idft(big_f: &FreqSignal) -> Signal {
    let g = big_f.space;
    let n = g.n();
    let fg = big_f.freq_grid();
    let mut buf: Vec<C64> = big_f
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| v * C64::from_polar(1.0, g.x0() * fg.point(k)))
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let w = fg.dx() * INV_SQRT_2PI;
    let values = buf
        .into_iter()
        .enumerate()
        .map(|(a, v)| if a % 2 == 0 { v * w } else { -v * w })
        .collect();
    Signal { grid: g, values }
}

/// Coefficients `c_m` attached to the lags `first + 2 m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagSeq {
    pub first: i64,
    pub values: Vec<C64>,
}

impl LagSeq {
    pub fn new(first: i64, values: Vec<C64>) -> Self {
        Self { first, values }
    }

    /// Builds a sequence from explicit `(lag, value)` pairs of one parity.
    pub fn from_pairs(pairs: &[(i64, C64)]) -> Result<Self> {
        let Some(&(j0, _)) = pairs.first() else {
            return Ok(Self::new(0, Vec::new()));
        };
        if pairs.iter().any(|&(j, _)| (j - j0).rem_euclid(2) != 0) {
            return param("lags of mixed parity");
        }
        let lo = pairs.iter().map(|p| p.0).min().unwrap();
        let hi = pairs.iter().map(|p| p.0).max().unwrap();
        let mut values = vec![C64::new(0.0, 0.0); ((hi - lo) / 2 + 1) as usize];
        for &(j, v) in pairs {
            values[((j - lo) / 2) as usize] += v;
        }
        Ok(Self::new(lo, values))
    }

    pub fn lag(&self, m: usize) -> i64 {
        self.first + 2 * m as i64
    }

    pub fn get(&self, j: i64) -> C64 {
        let d = j - self.first;
        if d < 0 || d % 2 != 0 || (d / 2) as usize >= self.values.len() {
            C64::new(0.0, 0.0)
        } else {
            self.values[(d / 2) as usize]
        }
    }
}

/// A uniform axis of `len` samples spaced `h`, with the half-grid frequency
/// lattice `w_q = (q - len/2) pi / (len h)`.
///
/// Lags of one parity `j = first + 2m` map to the exponentials
/// `exp(-i j h w_q)`. Within a parity class these are the columns of a
/// length-`len` DFT, so up to `len` coefficients are recovered exactly.
#[derive(Debug, Clone)]
pub struct HalfGridAxis {
    len: usize,
    h: f64,
    roots: Vec<C64>,
}

impl HalfGridAxis {
    pub fn new(len: usize, h: f64) -> Self {
        let roots = (0..len)
            .map(|r| C64::from_polar(1.0, -2.0 * PI * r as f64 / len as f64))
            .collect();
        Self { len, h, roots }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn center(&self) -> usize {
        self.len / 2
    }

    pub fn freq(&self, q: usize) -> f64 {
        (q as f64 - self.center() as f64) * PI / (self.len as f64 * self.h)
    }

    fn root(&self, m: usize, q: usize) -> C64 {
        let l = self.len as i64;
        let r = (m as i64 * (q as i64 - self.center() as i64)).rem_euclid(l);
        self.roots[r as usize]
    }

    /// `exp(-i j h w)` evaluated exactly at lattice frequency `q`.
    pub fn phase(&self, j: i64, q: usize) -> C64 {
        // j h w_q = j pi (q - c) / len
        let l = 2 * self.len as i64;
        let r = (j * (q as i64 - self.center() as i64)).rem_euclid(l);
        C64::from_polar(1.0, -PI * r as f64 / self.len as f64)
    }

    /// `out[q] = sum_m c_m exp(-i (first + 2m) h w_q)`.
    pub fn forward(&self, c: &LagSeq) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.len];
        self.forward_into(c.first, &c.values, &mut out);
        out
    }

    pub fn forward_into(&self, first: i64, coeffs: &[C64], out: &mut [C64]) {
        for (q, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (m, c) in coeffs.iter().enumerate() {
                acc += c * self.root(m, q);
            }
            *o = acc * self.phase(first, q);
        }
    }

    /// Recovers `count <= len` coefficients on lags `first + 2m` from the
    /// `len` samples produced by [`HalfGridAxis::forward`].
    pub fn inverse(&self, values: &[C64], first: i64, count: usize) -> LagSeq {
        let mut out = vec![C64::new(0.0, 0.0); count];
        self.inverse_into(values, first, &mut out);
        LagSeq::new(first, out)
    }

    pub fn inverse_into(&self, values: &[C64], first: i64, out: &mut [C64]) {
        assert!(out.len() <= self.len, "more coefficients than samples");
        let inv = 1.0 / self.len as f64;
        let demod: Vec<C64> = values
            .iter()
            .enumerate()
            .map(|(q, v)| v * self.phase(first, q).conj())
            .collect();
        for (m, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (q, v) in demod.iter().enumerate() {
                acc += v * self.root(m, q).conj();
            }
            *o = acc * inv;
        }
    }

    /// Lags available on the anti-diagonal `a + b = t` of a `len x len`
    /// matrix: `(first lag, count)` with `j = a - b`.
    pub fn diagonal_lags(&self, t: usize) -> (i64, usize) {
        diagonal_lags(self.len, t)
    }
}

/// Lags `j = a - b` with `a + b = t`, `0 <= a, b < n`: `(first, count)`.
pub fn diagonal_lags(n: usize, t: usize) -> (i64, usize) {
    let reach = t.min(2 * n - 2 - t);
    (-(reach as i64), reach + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Lag transform on the frequency axis of a phase grid:
/// forward `out[k] = sum_j c_j exp(-i j dx xi_k)`; inverse recovers the
/// coefficients on the lag window of `coeffs` from `n` samples stored in
/// `coeffs.values`.
pub fn row_transform(coeffs: &LagSeq, pgrid: &PhaseGrid, direction: Direction) -> Result<LagSeq> {
    let axis = HalfGridAxis::new(pgrid.n(), pgrid.dx());
    match direction {
        Direction::Forward => {
            if coeffs.values.len() > 2 * pgrid.n() - 1 {
                return param("too many lags for this grid");
            }
            Ok(LagSeq::new(0, axis.forward(coeffs)))
        }
        Direction::Inverse => {
            if coeffs.values.len() != pgrid.n() {
                return param("inverse transform needs one sample per frequency");
            }
            Ok(axis.inverse(&coeffs.values, coeffs.first, pgrid.n()))
        }
    }
}

/// Bilinear sample of a phase field at `(x, xi)`, zero outside the lattice.
pub fn sample_bilinear(f: &PhaseField, x: f64, xi: f64) -> C64 {
    let pg = f.pgrid;
    let u = (x - pg.symbol_x(0)) / (pg.dx() / 2.0);
    let v = (xi - pg.xi(0)) / pg.dxi();
    let (s_max, k_max) = (pg.s_count() as f64 - 1.0, pg.xi_count() as f64 - 1.0);
    if !(u > -1.0 && u < s_max + 1.0 && v > -1.0 && v < k_max + 1.0) {
        return C64::new(0.0, 0.0);
    }
    let (u0, v0) = (u.floor(), v.floor());
    let (fu, fv) = (u - u0, v - v0);
    let at = |s: f64, k: f64| {
        if s < 0.0 || k < 0.0 || s > s_max || k > k_max {
            C64::new(0.0, 0.0)
        } else {
            f.get(s as usize, k as usize)
        }
    };
    at(u0, v0) * ((1.0 - fu) * (1.0 - fv))
        + at(u0 + 1.0, v0) * (fu * (1.0 - fv))
        + at(u0, v0 + 1.0) * ((1.0 - fu) * fv)
        + at(u0 + 1.0, v0 + 1.0) * (fu * fv)
}

/// `G(x, xi) = F(-xi, x)`, the composition with the rotation
/// `(x, xi) -> (-xi, x)`, resampled bilinearly onto `target`.
pub fn rotate_neg_j(f: &PhaseField, target: &PhaseGrid) -> PhaseField {
    PhaseField::from_fn(*target, |x, xi| sample_bilinear(f, -xi, x))
}
