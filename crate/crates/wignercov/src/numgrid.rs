//! Sampling lattices and the containers every other module computes on.
//!
//! Positions live on a uniform [`Grid1D`]. Phase-space fields live on a
//! [`PhaseGrid`]: a half-spaced position axis of `2n - 1` points and a
//! centered frequency axis of `n` points covering `[-pi/(2 dx), pi/(2 dx))`.

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{param, Error, Result};

pub type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    dx: f64,
    x0: f64,
}

impl Grid1D {
    pub fn new(n: usize, dx: f64, x0: f64) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return param(format!("grid size must be even and at least 2, got {n}"));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return param(format!("grid spacing must be positive, got {dx}"));
        }
        if !x0.is_finite() {
            return param("grid origin must be finite");
        }
        Ok(Self { n, dx, x0 })
    }

    /// Like [`Grid1D::new`] but accepts any `n >= 1`. Odd sizes have no
    /// zero frequency; they exist for small exhaustive checks.
    pub fn any_size(n: usize, dx: f64, x0: f64) -> Result<Self> {
        if n == 0 {
            return param("grid size must be at least 1");
        }
        Self::new(2, dx, x0).map(|g| Self { n, ..g })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn point(&self, a: usize) -> f64 {
        self.x0 + a as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|a| self.point(a)).collect()
    }

    /// Length `n * dx` of the sampled window.
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub(crate) fn same_as(&self, other: &Grid1D) -> bool {
        self.n == other.n && self.dx == other.dx && self.x0 == other.x0
    }
}

pub fn make_grid(n: usize, dx: f64, x0: f64) -> Result<Grid1D> {
    Grid1D::new(n, dx, x0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    base: Grid1D,
}

impl PhaseGrid {
    pub fn new(base: Grid1D) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &Grid1D {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn dx(&self) -> f64 {
        self.base.dx
    }

    pub fn s_count(&self) -> usize {
        2 * self.base.n - 1
    }

    pub fn xi_count(&self) -> usize {
        self.base.n
    }

    pub fn dxi(&self) -> f64 {
        PI / (self.base.n as f64 * self.base.dx)
    }

    /// Position of symbol row `s`, on the half-spaced axis.
    pub fn symbol_x(&self, s: usize) -> f64 {
        self.base.x0 + s as f64 * self.base.dx / 2.0
    }

    pub fn xi(&self, k: usize) -> f64 {
        (k as f64 - (self.base.n / 2) as f64) * self.dxi()
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.base.n).map(|k| self.xi(k)).collect()
    }

    /// Number of phase points `(2n - 1) * n`.
    pub fn point_count(&self) -> usize {
        self.s_count() * self.xi_count()
    }

    pub fn lattice4(&self) -> Lattice4 {
        Lattice4 { pgrid: *self }
    }
}

pub fn make_phase_grid(g: Grid1D) -> PhaseGrid {
    PhaseGrid::new(g)
}

fn check_finite(values: &[C64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        param(format!("{what} contains non-finite entries"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub grid: Grid1D,
    pub values: Vec<C64>,
}

impl Signal {
    pub fn new(grid: Grid1D, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Shape(format!(
                "signal has {} samples, grid has {}",
                values.len(),
                grid.n()
            )));
        }
        check_finite(&values, "signal")?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.n()],
        }
    }

    /// Samples `f(x_a)` on the grid.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    /// Quadrature norm `sqrt(dx * sum |f|^2)`.
    pub fn norm(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub grid: Grid1D,
    values: Vec<C64>,
}

impl Kernel {
    pub fn new(grid: Grid1D, values: Vec<C64>) -> Result<Self> {
        let n = grid.n();
        if values.len() != n * n {
            return Err(Error::Shape(format!(
                "kernel has {} entries, expected {}",
                values.len(),
                n * n
            )));
        }
        check_finite(&values, "kernel")?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        let n = grid.n();
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(usize, usize) -> C64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                values.push(f(a, b));
            }
        }
        Self { grid, values }
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.values[a * self.grid.n() + b]
    }

    pub fn set(&mut self, a: usize, b: usize, v: C64) {
        let n = self.grid.n();
        self.values[a * n + b] = v;
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Kernel {
        Kernel {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Largest deviation `|K[a,b] - conj(K[b,a])|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                worst = worst.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        worst
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |a, b| self.get(a, b))
    }

    /// Accepts Hermitian kernels whose eigenvalues are all at least
    /// `-1e-10 * max|entry|`.
    pub fn validate_covariance(&self) -> Result<()> {
        let scale = self.max_abs();
        if self.hermitian_defect() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Contract("covariance kernel is not Hermitian".into()));
        }
        if scale == 0.0 {
            return Ok(());
        }
        let lmin = min_eigenvalue(&self.to_matrix());
        if lmin < -1e-10 * scale {
            return Err(Error::Contract(format!(
                "covariance kernel is not positive semidefinite (eigenvalue {lmin:e})"
            )));
        }
        Ok(())
    }
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

/// Complex field on the phase lattice, indexed `(s, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    pub pgrid: PhaseGrid,
    values: Vec<C64>,
}

impl PhaseField {
    pub fn new(pgrid: PhaseGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != pgrid.point_count() {
            return Err(Error::Shape(format!(
                "phase field has {} entries, expected {}",
                values.len(),
                pgrid.point_count()
            )));
        }
        check_finite(&values, "phase field")?;
        Ok(Self { pgrid, values })
    }

    pub fn zeros(pgrid: PhaseGrid) -> Self {
        Self {
            values: vec![C64::new(0.0, 0.0); pgrid.point_count()],
            pgrid,
        }
    }

    pub fn from_fn(pgrid: PhaseGrid, f: impl Fn(f64, f64) -> C64) -> Self {
        let mut out = Self::zeros(pgrid);
        for s in 0..pgrid.s_count() {
            let x = pgrid.symbol_x(s);
            for k in 0..pgrid.xi_count() {
                out.set(s, k, f(x, pgrid.xi(k)));
            }
        }
        out
    }

    pub fn get(&self, s: usize, k: usize) -> C64 {
        self.values[s * self.pgrid.xi_count() + k]
    }

    pub fn set(&mut self, s: usize, k: usize, v: C64) {
        let n = self.pgrid.xi_count();
        self.values[s * n + k] = v;
    }

    pub fn row(&self, s: usize) -> &[C64] {
        let n = self.pgrid.xi_count();
        &self.values[s * n..(s + 1) * n]
    }

    pub fn row_mut(&mut self, s: usize) -> &mut [C64] {
        let n = self.pgrid.xi_count();
        &mut self.values[s * n..(s + 1) * n]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Euclidean norm of the entries (no quadrature weights).
    pub fn l2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Covariance kernel over pairs of phase points, indexed `(s, k, s', k')`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovTensor4 {
    pub pgrid: PhaseGrid,
    values: Vec<C64>,
}

impl CovTensor4 {
    pub fn new(pgrid: PhaseGrid, values: Vec<C64>) -> Result<Self> {
        let p = pgrid.point_count();
        if values.len() != p * p {
            return Err(Error::Shape(format!(
                "tensor has {} entries, expected {}",
                values.len(),
                p * p
            )));
        }
        check_finite(&values, "tensor")?;
        Ok(Self { pgrid, values })
    }

    pub fn zeros(pgrid: PhaseGrid) -> Self {
        let p = pgrid.point_count();
        Self {
            pgrid,
            values: vec![C64::new(0.0, 0.0); p * p],
        }
    }

    pub fn point_count(&self) -> usize {
        self.pgrid.point_count()
    }

    fn index(&self, s: usize, k: usize, s2: usize, k2: usize) -> usize {
        let n = self.pgrid.xi_count();
        (s * n + k) * self.point_count() + s2 * n + k2
    }

    pub fn get(&self, s: usize, k: usize, s2: usize, k2: usize) -> C64 {
        self.values[self.index(s, k, s2, k2)]
    }

    pub fn set(&mut self, s: usize, k: usize, s2: usize, k2: usize, v: C64) {
        let i = self.index(s, k, s2, k2);
        self.values[i] = v;
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        let p = self.point_count();
        let mut worst: f64 = 0.0;
        for i in 0..p {
            for j in i..p {
                let d = self.values[i * p + j] - self.values[j * p + i].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// The tensor as a matrix over phase points `p = s * n + k`.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        let p = self.point_count();
        DMatrix::from_fn(p, p, |i, j| self.values[i * p + j])
    }
}

/// Axis bookkeeping for 4-axis symbols, in the order `(x1, x2, xi1, xi2)`.
///
/// * `x1`: midpoints of symbol rows, `4n - 3` points spaced `dx / 4`.
/// * `x2`: midpoints of frequency samples, `2n - 1` points spaced `dxi / 2`.
/// * `xi1`: conjugate to row differences, `2n - 1` points over `[-pi/dx, pi/dx)`.
/// * `xi2`: conjugate to frequency differences. The frequency axis of a
///   Wigner field is periodic, so this variable is discrete: `xi2 = -P dx / 2`
///   with `P` a sum of two lags. `P` has the parity of the `x1` index, so the
///   axis is staggered by `dx / 2` on odd `x1` indices. `2n - 1` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice4 {
    pgrid: PhaseGrid,
}

impl Lattice4 {
    pub fn pgrid(&self) -> &PhaseGrid {
        &self.pgrid
    }

    pub fn shape(&self) -> [usize; 4] {
        let n = self.pgrid.n();
        [4 * n - 3, 2 * n - 1, 2 * n - 1, 2 * n - 1]
    }

    pub fn x1(&self, m: usize) -> f64 {
        self.pgrid.base.x0 + m as f64 * self.pgrid.dx() / 4.0
    }

    pub fn x2(&self, t: usize) -> f64 {
        self.pgrid.xi(0) + t as f64 * self.pgrid.dxi() / 2.0
    }

    pub fn xi1(&self, q: usize) -> f64 {
        let len = 2 * self.pgrid.n() - 1;
        (q as f64 - (len / 2) as f64) * PI / (len as f64 * self.pgrid.dx() / 2.0)
    }

    pub fn xi2(&self, m: usize, q: usize) -> f64 {
        -(self.lag_sum(m, q) as f64) * self.pgrid.dx() / 2.0
    }

    /// Lag sum `P` addressed by `(x1 index, xi2 index)`.
    pub fn lag_sum(&self, m: usize, q: usize) -> i64 {
        -2 * (q as i64 - (self.pgrid.n() as i64 - 1)) - (m % 2) as i64
    }

    /// Inverse of [`Lattice4::lag_sum`]; `None` off the lattice.
    pub fn xi2_index(&self, m: i64, p: i64) -> Option<usize> {
        if m < 0 || (m + p).rem_euclid(2) != 0 {
            return None;
        }
        let q = self.pgrid.n() as i64 - 1 - (p + m % 2) / 2;
        let len = 2 * self.pgrid.n() as i64 - 1;
        if (0..len).contains(&q) {
            Some(q as usize)
        } else {
            None
        }
    }

    pub fn full(&self) -> Region4 {
        let [a, b, c, d] = self.shape();
        Region4 {
            ranges: [0..a, 0..b, 0..c, 0..d],
        }
    }

    /// Central half of each axis. For `xi2` the half-grid band of the
    /// frequency pair is `[-L/2, L/2)` with `L = n dx`, so the central half is
    /// `|xi2| < L/4`; see [`Lattice4::in_interior`].
    pub fn interior(&self) -> Region4 {
        let [a, b, c, _] = self.shape();
        let n = self.pgrid.n();
        let quarter = |len: usize| len / 4..(3 * len) / 4;
        let lo = n - 1 - n / 4;
        let hi = n + n / 4;
        Region4 {
            ranges: [quarter(a), quarter(b), quarter(c), lo..hi],
        }
    }

    pub fn in_interior(&self, idx: [usize; 4]) -> bool {
        let r = self.interior();
        let l = self.pgrid.n() as f64 * self.pgrid.dx();
        let xi2 = self.xi2(idx[0], idx[3]);
        r.ranges[0].contains(&idx[0])
            && r.ranges[1].contains(&idx[1])
            && r.ranges[2].contains(&idx[2])
            && xi2 >= -l / 4.0 - 1e-12 * l
            && xi2 < l / 4.0 - 1e-12 * l
    }
}

/// Axis-aligned box of `(x1, x2, xi1, xi2)` indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region4 {
    pub ranges: [Range<usize>; 4],
}

impl Region4 {
    pub fn len(&self) -> usize {
        self.ranges.iter().map(|r| r.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, idx: [usize; 4]) -> bool {
        (0..4).all(|a| self.ranges[a].contains(&idx[a]))
    }

    /// Grows every axis by `margin` indices, clamped to `shape`.
    pub fn grown(&self, margin: usize, shape: [usize; 4]) -> Region4 {
        let g = |r: &Range<usize>, len: usize| r.start.saturating_sub(margin)..(r.end + margin).min(len);
        Region4 {
            ranges: [
                g(&self.ranges[0], shape[0]),
                g(&self.ranges[1], shape[1]),
                g(&self.ranges[2], shape[2]),
                g(&self.ranges[3], shape[3]),
            ],
        }
    }
}

/// Values of a 4-axis symbol over a box of the [`Lattice4`].
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol4 {
    pub pgrid: PhaseGrid,
    region: Region4,
    values: Vec<C64>,
}

impl Symbol4 {
    pub fn zeros(pgrid: PhaseGrid, region: Region4) -> Self {
        let len = region.len();
        Self {
            pgrid,
            region,
            values: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn new(pgrid: PhaseGrid, region: Region4, values: Vec<C64>) -> Result<Self> {
        if values.len() != region.len() {
            return Err(Error::Shape(format!(
                "symbol has {} entries, region holds {}",
                values.len(),
                region.len()
            )));
        }
        check_finite(&values, "symbol")?;
        Ok(Self {
            pgrid,
            region,
            values,
        })
    }

    pub fn region(&self) -> &Region4 {
        &self.region
    }

    pub fn lattice(&self) -> Lattice4 {
        self.pgrid.lattice4()
    }

    pub fn is_full(&self) -> bool {
        self.region == self.lattice().full()
    }

    fn offset(&self, idx: [usize; 4]) -> usize {
        let r = &self.region.ranges;
        let mut o = 0;
        for a in 0..4 {
            o = o * r[a].len() + (idx[a] - r[a].start);
        }
        o
    }

    /// Value at absolute lattice indices; panics outside the stored region.
    pub fn get(&self, idx: [usize; 4]) -> C64 {
        assert!(self.region.contains(idx), "index {idx:?} outside stored region");
        self.values[self.offset(idx)]
    }

    /// Value at absolute indices, zero outside the stored region.
    pub fn get_or_zero(&self, idx: [usize; 4]) -> C64 {
        if self.region.contains(idx) {
            self.values[self.offset(idx)]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, idx: [usize; 4], v: C64) {
        let o = self.offset(idx);
        self.values[o] = v;
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    /// Absolute indices of every stored entry, in storage order.
    pub fn indices(&self) -> impl Iterator<Item = [usize; 4]> + '_ {
        let r = self.region.ranges.clone();
        r[0].clone().flat_map(move |a| {
            let r = r.clone();
            r[1].clone().flat_map(move |b| {
                let r = r.clone();
                r[2].clone()
                    .flat_map(move |c| r[3].clone().map(move |d| [a, b, c, d]))
            })
        })
    }

    /// Copy restricted to `region`, which must lie inside the stored one.
    pub fn crop(&self, region: &Region4) -> Result<Symbol4> {
        for a in 0..4 {
            let (o, i) = (&self.region.ranges[a], &region.ranges[a]);
            if i.start < o.start || i.end > o.end {
                return Err(Error::Shape("crop region exceeds stored region".into()));
            }
        }
        let mut out = Symbol4::zeros(self.pgrid, region.clone());
        for idx in out.indices().collect::<Vec<_>>() {
            out.set(idx, self.get(idx));
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
