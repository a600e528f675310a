//! Monte Carlo estimates of the Wigner spectrum `E W(u)` and of the
//! covariance of `W0 = W - E W` over a subset of phase points.
//!
//! Paths are processed in fixed chunks of [`CHUNK`] consecutive indices and
//! the chunk accumulators are merged in index order, so results do not depend
//! on the thread count. All sums are compensated.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::analysis::{exact_wigner_covariance, expected_wigner, Resolution};
use crate::error::{param, Result};
use crate::gspmodel::{PathSampler, ProcessModel, ShiftModel};
use crate::numgrid::{Grid1D, Kernel, PhaseField, PhaseGrid, Signal};
use crate::weyl::resolve_rows;
use crate::wigner::wigner;

/// Paths per work item.
pub const CHUNK: usize = 64;

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Compensated) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct CSum {
    re: Compensated,
    im: Compensated,
}

impl CSum {
    fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    fn merge(&mut self, o: &CSum) {
        self.re.merge(&o.re);
        self.im.merge(&o.im);
    }

    fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Running first and second moments of Wigner fields.
#[derive(Debug, Clone)]
pub struct MomentAccumulator {
    pub pgrid: PhaseGrid,
    pub count: usize,
    pub seed: Option<u64>,
    sum: Vec<CSum>,
    sum_sq: Vec<Compensated>,
    subset: Vec<(usize, usize)>,
    /// Known mean at the subset points, if any.
    center: Option<Vec<C64>>,
    pair: Vec<CSum>,
}

impl MomentAccumulator {
    pub fn new(pgrid: PhaseGrid, subset: Vec<(usize, usize)>, center: Option<Vec<C64>>) -> Result<Self> {
        if subset
            .iter()
            .any(|&(s, k)| s >= pgrid.s_count() || k >= pgrid.xi_count())
        {
            return param("subset point outside the phase lattice");
        }
        if let Some(c) = &center {
            if c.len() != subset.len() {
                return param("known mean does not match the subset");
            }
        }
        let p = pgrid.point_count();
        let q = subset.len();
        Ok(Self {
            pgrid,
            count: 0,
            seed: None,
            sum: vec![CSum::default(); p],
            sum_sq: vec![Compensated::default(); p],
            subset,
            center,
            pair: vec![CSum::default(); q * q],
        })
    }

    pub fn subset(&self) -> &[(usize, usize)] {
        &self.subset
    }

    pub fn add(&mut self, w: &PhaseField) {
        self.count += 1;
        for ((s, q), v) in self.sum.iter_mut().zip(self.sum_sq.iter_mut()).zip(w.values()) {
            s.add(*v);
            q.add(v.norm_sqr());
        }
        let vals: Vec<C64> = self
            .subset
            .iter()
            .enumerate()
            .map(|(i, &(s, k))| {
                let c = self.center.as_ref().map_or(C64::new(0.0, 0.0), |c| c[i]);
                w.get(s, k) - c
            })
            .collect();
        let q = vals.len();
        for i in 0..q {
            for j in 0..q {
                self.pair[i * q + j].add(vals[i] * vals[j].conj());
            }
        }
    }

    /// Adds the samples of `other`; equal to accumulating them here.
    pub fn merge(&mut self, other: &MomentAccumulator) {
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            a.merge(b);
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            a.merge(b);
        }
        for (a, b) in self.pair.iter_mut().zip(&other.pair) {
            a.merge(b);
        }
    }

    pub fn mean(&self) -> PhaseField {
        let m = self.count.max(1) as f64;
        let values = self.sum.iter().map(|s| s.value() / m).collect();
        PhaseField::new(self.pgrid, values).expect("accumulator shape follows the grid")
    }

    /// Standard error of the mean at every point (real part).
    pub fn stderr(&self) -> PhaseField {
        let m = self.count as f64;
        let values = self
            .sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, q)| {
                if self.count < 2 {
                    return C64::new(0.0, 0.0);
                }
                let mean = s.value() / m;
                let var = ((q.value() - m * mean.norm_sqr()) / (m - 1.0)).max(0.0);
                C64::new((var / m).sqrt(), 0.0)
            })
            .collect();
        PhaseField::new(self.pgrid, values).expect("accumulator shape follows the grid")
    }

    /// Empirical covariance over the subset: centred on the known mean when
    /// one was given, otherwise on the sample mean.
    pub fn covariance(&self) -> DMatrix<C64> {
        let q = self.subset.len();
        let m = self.count as f64;
        if self.center.is_some() {
            return DMatrix::from_fn(q, q, |i, j| self.pair[i * q + j].value() / m);
        }
        let mean: Vec<C64> = self
            .subset
            .iter()
            .map(|&(s, k)| self.sum[s * self.pgrid.xi_count() + k].value() / m)
            .collect();
        DMatrix::from_fn(q, q, |i, j| {
            (self.pair[i * q + j].value() - mean[i] * mean[j].conj() * m) / (m - 1.0)
        })
    }
}

/// Something that yields path `i` of a run with a given seed.
pub trait PathSource: Sync {
    fn grid(&self) -> Grid1D;
    fn path(&self, seed: u64, index: u64) -> Signal;
}

impl PathSource for PathSampler {
    fn grid(&self) -> Grid1D {
        self.grid()
    }

    fn path(&self, seed: u64, index: u64) -> Signal {
        PathSampler::path(self, seed, index)
    }
}

impl PathSource for ShiftModel {
    fn grid(&self) -> Grid1D {
        self.template.grid
    }

    fn path(&self, seed: u64, index: u64) -> Signal {
        ShiftModel::path(self, seed, index)
    }
}

fn field_of(u: &Signal, resolution: Resolution) -> PhaseField {
    let w = wigner(u);
    match resolution {
        Resolution::Lattice => w,
        Resolution::Resolved => resolve_rows(&w),
    }
}

/// Accumulates `count` paths of `source`.
pub fn accumulate(
    source: &dyn PathSource,
    count: usize,
    seed: u64,
    resolution: Resolution,
    subset: Vec<(usize, usize)>,
    center: Option<Vec<C64>>,
) -> Result<MomentAccumulator> {
    let pgrid = PhaseGrid::new(source.grid());
    let empty = MomentAccumulator::new(pgrid, subset, center)?;
    let chunks: Vec<MomentAccumulator> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = empty.clone();
            for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                acc.add(&field_of(&source.path(seed, i as u64), resolution));
            }
            acc
        })
        .collect();
    let mut total = empty;
    for c in &chunks {
        total.merge(c);
    }
    total.seed = Some(seed);
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    pub mean: PhaseField,
    pub stderr: PhaseField,
    pub count: usize,
    pub seed: u64,
}

pub fn estimate_wigner_spectrum(
    model: &ProcessModel,
    count: usize,
    seed: u64,
    resolution: Resolution,
) -> Result<SpectrumEstimate> {
    if count < 2 {
        return param("at least two paths are needed");
    }
    let sampler = PathSampler::new(model)?;
    spectrum_from(&sampler, count, seed, resolution)
}

pub fn estimate_shift_spectrum(
    model: &ShiftModel,
    count: usize,
    seed: u64,
    resolution: Resolution,
) -> Result<SpectrumEstimate> {
    if count < 2 {
        return param("at least two paths are needed");
    }
    spectrum_from(model, count, seed, resolution)
}

fn spectrum_from(
    source: &dyn PathSource,
    count: usize,
    seed: u64,
    resolution: Resolution,
) -> Result<SpectrumEstimate> {
    let acc = accumulate(source, count, seed, resolution, Vec::new(), None)?;
    Ok(SpectrumEstimate {
        mean: acc.mean(),
        stderr: acc.stderr(),
        count,
        seed,
    })
}

/// Centred 4 x 4 block of `(s, k)` points.
pub fn default_subset(pgrid: &PhaseGrid) -> Vec<(usize, usize)> {
    let sc = pgrid.n() - 1;
    let kc = pgrid.n() / 2;
    let mut out = Vec::with_capacity(16);
    for s in sc.saturating_sub(2)..(sc + 2).min(pgrid.s_count()) {
        for k in kc.saturating_sub(2)..(kc + 2).min(pgrid.xi_count()) {
            out.push((s, k));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub subset: Vec<(usize, usize)>,
    pub matrix: DMatrix<C64>,
    /// Whether the exact mean was used for centring.
    pub known_mean: bool,
    pub count: usize,
    pub seed: u64,
}

/// Empirical `Cov(W0[p], W0[q])` over `subset`, centred on the exact mean
/// `(2 pi)^{-1/2} sigma_u` of the model.
pub fn estimate_wigner_covariance(
    model: &ProcessModel,
    count: usize,
    seed: u64,
    subset: &[(usize, usize)],
    resolution: Resolution,
) -> Result<CovarianceEstimate> {
    if count < 2 {
        return param("at least two paths are needed");
    }
    if subset.is_empty() {
        return param("empty phase-point subset");
    }
    let mean = expected_wigner(&model.kernel, resolution)?;
    let pg = mean.pgrid;
    if subset.iter().any(|&(s, k)| s >= pg.s_count() || k >= pg.xi_count()) {
        return param("subset point outside the phase lattice");
    }
    let center = subset.iter().map(|&(s, k)| mean.get(s, k)).collect();
    let sampler = PathSampler::new(model)?;
    let acc = accumulate(&sampler, count, seed, resolution, subset.to_vec(), Some(center))?;
    Ok(CovarianceEstimate {
        subset: subset.to_vec(),
        matrix: acc.covariance(),
        known_mean: true,
        count,
        seed,
    })
}

/// Exact `Cov(W0[p], W0[q])` restricted to `subset`.
pub fn exact_subset_covariance(
    k: &Kernel,
    subset: &[(usize, usize)],
    resolution: Resolution,
) -> Result<DMatrix<C64>> {
    let t = exact_wigner_covariance(k)?;
    let rows = t.pgrid.s_count() as i64;
    let taps: &[(i64, f64)] = match resolution {
        Resolution::Lattice => &[(0, 1.0)],
        Resolution::Resolved => &[(-1, 0.25), (0, 0.5), (1, 0.25)],
    };
    let q = subset.len();
    Ok(DMatrix::from_fn(q, q, |i, j| {
        let ((s, k1), (s2, k2)) = (subset[i], subset[j]);
        let mut acc = C64::new(0.0, 0.0);
        for &(d, w) in taps {
            for &(d2, w2) in taps {
                let (r, r2) = (s as i64 + d, s2 as i64 + d2);
                if r < 0 || r2 < 0 || r >= rows || r2 >= rows {
                    continue;
                }
                acc += t.get(r as usize, k1, r2 as usize, k2) * (w * w2);
            }
        }
        acc
    }))
}

fn rel_error(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub count: usize,
    /// Relative L2 error of the spectrum estimate.
    pub spectrum_error: f64,
    /// Relative Frobenius error of the covariance estimate on the default
    /// subset.
    pub covariance_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Both errors decrease along the list of sample counts.
    pub monotone: bool,
}

pub fn convergence_report(
    model: &ProcessModel,
    counts: &[usize],
    seed: u64,
    resolution: Resolution,
) -> Result<ConvergenceReport> {
    let exact_mean = expected_wigner(&model.kernel, resolution)?;
    let subset = default_subset(&exact_mean.pgrid);
    let exact_cov = exact_subset_covariance(&model.kernel, &subset, resolution)?;
    let mut rows = Vec::with_capacity(counts.len());
    for &m in counts {
        let est = estimate_wigner_spectrum(model, m, seed, resolution)?;
        let num: f64 = est
            .mean
            .values()
            .iter()
            .zip(exact_mean.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let spectrum_error = rel_error(num.sqrt(), exact_mean.l2());
        let cov = estimate_wigner_covariance(model, m, seed, &subset, resolution)?;
        let covariance_error = rel_error((&cov.matrix - &exact_cov).norm(), exact_cov.norm());
        rows.push(ConvergenceRow {
            count: m,
            spectrum_error,
            covariance_error,
        });
    }
    let monotone = rows.windows(2).all(|w| {
        w[1].spectrum_error <= w[0].spectrum_error && w[1].covariance_error <= w[0].covariance_error
    });
    Ok(ConvergenceReport { rows, monotone })
}
