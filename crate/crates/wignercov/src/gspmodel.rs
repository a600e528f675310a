//! Covariance kernels of Gaussian symmetric processes and path samplers.
//!
//! A Gaussian symmetric process has zero mean and zero pseudo-covariance, so
//! its law is fixed by the kernel `K[a, b] = E[u(x_a) conj(u(x_b))]`. Paths
//! are drawn as `u = L z` with `K = L L*` and circular normal `z`. The real
//! pair construction of the same law is not implemented separately; both
//! give identical second moments.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::numgrid::{Grid1D, Kernel, Signal};

/// Non-negative spectral density `mu`.
#[derive(Clone)]
pub enum SpectralDensity {
    /// `mu = p`: white noise.
    Constant(f64),
    /// `mu(xi) = amplitude exp(-xi^2 / (2 width^2))`.
    Gaussian { amplitude: f64, width: f64 },
    /// Samples on a frequency grid, linear in between, zero outside.
    Table { grid: Grid1D, values: Vec<f64> },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(p) => write!(f, "Constant({p})"),
            Self::Gaussian { amplitude, width } => {
                write!(f, "Gaussian {{ amplitude: {amplitude}, width: {width} }}")
            }
            Self::Table { grid, .. } => write!(f, "Table({grid:?})"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl SpectralDensity {
    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && width > 0.0) {
            return param("gaussian density needs amplitude >= 0 and width > 0");
        }
        Ok(Self::Gaussian { amplitude, width })
    }

    pub fn table(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Shape("table length differs from its grid".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return param(format!("negative spectral density sample {v}"));
        }
        Ok(Self::Table { grid, values })
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            Self::Constant(p) => *p,
            Self::Gaussian { amplitude, width } => amplitude * (-xi * xi / (2.0 * width * width)).exp(),
            Self::Table { grid, values } => {
                let u = (xi - grid.x0()) / grid.dx();
                if u < 0.0 || u > (grid.n() - 1) as f64 {
                    return 0.0;
                }
                let i = (u.floor() as usize).min(grid.n().saturating_sub(2));
                if grid.n() == 1 {
                    return values[0];
                }
                let t = u - i as f64;
                values[i] * (1.0 - t) + values[i + 1] * t
            }
            Self::Custom(f) => f(xi),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Constant(p) if !(*p >= 0.0) => param("constant density must be non-negative"),
            Self::Gaussian { amplitude, width } if !(*amplitude >= 0.0 && *width > 0.0) => {
                param("gaussian density needs amplitude >= 0 and width > 0")
            }
            _ => Ok(()),
        }
    }

    /// `h(x) = (2 pi)^{-1} int mu(xi) exp(i x xi) dxi` over the band `|xi| < pi/dx`.
    ///
    /// Closed forms for the constant and Gaussian cases; otherwise a
    /// midpoint rule with eight points per grid frequency step.
    pub fn correlation(&self, x: f64, dx: f64, n: usize) -> Result<f64> {
        self.validate()?;
        let band = PI / dx;
        match self {
            Self::Constant(p) => Ok(if x.abs() < 1e-12 * dx {
                p / dx
            } else {
                p * (band * x).sin() / (PI * x)
            }),
            Self::Gaussian { amplitude, width } => Ok(amplitude * width / (2.0 * PI).sqrt()
                * (-width * width * x * x / 2.0).exp()),
            _ => {
                let steps = 8 * n.max(64);
                let h = 2.0 * band / steps as f64;
                let mut acc = 0.0;
                for i in 0..steps {
                    let xi = -band + (i as f64 + 0.5) * h;
                    let m = self.eval(xi);
                    if m < 0.0 {
                        return param(format!("negative spectral density {m} at {xi}"));
                    }
                    acc += m * (x * xi).cos();
                }
                Ok(acc * h / (2.0 * PI))
            }
        }
    }
}

/// `(p / dx) I`.
pub fn white_noise_kernel(grid: &Grid1D, p: f64) -> Result<Kernel> {
    if !(p > 0.0) {
        return param("white noise power must be positive");
    }
    let d = C64::new(p / grid.dx(), 0.0);
    Ok(Kernel::from_fn(*grid, |a, b| if a == b { d } else { C64::new(0.0, 0.0) }))
}

/// `min(x, y)` on the positive quadrant, zero elsewhere.
pub fn brownian_kernel(grid: &Grid1D) -> Kernel {
    Kernel::from_fn(*grid, |a, b| {
        let (x, y) = (grid.point(a), grid.point(b));
        C64::new(if x >= 0.0 && y >= 0.0 { x.min(y) } else { 0.0 }, 0.0)
    })
}

/// `K[a, b] = h(x_a - x_b)`.
pub fn stationary_kernel(grid: &Grid1D, mu: &SpectralDensity) -> Result<Kernel> {
    let n = grid.n();
    let lags = (0..n)
        .map(|m| mu.correlation(m as f64 * grid.dx(), grid.dx(), n))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Kernel::from_fn(*grid, |a, b| C64::new(lags[a.abs_diff(b)], 0.0)))
}

/// `diag(mu_hat(-x_a)) / dx`: the kernel whose Fourier transform is
/// stationary with density `mu_hat`.
pub fn frequency_stationary_kernel(grid: &Grid1D, mu_hat: &SpectralDensity) -> Result<Kernel> {
    mu_hat.validate()?;
    let mut diag = Vec::with_capacity(grid.n());
    for a in 0..grid.n() {
        let v = mu_hat.eval(-grid.point(a));
        if !(v >= 0.0) {
            return param(format!("negative spectral density {v}"));
        }
        diag.push(v / grid.dx());
    }
    Ok(Kernel::from_fn(*grid, |a, b| {
        C64::new(if a == b { diag[a] } else { 0.0 }, 0.0)
    }))
}

#[derive(Debug, Clone)]
pub enum ProcessKind {
    WhiteNoise { power: f64 },
    Brownian,
    Stationary(SpectralDensity),
    FrequencyStationary(SpectralDensity),
    Custom,
}

/// Zero-mean Gaussian symmetric process on a grid.
#[derive(Debug, Clone)]
pub struct ProcessModel {
    pub kind: ProcessKind,
    pub grid: Grid1D,
    pub kernel: Kernel,
}

impl ProcessModel {
    pub fn white_noise(grid: Grid1D, power: f64) -> Result<Self> {
        Ok(Self {
            kind: ProcessKind::WhiteNoise { power },
            kernel: white_noise_kernel(&grid, power)?,
            grid,
        })
    }

    pub fn brownian(grid: Grid1D) -> Self {
        Self {
            kind: ProcessKind::Brownian,
            kernel: brownian_kernel(&grid),
            grid,
        }
    }

    pub fn stationary(grid: Grid1D, mu: SpectralDensity) -> Result<Self> {
        Ok(Self {
            kernel: stationary_kernel(&grid, &mu)?,
            kind: ProcessKind::Stationary(mu),
            grid,
        })
    }

    pub fn frequency_stationary(grid: Grid1D, mu_hat: SpectralDensity) -> Result<Self> {
        Ok(Self {
            kernel: frequency_stationary_kernel(&grid, &mu_hat)?,
            kind: ProcessKind::FrequencyStationary(mu_hat),
            grid,
        })
    }

    /// Any Hermitian positive semidefinite kernel.
    pub fn custom(kernel: Kernel) -> Result<Self> {
        kernel.validate_covariance()?;
        Ok(Self {
            kind: ProcessKind::Custom,
            grid: kernel.grid,
            kernel,
        })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ProcessKind::WhiteNoise { .. } => "white-noise",
            ProcessKind::Brownian => "brownian",
            ProcessKind::Stationary(_) => "stationary",
            ProcessKind::FrequencyStationary(_) => "frequency-stationary",
            ProcessKind::Custom => "custom",
        }
    }
}

/// `K = L L*` from a clipped eigen-decomposition.
#[derive(Debug, Clone)]
pub struct PsdFactor {
    pub l: DMatrix<C64>,
    /// Eigenvalues raised to zero.
    pub clipped: usize,
    /// Sum of their magnitudes.
    pub clip_mass: f64,
    pub most_negative: f64,
}

/// Eigenvalues in `[-1e-10 lambda_max, 0)` are clipped; anything lower is a
/// model error.
pub fn psd_factor(k: &Kernel) -> Result<PsdFactor> {
    let m = k.to_matrix();
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let tol = 1e-10 * lmax;
    let mut clipped = 0;
    let mut clip_mass = 0.0;
    let mut most_negative: f64 = 0.0;
    let mut roots = Vec::with_capacity(k.n());
    for &l in eig.eigenvalues.iter() {
        most_negative = most_negative.min(l);
        if l < 0.0 {
            clipped += 1;
            clip_mass += -l;
            roots.push(0.0);
        } else {
            roots.push(l.sqrt());
        }
    }
    if most_negative < -tol {
        let bad = eig.eigenvalues.iter().filter(|&&l| l < -tol).count();
        return Err(Error::Model {
            reason: "covariance kernel is not positive semidefinite".into(),
            clipped: bad,
            most_negative,
        });
    }
    let scale = DVector::from_iterator(roots.len(), roots.into_iter().map(|r| C64::new(r, 0.0)));
    let mut l = eig.eigenvectors;
    for (mut col, s) in l.column_iter_mut().zip(scale.iter()) {
        col *= *s;
    }
    Ok(PsdFactor {
        l,
        clipped,
        clip_mass,
        most_negative,
    })
}

/// The generator behind path `index` of a run seeded with `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn circular_normal(rng: &mut ChaCha20Rng) -> C64 {
    let g1: f64 = StandardNormal.sample(rng);
    let g2: f64 = StandardNormal.sample(rng);
    C64::new(g1, g2) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws paths of a fixed model; path `i` depends only on `(seed, i)`.
#[derive(Debug, Clone)]
pub struct PathSampler {
    grid: Grid1D,
    factor: PsdFactor,
}

impl PathSampler {
    pub fn new(model: &ProcessModel) -> Result<Self> {
        Ok(Self {
            grid: model.grid,
            factor: psd_factor(&model.kernel)?,
        })
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn factor(&self) -> &PsdFactor {
        &self.factor
    }

    pub fn path(&self, seed: u64, index: u64) -> Signal {
        let mut rng = path_rng(seed, index);
        let n = self.grid.n();
        let z = DVector::from_iterator(n, (0..n).map(|_| circular_normal(&mut rng)));
        let u = &self.factor.l * z;
        Signal {
            grid: self.grid,
            values: u.iter().copied().collect(),
        }
    }
}

pub fn sample_paths(model: &ProcessModel, count: usize, seed: u64) -> Result<Vec<Signal>> {
    if count == 0 {
        return param("path count must be at least 1");
    }
    let sampler = PathSampler::new(model)?;
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| sampler.path(seed, i))
        .collect())
}

/// `u(x) = exp(i eta x) f(x - y)` with `(y, eta)` centred Gaussian of
/// variances `(a, b)`.
#[derive(Debug, Clone)]
pub struct ShiftModel {
    pub template: Signal,
    pub a: f64,
    pub b: f64,
}

/// Smallest variance used for the shift law.
pub const MIN_SHIFT_VARIANCE: f64 = 1e-8;

impl ShiftModel {
    pub fn new(template: Signal, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return param("shift variances must be positive");
        }
        if template.norm() == 0.0 {
            return param("shift template must be nonzero");
        }
        Ok(Self { template, a, b })
    }

    /// Template at an arbitrary position, linear between samples, zero outside.
    pub fn template_at(&self, x: f64) -> C64 {
        let g = self.template.grid;
        let u = (x - g.x0()) / g.dx();
        if u < -1.0 || u > g.n() as f64 {
            return C64::new(0.0, 0.0);
        }
        let i = u.floor();
        let t = u - i;
        let at = |j: f64| {
            if j < 0.0 || j >= g.n() as f64 {
                C64::new(0.0, 0.0)
            } else {
                self.template.values[j as usize]
            }
        };
        at(i) * (1.0 - t) + at(i + 1.0) * t
    }

    pub fn path(&self, seed: u64, index: u64) -> Signal {
        let mut rng = path_rng(seed, index);
        let g1: f64 = StandardNormal.sample(&mut rng);
        let g2: f64 = StandardNormal.sample(&mut rng);
        let y = self.a.max(MIN_SHIFT_VARIANCE).sqrt() * g1;
        let eta = self.b.max(MIN_SHIFT_VARIANCE).sqrt() * g2;
        let g = self.template.grid;
        Signal::from_fn(g, |x| C64::from_polar(1.0, eta * x) * self.template_at(x - y))
    }
}

pub fn sample_shift_process(model: &ShiftModel, count: usize, seed: u64) -> Vec<Signal> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| model.path(seed, i))
        .collect()
}
