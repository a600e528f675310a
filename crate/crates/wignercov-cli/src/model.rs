//! Grid and process flags shared by several commands, and the run manifest.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use wignercov::{Grid1D, PhaseGrid, ProcessModel};

use crate::{io, CliError};

pub const CONVENTION: &str = "halfgrid-v1";

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Number of grid points, even [default: 16]
    #[arg(long)]
    pub n: Option<usize>,
    /// Grid spacing [default: 0.5]
    #[arg(long)]
    pub dx: Option<f64>,
    /// First grid point; defaults to a grid centred on 0
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
}

impl GridArgs {
    pub fn grid(&self) -> Result<Grid1D, CliError> {
        self.grid_or(16, 0.5)
    }

    /// Grid with other defaults for unset `--n` and `--dx`.
    pub fn grid_or(&self, n: usize, dx: f64) -> Result<Grid1D, CliError> {
        let (n, dx) = (self.n.unwrap_or(n), self.dx.unwrap_or(dx));
        let x0 = self.x0.unwrap_or(-(n as f64) * dx / 2.0);
        Ok(Grid1D::new(n, dx, x0)?)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    WhiteNoise,
    Brownian,
    Stationary,
    FrequencyStationary,
    Custom,
}

#[derive(Args, Debug, Clone)]
pub struct ProcessArgs {
    #[arg(long, value_enum)]
    pub process: Option<Process>,
    /// White-noise power p
    #[arg(long)]
    pub power: Option<f64>,
    /// Spectral density table with columns xi,mu
    #[arg(long)]
    pub density: Option<PathBuf>,
    /// Covariance kernel file (custom process); sets the grid
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
}

impl ProcessArgs {
    pub fn model(&self) -> Result<ProcessModel, CliError> {
        let density = |what: &str| -> Result<_, CliError> {
            let p = self
                .density
                .as_deref()
                .ok_or_else(|| CliError::Usage(format!("--process {what} needs --density")))?;
            io::read_density(p)
        };
        let process = self
            .process
            .ok_or_else(|| CliError::Usage("--process is required".into()))?;
        Ok(match process {
            Process::WhiteNoise => {
                let p = self
                    .power
                    .ok_or_else(|| CliError::Usage("--process white-noise needs --power".into()))?;
                ProcessModel::white_noise(self.grid.grid()?, p)?
            }
            Process::Brownian => ProcessModel::brownian(self.grid.grid()?),
            Process::Stationary => ProcessModel::stationary(self.grid.grid()?, density("stationary")?)?,
            Process::FrequencyStationary => {
                ProcessModel::frequency_stationary(self.grid.grid()?, density("frequency-stationary")?)?
            }
            Process::Custom => {
                let p = self
                    .kernel
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("--process custom needs --kernel".into()))?;
                let k = io::read_kernel(p)?;
                ProcessModel::custom(k).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
            }
        })
    }

    pub fn descriptor(&self) -> Value {
        let name = self.process.and_then(|p| p.to_possible_value()).map(|v| v.get_name().to_string());
        let mut d = json!({ "process": name });
        if let Some(p) = self.power {
            d["power"] = json!(p);
        }
        if let Some(p) = &self.density {
            d["density"] = json!(p.display().to_string());
        }
        if let Some(p) = &self.kernel {
            d["kernel"] = json!(p.display().to_string());
        }
        d
    }
}

#[derive(Serialize)]
pub struct GridInfo {
    pub n: usize,
    pub dx: f64,
    pub x0: f64,
    pub nxi: usize,
    pub dxi: f64,
}

impl From<Grid1D> for GridInfo {
    fn from(g: Grid1D) -> Self {
        let pg = PhaseGrid::new(g);
        Self {
            n: g.n(),
            dx: g.dx(),
            x0: g.x0(),
            nxi: pg.xi_count(),
            dxi: pg.dxi(),
        }
    }
}

#[derive(Serialize)]
pub struct RunManifest {
    pub convention: &'static str,
    pub grid: GridInfo,
    pub model: Value,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub command_line: Vec<String>,
    pub version: &'static str,
}

impl RunManifest {
    pub fn new(grid: Grid1D, model: Value) -> Self {
        Self {
            convention: CONVENTION,
            grid: grid.into(),
            model,
            seed: None,
            samples: None,
            command_line: std::env::args().collect(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        io::write_text(&dir.join("manifest.json"), &(text + "\n"))
    }
}
