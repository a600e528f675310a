//! `wignercov`: command-line driver for the wignercov library.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 malformed or inconsistent input.

mod io;
mod model;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use wignercov::analysis::{exact_wigner_covariance, expected_wigner};
use wignercov::montecarlo::{default_subset, estimate_wigner_covariance, estimate_wigner_spectrum, exact_subset_covariance};
use wignercov::weyl::{
    apply_resolved_weyl, apply_weyl, kernel4_to_resolved_symbol4, kernel4_to_symbol4, kernel_to_resolved_symbol,
    kernel_to_symbol, resolved_symbol_to_kernel, symbol_to_kernel,
};
use wignercov::wigner::{cross_wigner, wigner};
use wignercov::{PhaseGrid, Resolution};

use model::{ProcessArgs, RunManifest};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) | CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<wignercov::Error> for CliError {
    fn from(e: wignercov::Error) -> Self {
        match e {
            wignercov::Error::Parameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "wignercov", version, about = "Wigner spectra and Weyl symbols of Gaussian symmetric processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Debug, Clone, Copy, Default)]
enum Res {
    #[default]
    Resolved,
    Lattice,
}

impl From<Res> for Resolution {
    fn from(r: Res) -> Self {
        match r {
            Res::Resolved => Resolution::Resolved,
            Res::Lattice => Resolution::Lattice,
        }
    }
}

#[derive(Args, Debug)]
struct Method {
    /// Exact propagation
    #[arg(long, conflicts_with = "mc", required_unless_present = "mc")]
    exact: bool,
    /// Monte Carlo estimate
    #[arg(long)]
    mc: bool,
    /// Number of sample paths (with --mc)
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Method {
    fn samples(&self) -> Result<usize, CliError> {
        self.samples
            .ok_or_else(|| CliError::Usage("--mc needs --samples".into()))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the covariance kernel of a process
    Kernel {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discrete (cross-)Wigner distribution of sampled signals
    Wigner {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        signal2: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Weyl quantization and symbols
    Weyl {
        #[command(subcommand)]
        op: WeylOp,
    },
    /// Expected Wigner spectrum, exact or Monte Carlo
    Spectrum {
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        method: Method,
        #[arg(long, value_enum, default_value_t)]
        resolution: Res,
        #[arg(long)]
        out: PathBuf,
    },
    /// Covariance of the zero-mean Wigner distribution and its 4-axis symbol
    Covariance {
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        method: Method,
        /// Phase-point block `s0:s1,k0:k1` (half-open index ranges)
        #[arg(long)]
        subset: Option<String>,
        /// Also write the full covariance tensor (exact only)
        #[arg(long)]
        tensor: bool,
        #[arg(long, value_enum, default_value_t)]
        resolution: Res,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run verification suites and report each check
    ///
    /// The nonneg suite defaults to a 64-point grid with spacing 0.25.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// JSON report path; printed to stdout when absent
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        process: ProcessArgs,
    },
}

#[derive(Subcommand, Debug)]
enum WeylOp {
    /// Symbol file to kernel file
    Quantize {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        resolution: Res,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kernel file to symbol file
    Dequantize {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        resolution: Res,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply the Weyl operator of a symbol to a signal
    Apply {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        signal: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        resolution: Res,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Suite {
    Identities,
    Theorem,
    Nonneg,
    All,
}

fn out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn parse_range(s: &str, len: usize, what: &str) -> Result<std::ops::Range<usize>, CliError> {
    let bad = || CliError::Usage(format!("bad {what} range '{s}' (expected a:b with a < b <= {len})"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a < b && b <= len {
        Ok(a..b)
    } else {
        Err(bad())
    }
}

fn parse_subset(text: &str, pg: &PhaseGrid) -> Result<Vec<(usize, usize)>, CliError> {
    let (s, k) = text
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("bad subset '{text}' (expected s0:s1,k0:k1)")))?;
    let s = parse_range(s, pg.s_count(), "position")?;
    let k = parse_range(k, pg.xi_count(), "frequency")?;
    Ok(s.flat_map(|s| k.clone().map(move |k| (s, k))).collect())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Kernel { process, out } => {
            let model = process.model()?;
            out_dir(&out)?;
            io::write_kernel(&out.join("kernel.csv"), &model.kernel)?;
            RunManifest::new(model.grid, process.descriptor()).write(&out)?;
        }
        Command::Wigner { signal, signal2, out } => {
            let f = io::read_signal(&signal)?;
            let w = match &signal2 {
                None => wigner(&f),
                Some(p) => cross_wigner(&f, &io::read_signal(p)?).map_err(|e| CliError::Input(e.to_string()))?,
            };
            out_dir(&out)?;
            io::write_field(&out.join("wigner.csv"), &w)?;
            let desc = json!({
                "signal": signal.display().to_string(),
                "signal2": signal2.map(|p| p.display().to_string()),
            });
            RunManifest::new(f.grid, desc).write(&out)?;
        }
        Command::Weyl { op } => weyl(op)?,
        Command::Spectrum {
            process,
            method,
            resolution,
            out,
        } => {
            let model = process.model()?;
            let res = Resolution::from(resolution);
            let mut manifest = RunManifest::new(model.grid, process.descriptor());
            manifest.model["resolution"] = json!(format!("{resolution:?}").to_lowercase());
            if method.mc {
                let m = method.samples()?;
                let est = estimate_wigner_spectrum(&model, m, method.seed, res)?;
                out_dir(&out)?;
                io::write_field(&out.join("spectrum.csv"), &est.mean)?;
                io::write_field(&out.join("stderr.csv"), &est.stderr)?;
                manifest.seed = Some(method.seed);
                manifest.samples = Some(m);
            } else {
                let e = expected_wigner(&model.kernel, res)?;
                out_dir(&out)?;
                io::write_field(&out.join("spectrum.csv"), &e)?;
            }
            manifest.write(&out)?;
        }
        Command::Covariance {
            process,
            method,
            subset,
            tensor,
            resolution,
            out,
        } => {
            let model = process.model()?;
            let res = Resolution::from(resolution);
            let pg = PhaseGrid::new(model.grid);
            let subset = subset.as_deref().map(|s| parse_subset(s, &pg)).transpose()?;
            let mut manifest = RunManifest::new(model.grid, process.descriptor());
            manifest.model["resolution"] = json!(format!("{resolution:?}").to_lowercase());
            if method.mc {
                if tensor {
                    return Err(CliError::Usage("--tensor is only available with --exact".into()));
                }
                let m = method.samples()?;
                let subset = subset.unwrap_or_else(|| default_subset(&pg));
                let est = estimate_wigner_covariance(&model, m, method.seed, &subset, res)?;
                out_dir(&out)?;
                io::write_subset_matrix(&out.join("subset.csv"), &est.subset, |i, j| est.matrix[(i, j)])?;
                manifest.seed = Some(method.seed);
                manifest.samples = Some(m);
            } else {
                let t = exact_wigner_covariance(&model.kernel)?;
                let sym = match res {
                    Resolution::Resolved => kernel4_to_resolved_symbol4(&t, &pg.lattice4().full()),
                    Resolution::Lattice => kernel4_to_symbol4(&t),
                };
                out_dir(&out)?;
                io::write_symbol4(&out.join("symbol.csv"), &sym)?;
                if tensor {
                    io::write_tensor(&out.join("tensor.csv"), &t)?;
                }
                if let Some(subset) = subset {
                    let m = exact_subset_covariance(&model.kernel, &subset, res)?;
                    io::write_subset_matrix(&out.join("subset.csv"), &subset, |i, j| m[(i, j)])?;
                }
            }
            manifest.write(&out)?;
        }
        Command::Verify { suite, report, process } => {
            let mut checks = Vec::new();
            if matches!(suite, Suite::Identities | Suite::All) {
                checks.extend(verify::identities(process.grid.grid()?)?);
            }
            if matches!(suite, Suite::Theorem | Suite::All) {
                let model = if process.process.is_none() {
                    wignercov::ProcessModel::white_noise(process.grid.grid()?, process.power.unwrap_or(1.0))?
                } else {
                    process.model()?
                };
                checks.extend(verify::theorem(&model)?);
            }
            if matches!(suite, Suite::Nonneg | Suite::All) {
                checks.extend(verify::nonneg(process.grid.grid_or(64, 0.25)?)?);
            }
            let pass = checks.iter().all(|c| c.pass);
            let rep = verify::Report {
                suite: format!("{suite:?}").to_lowercase(),
                pass,
                checks,
            };
            for c in &rep.checks {
                eprintln!(
                    "{} {}: {:.3e} {} {:e}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.comparison,
                    c.tolerance
                );
            }
            let text = serde_json::to_string_pretty(&rep).map_err(|e| CliError::Io(e.to_string()))? + "\n";
            match report {
                Some(p) => {
                    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                        out_dir(dir)?;
                        let mut manifest = RunManifest::new(process.grid.grid()?, process.descriptor());
                        manifest.model["suite"] = json!(rep.suite);
                        manifest.write(dir)?;
                    }
                    io::write_text(&p, &text)?;
                }
                None => print!("{text}"),
            }
            return Ok(pass);
        }
    }
    Ok(true)
}

fn weyl(op: WeylOp) -> Result<(), CliError> {
    match op {
        WeylOp::Quantize { symbol, resolution, out } => {
            let s = io::read_field(&symbol)?;
            let k = match resolution {
                Res::Resolved => resolved_symbol_to_kernel(&s),
                Res::Lattice => symbol_to_kernel(&s),
            };
            out_dir(&out)?;
            io::write_kernel(&out.join("kernel.csv"), &k)?;
            let desc = json!({ "symbol": symbol.display().to_string(), "resolution": format!("{resolution:?}").to_lowercase() });
            RunManifest::new(k.grid, desc).write(&out)
        }
        WeylOp::Dequantize { kernel, resolution, out } => {
            let k = io::read_kernel(&kernel)?;
            let s = match resolution {
                Res::Resolved => kernel_to_resolved_symbol(&k),
                Res::Lattice => kernel_to_symbol(&k),
            };
            out_dir(&out)?;
            io::write_field(&out.join("symbol.csv"), &s)?;
            let desc = json!({ "kernel": kernel.display().to_string(), "resolution": format!("{resolution:?}").to_lowercase() });
            RunManifest::new(k.grid, desc).write(&out)
        }
        WeylOp::Apply {
            symbol,
            signal,
            resolution,
            out,
        } => {
            let s = io::read_field(&symbol)?;
            let f = io::read_signal(&signal)?;
            let g = match resolution {
                Res::Resolved => apply_resolved_weyl(&s, &f),
                Res::Lattice => apply_weyl(&s, &f),
            }
            .map_err(|e| CliError::Input(e.to_string()))?;
            out_dir(&out)?;
            io::write_signal(&out.join("signal.csv"), &g)?;
            let desc = json!({
                "symbol": symbol.display().to_string(),
                "signal": signal.display().to_string(),
                "resolution": format!("{resolution:?}").to_lowercase(),
            });
            RunManifest::new(f.grid, desc).write(&out)
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GSP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("GSP_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = init_threads().and_then(|()| run(cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("wignercov: {e}");
            ExitCode::from(e.code())
        }
    }
}
