//! CSV readers and writers. Every real number is written with 17
//! significant digits; complex values are two columns.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use wignercov::{CovTensor4, Grid1D, Kernel, PhaseField, PhaseGrid, Signal, SpectralDensity, Symbol4, C64};

use crate::CliError;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

fn finish(mut w: csv::Writer<BufWriter<File>>) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

fn row<const N: usize>(w: &mut csv::Writer<BufWriter<File>>, fields: [String; N]) -> Result<(), CliError> {
    w.write_record(&fields).map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_signal(path: &Path, f: &Signal) -> Result<(), CliError> {
    let mut w = writer(path)?;
    row(&mut w, ["x", "re", "im"].map(String::from))?;
    for (a, v) in f.values.iter().enumerate() {
        row(&mut w, [num(f.grid.point(a)), num(v.re), num(v.im)])?;
    }
    finish(w)
}

pub fn write_kernel(path: &Path, k: &Kernel) -> Result<(), CliError> {
    let mut w = writer(path)?;
    row(&mut w, ["xa", "xb", "re", "im"].map(String::from))?;
    let g = k.grid;
    for a in 0..g.n() {
        for b in 0..g.n() {
            let v = k.get(a, b);
            row(&mut w, [num(g.point(a)), num(g.point(b)), num(v.re), num(v.im)])?;
        }
    }
    finish(w)
}

pub fn write_field(path: &Path, f: &PhaseField) -> Result<(), CliError> {
    let mut w = writer(path)?;
    row(&mut w, ["x", "xi", "re", "im"].map(String::from))?;
    let pg = f.pgrid;
    for s in 0..pg.s_count() {
        for k in 0..pg.xi_count() {
            let v = f.get(s, k);
            row(&mut w, [num(pg.symbol_x(s)), num(pg.xi(k)), num(v.re), num(v.im)])?;
        }
    }
    finish(w)
}

/// Tensor indexed by phase points `(s, k, s', k')`.
pub fn write_tensor(path: &Path, t: &CovTensor4) -> Result<(), CliError> {
    let mut w = writer(path)?;
    row(&mut w, ["a1", "a2", "a3", "a4", "re", "im"].map(String::from))?;
    let pg = t.pgrid;
    for s in 0..pg.s_count() {
        for k in 0..pg.xi_count() {
            for s2 in 0..pg.s_count() {
                for k2 in 0..pg.xi_count() {
                    let v = t.get(s, k, s2, k2);
                    row(
                        &mut w,
                        [s.to_string(), k.to_string(), s2.to_string(), k2.to_string(), num(v.re), num(v.im)],
                    )?;
                }
            }
        }
    }
    finish(w)
}

/// 4-axis symbol by lattice index `(x1, x2, xi1, xi2)`.
pub fn write_symbol4(path: &Path, sym: &Symbol4) -> Result<(), CliError> {
    let mut w = writer(path)?;
    row(&mut w, ["a1", "a2", "a3", "a4", "re", "im"].map(String::from))?;
    for [i, j, k, l] in sym.indices() {
        let v = sym.get([i, j, k, l]);
        row(&mut w, [i.to_string(), j.to_string(), k.to_string(), l.to_string(), num(v.re), num(v.im)])?;
    }
    finish(w)
}

/// Subset covariance matrix indexed by phase points.
pub fn write_subset_matrix(
    path: &Path,
    subset: &[(usize, usize)],
    entry: impl Fn(usize, usize) -> C64,
) -> Result<(), CliError> {
    let mut w = writer(path)?;
    row(&mut w, ["a1", "a2", "a3", "a4", "re", "im"].map(String::from))?;
    for (i, &(s, k)) in subset.iter().enumerate() {
        for (j, &(s2, k2)) in subset.iter().enumerate() {
            let v = entry(i, j);
            row(
                &mut w,
                [s.to_string(), k.to_string(), s2.to_string(), k2.to_string(), num(v.re), num(v.im)],
            )?;
        }
    }
    finish(w)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let h = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let names: Vec<&str> = h.iter().map(str::trim).collect();
    if names != header {
        return Err(bad(format!("expected header {}", header.join(","))));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != header.len() {
            return Err(bad(format!("line {} has {} fields", out.len() + 2, rec.len())));
        }
        let vals = rec
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("line {}: {e}", out.len() + 2)))?;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(bad(format!("line {}: non-finite value", out.len() + 2)));
        }
        out.push(vals);
    }
    if out.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(out)
}

/// Regular grid through `xs`, which must be strictly increasing with a
/// constant step.
fn regular_grid(xs: &[f64], what: &str, even: bool) -> Result<Grid1D, CliError> {
    let n = xs.len();
    if n < 2 {
        return Err(CliError::Input(format!("{what}: at least two points are needed")));
    }
    let dx = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    for (i, x) in xs.iter().enumerate() {
        if (x - (xs[0] + i as f64 * dx)).abs() > 1e-9 * dx.abs().max(1.0) {
            return Err(CliError::Input(format!("{what}: points are not equally spaced")));
        }
    }
    let g = if even {
        Grid1D::new(n, dx, xs[0])
    } else {
        Grid1D::any_size(n, dx, xs[0])
    };
    g.map_err(|e| CliError::Input(format!("{what}: {e}")))
}

pub fn read_signal(path: &Path) -> Result<Signal, CliError> {
    let rows = read_rows(path, &["x", "re", "im"])?;
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let g = regular_grid(&xs, &path.display().to_string(), true)?;
    let values = rows.iter().map(|r| C64::new(r[1], r[2])).collect();
    Signal::new(g, values).map_err(|e| CliError::Input(e.to_string()))
}

pub fn read_kernel(path: &Path) -> Result<Kernel, CliError> {
    let rows = read_rows(path, &["xa", "xb", "re", "im"])?;
    let n = (rows.len() as f64).sqrt().round() as usize;
    let what = path.display().to_string();
    if n * n != rows.len() {
        return Err(CliError::Input(format!("{what}: row count is not a square")));
    }
    let xs: Vec<f64> = (0..n).map(|b| rows[b][1]).collect();
    let g = regular_grid(&xs, &what, true)?;
    for (i, r) in rows.iter().enumerate() {
        let (a, b) = (i / n, i % n);
        let tol = 1e-9 * g.dx();
        if (r[0] - g.point(a)).abs() > tol || (r[1] - g.point(b)).abs() > tol {
            return Err(CliError::Input(format!("{what}: rows are not in xa-major grid order")));
        }
    }
    let values = rows.iter().map(|r| C64::new(r[2], r[3])).collect();
    Kernel::new(g, values).map_err(|e| CliError::Input(e.to_string()))
}

pub fn read_field(path: &Path) -> Result<PhaseField, CliError> {
    let rows = read_rows(path, &["x", "xi", "re", "im"])?;
    let what = path.display().to_string();
    // the frequency axis has n points and the position axis 2n - 1
    let n = rows.iter().take_while(|r| r[0] == rows[0][0]).count();
    if n < 2 || rows.len() != n * (2 * n - 1) {
        return Err(CliError::Input(format!("{what}: not a (2n-1) x n phase lattice")));
    }
    let xs: Vec<f64> = (0..2 * n - 1).map(|s| rows[s * n][0]).collect();
    let half = regular_grid(&xs, &what, false)?;
    let g = Grid1D::new(n, 2.0 * half.dx(), half.x0()).map_err(|e| CliError::Input(format!("{what}: {e}")))?;
    let pg = PhaseGrid::new(g);
    for (i, r) in rows.iter().enumerate() {
        let (s, k) = (i / n, i % n);
        let tol = 1e-9;
        if (r[0] - pg.symbol_x(s)).abs() > tol * g.dx() || (r[1] - pg.xi(k)).abs() > tol * pg.dxi() {
            return Err(CliError::Input(format!("{what}: line {} is off the phase lattice", i + 2)));
        }
    }
    let values = rows.iter().map(|r| C64::new(r[2], r[3])).collect();
    PhaseField::new(pg, values).map_err(|e| CliError::Input(e.to_string()))
}

/// Spectral density table `xi,mu` on an equally spaced axis.
pub fn read_density(path: &Path) -> Result<SpectralDensity, CliError> {
    let rows = read_rows(path, &["xi", "mu"])?;
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let g = regular_grid(&xs, &path.display().to_string(), false)?;
    SpectralDensity::table(g, rows.iter().map(|r| r[1]).collect())
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
