//! Discrete Weyl quantization on the half-grid lattice.
//!
//! Two layers are provided.
//!
//! * **Lattice** transforms ([`kernel_to_symbol`], [`symbol_to_kernel`],
//!   [`apply_weyl`], [`kernel4_to_symbol4`], ...) are exact inverses of each
//!   other and are exactly paired with [`cross_wigner`]. Because the Wigner
//!   band is half the signal band, a lattice symbol of a rough kernel
//!   alternates between even and odd rows: `(p/dx) I` maps to `2p` on even
//!   rows and `0` on odd rows.
//! * **Resolved** symbols average neighbouring rows with weights
//!   `[1/4, 1/2, 1/4]`, which removes that alternation. `(p/dx) I` maps to
//!   `p` on every row and `diag(x)/dx` to `x`. Use these to compare with
//!   continuum formulas.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::numgrid::{
    hermitian_eigenvalues, CovTensor4, Kernel, Lattice4, PhaseField, PhaseGrid, Region4, Signal,
    Symbol4,
};
use crate::spectral::{diagonal_lags, HalfGridAxis};
use crate::wigner::cross_wigner;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Half-grid transform of an `N x N` matrix on an axis with spacing `h`:
/// `out[t, q] = 2h sum_{a+b=t} M[a, b] exp(-i (a-b) h w_q)`, shape `(2N-1) x N`.
fn pair_forward(axis: &HalfGridAxis, m: &[C64]) -> Vec<C64> {
    let n = axis.len();
    let w = 2.0 * axis.h();
    let mut out = vec![ZERO; (2 * n - 1) * n];
    let mut lags = Vec::with_capacity(n);
    for t in 0..2 * n - 1 {
        let (first, count) = diagonal_lags(n, t);
        lags.clear();
        for i in 0..count {
            let j = first + 2 * i as i64;
            let a = ((t as i64 + j) / 2) as usize;
            let b = ((t as i64 - j) / 2) as usize;
            lags.push(m[a * n + b] * w);
        }
        axis.forward_into(first, &lags, &mut out[t * n..(t + 1) * n]);
    }
    out
}

fn pair_inverse(axis: &HalfGridAxis, sym: &[C64]) -> Vec<C64> {
    let n = axis.len();
    let w = 1.0 / (2.0 * axis.h());
    let mut out = vec![ZERO; n * n];
    let mut lags = vec![ZERO; n];
    for t in 0..2 * n - 1 {
        let (first, count) = diagonal_lags(n, t);
        axis.inverse_into(&sym[t * n..(t + 1) * n], first, &mut lags[..count]);
        for (i, c) in lags[..count].iter().enumerate() {
            let j = first + 2 * i as i64;
            let a = ((t as i64 + j) / 2) as usize;
            let b = ((t as i64 - j) / 2) as usize;
            out[a * n + b] = c * w;
        }
    }
    out
}

/// Lattice symbol `sigma[s, k] = 2 dx sum_{a+b=s} K[a, b] exp(-i (a-b) dx xi_k)`.
pub fn kernel_to_symbol(k: &Kernel) -> PhaseField {
    let pgrid = PhaseGrid::new(k.grid);
    let axis = HalfGridAxis::new(pgrid.n(), pgrid.dx());
    PhaseField::new(pgrid, pair_forward(&axis, k.values())).expect("shape follows the grid")
}

/// Inverse of [`kernel_to_symbol`]: exact on its range, a projection otherwise.
pub fn symbol_to_kernel(sigma: &PhaseField) -> Kernel {
    let pgrid = sigma.pgrid;
    let axis = HalfGridAxis::new(pgrid.n(), pgrid.dx());
    Kernel::new(pgrid.base().to_owned(), pair_inverse(&axis, sigma.values()))
        .expect("shape follows the grid")
}

/// Row weights of the resolving average.
const RESOLVE: [f64; 3] = [0.25, 0.5, 0.25];

/// Averages each symbol row with its neighbours, `[1/4, 1/2, 1/4]`, with zero
/// rows beyond the lattice.
pub fn resolve_rows(sigma: &PhaseField) -> PhaseField {
    let pg = sigma.pgrid;
    let rows = pg.s_count();
    let mut out = PhaseField::zeros(pg);
    for s in 0..rows {
        for (d, w) in RESOLVE.iter().enumerate() {
            let r = s as i64 + d as i64 - 1;
            if r < 0 || r >= rows as i64 {
                continue;
            }
            let src = sigma.row(r as usize).to_vec();
            for (o, v) in out.row_mut(s).iter_mut().zip(src) {
                *o += v * *w;
            }
        }
    }
    out
}

/// Inverse of [`resolve_rows`] (a symmetric positive definite tridiagonal solve
/// per frequency column).
pub fn unresolve_rows(sigma: &PhaseField) -> PhaseField {
    let pg = sigma.pgrid;
    let rows = pg.s_count();
    let (a, b) = (RESOLVE[0], RESOLVE[1]);
    // Thomas algorithm with constant bands.
    let mut cprime = vec![0.0; rows];
    let mut denom = vec![0.0; rows];
    for i in 0..rows {
        let d = if i == 0 { b } else { b - a * cprime[i - 1] };
        denom[i] = d;
        cprime[i] = a / d;
    }
    let mut out = PhaseField::zeros(pg);
    for k in 0..pg.xi_count() {
        let mut y = vec![ZERO; rows];
        for i in 0..rows {
            let prev = if i == 0 { ZERO } else { y[i - 1] * a };
            y[i] = (sigma.get(i, k) - prev) / denom[i];
        }
        for i in (0..rows).rev() {
            let next = if i + 1 < rows { out.get(i + 1, k) * cprime[i] } else { ZERO };
            out.set(i, k, y[i] - next);
        }
    }
    out
}

/// Resolved symbol of a kernel, comparable with continuum Weyl symbols.
pub fn kernel_to_resolved_symbol(k: &Kernel) -> PhaseField {
    resolve_rows(&kernel_to_symbol(k))
}

/// Kernel whose resolved symbol is `sigma`.
pub fn resolved_symbol_to_kernel(sigma: &PhaseField) -> Kernel {
    symbol_to_kernel(&unresolve_rows(sigma))
}

/// A Weyl operator given by its kernel: `(Op f)[a] = dx sum_b K[a, b] f[b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylOperator {
    pub kernel: Kernel,
}

impl WeylOperator {
    pub fn from_symbol(sigma: &PhaseField) -> Self {
        Self {
            kernel: symbol_to_kernel(sigma),
        }
    }

    pub fn from_resolved_symbol(sigma: &PhaseField) -> Self {
        Self {
            kernel: resolved_symbol_to_kernel(sigma),
        }
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        if !self.kernel.grid.same_as(&f.grid) {
            return param("operator and signal live on different grids");
        }
        let n = f.grid.n();
        let dx = f.grid.dx();
        let values = (0..n)
            .map(|a| {
                let acc: C64 = (0..n).map(|b| self.kernel.get(a, b) * f.values[b]).sum();
                acc * dx
            })
            .collect();
        Signal::new(f.grid, values)
    }

    /// `dx^2 sum K[a, b] f[b] conj(g[a])`.
    pub fn form(&self, f: &Signal, g: &Signal) -> C64 {
        let n = f.grid.n();
        let dx = f.grid.dx();
        let mut acc = ZERO;
        for a in 0..n {
            for b in 0..n {
                acc += self.kernel.get(a, b) * f.values[b] * g.values[a].conj();
            }
        }
        acc * dx * dx
    }
}

pub fn apply_weyl(sigma: &PhaseField, f: &Signal) -> Result<Signal> {
    WeylOperator::from_symbol(sigma).apply(f)
}

pub fn apply_resolved_weyl(sigma: &PhaseField, f: &Signal) -> Result<Signal> {
    WeylOperator::from_resolved_symbol(sigma).apply(f)
}

/// `(2 pi)^{-1/2} sum (dx/2) dxi sigma[s, k] conj(W[s, k])`.
pub fn phase_pairing(sigma: &PhaseField, w: &PhaseField) -> C64 {
    let pg = sigma.pgrid;
    let acc: C64 = sigma
        .values()
        .iter()
        .zip(w.values())
        .map(|(a, b)| a * b.conj())
        .sum();
    acc * (pg.dx() / 2.0 * pg.dxi() / (2.0 * PI).sqrt())
}

/// `|<sigma^w f, g> - (2 pi)^{-1/2} <sigma, W(g, f)>|` with lattice quadratures.
pub fn pairing_defect(sigma: &PhaseField, f: &Signal, g: &Signal) -> Result<f64> {
    if !sigma.pgrid.base().same_as(&f.grid) || !f.grid.same_as(&g.grid) {
        return param("pairing arguments live on different grids");
    }
    let lhs = WeylOperator::from_symbol(sigma).form(f, g);
    let rhs = phase_pairing(sigma, &cross_wigner(g, f)?);
    Ok((lhs - rhs).norm())
}

/// `||sigma|| ||f|| ||g||` with quadrature norms: the natural size of either
/// side of the pairing.
pub fn pairing_scale(sigma: &PhaseField, f: &Signal, g: &Signal) -> f64 {
    let pg = sigma.pgrid;
    let ns = (pg.dx() / 2.0 * pg.dxi() * sigma.values().iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sqrt();
    ns * f.norm() * g.norm()
}

/// Minimum eigenvalue of a Hermitian matrix; a value `>= -tol` certifies a
/// non-negative operator.
pub fn psd_defect(m: &DMatrix<C64>) -> Result<f64> {
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let herm = (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if herm > 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Contract(format!(
            "matrix is not Hermitian (defect {herm:e})"
        )));
    }
    Ok(hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min))
}

/// Exact phases `exp(-i pi r / (2n))` used on the `x2` axis, where
/// `Q dx x2_t = Q pi (t - n) / (2n)`.
struct QuarterRoots {
    n: usize,
    table: Vec<C64>,
}

impl QuarterRoots {
    fn new(n: usize) -> Self {
        let table = (0..4 * n)
            .map(|r| C64::from_polar(1.0, -PI * r as f64 / (2 * n) as f64))
            .collect();
        Self { n, table }
    }

    /// `exp(-i q dx x2_t)`.
    fn phase(&self, q: i64, t: usize) -> C64 {
        let n = self.n as i64;
        let r = (q * (t as i64 - n)).rem_euclid(4 * n);
        self.table[r as usize]
    }
}

/// Fourier coefficients of one `(s, s')` block of a covariance tensor:
/// `T[s,k,s',k'] = sum C[j, j'] exp(-i j dx xi_k) exp(+i j' dx xi_k')`.
struct BlockCoeffs {
    first1: i64,
    count1: usize,
    first2: i64,
    count2: usize,
    c: Vec<C64>,
}

fn block_coeffs(t: &CovTensor4, axis: &HalfGridAxis, s: usize, s2: usize) -> BlockCoeffs {
    let n = axis.len();
    let (first1, count1) = diagonal_lags(n, s);
    let (first2, count2) = diagonal_lags(n, s2);
    let mut b = vec![ZERO; count1 * n];
    let mut col = vec![ZERO; n];
    let mut tmp = vec![ZERO; count1];
    for k2 in 0..n {
        for (k, c) in col.iter_mut().enumerate() {
            *c = t.get(s, k, s2, k2);
        }
        axis.inverse_into(&col, first1, &mut tmp);
        for m1 in 0..count1 {
            b[m1 * n + k2] = tmp[m1];
        }
    }
    let mut c = vec![ZERO; count1 * count2];
    let mut row = vec![ZERO; n];
    let mut tmp2 = vec![ZERO; count2];
    for m1 in 0..count1 {
        for (k2, r) in row.iter_mut().enumerate() {
            *r = b[m1 * n + k2].conj();
        }
        axis.inverse_into(&row, first2, &mut tmp2);
        for m2 in 0..count2 {
            c[m1 * count2 + m2] = tmp2[m2].conj();
        }
    }
    BlockCoeffs {
        first1,
        count1,
        first2,
        count2,
        c,
    }
}

impl BlockCoeffs {
    /// `(2 pi / dx) sum_{j + j' = p} C[j, j'] exp(-i (j - j') dx x2_t)`.
    fn regroup(&self, p: i64, t: usize, roots: &QuarterRoots, dx: f64) -> C64 {
        let mut acc = ZERO;
        for m1 in 0..self.count1 {
            let j = self.first1 + 2 * m1 as i64;
            let d = p - j - self.first2;
            if d < 0 || d % 2 != 0 {
                continue;
            }
            let m2 = (d / 2) as usize;
            if m2 >= self.count2 {
                continue;
            }
            acc += self.c[m1 * self.count2 + m2] * roots.phase(2 * j - p, t);
        }
        acc * (2.0 * PI / dx)
    }
}

/// Lattice 4-axis symbol of a covariance tensor over the whole [`Lattice4`].
///
/// The position pair `(s, s')` uses the half-grid transform with spacing
/// `dx/2`. The frequency pair is periodic, so each `(s, s')` block is expanded
/// in its Fourier coefficients `C[j, j']`, and these are regrouped by the lag
/// sum `P = j + j'` (axis `xi2 = -P dx/2`) and evaluated in the lag difference
/// at `x2`.
pub fn kernel4_to_symbol4(t: &CovTensor4) -> Symbol4 {
    let region = t.pgrid.lattice4().full();
    kernel4_to_symbol4_region(t, &region)
}

/// [`kernel4_to_symbol4`] restricted to the entries of `region`.
pub fn kernel4_to_symbol4_region(t: &CovTensor4, region: &Region4) -> Symbol4 {
    let pgrid = t.pgrid;
    let lat = pgrid.lattice4();
    let n = pgrid.n();
    let rows = pgrid.s_count();
    let dx = pgrid.dx();
    let faxis = HalfGridAxis::new(n, dx);
    let taxis = HalfGridAxis::new(rows, dx / 2.0);
    let roots = QuarterRoots::new(n);
    let [rm, rt, rq1, rq2] = region.ranges.clone();
    let (nt, nq1, nq2) = (rt.len(), rq1.len(), rq2.len());

    // Frequency pair, for every (s, s') whose midpoint is in range.
    let pairs: Vec<(usize, usize)> = (0..rows)
        .flat_map(|s| (0..rows).map(move |s2| (s, s2)))
        .filter(|&(s, s2)| rm.contains(&(s + s2)))
        .collect();
    let blocks: Vec<Vec<C64>> = pairs
        .par_iter()
        .map(|&(s, s2)| {
            let bc = block_coeffs(t, &faxis, s, s2);
            let m = s + s2;
            let mut g = vec![ZERO; nq2 * nt];
            for (iq, q2) in rq2.clone().enumerate() {
                let p = lat.lag_sum(m, q2);
                for (it, tt) in rt.clone().enumerate() {
                    g[iq * nt + it] = bc.regroup(p, tt, &roots, dx);
                }
            }
            g
        })
        .collect();
    let mut lookup = vec![usize::MAX; rows * rows];
    for (i, &(s, s2)) in pairs.iter().enumerate() {
        lookup[s * rows + s2] = i;
    }

    // Position pair, one x1 slice at a time.
    let mut out = Symbol4::zeros(pgrid, region.clone());
    let slice = nt * nq1 * nq2;
    let w = 2.0 * taxis.h();
    out.values_mut()
        .par_chunks_mut(slice)
        .zip(rm.clone().into_par_iter())
        .for_each(|(chunk, m)| {
            let (first, count) = diagonal_lags(rows, m);
            let mut lags = vec![ZERO; count];
            let mut full = vec![ZERO; rows];
            for it in 0..nt {
                for iq2 in 0..nq2 {
                    for (i, l) in lags.iter_mut().enumerate() {
                        let d = first + 2 * i as i64;
                        let s = ((m as i64 + d) / 2) as usize;
                        let s2 = ((m as i64 - d) / 2) as usize;
                        *l = blocks[lookup[s * rows + s2]][iq2 * nt + it] * w;
                    }
                    taxis.forward_into(first, &lags, &mut full);
                    for (iq1, q1) in rq1.clone().enumerate() {
                        chunk[(it * nq1 + iq1) * nq2 + iq2] = full[q1];
                    }
                }
            }
        });
    out
}

/// Inverse of [`kernel4_to_symbol4`]; needs the full lattice.
pub fn symbol4_to_kernel4(sym: &Symbol4) -> Result<CovTensor4> {
    if !sym.is_full() {
        return Err(Error::Shape("inverse transform needs the full 4-axis lattice".into()));
    }
    let pgrid = sym.pgrid;
    let lat = pgrid.lattice4();
    let n = pgrid.n();
    let rows = pgrid.s_count();
    let dx = pgrid.dx();
    let faxis = HalfGridAxis::new(n, dx);
    let taxis = HalfGridAxis::new(rows, dx / 2.0);
    let roots = QuarterRoots::new(n);
    let [_, nt, nq1, nq2] = lat.shape();

    // Position pair: recover G_{s,s'}[q2][t] for every (s, s').
    let mut g = vec![ZERO; rows * rows * nq2 * nt];
    let w = 1.0 / (2.0 * taxis.h());
    let mut vals = vec![ZERO; nq1];
    let mut lags = vec![ZERO; rows];
    for m in 0..2 * rows - 1 {
        let (first, count) = diagonal_lags(rows, m);
        for tt in 0..nt {
            for q2 in 0..nq2 {
                for (q1, v) in vals.iter_mut().enumerate() {
                    *v = sym.get([m, tt, q1, q2]);
                }
                taxis.inverse_into(&vals, first, &mut lags[..count]);
                for (i, c) in lags[..count].iter().enumerate() {
                    let d = first + 2 * i as i64;
                    let s = ((m as i64 + d) / 2) as usize;
                    let s2 = ((m as i64 - d) / 2) as usize;
                    g[((s * rows + s2) * nq2 + q2) * nt + tt] = c * w;
                }
            }
        }
    }

    // Frequency pair: coefficients from the first n x2 samples, one period.
    let mut out = CovTensor4::zeros(pgrid);
    let blocks: Vec<Vec<C64>> = (0..rows * rows)
        .into_par_iter()
        .map(|ps| {
            let (s, s2) = (ps / rows, ps % rows);
            let m = s + s2;
            let (first1, count1) = diagonal_lags(n, s);
            let (first2, count2) = diagonal_lags(n, s2);
            let mut c = vec![ZERO; count1 * count2];
            for q2 in 0..nq2 {
                let p = lat.lag_sum(m, q2);
                // valid j: first1 + 2 m1 with j' = p - j in the second window
                let members: Vec<(usize, usize, i64)> = (0..count1)
                    .filter_map(|m1| {
                        let j = first1 + 2 * m1 as i64;
                        let d = p - j - first2;
                        (d >= 0 && d % 2 == 0 && ((d / 2) as usize) < count2)
                            .then(|| (m1, (d / 2) as usize, 2 * j - p))
                    })
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let q0 = members[0].2;
                let base = ((s * rows + s2) * nq2 + q2) * nt;
                let scale = dx / (2.0 * PI) / n as f64;
                for (i, &(m1, m2, _)) in members.iter().enumerate() {
                    // lags q0 + 4i; exp(-i 4 i dx x2_t) = exp(-2 pi i i t / n)
                    let mut acc = ZERO;
                    for tt in 0..n {
                        let ph = roots.phase(q0, tt).conj()
                            * C64::from_polar(1.0, 2.0 * PI * (i * tt) as f64 / n as f64);
                        acc += g[base + tt] * ph;
                    }
                    c[m1 * count2 + m2] = acc * scale;
                }
            }
            // T[k, k'] = sum C[j, j'] exp(-i j dx xi_k) exp(+i j' dx xi_k')
            let mut bmat = vec![ZERO; count1 * n];
            for m1 in 0..count1 {
                for k2 in 0..n {
                    let mut acc = ZERO;
                    for m2 in 0..count2 {
                        let j2 = first2 + 2 * m2 as i64;
                        acc += c[m1 * count2 + m2] * faxis.phase(j2, k2).conj();
                    }
                    bmat[m1 * n + k2] = acc;
                }
            }
            let mut block = vec![ZERO; n * n];
            for k in 0..n {
                for m1 in 0..count1 {
                    let j = first1 + 2 * m1 as i64;
                    let ph = faxis.phase(j, k);
                    for k2 in 0..n {
                        block[k * n + k2] += bmat[m1 * n + k2] * ph;
                    }
                }
            }
            block
        })
        .collect();
    for (ps, block) in blocks.into_iter().enumerate() {
        let (s, s2) = (ps / rows, ps % rows);
        for k in 0..n {
            for k2 in 0..n {
                out.set(s, k, s2, k2, block[k * n + k2]);
            }
        }
    }
    Ok(out)
}

/// The same transform as [`kernel4_to_symbol4`] with the axis pairs applied
/// in the opposite order: the tensor is split into its four row-parity
/// blocks, the position pair is transformed first, and the frequency pair of
/// each block is expanded on the widest lag window of its parity.
pub fn kernel4_to_symbol4_position_first(t: &CovTensor4) -> Symbol4 {
    let pgrid = t.pgrid;
    let lat = pgrid.lattice4();
    let n = pgrid.n();
    let rows = pgrid.s_count();
    let dx = pgrid.dx();
    let faxis = HalfGridAxis::new(n, dx);
    let taxis = HalfGridAxis::new(rows, dx / 2.0);
    let roots = QuarterRoots::new(n);
    let [nm, nt, nq1, nq2] = lat.shape();
    let widest = |parity: usize| -> (i64, usize) {
        // lags of this parity with |j| <= n - 1
        let top = if (n - 1) % 2 == parity { n as i64 - 1 } else { n as i64 - 2 };
        (-top, (top + 1) as usize)
    };
    let mut out = Symbol4::zeros(pgrid, lat.full());
    for ps in 0..2 {
        for ps2 in 0..2 {
            // position pair on this block: Y[m][q1][k][k']
            let mut y = vec![ZERO; nm * nq1 * n * n];
            let w = 2.0 * taxis.h();
            for k in 0..n {
                for k2 in 0..n {
                    let mut mat = vec![ZERO; rows * rows];
                    for s in (ps..rows).step_by(2) {
                        for s2 in (ps2..rows).step_by(2) {
                            mat[s * rows + s2] = t.get(s, k, s2, k2);
                        }
                    }
                    for m in 0..nm {
                        let (first, count) = diagonal_lags(rows, m);
                        let lags: Vec<C64> = (0..count)
                            .map(|i| {
                                let d = first + 2 * i as i64;
                                let s = ((m as i64 + d) / 2) as usize;
                                let s2 = ((m as i64 - d) / 2) as usize;
                                mat[s * rows + s2] * w
                            })
                            .collect();
                        let mut full = vec![ZERO; nq1];
                        taxis.forward_into(first, &lags, &mut full);
                        for q1 in 0..nq1 {
                            y[((m * nq1 + q1) * n + k) * n + k2] = full[q1];
                        }
                    }
                }
            }
            // frequency pair with the widest windows of the block parities
            let (first1, count1) = widest(ps);
            let (first2, count2) = widest(ps2);
            for m in 0..nm {
                if m % 2 != (ps + ps2) % 2 {
                    continue;
                }
                for q1 in 0..nq1 {
                    let base = (m * nq1 + q1) * n * n;
                    let mut tmp = CovTensor4::zeros(pgrid);
                    for k in 0..n {
                        for k2 in 0..n {
                            tmp.set(ps, k, ps2, k2, y[base + k * n + k2]);
                        }
                    }
                    let mut bc = block_coeffs_window(&tmp, &faxis, ps, ps2, (first1, count1), (first2, count2));
                    bc.first1 = first1;
                    for tt in 0..nt {
                        for q2 in 0..nq2 {
                            let p = lat.lag_sum(m, q2);
                            let v = bc.regroup(p, tt, &roots, dx);
                            let idx = [m, tt, q1, q2];
                            let cur = out.get(idx);
                            out.set(idx, cur + v);
                        }
                    }
                }
            }
        }
    }
    out
}

fn block_coeffs_window(
    t: &CovTensor4,
    axis: &HalfGridAxis,
    s: usize,
    s2: usize,
    w1: (i64, usize),
    w2: (i64, usize),
) -> BlockCoeffs {
    let n = axis.len();
    let (first1, count1) = w1;
    let (first2, count2) = w2;
    let mut b = vec![ZERO; count1 * n];
    let mut col = vec![ZERO; n];
    let mut tmp = vec![ZERO; count1];
    for k2 in 0..n {
        for (k, c) in col.iter_mut().enumerate() {
            *c = t.get(s, k, s2, k2);
        }
        axis.inverse_into(&col, first1, &mut tmp);
        for m1 in 0..count1 {
            b[m1 * n + k2] = tmp[m1];
        }
    }
    let mut c = vec![ZERO; count1 * count2];
    let mut row = vec![ZERO; n];
    let mut tmp2 = vec![ZERO; count2];
    for m1 in 0..count1 {
        for (k2, r) in row.iter_mut().enumerate() {
            *r = b[m1 * n + k2].conj();
        }
        axis.inverse_into(&row, first2, &mut tmp2);
        for m2 in 0..count2 {
            c[m1 * count2 + m2] = tmp2[m2].conj();
        }
    }
    BlockCoeffs {
        first1,
        count1,
        first2,
        count2,
        c,
    }
}

/// Resolving average of a 4-axis lattice symbol.
///
/// A lattice symbol factors through the two position rows
/// `r = (M + P)/2` and `r' = (M - P)/2`, where `M` is the `x1` index and `P`
/// the lag sum behind `xi2`. The `[1/4, 1/2, 1/4]` row average is applied
/// along both, which on the `(x1, xi2)` lattice is a nine-point stencil.
/// `sym` must hold `out_region` grown by two indices on the `x1` and `xi2`
/// axes (or reach the lattice edge there).
pub fn resolve_symbol4(sym: &Symbol4, out_region: &Region4) -> Result<Symbol4> {
    let lat = sym.lattice();
    let shape = lat.shape();
    let need = out_region.grown(2, shape);
    for a in [0, 3] {
        let (have, want) = (&sym.region().ranges[a], &need.ranges[a]);
        if have.start > want.start || have.end < want.end {
            return Err(Error::Shape("stored region lacks the resolving margin".into()));
        }
    }
    for a in [1, 2] {
        let (have, want) = (&sym.region().ranges[a], &out_region.ranges[a]);
        if have.start > want.start || have.end < want.end {
            return Err(Error::Shape("stored region does not cover the output".into()));
        }
    }
    let mut out = Symbol4::zeros(sym.pgrid, out_region.clone());
    let idx: Vec<[usize; 4]> = out.indices().collect();
    let vals: Vec<C64> = idx
        .par_iter()
        .map(|&[m, t, q1, q2]| resolved_value(sym, &lat, m, t, q1, q2))
        .collect();
    out.values_mut().copy_from_slice(&vals);
    Ok(out)
}

fn resolved_value(sym: &Symbol4, lat: &Lattice4, m: usize, t: usize, q1: usize, q2: usize) -> C64 {
    let p = lat.lag_sum(m, q2);
    let mut acc = ZERO;
    for (i, wi) in RESOLVE.iter().enumerate() {
        for (j, wj) in RESOLVE.iter().enumerate() {
            let (dr, dr2) = (i as i64 - 1, j as i64 - 1);
            let mm = m as i64 + dr + dr2;
            let pp = p + dr - dr2;
            let Some(qq) = lat.xi2_index(mm, pp) else {
                continue;
            };
            if mm as usize >= lat.shape()[0] {
                continue;
            }
            acc += sym.get_or_zero([mm as usize, t, q1, qq]) * (wi * wj);
        }
    }
    acc
}

/// Resolved 4-axis symbol of a covariance tensor over `region`.
pub fn kernel4_to_resolved_symbol4(t: &CovTensor4, region: &Region4) -> Symbol4 {
    let shape = t.pgrid.lattice4().shape();
    let mut work = region.grown(2, shape);
    work.ranges[1] = region.ranges[1].clone();
    work.ranges[2] = region.ranges[2].clone();
    let lattice = kernel4_to_symbol4_region(t, &work);
    resolve_symbol4(&lattice, region).expect("work region carries the margin")
}
