//! Time-periodic problems on the half space `T x R^n_+`, `x_n` the last axis.
//!
//! Half-box fields are full-box fields on `[-L_n, L_n)` in the normal
//! direction that vanish on `x_n < 0`. The zero-trace solve is
//! `u = A_+^-1 Y_+ A_-^-1 f`; boundary data is matched with the kernels of
//! [`kernel`] and, for general operators, the characteristic matrix.

pub mod fd;
pub mod kernel;
pub mod norms;
pub mod table;

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factor::CharMatrix;
use crate::field::{transform_axes, Direction, State, TPField};
use crate::fourier::{apply_multiplier, ensure_oscillatory, heaviside_mask, restrict_half};
use crate::grid::GroupGrid;
use crate::symbol::OperatorTuple;

pub use kernel::{build_boundary_kernel, build_mode_kernel, BoundaryKernel, ModeKernel};
pub use norms::{apply_operator_half, bootstrap_chain, estimate_ratio_hs, half_lp_norm, half_sobolev_norm};
pub use table::{
    apply_factor, apply_factor_inverse, build_char_table, build_factor_table, lower_fraction, FactorTable, Side,
};

type C64 = Complex64;

/// Index bookkeeping for a grid whose last axis is the normal one.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub dim: usize,
    pub n_t: usize,
    pub tang_shape: Vec<usize>,
    pub tang_len: usize,
    pub n_n: usize,
    pub spacing: f64,
    pub half_length: f64,
}

impl Layout {
    pub fn of(grid: &GroupGrid) -> Result<Self> {
        let dim = grid.dim();
        if grid.half_space_axis() != Some(dim.wrapping_sub(1)) || dim == 0 {
            return Err(Error::InvalidGrid(
                "half-space solves need the last spatial axis as normal axis".into(),
            ));
        }
        let shape = grid.shape();
        let tang_shape = shape[1..dim].to_vec();
        let normal = grid.axis(dim - 1);
        Ok(Self {
            dim,
            n_t: grid.n_t(),
            tang_len: tang_shape.iter().product(),
            tang_shape,
            n_n: normal.points,
            spacing: normal.spacing(),
            half_length: normal.half_length,
        })
    }

    pub fn check(&self, grid: &GroupGrid) -> Result<()> {
        if Self::of(grid)? != *self {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Flat tangential index from a full spatial multi-index.
    pub fn tflat(&self, spatial: &[usize]) -> usize {
        spatial[..self.dim - 1]
            .iter()
            .zip(&self.tang_shape)
            .fold(0, |acc, (&q, &n)| acc * n + q)
    }

    pub fn tangential_index(&self, mut tflat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim - 1];
        for a in (0..self.dim - 1).rev() {
            idx[a] = tflat % self.tang_shape[a];
            tflat /= self.tang_shape[a];
        }
        idx
    }

    pub fn tangential_frequencies(&self, grid: &GroupGrid, tflat: usize) -> Vec<f64> {
        self.tangential_index(tflat)
            .iter()
            .enumerate()
            .map(|(a, &q)| grid.axis(a).frequency(q))
            .collect()
    }

    /// Some index of the time or tangential part is an unpaired Nyquist index.
    pub fn line_is_nyquist(&self, ti: usize, tflat: usize) -> bool {
        ti == self.n_t / 2
            || self
                .tangential_index(tflat)
                .iter()
                .zip(&self.tang_shape)
                .any(|(&q, &n)| q == n / 2)
    }

    /// Array axes of the time and tangential directions.
    pub fn line_axes(&self) -> Vec<usize> {
        (0..self.dim).collect()
    }
}

/// How the boundary operators are to be treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    /// `B_j = D_n^(j-1)`; the data are symbol traces.
    Dirichlet,
    General,
}

/// Half-space problem with principal-part operators.
#[derive(Debug, Clone)]
pub struct HalfSpaceProblem {
    pub tuple: OperatorTuple,
    pub grid: Arc<GroupGrid>,
    /// Half-box field.
    pub f: TPField,
    /// `m` fields on `grid.boundary()`.
    pub g: Vec<TPField>,
    pub bc_kind: BcKind,
}

impl HalfSpaceProblem {
    pub fn new(tuple: &OperatorTuple, f: TPField, g: Vec<TPField>) -> Result<Self> {
        let grid = f.grid_arc().clone();
        Layout::of(&grid)?;
        let bgrid = grid.boundary();
        if g.len() != tuple.m() {
            return Err(Error::DimensionMismatch {
                expected: tuple.m(),
                got: g.len(),
            });
        }
        if g.iter().any(|gj| *gj.grid() != bgrid) {
            return Err(Error::GridMismatch);
        }
        let tuple = tuple.clone();
        let bc_kind = if tuple.is_dirichlet() {
            BcKind::Dirichlet
        } else {
            BcKind::General
        };
        Ok(Self {
            tuple,
            grid,
            f,
            g,
            bc_kind,
        })
    }
}

/// Zero-trace solution with its support diagnostic.
#[derive(Debug, Clone)]
pub struct ZeroTraceSolution {
    /// Half-box field.
    pub u: TPField,
    /// `|A_+^-1 Y_+ A_-^-1 f on x_n < 0|_2 / |.|_2` before the final restriction.
    pub leakage: f64,
    /// `w = A_-^-1 f` on the full box.
    pub minus: TPField,
}

/// `u = A_+^-1 Y_+ A_-^-1 f` for a purely oscillatory half-box `f`.
///
/// `Y_+` gives the node `x_n = 0` weight 1/2, the trapezoidal sampling of the
/// jump.
pub fn solve_zero_trace(f: &TPField, table: &FactorTable) -> Result<ZeroTraceSolution> {
    table.layout.check(f.grid())?;
    let f = restrict_half(&f.to_physical())?;
    let v = apply_factor_inverse(&f, table, Side::Minus)?.to_physical();
    let w = heaviside_mask(&v)?;
    let u = apply_factor_inverse(&w, table, Side::Plus)?.to_physical();
    let leakage = lower_fraction(&u)?;
    Ok(ZeroTraceSolution {
        u: restrict_half(&u)?,
        leakage,
        minus: v,
    })
}

/// Symbol traces `D_n^b u_1(0+)`, `b = 0..count`, of the zero-trace solution
/// as per-line spectral coefficients. `u_1` solves `M_+(D_n) u_1 = w` on
/// `x_n > 0` with `tr_m u_1 = 0`, `w = A_-^-1 f`, so
/// `D^(m+j) u_1(0+) = D^j w(0) - sum_(l<m) c_l D^(l+j) u_1(0+)`.
/// Exact up to the spectral accuracy of `w` at `x_n = 0`, where finite
/// differences of `u_1` would see the jump of its normal derivative.
pub fn zero_trace_traces(w: &TPField, table: &FactorTable, count: usize) -> Result<Vec<Vec<C64>>> {
    let lay = &table.layout;
    let m = table.m();
    let lines = lay.n_t * lay.tang_len;
    let half = lay.n_n / 2;
    let n = lay.dim;
    let dw: Vec<Vec<C64>> = (0..count.saturating_sub(m))
        .map(|j| {
            let d = apply_multiplier(w, |_, xi| C64::new(xi[n - 1].powi(j as i32), 0.0), false)?;
            let ml = mode_lines(&d)?;
            Ok((0..lines).map(|l| ml[l * lay.n_n + half]).collect())
        })
        .collect::<Result<_>>()?;
    let mut out = vec![vec![C64::new(0.0, 0.0); lines]; count];
    for line in 0..lines {
        let ti = line / lay.tang_len;
        if ti == 0 || lay.line_is_nyquist(ti, line % lay.tang_len) {
            continue;
        }
        let Some(fact) = table.entry(ti, line % lay.tang_len) else { continue };
        let c = fact.m_plus_ascending();
        for b in m..count {
            let j = b - m;
            let mut v = dw[j][line];
            for (l, cl) in c.iter().enumerate().take(m) {
                v -= cl * out[l + j][line];
            }
            out[b][line] = v;
        }
    }
    Ok(out)
}

/// `B_j u_1` at `x_n = 0` for the zero-trace solution, from
/// [`zero_trace_traces`].
fn zero_trace_boundary_values(zt: &ZeroTraceSolution, table: &FactorTable, grid: &GroupGrid) -> Result<Vec<TPField>> {
    let lay = &table.layout;
    let tuple = table.tuple();
    let n = lay.dim;
    let max_b = tuple
        .boundary
        .iter()
        .flat_map(|b| b.coeffs().keys().map(|a| a[n - 1] as usize))
        .max()
        .unwrap_or(0);
    let traces = zero_trace_traces(&zt.minus, table, max_b + 1)?;
    let bgrid = Arc::new(grid.boundary());
    let vol = bgrid.volume();
    let lines = lay.n_t * lay.tang_len;
    tuple
        .boundary
        .iter()
        .map(|b| {
            let data = (0..lines)
                .map(|line| {
                    let xi = lay.tangential_frequencies(grid, line % lay.tang_len);
                    b.coeffs()
                        .iter()
                        .map(|(alpha, c)| {
                            let t: f64 = alpha[..n - 1].iter().zip(&xi).map(|(&p, &x)| x.powi(p as i32)).product();
                            c * t * traces[alpha[n - 1] as usize][line]
                        })
                        .sum::<C64>()
                        * vol
                })
                .collect();
            Ok(TPField::from_data(bgrid.clone(), State::Spectral, data)?.to_physical())
        })
        .collect()
}

/// Spectral (time and tangential) coefficients of boundary fields, one
/// vector of length `N_t * N'` per field.
fn boundary_spectra(g: &[TPField], lay: &Layout, grid: &GroupGrid) -> Result<Vec<Vec<C64>>> {
    let bgrid = grid.boundary();
    g.iter()
        .map(|gj| {
            if *gj.grid() != bgrid {
                return Err(Error::GridMismatch);
            }
            let s = gj.to_spectral();
            debug_assert_eq!(s.data().len(), lay.n_t * lay.tang_len);
            Ok(s.into_data())
        })
        .collect()
}

/// Half-box field with `tr_m^D u = d`, solving the homogeneous equation in
/// the interior: `u_hat(k, xi', x_n) = sum_a L_a(k, xi', x_n) d_hat_a(k, xi')`.
pub fn lift_dirichlet(d: &[TPField], kernel: &BoundaryKernel, grid: Arc<GroupGrid>) -> Result<TPField> {
    let lay = &kernel.layout;
    lay.check(&grid)?;
    if d.len() != kernel.m() {
        return Err(Error::DimensionMismatch {
            expected: kernel.m(),
            got: d.len(),
        });
    }
    for dj in d {
        ensure_oscillatory(dj)?;
    }
    let spectra = boundary_spectra(d, lay, &grid)?;
    let nodes = grid.nodes(lay.dim - 1);
    let half = lay.n_n / 2;
    let mut data = vec![C64::new(0.0, 0.0); grid.len()];
    data.par_chunks_mut(lay.n_n).enumerate().for_each(|(line, out)| {
        let ti = line / lay.tang_len;
        let tflat = line % lay.tang_len;
        if ti == 0 || lay.line_is_nyquist(ti, tflat) {
            return;
        }
        let Some(kern) = kernel.mode(ti, tflat) else {
            return;
        };
        let coeffs: Vec<C64> = spectra.iter().map(|s| s[line]).collect();
        if coeffs.iter().all(|c| c.norm() == 0.0) {
            return;
        }
        for j in half..lay.n_n {
            let l = kern.eval(nodes[j]);
            out[j] = l.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
        }
    });
    transform_axes(&mut data, &grid, &lay.line_axes(), Direction::Inverse);
    TPField::from_data(grid, State::Physical, data)
}

/// Coefficients `u_hat(k, xi', x_n)` of `u = sum u_hat e^(i(kt + xi'.x'))`:
/// `u` transformed in time and along the tangential axes, one contiguous
/// normal line per `(k, xi')` in [`Layout`] order.
pub fn mode_lines(u: &TPField) -> Result<Vec<C64>> {
    let lay = Layout::of(u.grid())?;
    let grid = u.grid_arc().clone();
    let mut data = u.to_physical().into_data();
    transform_axes(&mut data, &grid, &lay.line_axes(), Direction::Forward);
    let vol = grid.boundary().volume();
    data.iter_mut().for_each(|v| *v /= vol);
    Ok(data)
}

/// Symbol traces `D_n^b u(t, x', 0)`, `b = 0..count`, by one-sided finite
/// differences of order [`fd::FD_ORDER`].
pub fn normal_traces(u: &TPField, count: usize) -> Result<Vec<TPField>> {
    let lay = Layout::of(u.grid())?;
    let u = u.to_physical();
    let bgrid = Arc::new(u.grid().boundary());
    let half = lay.n_n / 2;
    (0..count)
        .map(|b| {
            let w = fd::one_sided(b);
            if half < w.len() {
                return Err(Error::InvalidGrid(format!(
                    "half box too short for a derivative of order {b}"
                )));
            }
            let scale = C64::new(0.0, -1.0).powu(b as u32) / lay.spacing.powi(b as i32);
            let data = u
                .data()
                .chunks(lay.n_n)
                .map(|line| w.iter().zip(&line[half..]).map(|(wi, v)| v * *wi).sum::<C64>() * scale)
                .collect();
            TPField::from_data(bgrid.clone(), State::Physical, data)
        })
        .collect()
}

/// `B_j u` at `x_n = 0` for every boundary operator of the tuple: normal
/// derivatives by finite differences, tangential factors spectrally.
pub fn boundary_values(u: &TPField, tuple: &OperatorTuple) -> Result<Vec<TPField>> {
    let n = tuple.dim();
    let max_normal = tuple
        .boundary
        .iter()
        .flat_map(|b| b.coeffs().keys().map(|a| a[n - 1] as usize))
        .max()
        .unwrap_or(0);
    let traces = normal_traces(u, max_normal + 1)?;
    let bgrid = traces[0].grid_arc().clone();
    tuple
        .boundary
        .iter()
        .map(|b| {
            let mut acc = TPField::zeros(bgrid.clone(), State::Physical);
            for (alpha, c) in b.coeffs() {
                let tr = &traces[alpha[n - 1] as usize];
                let term = if alpha[..n - 1].iter().all(|&p| p == 0) {
                    tr.clone()
                } else {
                    let tangential = &alpha[..n - 1];
                    apply_multiplier(
                        tr,
                        |_, xi| {
                            C64::new(
                                tangential.iter().zip(xi).map(|(&p, &x)| x.powi(p as i32)).product(),
                                0.0,
                            )
                        },
                        false,
                    )?
                    .to_physical()
                };
                acc.axpy(*c, &term)?;
            }
            Ok(acc)
        })
        .collect()
}

/// Applies a per-mode `m x m` matrix to boundary data: `op[F] d` or
/// `op[F^-1] d`. Mean and Nyquist modes are zeroed.
fn apply_mode_matrix(
    d: &[TPField],
    lay: &Layout,
    grid: &GroupGrid,
    chars: &[Option<CharMatrix>],
    inverse: bool,
) -> Result<Vec<TPField>> {
    let spectra = boundary_spectra(d, lay, grid)?;
    let m = d.len();
    let lines = lay.n_t * lay.tang_len;
    let mut out = vec![vec![C64::new(0.0, 0.0); lines]; m];
    for line in 0..lines {
        let ti = line / lay.tang_len;
        if ti == 0 || lay.line_is_nyquist(ti, line % lay.tang_len) {
            continue;
        }
        let Some(ch) = &chars[line] else { continue };
        let v = DVector::from_iterator(m, spectra.iter().map(|s| s[line]));
        let r = if inverse { &ch.f_inv * v } else { &ch.f * v };
        for j in 0..m {
            out[j][line] = r[j];
        }
    }
    let bgrid = Arc::new(grid.boundary());
    out.into_iter()
        .map(|data| Ok(TPField::from_data(bgrid.clone(), State::Spectral, data)?.to_physical()))
        .collect()
}

/// Precomputed factorizations, kernels and characteristic matrices for one
/// tuple on one grid.
#[derive(Debug, Clone)]
pub struct HalfSpaceSolver {
    pub grid: Arc<GroupGrid>,
    pub table: FactorTable,
    pub kernel: BoundaryKernel,
    pub chars: Vec<Option<CharMatrix>>,
}

/// Solution of a half-space problem and its pieces.
#[derive(Debug, Clone)]
pub struct HalfSpaceSolution {
    pub u: TPField,
    pub zero_trace: TPField,
    pub lifted: TPField,
    /// Symbol traces used for the lift.
    pub dirichlet_data: Vec<TPField>,
    pub leakage: f64,
}

impl HalfSpaceSolver {
    pub fn new(tuple: &OperatorTuple, grid: Arc<GroupGrid>) -> Result<Self> {
        let table = build_factor_table(tuple, &grid)?;
        let kernel = build_boundary_kernel(&table)?;
        let chars = build_char_table(&table)?;
        Ok(Self {
            grid,
            table,
            kernel,
            chars,
        })
    }

    pub fn tuple(&self) -> &OperatorTuple {
        self.table.tuple()
    }

    pub fn m(&self) -> usize {
        self.table.m()
    }

    pub fn solve_zero_trace(&self, f: &TPField) -> Result<ZeroTraceSolution> {
        solve_zero_trace(f, &self.table)
    }

    pub fn lift_dirichlet(&self, d: &[TPField]) -> Result<TPField> {
        lift_dirichlet(d, &self.kernel, self.grid.clone())
    }

    /// `op[F] d`.
    pub fn apply_char(&self, d: &[TPField]) -> Result<Vec<TPField>> {
        self.check_boundary(d)?;
        apply_mode_matrix(d, &self.table.layout, &self.grid, &self.chars, false)
    }

    /// `op[F^-1] h`.
    pub fn apply_char_inverse(&self, h: &[TPField]) -> Result<Vec<TPField>> {
        self.check_boundary(h)?;
        apply_mode_matrix(h, &self.table.layout, &self.grid, &self.chars, true)
    }

    fn check_boundary(&self, d: &[TPField]) -> Result<()> {
        if d.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                got: d.len(),
            });
        }
        for dj in d {
            ensure_oscillatory(dj)?;
        }
        Ok(())
    }

    pub fn boundary_values(&self, u: &TPField) -> Result<Vec<TPField>> {
        boundary_values(u, self.tuple())
    }

    /// `u = u_1 + L op[F^-1](g - B u_1)`, `u_1` the zero-trace solution.
    pub fn solve(&self, f: &TPField, g: &[TPField]) -> Result<HalfSpaceSolution> {
        self.check_boundary(g)?;
        let zt = self.solve_zero_trace(f)?;
        let dirichlet = self.tuple().is_dirichlet();
        let b1 = zero_trace_boundary_values(&zt, &self.table, &self.grid)?;
        let h: Vec<TPField> = g
            .iter()
            .zip(&b1)
            .map(|(gj, bj)| {
                let r = gj.to_physical().sub(bj)?;
                // The traces of u_1 carry a tiny mean from rounding.
                Ok(crate::fourier::project_osc(&r))
            })
            .collect::<Result<_>>()?;
        let d = if dirichlet { h } else { self.apply_char_inverse(&h)? };
        let lifted = self.lift_dirichlet(&d)?;
        let u = zt.u.add(&lifted)?;
        Ok(HalfSpaceSolution {
            u,
            zero_trace: zt.u,
            lifted,
            dirichlet_data: d,
            leakage: zt.leakage,
        })
    }
}

/// Runs [`HalfSpaceSolver::solve`] for a problem.
pub fn solve_general(prob: &HalfSpaceProblem) -> Result<HalfSpaceSolution> {
    HalfSpaceSolver::new(&prob.tuple, prob.grid.clone())?.solve(&prob.f, &prob.g)
}

