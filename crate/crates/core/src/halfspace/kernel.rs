//! Decaying solutions of the homogeneous mode equation with prescribed
//! symbol traces.
//!
//! At a mode with upper roots `rho_j` and monic `M_+(z) = sum c_l z^(m-l)`,
//! the raw kernels are
//! `L~_a(x) = (1/2 pi i) int_gamma N_a(z) e^(ixz) / M_+(z) dz` with
//! `N_a(z) = sum_{l < m-a} c_l z^(m-a-l-1)`, evaluated by residues (or by a
//! trapezoidal rule on a circle when roots cluster). The traces
//! `K~_ba = D_n^b L~_a(0)` use the same quadrature, and `L = L~ K~^-1`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, ModePoint, Result};
use crate::factor::SymbolFactorization;
use crate::poly;

use super::table::FactorTable;
use super::Layout;

type C64 = Complex64;

/// Roots closer than `CLUSTER_TOL * (1 + max |rho|)` switch to quadrature.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Trace matrices with a larger 1-norm condition number are rejected.
pub const TRACE_COND_MAX: f64 = 1e10;
/// Quadrature nodes on the circle.
pub const CONTOUR_NODES: usize = 256;

/// Kernel of one mode: `L_a(x) = sum_q coef[q][a] e^(i x z_q)`.
#[derive(Debug, Clone)]
pub struct ModeKernel {
    pub eta: f64,
    pub xi_prime: Vec<f64>,
    m: usize,
    nodes: Vec<C64>,
    /// Row-major `nodes x m`.
    coef: Vec<C64>,
    /// Quadrature weights `w_q` of `(1/2 pi i) int g / M_+`.
    weights: Vec<C64>,
    pub raw_trace: DMatrix<C64>,
    pub raw_trace_inv: DMatrix<C64>,
    pub trace_cond: f64,
    pub contour: bool,
    /// `min Im rho_+`.
    pub decay: f64,
}

fn numerator(c_plus: &[C64], alpha: usize, z: C64) -> C64 {
    let m = c_plus.len() - 1;
    (0..m - alpha).fold(C64::new(0.0, 0.0), |acc, l| acc * z + c_plus[l])
}

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Nodes and weights with `(1/2 pi i) int_gamma g(z)/M_+(z) dz = sum w_q g(z_q)`
/// for entire `g`. Second value tells whether the contour fallback is used.
fn quadrature(fact: &SymbolFactorization) -> Result<(Vec<C64>, Vec<C64>, bool)> {
    let rho = &fact.rho_plus;
    let scale = 1.0 + rho.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let mut min_dist = f64::INFINITY;
    for i in 0..rho.len() {
        for j in 0..i {
            min_dist = min_dist.min((rho[i] - rho[j]).norm());
        }
    }
    if min_dist > CLUSTER_TOL * scale {
        let weights = rho
            .iter()
            .enumerate()
            .map(|(j, &r)| {
                let d: C64 = rho
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, &q)| r - q)
                    .product();
                1.0 / d
            })
            .collect();
        return Ok((rho.clone(), weights, false));
    }
    let centre: C64 = rho.iter().sum::<C64>() / rho.len() as f64;
    let spread = rho.iter().map(|r| (r - centre).norm()).fold(0.0, f64::max);
    let radius = (2.0 * spread).max(0.5 * centre.im);
    if radius >= centre.im {
        return Err(Error::RootFinder(format!(
            "cannot enclose clustered roots at {} without touching the real axis",
            fact.mode()
        )));
    }
    let q = CONTOUR_NODES;
    let mut nodes = Vec::with_capacity(q);
    let mut weights = Vec::with_capacity(q);
    for j in 0..q {
        let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / q as f64);
        let z = centre + radius * e;
        nodes.push(z);
        weights.push(radius / q as f64 * e / poly::horner_desc(&fact.c_plus, z));
    }
    Ok((nodes, weights, true))
}

/// Kernel at one mode.
pub fn build_mode_kernel(fact: &SymbolFactorization) -> Result<ModeKernel> {
    let m = fact.m();
    let (nodes, weights, contour) = quadrature(fact)?;
    let num: Vec<Vec<C64>> = nodes
        .iter()
        .map(|&z| (0..m).map(|a| numerator(&fact.c_plus, a, z)).collect())
        .collect();
    let mut raw = DMatrix::<C64>::zeros(m, m);
    for (q, &z) in nodes.iter().enumerate() {
        let mut zb = C64::new(1.0, 0.0);
        for b in 0..m {
            for a in 0..m {
                raw[(b, a)] += weights[q] * zb * num[q][a];
            }
            zb *= z;
        }
    }
    let mode = || ModePoint::new(fact.eta, &fact.xi_prime);
    let inv = raw
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::IllConditionedTrace {
            mode: mode(),
            cond: f64::INFINITY,
        })?;
    let cond = one_norm(&raw) * one_norm(&inv);
    if !(cond <= TRACE_COND_MAX) {
        return Err(Error::IllConditionedTrace { mode: mode(), cond });
    }
    let mut coef = vec![C64::new(0.0, 0.0); nodes.len() * m];
    for q in 0..nodes.len() {
        for a in 0..m {
            coef[q * m + a] = weights[q] * (0..m).map(|b| num[q][b] * inv[(b, a)]).sum::<C64>();
        }
    }
    Ok(ModeKernel {
        eta: fact.eta,
        xi_prime: fact.xi_prime.clone(),
        m,
        nodes,
        coef,
        weights,
        raw_trace: raw,
        raw_trace_inv: inv,
        trace_cond: cond,
        contour,
        decay: fact.rho_plus.iter().map(|r| r.im).fold(f64::INFINITY, f64::min),
    })
}

impl ModeKernel {
    pub fn m(&self) -> usize {
        self.m
    }

    /// `L_a(x)` for `a = 0..m`, any real `x >= 0`.
    pub fn eval(&self, x: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.m];
        for (q, &z) in self.nodes.iter().enumerate() {
            let e = (C64::new(0.0, x) * z).exp();
            for (a, o) in out.iter_mut().enumerate() {
                *o += self.coef[q * self.m + a] * e;
            }
        }
        out
    }

    /// `D_n^b L_a(0)` from the quadrature; the identity up to rounding.
    pub fn symbol_trace(&self) -> DMatrix<C64> {
        let mut t = DMatrix::<C64>::zeros(self.m, self.m);
        for (q, &z) in self.nodes.iter().enumerate() {
            let mut zb = C64::new(1.0, 0.0);
            for b in 0..self.m {
                for a in 0..self.m {
                    t[(b, a)] += zb * self.coef[q * self.m + a];
                }
                zb *= z;
            }
        }
        t
    }

    /// Raw kernel `L~_a(x)` before the trace correction.
    pub fn eval_raw(&self, c_plus: &[C64], x: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.m];
        for (q, &z) in self.nodes.iter().enumerate() {
            let e = self.weights[q] * (C64::new(0.0, x) * z).exp();
            for (a, o) in out.iter_mut().enumerate() {
                *o += e * numerator(c_plus, a, z);
            }
        }
        out
    }
}

/// Kernels at every retained mode of a factor table.
#[derive(Debug, Clone)]
pub struct BoundaryKernel {
    pub(crate) layout: Layout,
    modes: Vec<Option<ModeKernel>>,
    /// Largest trace condition number over the modes.
    pub max_trace_cond: f64,
    /// Number of modes that needed the contour fallback.
    pub contour_modes: usize,
}

impl BoundaryKernel {
    pub fn mode(&self, ti: usize, tflat: usize) -> Option<&ModeKernel> {
        self.modes[ti * self.layout.tang_len + tflat].as_ref()
    }

    pub fn modes(&self) -> impl Iterator<Item = &ModeKernel> {
        self.modes.iter().flatten()
    }

    pub fn m(&self) -> usize {
        self.modes().next().map_or(0, |k| k.m)
    }
}

pub fn build_boundary_kernel(table: &FactorTable) -> Result<BoundaryKernel> {
    let lay = table.layout.clone();
    let modes = (0..lay.n_t * lay.tang_len)
        .into_par_iter()
        .map(|idx| {
            table
                .entry(idx / lay.tang_len, idx % lay.tang_len)
                .map(build_mode_kernel)
                .transpose()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let max_trace_cond = modes.iter().flatten().map(|k| k.trace_cond).fold(0.0, f64::max);
    let contour_modes = modes.iter().flatten().filter(|k| k.contour).count();
    Ok(BoundaryKernel {
        layout: lay,
        modes,
        max_trace_cond,
        contour_modes,
    })
}
