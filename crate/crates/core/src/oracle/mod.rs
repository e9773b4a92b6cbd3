//! Reference computations used to validate the solvers: a per-mode ODE
//! boundary value solver, closed-form heat modes, residuals, convergence
//! tables and estimate sweeps.

mod band;
mod compare;
pub mod sweep;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ModePoint, Result};
use crate::factor::split_roots;
use crate::field::TPField;
use crate::halfspace::apply_operator_half;
use crate::poly;
use crate::symbol::{DifferentialSymbol, OperatorTuple};
use crate::wholespace::residual_wholespace;

pub use band::{BandSystem, Singular};
pub use compare::{compare_halfspace, ModeComparison, ORACLE_REFINE};
pub use sweep::{
    sweep_halfspace, sweep_single_modes, sweep_wholespace, HalfSweepConfig, SingleModeSweep, SweepReport,
};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Whole,
    Half,
}

/// Required `X_max * min |Im rho|` so that the far boundary does not matter.
pub const FAR_DECAY: f64 = 18.0;

/// `i k u + A(xi', D_n) u = f` on `[0, X_max]` with `B_j u(0) = bc_j` and
/// `u = d u = ... = d^(m-1) u = 0` at `X_max`.
#[derive(Debug, Clone)]
pub struct ModeODEProblem {
    pub k: f64,
    pub xi_prime: Vec<f64>,
    pub tuple: OperatorTuple,
    /// Samples at `x_i = i X_max / n_ode`, `i = 0..=n_ode`.
    pub rhs: Vec<C64>,
    pub bc: Vec<C64>,
    pub x_max: f64,
    pub n_ode: usize,
}

impl ModeODEProblem {
    pub fn from_fn(
        k: f64,
        xi_prime: &[f64],
        tuple: &OperatorTuple,
        f: impl Fn(f64) -> C64,
        bc: Vec<C64>,
        x_max: f64,
        n_ode: usize,
    ) -> Self {
        let h = x_max / n_ode as f64;
        Self {
            k,
            xi_prime: xi_prime.to_vec(),
            tuple: tuple.clone(),
            rhs: (0..=n_ode).map(|i| f(i as f64 * h)).collect(),
            bc,
            x_max,
            n_ode,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.x_max / self.n_ode as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..=self.n_ode).map(|i| i as f64 * h).collect()
    }
}

/// Weights of the `order`-th derivative at offset 0 from values at the given
/// offsets (in units of the spacing), from the moment conditions
/// `sum_j w_j s_j^q = q! delta_{q,order}`.
pub fn vandermonde_weights(offsets: &[f64], order: usize) -> Vec<f64> {
    let w = offsets.len();
    let a = DMatrix::from_fn(w, w, |q, j| offsets[j].powi(q as i32));
    let mut rhs = nalgebra::DVector::zeros(w);
    rhs[order] = (1..=order).map(|v| v as f64).product();
    a.lu().solve(&rhs).expect("distinct offsets").iter().copied().collect()
}

/// Row values for `sum_b p_b D^b` at a node, `D = -i d/dx`.
fn operator_row(poly_asc: &[C64], offsets: &[f64], h: f64) -> Vec<C64> {
    let mut row = vec![C64::new(0.0, 0.0); offsets.len()];
    for (b, &p) in poly_asc.iter().enumerate() {
        if p.norm() == 0.0 {
            continue;
        }
        let s = p * C64::new(0.0, -1.0).powu(b as u32) / h.powi(b as i32);
        for (r, w) in row.iter_mut().zip(vandermonde_weights(offsets, b)) {
            *r += s * w;
        }
    }
    row
}

fn offsets(lo: usize, width: usize, at: usize) -> Vec<f64> {
    (lo..lo + width).map(|j| j as f64 - at as f64).collect()
}

/// `min |Im rho|` over the roots of `ik + A(xi', z)`; homogeneous solutions
/// decay like `exp(-margin x_n)`.
pub fn decay_margin(op: &DifferentialSymbol, k: f64, xi_prime: &[f64]) -> Result<f64> {
    let mut p = op.normal_polynomial(xi_prime)?;
    p[0] += C64::new(0.0, k);
    Ok(poly::roots(&p)?.iter().map(|r| r.im.abs()).fold(f64::INFINITY, f64::min))
}

/// Solves the mode equation by sixth-order finite differences; returns `u`
/// at [`ModeODEProblem::nodes`].
pub fn ode_oracle(prob: &ModeODEProblem) -> Result<Vec<C64>> {
    let m = prob.tuple.m();
    let n = prob.n_ode;
    let mode = || ModePoint::new(prob.k, &prob.xi_prime);
    if prob.rhs.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: prob.rhs.len(),
        });
    }
    if prob.bc.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: prob.bc.len(),
        });
    }
    let mut interior = prob.tuple.interior.normal_polynomial(&prob.xi_prime)?;
    interior[0] += C64::new(0.0, prob.k);
    let margin = decay_margin(&prob.tuple.interior, prob.k, &prob.xi_prime)?;
    if prob.x_max * margin < FAR_DECAY {
        return Err(Error::InvalidInput(format!(
            "X_max = {} too short for decay rate {margin:.3e} at {}",
            prob.x_max,
            mode()
        )));
    }
    let h = prob.spacing();
    let max_b = prob
        .tuple
        .boundary
        .iter()
        .map(|b| b.order() as usize)
        .max()
        .unwrap_or(0);
    let centred = 2 * m + 5;
    let shifted = 2 * m + 6;
    if n + 1 < shifted.max(max_b + 7) + 2 * m {
        return Err(Error::InvalidInput(format!("n_ode = {n} too small")));
    }
    let mut sys = BandSystem::new(n + 1);
    let mut rhs = vec![C64::new(0.0, 0.0); n + 1];

    let bw = max_b + 7;
    for (j, b) in prob.tuple.boundary.iter().enumerate() {
        let p = b.normal_polynomial(&prob.xi_prime)?;
        sys.set_row(j, 0, operator_row(&p, &offsets(0, bw, 0), h));
        rhs[j] = prob.bc[j];
    }

    let half = centred / 2;
    let centred_row = operator_row(&interior, &offsets(0, centred, half), h);
    for i in m..=n - m {
        if i >= half && i + half <= n {
            sys.set_row(i, i - half, centred_row.clone());
        } else {
            let lo = i.saturating_sub(shifted / 2).min(n + 1 - shifted);
            sys.set_row(i, lo, operator_row(&interior, &offsets(lo, shifted, i), h));
        }
        rhs[i] = prob.rhs[i];
    }

    for b in 0..m {
        let width = b + 7;
        let lo = n + 1 - width;
        let w = vandermonde_weights(&offsets(lo, width, n), b);
        sys.set_row(n - m + 1 + b, lo, w.into_iter().map(|v| C64::new(v, 0.0)).collect());
    }
    sys.solve(rhs).map_err(|_| Error::SingularSystem { mode: mode() })
}

/// `g0 e^(i rho_+ x)` with `rho_+` the upper root of `ik + |xi'|^2 + z^2`.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticHeatMode {
    pub rho_plus: C64,
    pub g0: C64,
}

impl AnalyticHeatMode {
    pub fn eval(&self, x: f64) -> C64 {
        self.g0 * (C64::new(0.0, x) * self.rho_plus).exp()
    }
}

pub fn analytic_heat_halfspace(k: f64, xi_prime: &[f64], g0: C64) -> Result<AnalyticHeatMode> {
    let heat = DifferentialSymbol::heat(xi_prime.len() + 1);
    let split = split_roots(&heat, k, xi_prime)?;
    Ok(AnalyticHeatMode {
        rho_plus: split.plus[0],
        g0,
    })
}

/// Relative interior residual of `d_t u + A u = f`.
///
/// Whole space: over the full box, spectrally. Half space: on the slab
/// `x_n in [L_n/8, 7 L_n/8]`, with normal derivatives by finite differences
/// inside the half box and time/tangential derivatives spectrally. The
/// residual is divided by `|f|` on the same set, or by `|op[M] u|` there when
/// `f` vanishes.
pub fn manufactured_residual(u: &TPField, f: &TPField, op: &DifferentialSymbol, domain: Domain) -> Result<f64> {
    match domain {
        Domain::Whole => residual_wholespace(u, f, op),
        Domain::Half => {
            u.same_grid(f)?;
            let grid = u.grid_arc().clone();
            let lay = crate::halfspace::Layout::of(&grid)?;
            let mu = apply_operator_half(u, op)?;
            let r = mu.sub(&f.to_physical())?;
            let normal = grid.axis(lay.dim - 1);
            let (a, b) = (normal.half_length / 8.0, 7.0 * normal.half_length / 8.0);
            let nodes = grid.nodes(lay.dim - 1);
            let slab = |v: &TPField| -> f64 {
                let s: f64 = v
                    .data()
                    .chunks(lay.n_n)
                    .flat_map(|line| line.iter().zip(&nodes))
                    .filter(|(_, &x)| x >= a && x <= b)
                    .map(|(v, _)| v.norm_sqr())
                    .sum();
                s.sqrt()
            };
            let num = slab(&r);
            let den = match slab(&f.to_physical()) {
                d if d > 0.0 => d,
                _ => slab(&mu),
            };
            Ok(if den == 0.0 { num } else { num / den })
        }
    }
}

/// Errors per resolution and `log2(e_i / e_(i+1))`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub resolutions: Vec<usize>,
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

impl ConvergenceTable {
    pub fn is_monotone(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0])
    }
}

/// Runs `error` at each resolution (at least three).
pub fn convergence_study(resolutions: &[usize], error: impl Fn(usize) -> Result<f64>) -> Result<ConvergenceTable> {
    if resolutions.len() < 3 {
        return Err(Error::InvalidInput("convergence study needs at least three resolutions".into()));
    }
    let errors = resolutions.iter().map(|&r| error(r)).collect::<Result<Vec<_>>>()?;
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(ConvergenceTable {
        resolutions: resolutions.to_vec(),
        errors,
        orders,
    })
}

/// Relative L2 distance over all entries, `|a - b| / |b|`.
pub fn relative_l2(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

