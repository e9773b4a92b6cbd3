//! Inversion of `d_t + A` on purely oscillatory data over `T x R^n`.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::ellipticity::{angle_distance, ANGLE_TOL};
use crate::error::{Error, Result};
use crate::field::{map_modes, TPField};
use crate::fourier::{apply_multiplier, bessel_norm, ensure_oscillatory, lp_norm, project_osc};
use crate::grid::{parabolic_length, GroupGrid};
use crate::symbol::DifferentialSymbol;

type C64 = Complex64;

/// `|ik + A(xi)| >= INVERT_TOL * (1 + |(k, xi)|^(2m))` is required at every
/// retained mode.
pub const INVERT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct WholeSpaceProblem {
    pub op: DifferentialSymbol,
    pub grid: Arc<GroupGrid>,
    pub f: TPField,
}

impl WholeSpaceProblem {
    pub fn new(op: DifferentialSymbol, f: TPField) -> Result<Self> {
        if op.dim() != f.grid().dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                got: f.grid().dim(),
            });
        }
        if op.order() == 0 || op.order() % 2 != 0 {
            return Err(Error::InvalidSymbol(format!(
                "interior order must be even and positive, got {}",
                op.order()
            )));
        }
        Ok(Self {
            grid: f.grid_arc().clone(),
            op,
            f,
        })
    }

    pub fn m(&self) -> usize {
        (self.op.order() / 2) as usize
    }
}

/// The full symbol `ik + A(xi)`.
pub fn full_symbol(op: &DifferentialSymbol, k: f64, xi: &[f64]) -> C64 {
    C64::new(0.0, k) + op.eval(xi).expect("dimension checked")
}

/// True when the principal symbol at `xi` lies on one of the rays `+-pi/2`
/// (or vanishes), i.e. Agmon's condition fails there.
fn principal_on_imaginary_axis(op: &DifferentialSymbol, xi: &[f64]) -> bool {
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if r == 0.0 {
        return false;
    }
    let unit: Vec<f64> = xi.iter().map(|x| x / r).collect();
    let v = op.principal_part().eval(&unit).expect("dimension checked");
    let scale: f64 = op.principal_part().coeffs().values().map(|c| c.norm()).sum();
    v.norm() <= 1e-9 * scale
        || angle_distance(v.arg(), std::f64::consts::FRAC_PI_2) <= ANGLE_TOL
        || angle_distance(v.arg(), -std::f64::consts::FRAC_PI_2) <= ANGLE_TOL
}

/// Verifies the invertibility tolerance at all retained modes `k != 0`.
pub fn check_invertible(op: &DifferentialSymbol, grid: &GroupGrid) -> Result<()> {
    let m = (op.order() / 2) as usize;
    let bad: Mutex<Option<(usize, Vec<usize>, f64, Vec<f64>)>> = Mutex::new(None);
    let mut scratch = vec![C64::new(0.0, 0.0); grid.len()];
    map_modes(grid, &mut scratch, |mode, _| {
        if mode.time_index == 0 || mode.nyquist {
            return;
        }
        let val = full_symbol(op, mode.k, mode.xi);
        let len = parabolic_length(mode.k, mode.xi, m);
        if val.norm() < INVERT_TOL * (1.0 + len.powi(2 * m as i32)) {
            let mut guard = bad.lock().unwrap();
            let key = (mode.time_index, mode.spatial_index.to_vec());
            let replace = match guard.as_ref() {
                None => true,
                Some((t, s, _, _)) => (key.0, &key.1) < (*t, s),
            };
            if replace {
                *guard = Some((key.0, key.1, mode.k, mode.xi.to_vec()));
            }
        }
    });
    if let Some((_, _, k, xi)) = bad.into_inner().unwrap() {
        let agmon_violation = principal_on_imaginary_axis(op, &xi);
        return Err(Error::SymbolVanishes {
            k,
            xi,
            agmon_violation,
        });
    }
    Ok(())
}

/// `u_hat = f_hat / (ik + A(xi))` for `k != 0`, zero on the mean plane.
/// Returns `u` in physical state.
pub fn solve_wholespace(prob: &WholeSpaceProblem) -> Result<TPField> {
    ensure_oscillatory(&prob.f)?;
    check_invertible(&prob.op, &prob.grid)?;
    let op = &prob.op;
    let u = apply_multiplier(&prob.f, |k, xi| 1.0 / full_symbol(op, k, xi), true)?;
    Ok(u.to_physical())
}

/// `op[ik + A] u`, in the state of `u`.
pub fn apply_operator(op: &DifferentialSymbol, u: &TPField) -> TPField {
    apply_multiplier(u, |k, xi| full_symbol(op, k, xi), false).expect("no mean check")
}

/// `|op[M] u - P_perp f|_2 / |P_perp f|_2`; the absolute residual when
/// `P_perp f = 0`.
pub fn residual_wholespace(u: &TPField, f: &TPField, op: &DifferentialSymbol) -> Result<f64> {
    u.same_grid(f)?;
    let f_osc = project_osc(&f.to_physical());
    let r = apply_operator(op, u).to_physical().sub(&f_osc)?;
    let denom = lp_norm(&f_osc, 2.0);
    let num = lp_norm(&r, 2.0);
    Ok(if denom == 0.0 { num } else { num / denom })
}

/// `|u|_{H^s} / (|op[M] u|_{H^(s-2m)} + |u|_{H^(s-1)})` with Bessel-potential
/// norms. Infinite when the denominator vanishes.
pub fn estimate_ratio_ws(u: &TPField, op: &DifferentialSymbol, s: f64, p: f64) -> Result<f64> {
    let m = (op.order() / 2) as usize;
    let num = bessel_norm(u, s, p, m)?;
    let mu = apply_operator(op, u);
    let den = bessel_norm(&mu, s - 2.0 * m as f64, p, m)? + bessel_norm(u, s - 1.0, p, m)?;
    Ok(if den == 0.0 { f64::INFINITY } else { num / den })
}

/// Ratio of [`estimate_ratio_ws`] for a single mode `(k, xi)`:
/// `|(k,xi)|^s / (|ik + A| |(k,xi)|^(s-2m) + |(k,xi)|^(s-1))`.
pub fn single_mode_ratio(op: &DifferentialSymbol, k: f64, xi: &[f64], s: f64) -> f64 {
    let m = (op.order() / 2) as usize;
    let len = parabolic_length(k, xi, m);
    let val = full_symbol(op, k, xi).norm();
    len.powf(s) / (val * len.powf(s - 2.0 * m as f64) + len.powf(s - 1.0))
}
