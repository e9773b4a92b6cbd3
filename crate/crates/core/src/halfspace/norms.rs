//! Norms of half-box fields. Time and tangential derivatives are spectral,
//! normal derivatives are finite differences on `x_n >= 0` so the jump of
//! the zero extension at `x_n = 0` does not enter.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{transform_axes, Direction, State, TPField};
use crate::fourier::trace_norm;
use crate::grid::{parabolic_length, TraceSpaceSpec};
use crate::symbol::{multi_indices, DifferentialSymbol};

use super::fd::normal_derivative;
use super::Layout;

type C64 = Complex64;

/// `L^p` norm over the nodes `x_n >= 0`, trapezoidal weight 1/2 at `x_n = 0`.
pub fn half_lp_norm(u: &TPField, p: f64) -> Result<f64> {
    let lay = Layout::of(u.grid())?;
    let phys = u.to_physical();
    let half = lay.n_n / 2;
    let lines: Vec<f64> = phys
        .data()
        .par_chunks(lay.n_n)
        .map(|line| {
            line[half..]
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let w = if i == 0 { 0.5 } else { 1.0 };
                    if p.is_infinite() {
                        v.norm()
                    } else {
                        w * v.norm().powf(p)
                    }
                })
                .fold(0.0, |a, b| if p.is_infinite() { f64::max(a, b) } else { a + b })
        })
        .collect();
    if p.is_infinite() {
        return Ok(lines.into_iter().fold(0.0, f64::max));
    }
    let sum: f64 = lines.iter().sum();
    Ok((sum * u.grid().node_weight()).powf(1.0 / p))
}

/// Multiplier in `(k, xi')` applied line by line along the normal axis.
/// Mean and Nyquist lines are zeroed when `osc_only` is set.
fn line_multiplier(u: &TPField, m: impl Fn(f64, &[f64]) -> C64 + Sync, osc_only: bool) -> Result<TPField> {
    let lay = Layout::of(u.grid())?;
    let grid = u.grid_arc().clone();
    let mut data = u.to_physical().into_data();
    let axes = lay.line_axes();
    transform_axes(&mut data, &grid, &axes, Direction::Forward);
    let ks = grid.time_frequencies();
    data.par_chunks_mut(lay.n_n).enumerate().for_each(|(line, vals)| {
        let ti = line / lay.tang_len;
        let tflat = line % lay.tang_len;
        let factor = if osc_only && (ti == 0 || lay.line_is_nyquist(ti, tflat)) {
            C64::new(0.0, 0.0)
        } else {
            m(ks[ti], &lay.tangential_frequencies(&grid, tflat))
        };
        vals.iter_mut().for_each(|v| *v *= factor);
    });
    transform_axes(&mut data, &grid, &axes, Direction::Inverse);
    TPField::from_data(grid, State::Physical, data)
}

/// `d_t u + A(D) u` on the half box: `D_n^b = (-i)^b d_n^b` by finite
/// differences, time and tangential factors spectrally. Zero on `x_n < 0`.
pub fn apply_operator_half(u: &TPField, op: &DifferentialSymbol) -> Result<TPField> {
    let lay = Layout::of(u.grid())?;
    if op.dim() != lay.dim {
        return Err(Error::DimensionMismatch {
            expected: lay.dim,
            got: op.dim(),
        });
    }
    let u = u.to_physical();
    let nt = lay.dim - 1;
    let max_b = op.coeffs().keys().map(|a| a[nt]).max().unwrap_or(0);
    let mut acc = TPField::zeros(u.grid_arc().clone(), State::Physical);
    for b in 0..=max_b {
        let terms: Vec<(&[u32], C64)> = op
            .coeffs()
            .iter()
            .filter(|(a, _)| a[nt] == b)
            .map(|(a, c)| (&a[..nt], *c))
            .collect();
        if terms.is_empty() && b > 0 {
            continue;
        }
        let dn = normal_derivative(&u, b as usize)?;
        let scale = C64::new(0.0, -1.0).powu(b);
        let v = line_multiplier(
            &dn,
            |k, xi| {
                let tang: C64 = terms
                    .iter()
                    .map(|(a, c)| c * a.iter().zip(xi).map(|(&p, &x)| x.powi(p as i32)).product::<f64>())
                    .sum();
                let time = if b == 0 { C64::new(0.0, k) } else { C64::new(0.0, 0.0) };
                (tang + time) * scale
            },
            false,
        )?;
        acc.axpy(C64::new(1.0, 0.0), &v)?;
    }
    Ok(acc)
}

/// `(|d_t u|_p^p + sum_{|alpha| <= 2m} |d^alpha u|_p^p)^(1/p)` on the half
/// box.
pub fn half_sobolev_norm(u: &TPField, p: f64, m: usize) -> Result<f64> {
    let lay = Layout::of(u.grid())?;
    let u = u.to_physical();
    let dt = line_multiplier(&u, |k, _| C64::new(0.0, k), false)?;
    let mut total = half_lp_norm(&dt, p)?.powf(p);
    let nt = lay.dim - 1;
    for j in 0..=2 * m {
        let dn = normal_derivative(&u, j)?;
        total += half_lp_norm(&dn, p)?.powf(p);
        if nt == 0 {
            continue;
        }
        for d in 1..=(2 * m - j) as u32 {
            for alpha in multi_indices(nt, d) {
                let v = line_multiplier(
                    &dn,
                    |_, xi| alpha.iter().zip(xi).map(|(&a, &x)| C64::new(0.0, x).powu(a)).product(),
                    false,
                )?;
                total += half_lp_norm(&v, p)?.powf(p);
            }
        }
    }
    Ok(total.powf(1.0 / p))
}

/// Proxy for `|u|_{H^s}` on the half box, `s` an integer:
/// `sum_{b <= s} |op[|(k, xi')|^(s-b)] d_n^b u|_2`.
pub fn half_bessel_proxy(u: &TPField, s: usize, m: usize) -> Result<f64> {
    let u = u.to_physical();
    let mut total = 0.0;
    for b in 0..=s {
        let dn = normal_derivative(&u, b)?;
        let e = (s - b) as f64;
        let v = line_multiplier(&dn, |k, xi| C64::new(parabolic_length(k, xi, m).powf(e), 0.0), true)?;
        total += half_lp_norm(&v, 2.0)?;
    }
    Ok(total)
}

/// The proxies `|u|_{H^(m+j)}`, `j = 0..m`, along the bootstrap of the
/// regularity argument.
pub fn bootstrap_chain(u: &TPField, m: usize) -> Result<Vec<f64>> {
    (0..=m).map(|j| half_bessel_proxy(u, m + j, m)).collect()
}

/// `|u|_{W^{1,2m}_p} / (|f|_p + sum_j |g_j|_{trace, kappa_j})` on the half
/// box.
pub fn estimate_ratio_hs(u: &TPField, f: &TPField, g: &[TPField], spec: &TraceSpaceSpec) -> Result<f64> {
    if g.len() != spec.m {
        return Err(Error::DimensionMismatch {
            expected: spec.m,
            got: g.len(),
        });
    }
    let num = half_sobolev_norm(u, spec.p, spec.m)?;
    let mut den = half_lp_norm(f, spec.p)?;
    for (gj, kappa) in g.iter().zip(spec.kappa()) {
        den += trace_norm(gj, kappa, spec.p, spec.m)?;
    }
    Ok(if den == 0.0 { f64::INFINITY } else { num / den })
}
