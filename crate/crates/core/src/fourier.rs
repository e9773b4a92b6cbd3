//! Projections, Fourier multipliers and norms on `T x R^n`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{map_modes, ModeRef, State, TPField};
use crate::grid::{parabolic_length, storage_index, GroupGrid};
use crate::symbol::multi_indices;

type C64 = Complex64;

/// Relative size of the time mean below which data counts as purely
/// oscillatory.
pub const MEAN_TOL: f64 = 1e-12;

const SUM_CHUNK: usize = 1 << 12;

/// Sum of `f(v)` over the data in fixed-size chunks, so the result does not
/// depend on the thread count.
fn chunked_sum(data: &[C64], f: impl Fn(&C64) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = data
        .par_chunks(SUM_CHUNK)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// `P u`: the time mean, returned in the state of `u`.
pub fn project_mean(u: &TPField) -> TPField {
    let mut out = u.clone();
    let plane = u.grid().plane_len().max(1);
    match u.state() {
        State::Spectral => {
            out.data_mut()[plane..].iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        }
        State::Physical => {
            let n_t = u.grid().n_t();
            let mut mean = vec![C64::new(0.0, 0.0); plane];
            for chunk in u.data().chunks(plane) {
                mean.iter_mut().zip(chunk).for_each(|(m, v)| *m += v);
            }
            mean.iter_mut().for_each(|m| *m /= n_t as f64);
            for chunk in out.data_mut().chunks_mut(plane) {
                chunk.copy_from_slice(&mean);
            }
        }
    }
    out
}

/// `P_perp u = u - P u`.
pub fn project_osc(u: &TPField) -> TPField {
    let mean = project_mean(u);
    u.sub(&mean).expect("same grid and state")
}

/// `|P u|_2 / |u|_2`, zero for the zero field.
pub fn mean_fraction(u: &TPField) -> f64 {
    let total = lp_norm(u, 2.0);
    if total == 0.0 {
        return 0.0;
    }
    lp_norm(&project_mean(u), 2.0) / total
}

pub fn ensure_oscillatory(u: &TPField) -> Result<()> {
    let relative = mean_fraction(u);
    if relative > MEAN_TOL {
        return Err(Error::MeanNotZero { relative });
    }
    Ok(())
}

/// `op[m] u = F^{-1}[m F[u]]`.
///
/// The multiplier receives `(k, xi)`. Nyquist planes are zeroed. With
/// `osc_only` the `k = 0` plane is zeroed as well and never evaluated, and the
/// input must have vanishing time mean. The result is returned in the state
/// of `u`.
pub fn apply_multiplier<M>(u: &TPField, m: M, osc_only: bool) -> Result<TPField>
where
    M: Fn(f64, &[f64]) -> C64 + Sync,
{
    if osc_only {
        ensure_oscillatory(u)?;
    }
    let state = u.state();
    let mut s = u.to_spectral();
    let grid = s.grid_arc().clone();
    map_modes(&grid, s.data_mut(), |mode: &ModeRef<'_>, v| {
        if mode.nyquist || (osc_only && mode.time_index == 0) {
            *v = C64::new(0.0, 0.0);
        } else {
            *v *= m(mode.k, mode.xi);
        }
    });
    Ok(s.to_state(state))
}

/// Discrete `L^p` norm with the normalized time measure,
/// `((1/N_t) prod(2L_i/N_i) sum |u|^p)^(1/p)`.
pub fn lp_norm(u: &TPField, p: f64) -> f64 {
    let phys = u.to_physical();
    let w = u.grid().node_weight();
    if p.is_infinite() {
        return phys.max_abs();
    }
    let s = if p == 2.0 {
        chunked_sum(phys.data(), |v| v.norm_sqr())
    } else {
        chunked_sum(phys.data(), |v| v.norm().powf(p))
    };
    (w * s).powf(1.0 / p)
}

/// Spectral counterpart of `lp_norm(u, 2)^2`: `sum |u_hat|^2 / prod(2 L_i)`.
pub fn spectral_energy(u: &TPField) -> f64 {
    let s = u.to_spectral();
    chunked_sum(s.data(), |v| v.norm_sqr()) / u.grid().volume()
}

/// `(|d_t u|_p^p + sum_{|alpha| <= 2m} |d^alpha u|_p^p)^(1/p)` with all
/// derivatives taken spectrally.
pub fn sobolev_norm(u: &TPField, p: f64, m: usize) -> f64 {
    let spec = u.to_spectral();
    let dt = apply_multiplier(&spec, |k, _| C64::new(0.0, k), false).expect("no mean check");
    let mut total = lp_norm(&dt, p).powf(p);
    let n = u.grid().dim();
    for d in 0..=(2 * m as u32) {
        for alpha in multi_indices(n, d) {
            let du = apply_multiplier(
                &spec,
                |_, xi| {
                    alpha
                        .iter()
                        .zip(xi)
                        .map(|(&a, &x)| C64::new(0.0, x).powu(a))
                        .product()
                },
                false,
            )
            .expect("no mean check");
            total += lp_norm(&du, p).powf(p);
        }
    }
    total.powf(1.0 / p)
}

/// `|op[|(k, xi)|^s] u|_p` on purely oscillatory `u`.
pub fn bessel_norm(u: &TPField, s: f64, p: f64, m: usize) -> Result<f64> {
    let v = apply_multiplier(u, |k, xi| C64::new(parabolic_length(k, xi, m).powf(s), 0.0), true)?;
    Ok(lp_norm(&v, p))
}

/// Multiplier proxy for the boundary data norm of order `kappa`:
/// `|g|_p + |op[|(k, xi')|^(2 m kappa)] g|_p`. Equivalent to the trace space
/// norm for `p = 2`.
pub fn trace_norm(g: &TPField, kappa: f64, p: f64, m: usize) -> Result<f64> {
    ensure_oscillatory(g)?;
    let s = 2.0 * m as f64 * kappa;
    let lifted = apply_multiplier(g, |k, xi| C64::new(parabolic_length(k, xi, m).powf(s), 0.0), true)?;
    Ok(lp_norm(g, p) + lp_norm(&lifted, p))
}

fn half_axis(grid: &GroupGrid) -> Result<usize> {
    grid.half_space_axis()
        .ok_or_else(|| Error::InvalidGrid("grid has no half-space axis".into()))
}

/// Applies `w(j)` (indexed by the node number along the half-space axis) to a
/// physical field.
fn weight_normal(u: &TPField, w: impl Fn(usize) -> f64 + Sync) -> Result<TPField> {
    u.expect_state(State::Physical)?;
    let axis = half_axis(u.grid())?;
    let shape = u.grid().shape();
    let n = shape[axis + 1];
    let inner: usize = shape[axis + 2..].iter().product();
    let mut out = u.clone();
    out.data_mut()
        .par_chunks_mut(n * inner)
        .for_each(|block| {
            for j in 0..n {
                let wj = w(j);
                if wj != 1.0 {
                    block[j * inner..(j + 1) * inner].iter_mut().for_each(|v| *v *= wj);
                }
            }
        });
    Ok(out)
}

/// Multiplication by the indicator of `x_n >= 0` (physical state).
pub fn restrict_half(u: &TPField) -> Result<TPField> {
    let n = u.grid().axis(half_axis(u.grid())?).points;
    weight_normal(u, |j| if j >= n / 2 { 1.0 } else { 0.0 })
}

/// Multiplication by the indicator of `x_n < 0` (physical state).
pub fn restrict_lower(u: &TPField) -> Result<TPField> {
    let n = u.grid().axis(half_axis(u.grid())?).points;
    weight_normal(u, |j| if j < n / 2 { 1.0 } else { 0.0 })
}

/// Indicator of `x_n > 0` with weight 1/2 on the node `x_n = 0`, the
/// trapezoidal sampling of a jump. Used between the two factor inversions.
pub fn heaviside_mask(u: &TPField) -> Result<TPField> {
    let n = u.grid().axis(half_axis(u.grid())?).points;
    weight_normal(u, |j| match j.cmp(&(n / 2)) {
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => 0.5,
        std::cmp::Ordering::Greater => 1.0,
    })
}

/// Number of samples of a half-box field: the full shape with the normal
/// axis cut to the nodes `x_n >= 0`.
pub fn half_shape(grid: &GroupGrid) -> Result<Vec<usize>> {
    let axis = half_axis(grid)?;
    let mut shape = grid.shape();
    shape[axis + 1] /= 2;
    Ok(shape)
}

/// Embeds samples on `x_n in [0, L_n)` into the full box, zero on `x_n < 0`.
pub fn extend_zero(grid: Arc<GroupGrid>, half: &[C64]) -> Result<TPField> {
    let hs = half_shape(&grid)?;
    let expected: usize = hs.iter().product();
    if half.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: half.len(),
        });
    }
    let axis = half_axis(&grid)?;
    let shape = grid.shape();
    let n = shape[axis + 1];
    let inner: usize = shape[axis + 2..].iter().product();
    let mut out = TPField::zeros(grid, State::Physical);
    out.data_mut()
        .chunks_mut(n * inner)
        .zip(half.chunks(n / 2 * inner))
        .for_each(|(full, h)| full[n / 2 * inner..].copy_from_slice(h));
    Ok(out)
}

/// The samples of `u` on `x_n >= 0` (inverse of [`extend_zero`]).
pub fn half_samples(u: &TPField) -> Result<Vec<C64>> {
    u.expect_state(State::Physical)?;
    let axis = half_axis(u.grid())?;
    let shape = u.grid().shape();
    let n = shape[axis + 1];
    let inner: usize = shape[axis + 2..].iter().product();
    Ok(u.data()
        .chunks(n * inner)
        .flat_map(|block| block[n / 2 * inner..].iter().copied())
        .collect())
}

/// One Fourier mode `amplitude * e^(i (k t + xi . x))` given by signed
/// integer indices: `k = (2 pi / T) k_index`, `xi_i = (pi / L_i) xi_index_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMode {
    pub k: i64,
    pub xi: Vec<i64>,
    pub amplitude: C64,
}

/// The field `sum amplitude e^(i (k t + xi . x))`, in physical state. Indices
/// must be representable on the grid and off the Nyquist planes.
pub fn synthesize(grid: Arc<GroupGrid>, modes: &[SpectralMode]) -> Result<TPField> {
    let shape = grid.shape();
    let mut out = TPField::zeros(grid.clone(), State::Spectral);
    let vol = grid.volume();
    for mode in modes {
        if mode.xi.len() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: mode.xi.len(),
            });
        }
        let mut flat = 0;
        for (idx, &n) in std::iter::once(&mode.k).chain(&mode.xi).zip(&shape) {
            let q = storage_index(*idx, n)
                .filter(|&q| q != n / 2)
                .ok_or_else(|| Error::InvalidInput(format!("mode index {idx} not resolved by {n} points")))?;
            flat = flat * n + q;
        }
        out.data_mut()[flat] += mode.amplitude * vol;
    }
    Ok(out.to_physical())
}
