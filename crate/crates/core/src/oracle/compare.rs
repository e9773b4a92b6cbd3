//! Mode-by-mode comparison of half-space solutions with the ODE oracle.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::field::TPField;
use crate::halfspace::{mode_lines, Layout};
use crate::symbol::OperatorTuple;

use super::{decay_margin, ode_oracle, relative_l2, ModeODEProblem, FAR_DECAY};

type C64 = Complex64;

/// The oracle runs on a normal grid this many times finer than the solver's.
pub const ORACLE_REFINE: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct ModeComparison {
    pub k: f64,
    pub xi_prime: Vec<f64>,
    /// `|u_hat - u_oracle| / |u_oracle|` over the half-box nodes of the line.
    pub relative_l2: f64,
}

/// Local degree-7 Lagrange interpolation of samples `v_j = v(j h)`; zero
/// beyond the last sample.
fn interpolate(v: &[C64], h: f64, x: f64) -> C64 {
    let s = x / h;
    let n = v.len();
    if s > (n - 1) as f64 {
        return C64::new(0.0, 0.0);
    }
    let j = s.round() as usize;
    if (s - j as f64).abs() < 1e-12 {
        return v[j];
    }
    let lo = (s.floor() as usize).saturating_sub(3).min(n.saturating_sub(8));
    let nodes = lo..(lo + 8).min(n);
    let mut acc = C64::new(0.0, 0.0);
    for i in nodes.clone() {
        let mut w = 1.0;
        for q in nodes.clone() {
            if q != i {
                w *= (s - q as f64) / (i as f64 - q as f64);
            }
        }
        acc += v[i] * w;
    }
    acc
}

/// Compares the half-box solution `u` of `(tuple, f, g)` with [`ode_oracle`]
/// on the `(k, xi')` lines carrying the most data, at most `max_lines` of
/// them. `g` holds the values `B_j u` (symbol traces for Dirichlet tuples).
pub fn compare_halfspace(
    tuple: &OperatorTuple,
    f: &TPField,
    g: &[TPField],
    u: &TPField,
    max_lines: usize,
) -> Result<Vec<ModeComparison>> {
    u.same_grid(f)?;
    let grid = u.grid_arc().clone();
    let lay = Layout::of(&grid)?;
    let u_lines = mode_lines(u)?;
    let f_lines = mode_lines(&f.to_physical())?;
    let bvol = grid.boundary().volume();
    let g_spec: Vec<Vec<C64>> = g
        .iter()
        .map(|gj| gj.to_spectral().data().iter().map(|x| x / bvol).collect())
        .collect();
    let half = lay.n_n / 2;
    let h = lay.spacing;
    let lines = lay.n_t * lay.tang_len;
    let mut weights: Vec<(usize, f64)> = (0..lines)
        .filter(|&l| l / lay.tang_len != 0 && !lay.line_is_nyquist(l / lay.tang_len, l % lay.tang_len))
        .map(|l| {
            let fw: f64 = f_lines[l * lay.n_n..(l + 1) * lay.n_n].iter().map(|v| v.norm_sqr()).sum::<f64>() * h;
            let gw: f64 = g_spec.iter().map(|s| s[l].norm_sqr()).sum();
            (l, fw + gw)
        })
        .collect();
    let top = weights.iter().map(|w| w.1).fold(0.0, f64::max);
    weights.retain(|w| w.1 > 1e-20 * top && w.1 > 0.0);
    weights.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    weights.truncate(max_lines);
    weights.sort_by_key(|w| w.0);
    let ks = grid.time_frequencies();
    weights
        .into_iter()
        .map(|(l, _)| {
            let xi = lay.tangential_frequencies(&grid, l % lay.tang_len);
            let k = ks[l / lay.tang_len];
            let margin = decay_margin(&tuple.interior, k, &xi)?;
            let x_need = (1.25 * FAR_DECAY / margin).max(lay.half_length);
            let n_ode = ORACLE_REFINE * (x_need / h).ceil() as usize;
            let ho = h / ORACLE_REFINE as f64;
            let fl = &f_lines[l * lay.n_n + half..(l + 1) * lay.n_n];
            let prob = ModeODEProblem::from_fn(
                k,
                &xi,
                tuple,
                |x| interpolate(fl, h, x),
                g_spec.iter().map(|s| s[l]).collect(),
                n_ode as f64 * ho,
                n_ode,
            );
            let ode = ode_oracle(&prob)?;
            let ul = &u_lines[l * lay.n_n + half..(l + 1) * lay.n_n];
            let at_nodes: Vec<C64> = ode.iter().step_by(ORACLE_REFINE).take(ul.len()).copied().collect();
            Ok(ModeComparison {
                k,
                xi_prime: xi,
                relative_l2: relative_l2(ul, &at_nodes),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_exact_on_polynomials() {
        let h = 0.25;
        let v: Vec<C64> = (0..20).map(|j| C64::new((j as f64 * h).powi(5), 1.0)).collect();
        for &x in &[0.1, 1.3, 4.6, 4.74] {
            let e = interpolate(&v, h, x) - C64::new(x.powi(5), 1.0);
            assert!(e.norm() < 1e-10, "{x}: {e}");
        }
        assert_eq!(interpolate(&v, h, 10.0), C64::new(0.0, 0.0));
    }
}
