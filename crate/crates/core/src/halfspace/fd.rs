//! Finite-difference weights along the normal axis.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::field::{State, TPField};

use super::Layout;

type C64 = Complex64;

/// Accuracy order of all normal finite differences.
pub const FD_ORDER: usize = 6;

/// Weights of the `order`-th derivative at `x0` from values at `nodes`
/// (Fornberg's recursion).
pub fn fornberg(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// One-sided weights for `d^order/dx^order` at the first of `order + FD_ORDER`
/// unit-spaced nodes.
pub fn one_sided(order: usize) -> Vec<f64> {
    let nodes: Vec<f64> = (0..order + FD_ORDER).map(|i| i as f64).collect();
    fornberg(0.0, &nodes, order)
}

/// `d_n^order u` at every node `x_n >= 0` of a half-box field, zero on
/// `x_n < 0`. Stencils of `order + FD_ORDER` points, centred where they fit.
pub fn normal_derivative(u: &TPField, order: usize) -> Result<TPField> {
    u.expect_state(State::Physical)?;
    let lay = Layout::of(u.grid())?;
    let n = lay.n_n;
    let h = lay.spacing;
    let half = n / 2;
    let width = order + FD_ORDER;
    if half < width {
        return Err(crate::Error::InvalidGrid(format!(
            "half box has {half} normal nodes, derivative of order {order} needs {width}"
        )));
    }
    let scale = h.powi(order as i32);
    let stencils: Vec<(usize, Vec<f64>)> = (half..n)
        .map(|j| {
            let start = j.saturating_sub(width / 2).clamp(half, n - width);
            let nodes: Vec<f64> = (start..start + width).map(|i| i as f64 - j as f64).collect();
            let w = fornberg(0.0, &nodes, order).into_iter().map(|v| v / scale).collect();
            (start, w)
        })
        .collect();
    let mut out = TPField::zeros(u.grid_arc().clone(), State::Physical);
    out.data_mut()
        .par_chunks_mut(n)
        .zip(u.data().par_chunks(n))
        .for_each(|(o, line)| {
            for (j, (start, w)) in (half..n).zip(&stencils) {
                o[j] = w
                    .iter()
                    .zip(&line[*start..])
                    .map(|(wi, v)| v * wi)
                    .sum::<C64>();
            }
        });
    Ok(out)
}
