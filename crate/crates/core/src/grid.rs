//! Discretization of `T x R^n` by a periodic box and the matching dual grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One spatial direction: nodes `x_j = -L + j * 2L/N`, `j = 0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub half_length: f64,
    pub points: usize,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    /// Frequency of FFT-ordered index `q`.
    pub fn frequency(&self, q: usize) -> f64 {
        PI / self.half_length * signed_index(q, self.points) as f64
    }
}

/// Signed frequency index for FFT ordering: `0, 1, ..., N/2-1, -N/2, ..., -1`.
pub fn signed_index(q: usize, n: usize) -> i64 {
    if q < n / 2 {
        q as i64
    } else {
        q as i64 - n as i64
    }
}

/// FFT-ordered position of a signed index.
pub fn storage_index(s: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if s < -half || s >= half {
        None
    } else if s >= 0 {
        Some(s as usize)
    } else {
        Some((s + n as i64) as usize)
    }
}

/// The discretized group `T x R^n`: `n_t` time samples over one period and a
/// periodic box per spatial axis. Spectral data is stored in FFT order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupGrid {
    period: f64,
    n_t: usize,
    axes: Vec<Axis>,
    half_space_axis: Option<usize>,
}

impl GroupGrid {
    pub fn new(
        period: f64,
        n_t: usize,
        axes: Vec<Axis>,
        half_space_axis: Option<usize>,
    ) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidGrid(format!("period must be positive, got {period}")));
        }
        check_count("time samples", n_t)?;
        for (i, a) in axes.iter().enumerate() {
            check_count(&format!("points on axis {i}"), a.points)?;
            if !(a.half_length > 0.0 && a.half_length.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "half length on axis {i} must be positive, got {}",
                    a.half_length
                )));
            }
        }
        if let Some(h) = half_space_axis {
            if h >= axes.len() {
                return Err(Error::InvalidGrid(format!(
                    "half-space axis {h} out of range for {} axes",
                    axes.len()
                )));
            }
        }
        Ok(Self {
            period,
            n_t,
            axes,
            half_space_axis,
        })
    }

    /// A grid on `T x R^n` with `n >= 1` spatial axes.
    pub fn make(
        period: f64,
        n: usize,
        n_t: usize,
        axes: &[(f64, usize)],
        half_space_axis: Option<usize>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("spatial dimension must be at least 1".into()));
        }
        if axes.len() != n {
            return Err(Error::InvalidGrid(format!(
                "{n} spatial dimensions but {} axes given",
                axes.len()
            )));
        }
        Self::new(
            period,
            n_t,
            axes.iter()
                .map(|&(half_length, points)| Axis { half_length, points })
                .collect(),
            half_space_axis,
        )
    }

    /// The grid of `T x R^(n-1)` obtained by dropping the last axis; used for
    /// boundary data. May have zero spatial axes.
    pub fn boundary(&self) -> Self {
        let mut axes = self.axes.clone();
        axes.pop();
        Self {
            period: self.period,
            n_t: self.n_t,
            axes,
            half_space_axis: None,
        }
    }

    /// Same grid with every spatial point count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let mut g = self.clone();
        for a in &mut g.axes {
            a.points *= factor;
        }
        g
    }

    pub fn with_points(&self, axis: usize, points: usize) -> Result<Self> {
        let mut axes = self.axes.clone();
        axes[axis].points = points;
        Self::new(self.period, self.n_t, axes, self.half_space_axis)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn half_space_axis(&self) -> Option<usize> {
        self.half_space_axis
    }

    /// Array shape, time first.
    pub fn shape(&self) -> Vec<usize> {
        std::iter::once(self.n_t)
            .chain(self.axes.iter().map(|a| a.points))
            .collect()
    }

    /// Number of samples in one time slice.
    pub fn plane_len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn len(&self) -> usize {
        self.n_t * self.plane_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time_node(&self, j: usize) -> f64 {
        j as f64 * self.period / self.n_t as f64
    }

    /// Time frequency of FFT-ordered index `q`: `(2 pi / T) * q`.
    pub fn time_frequency(&self, q: usize) -> f64 {
        2.0 * PI / self.period * signed_index(q, self.n_t) as f64
    }

    pub fn time_frequencies(&self) -> Vec<f64> {
        (0..self.n_t).map(|q| self.time_frequency(q)).collect()
    }

    pub fn frequencies(&self, axis: usize) -> Vec<f64> {
        let a = &self.axes[axis];
        (0..a.points).map(|q| a.frequency(q)).collect()
    }

    pub fn nodes(&self, axis: usize) -> Vec<f64> {
        let a = &self.axes[axis];
        (0..a.points).map(|j| a.node(j)).collect()
    }

    /// Box volume `prod 2 L_i`.
    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| 2.0 * a.half_length).product()
    }

    /// Quadrature weight of one space-time node, `(1/N_t) prod (2L_i/N_i)`.
    pub fn node_weight(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product::<f64>() / self.n_t as f64
    }

    /// Per-axis frequency tables, time first.
    pub fn frequency_tables(&self) -> Vec<Vec<f64>> {
        std::iter::once(self.time_frequencies())
            .chain((0..self.dim()).map(|i| self.frequencies(i)))
            .collect()
    }

    /// True for the unpaired Nyquist index `-N/2` on any axis.
    pub fn is_nyquist(&self, multi: &[usize]) -> bool {
        let shape = self.shape();
        multi.iter().zip(&shape).any(|(&q, &n)| q == n / 2)
    }
}

fn check_count(what: &str, n: usize) -> Result<()> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidGrid(format!(
            "{what} must be even and at least 4, got {n}"
        )));
    }
    Ok(())
}

/// Parabolic length `(|eta|^2 + |xi|^(4m))^(1/(4m))`.
pub fn parabolic_length(eta: f64, xi: &[f64], m: usize) -> f64 {
    let r2: f64 = xi.iter().map(|x| x * x).sum();
    let m = m as f64;
    (eta * eta + r2.powf(2.0 * m)).powf(1.0 / (4.0 * m))
}

/// Regularity indices of the boundary data spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSpaceSpec {
    pub m: usize,
    pub p: f64,
    pub boundary_orders: Vec<u32>,
}

impl TraceSpaceSpec {
    pub fn new(m: usize, p: f64, boundary_orders: Vec<u32>) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidInput(format!("p must lie in (1, inf), got {p}")));
        }
        if boundary_orders.len() != m || boundary_orders.iter().any(|&o| o as usize >= 2 * m) {
            return Err(Error::InvalidInput(format!(
                "need {m} boundary orders below {}, got {boundary_orders:?}",
                2 * m
            )));
        }
        Ok(Self {
            m,
            p,
            boundary_orders,
        })
    }

    /// `kappa_j = 1 - m_j/(2m) - 1/(2mp)`, `j = 1..m`.
    pub fn kappa(&self) -> Vec<f64> {
        let tm = 2.0 * self.m as f64;
        self.boundary_orders
            .iter()
            .map(|&mj| 1.0 - mj as f64 / tm - 1.0 / (tm * self.p))
            .collect()
    }

    /// `iota_j = 1 - (j-1)/(2m) - 1/(2mp)`, `j = 1..m`.
    pub fn iota(&self) -> Vec<f64> {
        let tm = 2.0 * self.m as f64;
        (0..self.m)
            .map(|j| 1.0 - j as f64 / tm - 1.0 / (tm * self.p))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies_for_unit_scaled_grid() {
        let g = GroupGrid::make(2.0 * PI, 1, 8, &[(PI, 8)], None).unwrap();
        let mut k: Vec<i64> = g.time_frequencies().iter().map(|v| v.round() as i64).collect();
        k.sort();
        assert_eq!(k, (-4..4).collect::<Vec<_>>());
        let mut xi: Vec<i64> = g.frequencies(0).iter().map(|v| v.round() as i64).collect();
        xi.sort();
        assert_eq!(xi, (-4..4).collect::<Vec<_>>());
    }

    #[test]
    fn time_frequencies_scale_with_period() {
        let g = GroupGrid::make(1.0, 1, 8, &[(PI, 8)], None).unwrap();
        for (q, k) in g.time_frequencies().iter().enumerate() {
            assert_eq!(*k, 2.0 * PI * signed_index(q, 8) as f64);
        }
    }

    #[test]
    fn spacing_matches_frequency_step() {
        let g = GroupGrid::make(1.0, 2, 4, &[(3.0, 12), (5.0, 16)], None).unwrap();
        for i in 0..2 {
            let a = g.axis(i);
            assert!((a.node(1) - a.node(0) - 2.0 * a.half_length / a.points as f64).abs() < 1e-15);
            assert!((a.frequency(1) * a.spacing() - 2.0 * PI / a.points as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_grids() {
        assert!(GroupGrid::make(1.0, 1, 8, &[(1.0, 7)], None).is_err());
        assert!(GroupGrid::make(1.0, 1, 2, &[(1.0, 8)], None).is_err());
        assert!(GroupGrid::make(-1.0, 1, 8, &[(1.0, 8)], None).is_err());
        assert!(GroupGrid::make(1.0, 1, 8, &[(0.0, 8)], None).is_err());
        assert!(GroupGrid::make(1.0, 1, 8, &[(1.0, 8)], Some(1)).is_err());
    }

    #[test]
    fn index_helpers_round_trip() {
        for q in 0..10 {
            assert_eq!(storage_index(signed_index(q, 10), 10), Some(q));
        }
        assert_eq!(storage_index(5, 10), None);
    }

    #[test]
    fn parabolic_length_examples() {
        assert!((parabolic_length(0.0, &[3.0, 4.0], 1) - 5.0).abs() < 1e-14);
        assert!((parabolic_length(3.0, &[0.0], 1) - 3f64.sqrt()).abs() < 1e-14);
        let (eta, xi) = (0.7, [0.3, -1.1]);
        for m in 1..4 {
            let lam: f64 = 2.0;
            let scaled = parabolic_length(lam.powi(2 * m as i32) * eta, &[lam * xi[0], lam * xi[1]], m);
            assert!((scaled - lam * parabolic_length(eta, &xi, m)).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_exponents() {
        let t = TraceSpaceSpec::new(1, 2.0, vec![0]).unwrap();
        assert_eq!(t.kappa(), vec![0.75]);
        assert_eq!(t.iota(), vec![0.75]);
        let t = TraceSpaceSpec::new(2, 3.0, vec![0, 1]).unwrap();
        assert_eq!(t.kappa(), t.iota());
        assert!(t.kappa().iter().all(|k| *k > 0.0 && *k < 1.0));
    }
}
