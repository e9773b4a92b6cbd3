//! Complex fields on a [`GroupGrid`] and their discrete Fourier transform.
//!
//! Forward transform:
//! `u_hat(k, xi) = (1/N_t) sum_t prod_i (2L_i/N_i) sum_x u(t, x) e^{-i x.xi - i k t}`,
//! i.e. the normalized Haar measure in time and the cell volume in space.
//! The inverse carries `1/(2 L_i)` per spatial axis so that
//! `inverse(forward(u)) = u`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GroupGrid;

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum State {
    Physical,
    Spectral,
}

impl State {
    pub fn name(self) -> &'static str {
        match self {
            State::Physical => "physical",
            State::Spectral => "spectral",
        }
    }
}

/// A time-periodic field sampled on a grid, time-major row-major layout.
#[derive(Debug, Clone)]
pub struct TPField {
    grid: Arc<GroupGrid>,
    state: State,
    data: Vec<C64>,
}

/// Boundary data lives on the grid of `T x R^(n-1)` (see
/// [`GroupGrid::boundary`]); it is an ordinary field there.
pub type BoundaryField = TPField;

impl TPField {
    pub fn zeros(grid: Arc<GroupGrid>, state: State) -> Self {
        let len = grid.len();
        Self {
            grid,
            state,
            data: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn from_data(grid: Arc<GroupGrid>, state: State, data: Vec<C64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: data.len(),
            });
        }
        Ok(Self { grid, state, data })
    }

    /// Samples `f(t, x)` at every node.
    pub fn from_fn(grid: Arc<GroupGrid>, f: impl Fn(f64, &[f64]) -> C64 + Sync) -> Self {
        let plane = grid.plane_len();
        let shape = grid.shape();
        let mut data = vec![C64::new(0.0, 0.0); grid.len()];
        data.par_chunks_mut(plane.max(1))
            .enumerate()
            .for_each(|(ti, chunk)| {
                let t = grid.time_node(ti);
                let mut x = vec![0.0; grid.dim()];
                for (flat, v) in chunk.iter_mut().enumerate() {
                    let mut rem = flat;
                    for axis in (0..grid.dim()).rev() {
                        let n = shape[axis + 1];
                        x[axis] = grid.axis(axis).node(rem % n);
                        rem /= n;
                    }
                    *v = f(t, &x);
                }
            });
        Self {
            grid,
            state: State::Physical,
            data,
        }
    }

    pub fn grid(&self) -> &GroupGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<GroupGrid> {
        &self.grid
    }

    pub fn state(&self) -> State {
        self.state
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn expect_state(&self, s: State) -> Result<()> {
        if self.state != s {
            return Err(Error::StateMismatch {
                expected: s.name(),
                found: self.state.name(),
            });
        }
        Ok(())
    }

    pub fn same_grid(&self, other: &TPField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Spectral transform; fails unless the field is physical.
    pub fn forward(&self) -> Result<TPField> {
        self.expect_state(State::Physical)?;
        let mut out = self.clone();
        let axes: Vec<usize> = (0..=self.grid.dim()).collect();
        transform_axes(&mut out.data, &self.grid, &axes, Direction::Forward);
        out.state = State::Spectral;
        Ok(out)
    }

    /// Inverse transform; fails unless the field is spectral.
    pub fn inverse(&self) -> Result<TPField> {
        self.expect_state(State::Spectral)?;
        let mut out = self.clone();
        let axes: Vec<usize> = (0..=self.grid.dim()).collect();
        transform_axes(&mut out.data, &self.grid, &axes, Direction::Inverse);
        out.state = State::Physical;
        Ok(out)
    }

    pub fn to_spectral(&self) -> TPField {
        match self.state {
            State::Spectral => self.clone(),
            State::Physical => self.forward().expect("state checked"),
        }
    }

    pub fn to_physical(&self) -> TPField {
        match self.state {
            State::Physical => self.clone(),
            State::Spectral => self.inverse().expect("state checked"),
        }
    }

    pub fn to_state(&self, s: State) -> TPField {
        match s {
            State::Physical => self.to_physical(),
            State::Spectral => self.to_spectral(),
        }
    }

    pub fn scale(&mut self, s: C64) {
        self.data.par_iter_mut().for_each(|v| *v *= s);
    }

    pub fn scaled(&self, s: C64) -> TPField {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self + s * other`, both in the same state and grid.
    pub fn axpy(&mut self, s: C64, other: &TPField) -> Result<()> {
        self.same_grid(other)?;
        other.expect_state(self.state)?;
        self.data
            .par_iter_mut()
            .zip(other.data.par_iter())
            .for_each(|(a, b)| *a += s * b);
        Ok(())
    }

    pub fn sub(&self, other: &TPField) -> Result<TPField> {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn add(&self, other: &TPField) -> Result<TPField> {
        let mut out = self.clone();
        out.axpy(C64::new(1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<(FftPlanner<f64>, HashMap<(usize, Direction), Arc<dyn Fft<f64>>>)>> =
        OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let (planner, map) = &mut *guard;
    map.entry((n, dir))
        .or_insert_with(|| match dir {
            Direction::Forward => planner.plan_fft_forward(n),
            Direction::Inverse => planner.plan_fft_inverse(n),
        })
        .clone()
}

/// Per-index factors applied after a forward FFT (or before an inverse one)
/// along array axis `axis` (0 = time).
fn axis_factors(grid: &GroupGrid, axis: usize, dir: Direction) -> Vec<C64> {
    if axis == 0 {
        let n = grid.n_t();
        let s = match dir {
            Direction::Forward => 1.0 / n as f64,
            Direction::Inverse => 1.0,
        };
        return vec![C64::new(s, 0.0); n];
    }
    let a = grid.axis(axis - 1);
    let base = match dir {
        Direction::Forward => a.spacing(),
        Direction::Inverse => 1.0 / (2.0 * a.half_length),
    };
    // e^{i xi_q L} = (-1)^q accounts for the first node sitting at -L.
    (0..a.points)
        .map(|q| C64::new(if q % 2 == 0 { base } else { -base }, 0.0))
        .collect()
}

/// In-place transform along the listed array axes (0 = time, `i + 1` =
/// spatial axis `i`), including the normalization described in the module
/// docs.
pub(crate) fn transform_axes(data: &mut [C64], grid: &GroupGrid, axes: &[usize], dir: Direction) {
    let shape = grid.shape();
    for &axis in axes {
        let n = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let fft = plan(n, dir);
        let factors = axis_factors(grid, axis, dir);
        let run_rows = |rows: &mut [C64]| {
            rows.par_chunks_mut(n * rows_per_task(n)).for_each(|chunk| {
                let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
                if dir == Direction::Inverse {
                    for row in chunk.chunks_mut(n) {
                        row.iter_mut().zip(&factors).for_each(|(v, f)| *v *= f);
                    }
                }
                fft.process_with_scratch(chunk, &mut scratch);
                if dir == Direction::Forward {
                    for row in chunk.chunks_mut(n) {
                        row.iter_mut().zip(&factors).for_each(|(v, f)| *v *= f);
                    }
                }
            });
        };
        if inner == 1 {
            run_rows(data);
        } else {
            for block in data.chunks_mut(n * inner) {
                let mut buf = vec![C64::new(0.0, 0.0); n * inner];
                for j in 0..n {
                    for i in 0..inner {
                        buf[i * n + j] = block[j * inner + i];
                    }
                }
                run_rows(&mut buf);
                for j in 0..n {
                    for i in 0..inner {
                        block[j * inner + i] = buf[i * n + j];
                    }
                }
            }
        }
    }
}

fn rows_per_task(n: usize) -> usize {
    (4096 / n).max(1)
}

/// Read-only description of one spectral mode handed to mode maps.
pub struct ModeRef<'a> {
    pub k: f64,
    pub xi: &'a [f64],
    pub time_index: usize,
    pub spatial_index: &'a [usize],
    /// The mode sits on an unpaired Nyquist plane of some axis.
    pub nyquist: bool,
}

/// Calls `f` on every spectral coefficient with its frequency, in parallel
/// over time planes.
pub(crate) fn map_modes<F>(grid: &GroupGrid, data: &mut [C64], f: F)
where
    F: Fn(&ModeRef<'_>, &mut C64) + Sync,
{
    let tables = grid.frequency_tables();
    let shape = grid.shape();
    let plane = grid.plane_len().max(1);
    let dim = grid.dim();
    data.par_chunks_mut(plane)
        .enumerate()
        .for_each(|(ti, chunk)| {
            let k = tables[0][ti];
            let t_nyq = ti == shape[0] / 2;
            let mut idx = vec![0usize; dim];
            let mut xi = vec![0.0; dim];
            for (flat, v) in chunk.iter_mut().enumerate() {
                let mut rem = flat;
                let mut nyq = t_nyq;
                for axis in (0..dim).rev() {
                    let n = shape[axis + 1];
                    let q = rem % n;
                    rem /= n;
                    idx[axis] = q;
                    xi[axis] = tables[axis + 1][q];
                    nyq |= q == n / 2;
                }
                let mode = ModeRef {
                    k,
                    xi: &xi,
                    time_index: ti,
                    spatial_index: &idx,
                    nyquist: nyq,
                };
                f(&mode, v);
            }
        });
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid2() -> Arc<GroupGrid> {
        Arc::new(GroupGrid::make(2.0, 2, 8, &[(3.0, 16), (2.0, 8)], None).unwrap())
    }

    #[test]
    fn single_exponential_maps_to_scaled_indicator() {
        let g = grid2();
        let (kq, q1, q2) = (3i64, -2i64, 1i64);
        let k = 2.0 * PI / g.period() * kq as f64;
        let x1 = PI / 3.0 * q1 as f64;
        let x2 = PI / 2.0 * q2 as f64;
        let u = TPField::from_fn(g.clone(), |t, x| C64::from_polar(1.0, k * t + x1 * x[0] + x2 * x[1]));
        let s = u.forward().unwrap();
        let target = (3usize * 16 + 14) * 8 + 1;
        for (i, v) in s.data().iter().enumerate() {
            if i == target {
                assert!((v - C64::new(g.volume(), 0.0)).norm() < 1e-12);
            } else {
                assert!(v.norm() < 1e-12, "leak at {i}: {v}");
            }
        }
    }

    #[test]
    fn constant_field_is_dc() {
        let g = grid2();
        let u = TPField::from_fn(g.clone(), |_, _| C64::new(2.0, -1.0));
        let s = u.forward().unwrap();
        assert!((s.data()[0] - C64::new(2.0, -1.0) * g.volume()).norm() < 1e-12);
        assert!(s.data()[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn round_trip_is_identity() {
        let g = grid2();
        let u = TPField::from_fn(g, |t, x| C64::new((3.0 * t + x[0]).sin() * x[1], (t * x[0]).cos()));
        let back = u.forward().unwrap().inverse().unwrap();
        let err = back.sub(&u).unwrap().max_abs();
        assert!(err < 1e-12 * u.max_abs());
    }

    #[test]
    fn state_is_checked() {
        let g = grid2();
        let u = TPField::zeros(g, State::Spectral);
        assert!(matches!(u.forward(), Err(Error::StateMismatch { .. })));
    }
}
