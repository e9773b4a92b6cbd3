//! Empirical suprema of the a priori estimate ratios over random data.

use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::TPField;
use crate::fourier::{synthesize, SpectralMode};
use crate::grid::{signed_index, GroupGrid, TraceSpaceSpec};
use crate::halfspace::{estimate_ratio_hs, HalfSpaceSolver};
use crate::symbol::{DifferentialSymbol, OperatorTuple};
use crate::wholespace::{estimate_ratio_ws, single_mode_ratio, solve_wholespace, WholeSpaceProblem};

type C64 = Complex64;

/// Ratios of one ensemble at a grid and at the grid with doubled spatial
/// resolution.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub ensemble: usize,
    pub seed: u64,
    pub p: f64,
    /// Spatial point counts of the two runs.
    pub resolution: Vec<usize>,
    pub refined_resolution: Vec<usize>,
    pub ratios: Vec<f64>,
    pub ratios_refined: Vec<f64>,
    pub sup: f64,
    pub sup_refined: f64,
    /// `|sup_refined - sup| / sup`.
    pub drift: f64,
}

impl SweepReport {
    fn new(seed: u64, p: f64, grid: &GroupGrid, refined: &GroupGrid, ratios: Vec<f64>, ratios_refined: Vec<f64>) -> Self {
        let sup = ratios.iter().copied().fold(0.0, f64::max);
        let sup_refined = ratios_refined.iter().copied().fold(0.0, f64::max);
        Self {
            ensemble: ratios.len(),
            seed,
            p,
            resolution: grid.axes().iter().map(|a| a.points).collect(),
            refined_resolution: refined.axes().iter().map(|a| a.points).collect(),
            ratios,
            ratios_refined,
            sup,
            sup_refined,
            drift: (sup_refined - sup).abs() / sup,
        }
    }

    /// CSV table `sample,ratio,ratio_refined`.
    pub fn csv_rows(&self) -> Vec<(usize, f64, f64)> {
        self.ratios
            .iter()
            .zip(&self.ratios_refined)
            .enumerate()
            .map(|(i, (&a, &b))| (i, a, b))
            .collect()
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
}

/// Index bands: `|k| <= kt`, `|xi_i| <= qx[i]` (signed indices), `k != 0`.
fn band_modes(kt: i64, qx: &[i64]) -> Vec<(i64, Vec<i64>)> {
    let mut out = Vec::new();
    for k in -kt..=kt {
        if k == 0 {
            continue;
        }
        let mut idx = vec![0i64; qx.len()];
        loop {
            out.push((k, qx.iter().zip(&idx).map(|(q, i)| i - q).collect()));
            let mut a = 0;
            while a < qx.len() {
                idx[a] += 1;
                if idx[a] <= 2 * qx[a] {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == qx.len() {
                break;
            }
        }
    }
    out
}

/// Random coefficients on a fixed band, each mode active with probability
/// 1/3 and at least one active.
fn random_modes(rng: &mut ChaCha8Rng, band: &[(i64, Vec<i64>)]) -> Vec<SpectralMode> {
    let mut modes = Vec::new();
    for (k, xi) in band {
        if rng.random_bool(1.0 / 3.0) {
            modes.push(SpectralMode {
                k: *k,
                xi: xi.clone(),
                amplitude: gaussian(rng),
            });
        }
    }
    if modes.is_empty() {
        let (k, xi) = &band[rng.random_range(0..band.len())];
        modes.push(SpectralMode {
            k: *k,
            xi: xi.clone(),
            amplitude: gaussian(rng),
        });
    }
    modes
}

/// The band used for random data on `grid`: all time modes off the Nyquist
/// plane and the lower half of the spatial modes.
fn default_band(grid: &GroupGrid, axes: usize) -> (i64, Vec<i64>) {
    let kt = grid.n_t() as i64 / 2 - 1;
    let qx = (0..axes).map(|a| grid.axis(a).points as i64 / 4).collect();
    (kt, qx)
}

/// Whole-space ratios `|u|_{H^2m} / (|f|_{H^0} + |u|_{H^(2m-1)})` for random
/// band-limited `f` at `grid` and at doubled spatial resolution.
pub fn sweep_wholespace(op: &DifferentialSymbol, grid: &GroupGrid, samples: usize, p: f64, seed: u64) -> Result<SweepReport> {
    let m = (op.order() / 2) as usize;
    let s = 2.0 * m as f64;
    let (kt, qx) = default_band(grid, grid.dim());
    let band = band_modes(kt, &qx);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<Vec<SpectralMode>> = (0..samples).map(|_| random_modes(&mut rng, &band)).collect();
    let coarse = Arc::new(grid.clone());
    let fine = Arc::new(grid.refined(2));
    let run = |g: &Arc<GroupGrid>| -> Result<Vec<f64>> {
        data.par_iter()
            .map(|modes| {
                let f = synthesize(g.clone(), modes)?;
                let u = solve_wholespace(&WholeSpaceProblem::new(op.clone(), f)?)?;
                estimate_ratio_ws(&u, op, s, p)
            })
            .collect()
    };
    Ok(SweepReport::new(seed, p, &coarse, &fine, run(&coarse)?, run(&fine)?))
}

/// Single-mode ensemble with the closed-form ratio alongside.
#[derive(Debug, Clone, Serialize)]
pub struct SingleModeSweep {
    /// `(k, xi)` of each member.
    pub modes: Vec<(f64, Vec<f64>)>,
    pub ratios: Vec<f64>,
    pub closed_form: Vec<f64>,
    pub sup: f64,
    pub sup_closed_form: f64,
}

/// Ratios of [`estimate_ratio_ws`] (`s = 2m`, `p = 2`) for single modes:
/// every retained mode of `grid`, or `samples` of them drawn at random.
pub fn sweep_single_modes(op: &DifferentialSymbol, grid: &GroupGrid, samples: usize, seed: u64) -> Result<SingleModeSweep> {
    let m = (op.order() / 2) as usize;
    let s = 2.0 * m as f64;
    let shape = grid.shape();
    let kt = grid.n_t() as i64 / 2 - 1;
    let qx: Vec<i64> = shape[1..].iter().map(|&n| n as i64 / 2 - 1).collect();
    let mut band = band_modes(kt, &qx);
    if band.len() > samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        band.shuffle(&mut rng);
        band.truncate(samples);
        band.sort();
    }
    let g = Arc::new(grid.clone());
    let tables = grid.frequency_tables();
    let results: Vec<(f64, Vec<f64>, f64, f64)> = band
        .par_iter()
        .map(|(k, xi)| {
            let u = synthesize(
                g.clone(),
                &[SpectralMode {
                    k: *k,
                    xi: xi.clone(),
                    amplitude: C64::new(1.0, 0.0),
                }],
            )?;
            let kf = 2.0 * std::f64::consts::PI / grid.period() * *k as f64;
            let xf: Vec<f64> = xi
                .iter()
                .enumerate()
                .map(|(a, &q)| {
                    let n = shape[a + 1];
                    let pos = crate::grid::storage_index(q, n).expect("in band");
                    debug_assert_eq!(signed_index(pos, n), q);
                    tables[a + 1][pos]
                })
                .collect();
            let r = estimate_ratio_ws(&u, op, s, 2.0)?;
            Ok((kf, xf.clone(), r, single_mode_ratio(op, kf, &xf, s)))
        })
        .collect::<Result<_>>()?;
    let sup = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let sup_closed_form = results.iter().map(|r| r.3).fold(0.0, f64::max);
    Ok(SingleModeSweep {
        modes: results.iter().map(|r| (r.0, r.1.clone())).collect(),
        ratios: results.iter().map(|r| r.2).collect(),
        closed_form: results.iter().map(|r| r.3).collect(),
        sup,
        sup_closed_form,
    })
}

/// Random data for half-space sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSweepConfig {
    pub samples: usize,
    pub p: f64,
    pub seed: u64,
    /// Largest `|k|` index of the data.
    pub time_band: i64,
}

#[derive(Debug, Clone)]
struct HalfSample {
    f_modes: Vec<SpectralMode>,
    centre: f64,
    width: f64,
    g_modes: Vec<Vec<SpectralMode>>,
}

fn half_data(grid: &Arc<GroupGrid>, s: &HalfSample) -> Result<(TPField, Vec<TPField>)> {
    let n = grid.dim();
    let bgrid = Arc::new(grid.boundary());
    let tangential = synthesize_tangential(grid, &s.f_modes)?;
    let (c, w) = (s.centre, s.width);
    let f = TPField::from_fn(grid.clone(), |t, x| {
        let xn = x[n - 1];
        if xn < 0.0 {
            return C64::new(0.0, 0.0);
        }
        tangential(t, &x[..n - 1]) * (-((xn - c) / w).powi(2)).exp()
    });
    let g = s
        .g_modes
        .iter()
        .map(|modes| synthesize(bgrid.clone(), modes))
        .collect::<Result<_>>()?;
    Ok((f, g))
}

/// Closed-form evaluation of a sum of modes on `T x R^(n-1)`.
fn synthesize_tangential(grid: &GroupGrid, modes: &[SpectralMode]) -> Result<impl Fn(f64, &[f64]) -> C64 + Sync> {
    let omega = 2.0 * std::f64::consts::PI / grid.period();
    let n = grid.dim();
    let scales: Vec<f64> = (0..n - 1).map(|a| std::f64::consts::PI / grid.axis(a).half_length).collect();
    let terms: Vec<(f64, Vec<f64>, C64)> = modes
        .iter()
        .map(|m| {
            if m.xi.len() != n - 1 {
                return Err(Error::DimensionMismatch {
                    expected: n - 1,
                    got: m.xi.len(),
                });
            }
            Ok((
                omega * m.k as f64,
                m.xi.iter().zip(&scales).map(|(&q, s)| q as f64 * s).collect(),
                m.amplitude,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(move |t: f64, x: &[f64]| {
        terms
            .iter()
            .map(|(k, xi, a)| {
                let phase = k * t + xi.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                a * C64::from_polar(1.0, phase)
            })
            .sum()
    })
}

/// Half-space ratios [`estimate_ratio_hs`] for random `f` (tangential modes
/// times a Gaussian bump in `x_n`) and random band-limited `g`, at `grid`
/// and at doubled spatial resolution.
pub fn sweep_halfspace(tuple: &OperatorTuple, grid: &GroupGrid, cfg: &HalfSweepConfig) -> Result<SweepReport> {
    let m = tuple.m();
    let n = grid.dim();
    let kt = cfg.time_band.min(grid.n_t() as i64 / 2 - 1);
    let qx: Vec<i64> = (0..n - 1).map(|a| grid.axis(a).points as i64 / 4).collect();
    let band = band_modes(kt, &qx);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = grid.axis(n - 1).half_length;
    let data: Vec<HalfSample> = (0..cfg.samples)
        .map(|_| HalfSample {
            f_modes: random_modes(&mut rng, &band),
            centre: rng.random_range(0.1..0.35) * normal,
            width: rng.random_range(0.6..1.2),
            g_modes: (0..m).map(|_| random_modes(&mut rng, &band)).collect(),
        })
        .collect();
    let spec = TraceSpaceSpec::new(m, cfg.p, tuple.boundary_orders())?;
    let coarse = Arc::new(grid.clone());
    let fine = Arc::new(grid.refined(2));
    let run = |g: &Arc<GroupGrid>| -> Result<Vec<f64>> {
        let solver = HalfSpaceSolver::new(tuple, g.clone())?;
        data.par_iter()
            .map(|s| {
                let (f, gs) = half_data(g, s)?;
                let sol = solver.solve(&f, &gs)?;
                estimate_ratio_hs(&sol.u, &f, &gs, &spec)
            })
            .collect()
    };
    Ok(SweepReport::new(cfg.seed, cfg.p, &coarse, &fine, run(&coarse)?, run(&fine)?))
}
