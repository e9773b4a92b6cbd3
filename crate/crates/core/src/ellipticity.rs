//! Sampled checks of proper ellipticity, Agmon's condition on a ray and the
//! complementing condition.
//!
//! All three conditions are invariant under (parabolic) dilations, so it is
//! enough to sample unit spheres. Sampling density is the only free knob.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{char_rows, det_ratio, split_shifted, ROOT_TOL, DET_TOL};
use crate::grid::parabolic_length;
use crate::poly;
use crate::symbol::{DifferentialSymbol, OperatorTuple};

type C64 = Complex64;

/// Relative size below which a symbol value counts as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// Minimal angular distance from the ray for Agmon's condition to pass.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingPolicy {
    /// Points on the unit sphere (or parabolic hemisphere).
    pub sphere_points: usize,
    /// Random line pairs `(zeta, xi)` for the root-count test.
    pub pair_samples: usize,
    pub seed: u64,
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        Self {
            sphere_points: 512,
            pair_samples: 100,
            seed: 0x5eed,
        }
    }
}

fn normalize(v: &mut [f64]) {
    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if r > 0.0 {
        v.iter_mut().for_each(|x| *x /= r);
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect()
}

/// Points on the unit sphere of `R^n`: `+-1` for `n = 1`, equispaced angles
/// for `n = 2`, a Fibonacci lattice for `n = 3` and seeded Gaussian samples
/// otherwise.
pub fn sphere_samples(n: usize, policy: &SamplingPolicy) -> Vec<Vec<f64>> {
    let count = policy.sphere_points.max(2);
    match n {
        0 => vec![],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|j| {
                    let z = 1.0 - 2.0 * (j as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * j as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
            (0..count)
                .map(|_| {
                    let mut v = gaussian_vec(&mut rng, n);
                    normalize(&mut v);
                    v
                })
                .collect()
        }
    }
}

/// Points `(r, xi')` with `r >= 0` on the parabolic unit sphere
/// `r^2 + |xi'|^(4m) = 1`. The pole `(1, 0)` always comes first.
pub fn parabolic_hemisphere(n_tangential: usize, m: usize, policy: &SamplingPolicy) -> Vec<(f64, Vec<f64>)> {
    let mut out = vec![(1.0, vec![0.0; n_tangential])];
    if n_tangential == 0 {
        return out;
    }
    let base: Vec<Vec<f64>> = if n_tangential == 1 {
        let count = policy.sphere_points.max(3);
        (0..count)
            .map(|j| {
                let a = PI * j as f64 / (count - 1) as f64;
                vec![a.sin(), a.cos()]
            })
            .collect()
    } else {
        sphere_samples(n_tangential + 1, policy)
    };
    for mut p in base {
        p[0] = p[0].abs();
        let len = parabolic_length(p[0], &p[1..], m);
        let r = p[0] / len.powi(2 * m as i32);
        let xi: Vec<f64> = p[1..].iter().map(|x| x / len).collect();
        out.push((r, xi));
    }
    out
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimum of `f` over the sphere samples; for `n = 2` the best sample is
/// refined by a golden-section search in the angle.
fn sphere_min(n: usize, policy: &SamplingPolicy, f: impl Fn(&[f64]) -> f64) -> (Vec<f64>, f64, usize) {
    let samples = sphere_samples(n, policy);
    let used = samples.len();
    let mut best = (samples[0].clone(), f(&samples[0]));
    for s in &samples[1..] {
        let v = f(s);
        if v < best.1 {
            best = (s.clone(), v);
        }
    }
    if n == 2 && best.1 > 0.0 {
        let a0 = best.0[1].atan2(best.0[0]);
        let h = 2.0 * PI / used as f64;
        let (a, v) = golden_min(|a| f(&[a.cos(), a.sin()]), a0 - h, a0 + h);
        if v < best.1 {
            best = (vec![a.cos(), a.sin()], v);
        }
    }
    (best.0, best.1, used)
}

fn coeff_scale(sym: &DifferentialSymbol) -> f64 {
    sym.coeffs().values().map(|c| c.norm()).sum::<f64>().max(f64::MIN_POSITIVE)
}

/// Concrete point at which a condition fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `A^H(xi)` vanishes (relative to the coefficient size).
    SymbolZero { xi: Vec<f64>, value: C64 },
    /// `tau -> A^H(zeta + tau xi)` does not split `m/m`.
    RootCount {
        zeta: Vec<f64>,
        xi: Vec<f64>,
        plus: usize,
        minus: usize,
    },
    /// `A^H(xi)` lies on the ray.
    OnRay { xi: Vec<f64>, value: C64 },
    /// `det F` vanishes at the parabolic sphere point `(r, xi')`.
    SingularF {
        r: f64,
        xi_prime: Vec<f64>,
        det: C64,
        det_ratio: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ProperEllipticity {
    pub passed: bool,
    /// `min |A^H(xi)| / sum |a_alpha|` over the unit sphere.
    pub min_symbol: f64,
    /// `min |Im tau| / (1 + |tau|)` over the sampled line roots.
    pub min_root_margin: f64,
    pub witness: Option<Witness>,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgmonRay {
    pub theta: f64,
    pub passed: bool,
    /// Minimal angular distance of `arg A^H(xi)` from `theta`.
    pub min_angle: f64,
    pub witness: Option<Witness>,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Complementing {
    pub theta: f64,
    pub passed: bool,
    /// Minimal `|det F|` over the samples.
    pub min_det: f64,
    /// Minimal `|det F| / prod |row_j|`.
    pub min_det_ratio: f64,
    pub witness: Option<Witness>,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    pub passed: bool,
    pub properly_elliptic: ProperEllipticity,
    pub agmon: Vec<AgmonRay>,
    pub complementing: Vec<Complementing>,
    pub samples_used: usize,
}

/// Checks that `A^H` has no zeros on the unit sphere and, for `n >= 2`, that
/// `tau -> A^H(zeta + tau xi)` has `m` roots in each half plane for sampled
/// independent pairs.
pub fn check_properly_elliptic(sym: &DifferentialSymbol, policy: &SamplingPolicy) -> Result<ProperEllipticity> {
    let a = sym.principal_part();
    let n = a.dim();
    let m = (a.order() / 2) as usize;
    let scale = coeff_scale(&a);
    let eval = |x: &[f64]| a.eval(x).expect("dimension checked");
    let (xi, min_val, mut samples) = sphere_min(n, policy, |x| eval(x).norm() / scale);
    if min_val <= ZERO_TOL {
        let value = eval(&xi);
        return Ok(ProperEllipticity {
            passed: false,
            min_symbol: min_val,
            min_root_margin: 0.0,
            witness: Some(Witness::SymbolZero { xi, value }),
            samples,
        });
    }
    let mut min_margin = f64::INFINITY;
    if n >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(policy.seed ^ 0x9e37_79b9_7f4a_7c15);
        for _ in 0..policy.pair_samples {
            let mut xi = gaussian_vec(&mut rng, n);
            normalize(&mut xi);
            let mut zeta = gaussian_vec(&mut rng, n);
            let dot: f64 = zeta.iter().zip(&xi).map(|(a, b)| a * b).sum();
            zeta.iter_mut().zip(&xi).for_each(|(z, x)| *z -= dot * x);
            normalize(&mut zeta);
            samples += 1;
            let line = a.line_polynomial(&zeta, &xi)?;
            let roots = poly::roots(&line)?;
            let (mut plus, mut minus) = (0, 0);
            for r in &roots {
                let margin = r.im.abs() / (1.0 + r.norm());
                if margin <= ROOT_TOL {
                    return Err(Error::DegenerateRoot {
                        zeta: zeta.clone(),
                        xi: xi.clone(),
                        root: *r,
                    });
                }
                min_margin = min_margin.min(margin);
                if r.im > 0.0 {
                    plus += 1;
                } else {
                    minus += 1;
                }
            }
            if plus != m || minus != m {
                return Ok(ProperEllipticity {
                    passed: false,
                    min_symbol: min_val,
                    min_root_margin: min_margin,
                    witness: Some(Witness::RootCount { zeta, xi, plus, minus }),
                    samples,
                });
            }
        }
    }
    Ok(ProperEllipticity {
        passed: true,
        min_symbol: min_val,
        min_root_margin: min_margin,
        witness: None,
        samples,
    })
}

/// Angular distance between two angles, in `[0, pi]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Checks `A^H(xi) not in {r e^(i theta) : r >= 0}` on the unit sphere.
pub fn check_agmon_ray(sym: &DifferentialSymbol, theta: f64, policy: &SamplingPolicy) -> Result<AgmonRay> {
    let a = sym.principal_part();
    let n = a.dim();
    let scale = coeff_scale(&a);
    let dist = |x: &[f64]| {
        let v = a.eval(x).expect("dimension checked");
        if v.norm() <= ZERO_TOL * scale {
            0.0
        } else {
            angle_distance(v.arg(), theta)
        }
    };
    let (xi, min_angle, samples) = sphere_min(n, policy, dist);
    let passed = min_angle > ANGLE_TOL;
    let witness = (!passed).then(|| Witness::OnRay {
        value: a.eval(&xi).expect("dimension checked"),
        xi,
    });
    Ok(AgmonRay {
        theta,
        passed,
        min_angle,
        witness,
        samples,
    })
}

/// Checks that `det F != 0` for the polynomial `-r e^(i theta) + A^H(xi', z)`
/// on the parabolic unit hemisphere, the pole `(r, xi') = (1, 0)` included.
pub fn check_complementing(tuple: &OperatorTuple, theta: f64, policy: &SamplingPolicy) -> Result<Complementing> {
    let p = tuple.principal();
    let m = p.m();
    let n = p.dim();
    let points = parabolic_hemisphere(n - 1, m, policy);
    let mut min_det = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut worst = None;
    for (r, xi) in &points {
        let shift = -C64::from_polar(*r, theta);
        let split = split_shifted(&p.interior, shift, xi, || {
            crate::error::ModePoint::new(-r * theta.sin(), xi)
        })?;
        let asc: Vec<C64> = poly::monic_from_roots(&split.plus).into_iter().rev().collect();
        let f = char_rows(&p.boundary, xi, &asc)?;
        let (det, ratio) = det_ratio(&f);
        min_det = min_det.min(det.norm());
        if ratio < min_ratio {
            min_ratio = ratio;
            worst = Some(Witness::SingularF {
                r: *r,
                xi_prime: xi.clone(),
                det,
                det_ratio: ratio,
            });
        }
    }
    let passed = min_ratio >= DET_TOL;
    Ok(Complementing {
        theta,
        passed,
        min_det,
        min_det_ratio: min_ratio,
        witness: if passed { None } else { worst },
        samples: points.len(),
    })
}

/// Runs all checks on the rays `theta = +-pi/2`. Complementing is only
/// evaluated on rays where Agmon's condition holds.
pub fn check_tuple(tuple: &OperatorTuple, policy: &SamplingPolicy) -> Result<EllipticityReport> {
    let proper = check_properly_elliptic(&tuple.interior, policy)?;
    let mut samples = proper.samples;
    let mut agmon = Vec::new();
    let mut complementing = Vec::new();
    for theta in [PI / 2.0, -PI / 2.0] {
        let ray = check_agmon_ray(&tuple.interior, theta, policy)?;
        samples += ray.samples;
        if ray.passed && proper.passed {
            let c = check_complementing(tuple, theta, policy)?;
            samples += c.samples;
            complementing.push(c);
        }
        agmon.push(ray);
    }
    let passed = proper.passed
        && agmon.iter().all(|a| a.passed)
        && complementing.len() == agmon.len()
        && complementing.iter().all(|c| c.passed);
    Ok(EllipticityReport {
        passed,
        properly_elliptic: proper,
        agmon,
        complementing,
        samples_used: samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn policy() -> SamplingPolicy {
        SamplingPolicy {
            sphere_points: 128,
            pair_samples: 40,
            seed: 7,
        }
    }

    #[test]
    fn laplacian_is_properly_elliptic() {
        for (n, m) in [(2, 1), (2, 2), (3, 1)] {
            let s = DifferentialSymbol::laplacian_power(n, m, c(1.0, 0.0));
            let r = check_properly_elliptic(&s, &policy()).unwrap();
            assert!(r.passed, "n={n} m={m}");
            assert!((r.min_symbol - 1.0 / s.coeffs().values().map(|v| v.norm()).sum::<f64>()).abs() < 1e-9);
        }
    }

    #[test]
    fn wave_symbol_fails_with_diagonal_witness() {
        let s = DifferentialSymbol::new(2, 2, [(vec![2, 0], c(1.0, 0.0)), (vec![0, 2], c(-1.0, 0.0))]).unwrap();
        let r = check_properly_elliptic(&s, &policy()).unwrap();
        assert!(!r.passed);
        match r.witness.unwrap() {
            Witness::SymbolZero { xi, .. } => assert!((xi[0].abs() - xi[1].abs()).abs() < 1e-8),
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn cauchy_riemann_square_splits_wrongly() {
        // (xi_1 + i xi_2)^2 never vanishes on the sphere but both line roots
        // sit on the same side.
        let s = DifferentialSymbol::new(
            2,
            2,
            [(vec![2, 0], c(1.0, 0.0)), (vec![1, 1], c(0.0, 2.0)), (vec![0, 2], c(-1.0, 0.0))],
        )
        .unwrap();
        let r = check_properly_elliptic(&s, &policy()).unwrap();
        assert!(!r.passed);
        assert!(matches!(r.witness, Some(Witness::RootCount { plus: 2, minus: 0, .. } | Witness::RootCount { plus: 0, minus: 2, .. })));
    }

    #[test]
    fn agmon_examples() {
        let heat = DifferentialSymbol::heat(2);
        let r = check_agmon_ray(&heat, PI / 2.0, &policy()).unwrap();
        assert!(r.passed && (r.min_angle - PI / 2.0).abs() < 1e-12);
        let back = heat.scaled(c(-1.0, 0.0));
        for th in [PI / 2.0, -PI / 2.0] {
            let r = check_agmon_ray(&back, th, &policy()).unwrap();
            assert!(r.passed && (r.min_angle - PI / 2.0).abs() < 1e-12);
        }
        let rot = heat.scaled(c(0.0, 1.0));
        let r = check_agmon_ray(&rot, PI / 2.0, &policy()).unwrap();
        assert!(!r.passed && r.min_angle < 1e-12);
        assert!(r.witness.is_some());
    }

    #[test]
    fn hemisphere_is_on_parabolic_sphere() {
        for (nt, m) in [(1, 1), (1, 2), (2, 1), (4, 2)] {
            let pts = parabolic_hemisphere(nt, m, &policy());
            assert_eq!(pts[0], (1.0, vec![0.0; nt]));
            for (r, xi) in pts {
                assert!(r >= 0.0);
                assert!((parabolic_length(r, &xi, m) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn complementing_examples() {
        let dir = OperatorTuple::dirichlet(DifferentialSymbol::heat(2)).unwrap();
        for th in [PI / 2.0, -PI / 2.0] {
            let r = check_complementing(&dir, th, &policy()).unwrap();
            assert!(r.passed);
            assert!((r.min_det - 1.0).abs() < 1e-12);
        }
        let tang = OperatorTuple::new(
            DifferentialSymbol::heat(2),
            vec![DifferentialSymbol::new(2, 1, [(vec![1, 0], c(1.0, 0.0))]).unwrap()],
        )
        .unwrap();
        let r = check_complementing(&tang, PI / 2.0, &policy()).unwrap();
        assert!(!r.passed);
        match r.witness.unwrap() {
            Witness::SingularF { xi_prime, det_ratio, .. } => {
                assert_eq!(xi_prime, vec![0.0]);
                assert_eq!(det_ratio, 0.0);
            }
            w => panic!("unexpected witness {w:?}"),
        }
        let clamped = OperatorTuple::dirichlet(DifferentialSymbol::biharmonic(2)).unwrap();
        assert!(check_tuple(&clamped, &policy()).unwrap().passed);
    }
}
