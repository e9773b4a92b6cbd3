//! Dense complex polynomials in one variable.
//!
//! Coefficient vectors are stored in ascending order (`p[i]` multiplies
//! `z^i`) unless a function says otherwise. The only exception is
//! [`monic_from_roots`], which returns the descending `c_0..c_m` layout used
//! for the half-plane factors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

/// Evaluates an ascending coefficient vector at `z`.
pub fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Drops trailing (highest-degree) coefficients that are exactly zero.
pub fn trim(mut coeffs: Vec<C64>) -> Vec<C64> {
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
        coeffs.pop();
    }
    coeffs
}

/// Monic factor coefficients `c_0..c_m` (descending, `c_0 = 1`) with
/// `prod_j (z - roots[j]) = sum_a c_a z^(m-a)`, built from the elementary
/// symmetric polynomials of the roots.
pub fn monic_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); roots.len() + 1];
    c[0] = C64::new(1.0, 0.0);
    for (j, &r) in roots.iter().enumerate() {
        for a in (1..=j + 1).rev() {
            let prev = c[a - 1];
            c[a] -= r * prev;
        }
    }
    c
}

/// Evaluates a descending coefficient vector (as returned by
/// [`monic_from_roots`]) at `z`.
pub fn horner_desc(coeffs: &[C64], z: C64) -> C64 {
    coeffs
        .iter()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Quotient and remainder of a polynomial division.
#[derive(Debug, Clone)]
pub struct DivRem {
    pub quotient: Vec<C64>,
    /// Exactly `deg(divisor)` coefficients, ascending.
    pub remainder: Vec<C64>,
}

/// Synthetic division of `p` by the monic polynomial `q` (both ascending).
///
/// The remainder always has `deg(q)` entries so it can be used directly as a
/// row of a characteristic matrix.
pub fn poly_mod(p: &[C64], q_monic: &[C64]) -> DivRem {
    let m = q_monic.len().saturating_sub(1);
    debug_assert!(
        q_monic.last().is_some_and(|c| (*c - C64::new(1.0, 0.0)).norm() < 1e-12),
        "divisor must be monic"
    );
    let mut rem: Vec<C64> = p.to_vec();
    if rem.len() <= m {
        rem.resize(m, C64::new(0.0, 0.0));
        return DivRem {
            quotient: vec![C64::new(0.0, 0.0)],
            remainder: rem,
        };
    }
    let qlen = rem.len() - m;
    let mut quotient = vec![C64::new(0.0, 0.0); qlen];
    for d in (m..rem.len()).rev() {
        let lead = rem[d];
        let shift = d - m;
        quotient[shift] = lead;
        if lead == C64::new(0.0, 0.0) {
            continue;
        }
        for (i, &qc) in q_monic.iter().enumerate() {
            rem[shift + i] -= lead * qc;
        }
    }
    rem.truncate(m);
    DivRem {
        quotient,
        remainder: rem,
    }
}

/// All complex roots of the polynomial with ascending coefficients `coeffs`,
/// computed as eigenvalues of the balanced companion matrix and polished
/// with a few Newton steps on the original polynomial.
///
/// The leading coefficient must be nonzero.
pub fn roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let deg = coeffs.len().saturating_sub(1);
    let lead = *coeffs
        .last()
        .ok_or_else(|| Error::RootFinder("empty coefficient list".into()))?;
    if lead.norm() == 0.0 || !lead.is_finite() {
        return Err(Error::RootFinder(format!(
            "leading coefficient {lead} is not usable"
        )));
    }
    match deg {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-coeffs[0] / coeffs[1]]),
        _ => {}
    }

    // Companion matrix of the monic polynomial: ones on the subdiagonal,
    // negated coefficients in the last column.
    let mut comp = DMatrix::<C64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    balance(&mut comp);

    // Repeated roots can stall the shifted QR iteration; Aberth's method
    // takes over when it does not converge quickly.
    let dp = derivative(coeffs);
    let mut out: Vec<C64> = match nalgebra::Schur::try_new(comp, f64::EPSILON, 60 * deg) {
        Some(schur) => schur
            .eigenvalues()
            .ok_or_else(|| Error::RootFinder("Schur form is not triangular".into()))?
            .iter()
            .copied()
            .collect(),
        None => aberth(coeffs, &dp)?,
    };
    for z in out.iter_mut() {
        *z = polish(coeffs, &dp, *z);
    }
    if out.iter().any(|z| !z.is_finite()) {
        return Err(Error::RootFinder("non-finite eigenvalue".into()));
    }
    Ok(out)
}

fn aberth(p: &[C64], dp: &[C64]) -> Result<Vec<C64>> {
    let deg = p.len() - 1;
    let lead = p[deg].norm();
    // Cauchy bound on the root moduli.
    let radius = 1.0 + p[..deg].iter().map(|c| c.norm() / lead).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..deg)
        .map(|j| C64::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (j as f64 + 0.25) / deg as f64 + 0.4))
        .collect();
    for _ in 0..2000 {
        let mut change: f64 = 0.0;
        for i in 0..deg {
            let val = horner(p, z[i]);
            if val.norm() == 0.0 {
                continue;
            }
            let ratio = val / horner(dp, z[i]);
            let sum: C64 = (0..deg).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = ratio / (1.0 - ratio * sum);
            if step.is_finite() {
                z[i] -= step;
                change = change.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if change < 1e-15 {
            return Ok(z);
        }
    }
    if z.iter().all(|v| v.is_finite()) {
        Ok(z)
    } else {
        Err(Error::RootFinder("Aberth iteration diverged".into()))
    }
}

fn polish(p: &[C64], dp: &[C64], mut z: C64) -> C64 {
    let mut val = horner(p, z).norm();
    for _ in 0..3 {
        let d = horner(dp, z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - horner(p, z) / d;
        let cval = horner(p, cand).norm();
        if cval < val {
            z = cand;
            val = cval;
        } else {
            break;
        }
    }
    z
}

/// Parlett-Reinsch diagonal similarity balancing with powers of two.
fn balance(a: &mut DMatrix<C64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].norm();
                    r += a[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut g = r / RADIX;
            while cc < g {
                f *= RADIX;
                cc *= RADIX * RADIX;
            }
            g = r * RADIX;
            while cc > g {
                f /= RADIX;
                cc /= RADIX * RADIX;
            }
            if (cc + r / f) < 0.95 * s * f {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
}
