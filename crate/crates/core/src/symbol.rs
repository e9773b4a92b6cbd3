//! Constant-coefficient differential symbols.
//!
//! The operator `A(D)` with `D_j = -i d/dx_j` has symbol
//! `A(xi) = sum_alpha a_alpha xi^alpha`, so `e^{i x.xi}` is an eigenfunction
//! with eigenvalue `A(xi)`. The last coordinate plays the role of the normal
//! variable on the half space.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

type C64 = Complex64;

/// A multi-index `alpha` in `N^n`.
pub type MultiIndex = Vec<u32>;

fn degree(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentialSymbol {
    n: usize,
    order: u32,
    coeffs: BTreeMap<MultiIndex, C64>,
}

impl DifferentialSymbol {
    /// Builds a symbol of the given order. Repeated multi-indices are summed
    /// and exact zeros dropped.
    pub fn new(
        n: usize,
        order: u32,
        terms: impl IntoIterator<Item = (MultiIndex, C64)>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSymbol("spatial dimension must be at least 1".into()));
        }
        let mut coeffs: BTreeMap<MultiIndex, C64> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: alpha.len(),
                });
            }
            if degree(&alpha) > order {
                return Err(Error::InvalidSymbol(format!(
                    "multi-index {alpha:?} exceeds order {order}"
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidSymbol(format!("non-finite coefficient for {alpha:?}")));
            }
            *coeffs.entry(alpha).or_default() += c;
        }
        coeffs.retain(|_, c| *c != C64::new(0.0, 0.0));
        Ok(Self { n, order, coeffs })
    }

    /// `scale * |xi|^(2m)` in `n` variables.
    pub fn laplacian_power(n: usize, m: u32, scale: C64) -> Self {
        // (sum xi_i^2)^m = sum_{|beta|=m} m!/beta! xi^(2 beta)
        let mut terms = Vec::new();
        for beta in multi_indices(n, m) {
            let mut coeff = factorial(m);
            for &b in &beta {
                coeff /= factorial(b);
            }
            terms.push((beta.iter().map(|b| 2 * b).collect(), scale * coeff));
        }
        Self::new(n, 2 * m, terms).expect("well-formed by construction")
    }

    /// The heat symbol `|xi|^2`.
    pub fn heat(n: usize) -> Self {
        Self::laplacian_power(n, 1, C64::new(1.0, 0.0))
    }

    /// The biharmonic symbol `|xi|^4`.
    pub fn biharmonic(n: usize) -> Self {
        Self::laplacian_power(n, 2, C64::new(1.0, 0.0))
    }

    /// The monomial `c * xi_n^p` in the normal variable.
    pub fn normal_monomial(n: usize, p: u32, c: C64) -> Self {
        let mut alpha = vec![0; n];
        alpha[n - 1] = p;
        Self::new(n, p, [(alpha, c)]).expect("well-formed by construction")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, C64> {
        &self.coeffs
    }

    pub fn coefficient(&self, alpha: &[u32]) -> C64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    /// Restriction to the terms of exact degree `order`.
    pub fn principal_part(&self) -> Self {
        Self {
            n: self.n,
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(a, _)| degree(a) == self.order)
                .map(|(a, c)| (a.clone(), *c))
                .collect(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.coeffs.keys().all(|a| degree(a) == self.order)
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            n: self.n,
            order: self.order,
            coeffs: self.coeffs.iter().map(|(a, c)| (a.clone(), c * s)).collect(),
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Result<C64> {
        if xi.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: xi.len(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .map(|(alpha, c)| {
                let mono: f64 = alpha
                    .iter()
                    .zip(xi)
                    .map(|(&p, &x)| x.powi(p as i32))
                    .product();
                c * mono
            })
            .sum())
    }

    /// Evaluates `A(xi', z)` with a complex normal component.
    pub fn eval_mixed(&self, xi_prime: &[f64], z: C64) -> Result<C64> {
        let p = self.normal_polynomial(xi_prime)?;
        Ok(poly::horner(&p, z))
    }

    /// Ascending coefficients of `z -> A(xi', z)`; length `order + 1`.
    pub fn normal_polynomial(&self, xi_prime: &[f64]) -> Result<Vec<C64>> {
        if xi_prime.len() + 1 != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n - 1,
                got: xi_prime.len(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.order as usize + 1];
        for (alpha, c) in &self.coeffs {
            let (tangential, normal) = alpha.split_at(self.n - 1);
            let mono: f64 = tangential
                .iter()
                .zip(xi_prime)
                .map(|(&p, &x)| x.powi(p as i32))
                .product();
            out[normal[0] as usize] += c * mono;
        }
        Ok(out)
    }

    /// Ascending coefficients of `tau -> A(zeta + tau * xi)`.
    pub fn line_polynomial(&self, zeta: &[f64], xi: &[f64]) -> Result<Vec<C64>> {
        for v in [zeta, xi] {
            if v.len() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: v.len(),
                });
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); self.order as usize + 1];
        for (alpha, c) in &self.coeffs {
            let mut term = vec![*c];
            for ((&p, &z0), &d) in alpha.iter().zip(zeta).zip(xi) {
                let lin = [C64::new(z0, 0.0), C64::new(d, 0.0)];
                for _ in 0..p {
                    term = poly::mul(&term, &lin);
                }
            }
            for (i, t) in term.into_iter().enumerate() {
                out[i] += t;
            }
        }
        Ok(out)
    }
}

/// The interior operator together with `m` boundary operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorTuple {
    pub interior: DifferentialSymbol,
    pub boundary: Vec<DifferentialSymbol>,
}

impl OperatorTuple {
    pub fn new(interior: DifferentialSymbol, boundary: Vec<DifferentialSymbol>) -> Result<Self> {
        let order = interior.order();
        if order == 0 || order % 2 != 0 {
            return Err(Error::InvalidSymbol(format!(
                "interior order must be even and positive, got {order}"
            )));
        }
        if interior.principal_part().coeffs().is_empty() {
            return Err(Error::InvalidSymbol("principal part vanishes identically".into()));
        }
        let m = (order / 2) as usize;
        if boundary.len() != m {
            return Err(Error::InvalidSymbol(format!(
                "expected {m} boundary operators, got {}",
                boundary.len()
            )));
        }
        for (j, b) in boundary.iter().enumerate() {
            if b.dim() != interior.dim() {
                return Err(Error::DimensionMismatch {
                    expected: interior.dim(),
                    got: b.dim(),
                });
            }
            if b.order() + 1 > order {
                return Err(Error::InvalidSymbol(format!(
                    "boundary operator {} has order {} > 2m-1 = {}",
                    j + 1,
                    b.order(),
                    order - 1
                )));
            }
        }
        Ok(Self { interior, boundary })
    }

    /// Dirichlet data: `B_j = D_n^(j-1)` for `j = 1..m`.
    pub fn dirichlet(interior: DifferentialSymbol) -> Result<Self> {
        let n = interior.dim();
        let m = interior.order() / 2;
        let boundary = (0..m)
            .map(|j| DifferentialSymbol::normal_monomial(n, j, C64::new(1.0, 0.0)))
            .collect();
        Self::new(interior, boundary)
    }

    pub fn m(&self) -> usize {
        (self.interior.order() / 2) as usize
    }

    pub fn dim(&self) -> usize {
        self.interior.dim()
    }

    pub fn boundary_orders(&self) -> Vec<u32> {
        self.boundary.iter().map(|b| b.order()).collect()
    }

    /// The tuple of principal parts `(A^H, B_1^H, ..., B_m^H)`.
    pub fn principal(&self) -> Self {
        Self {
            interior: self.interior.principal_part(),
            boundary: self.boundary.iter().map(|b| b.principal_part()).collect(),
        }
    }

    /// True when the boundary operators are exactly `D_n^(j-1)`.
    pub fn is_dirichlet(&self) -> bool {
        let n = self.dim();
        self.boundary.iter().enumerate().all(|(j, b)| {
            let mut alpha = vec![0; n];
            alpha[n - 1] = j as u32;
            b.order() == j as u32
                && b.coeffs().len() == 1
                && b.coefficient(&alpha) == C64::new(1.0, 0.0)
        })
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// All multi-indices in `n` variables of total degree exactly `d`, in
/// lexicographic order.
pub fn multi_indices(n: usize, d: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=d).rev() {
            prefix.push(first);
            rec(n, d - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, d, &mut Vec::new(), &mut out);
    }
    out
}
