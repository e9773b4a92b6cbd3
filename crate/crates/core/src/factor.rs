//! Half-plane splitting of `z -> i*eta + A^H(xi', z)` and the characteristic
//! matrix of a boundary tuple.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, ModePoint, Result};
use crate::poly;
use crate::symbol::{DifferentialSymbol, OperatorTuple};

type C64 = Complex64;

/// A root counts as off the real axis when `|Im rho| > ROOT_TOL * (1 + |rho|)`.
pub const ROOT_TOL: f64 = 1e-9;

/// Complementing holds at a sample when `|det F| >= DET_TOL * prod_j |row_j|`.
pub const DET_TOL: f64 = 1e-8;

/// Roots of a degree-`2m` polynomial sorted into the two half planes.
#[derive(Debug, Clone, Serialize)]
pub struct RootSplit {
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
    /// Coefficient of `z^(2m)`.
    pub leading: C64,
}

fn sort_roots(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Roots of `shift + A^H(xi', z)` split by the sign of their imaginary part.
///
/// `mode` is only used to label errors.
pub fn split_shifted(
    sym: &DifferentialSymbol,
    shift: C64,
    xi_prime: &[f64],
    mode: impl FnOnce() -> ModePoint,
) -> Result<RootSplit> {
    let mut p = sym.normal_polynomial(xi_prime)?;
    p[0] += shift;
    let degree = p.len() - 1;
    let leading = p[degree];
    if leading.norm() == 0.0 {
        return Err(Error::InvalidSymbol(
            "coefficient of xi_n^(2m) vanishes; operator is not elliptic".into(),
        ));
    }
    let m = degree / 2;
    let roots = poly::roots(&p)?;
    let mut plus = Vec::with_capacity(m);
    let mut minus = Vec::with_capacity(m);
    for r in roots {
        if r.im.abs() <= ROOT_TOL * (1.0 + r.norm()) {
            return Err(Error::RootOnRealAxis { mode: mode(), root: r });
        }
        if r.im > 0.0 {
            plus.push(r);
        } else {
            minus.push(r);
        }
    }
    if plus.len() != m || minus.len() != m {
        return Err(Error::WrongSplit {
            mode: mode(),
            plus: plus.len(),
            minus: minus.len(),
            expected: m,
        });
    }
    sort_roots(&mut plus);
    sort_roots(&mut minus);
    Ok(RootSplit {
        plus,
        minus,
        leading,
    })
}

/// Roots of `z -> i*eta + A^H(xi', z)`, `m` in each half plane.
pub fn split_roots(sym: &DifferentialSymbol, eta: f64, xi_prime: &[f64]) -> Result<RootSplit> {
    if eta == 0.0 && xi_prime.iter().all(|x| *x == 0.0) {
        return Err(Error::InvalidInput(
            "root splitting is undefined at (eta, xi') = (0, 0)".into(),
        ));
    }
    split_shifted(sym, C64::new(0.0, eta), xi_prime, || {
        ModePoint::new(eta, xi_prime)
    })
}

/// Monic coefficients `c_0..c_m` (descending, `c_0 = 1`) of `prod (z - rho_j)`.
pub fn half_symbol_coeffs(roots: &[C64]) -> Vec<C64> {
    poly::monic_from_roots(roots)
}

/// The factorization `i*eta + A^H(xi', z) = a * M_+(z) * M_-(z)` at one mode.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolFactorization {
    pub eta: f64,
    pub xi_prime: Vec<f64>,
    pub rho_plus: Vec<C64>,
    pub rho_minus: Vec<C64>,
    /// Descending monic coefficients of `M_+`.
    pub c_plus: Vec<C64>,
    /// Descending monic coefficients of `M_-`.
    pub c_minus: Vec<C64>,
    pub leading: C64,
    /// `min |Im rho|` over all roots.
    pub margin: f64,
}

impl SymbolFactorization {
    pub fn new(sym: &DifferentialSymbol, eta: f64, xi_prime: &[f64]) -> Result<Self> {
        let split = split_roots(sym, eta, xi_prime)?;
        Ok(Self::from_split(eta, xi_prime, split))
    }

    pub fn from_split(eta: f64, xi_prime: &[f64], split: RootSplit) -> Self {
        let margin = split
            .plus
            .iter()
            .chain(&split.minus)
            .map(|r| r.im.abs())
            .fold(f64::INFINITY, f64::min);
        Self {
            eta,
            xi_prime: xi_prime.to_vec(),
            c_plus: half_symbol_coeffs(&split.plus),
            c_minus: half_symbol_coeffs(&split.minus),
            rho_plus: split.plus,
            rho_minus: split.minus,
            leading: split.leading,
            margin,
        }
    }

    pub fn m(&self) -> usize {
        self.rho_plus.len()
    }

    pub fn m_plus(&self, z: C64) -> C64 {
        poly::horner_desc(&self.c_plus, z)
    }

    pub fn m_minus(&self, z: C64) -> C64 {
        poly::horner_desc(&self.c_minus, z)
    }

    /// `a * M_+(z) * M_-(z)`.
    pub fn product(&self, z: C64) -> C64 {
        self.leading * self.m_plus(z) * self.m_minus(z)
    }

    /// Ascending coefficients of `M_+`.
    pub fn m_plus_ascending(&self) -> Vec<C64> {
        self.c_plus.iter().rev().copied().collect()
    }

    pub fn mode(&self) -> ModePoint {
        ModePoint::new(self.eta, &self.xi_prime)
    }
}

/// Characteristic matrix `F` and its inverse at one mode.
#[derive(Debug, Clone)]
pub struct CharMatrix {
    pub f: DMatrix<C64>,
    pub f_inv: DMatrix<C64>,
    /// 1-norm condition number estimate `|F|_1 |F^-1|_1`.
    pub cond: f64,
    pub det: C64,
    /// `|det F| / prod_j |row_j|_2`.
    pub det_ratio: f64,
}

/// Rows of `F`: remainder coefficients of `B_j^H(xi', z)` modulo the monic
/// polynomial with the given ascending coefficients.
pub fn char_rows(boundary: &[DifferentialSymbol], xi_prime: &[f64], m_plus_asc: &[C64]) -> Result<DMatrix<C64>> {
    let m = m_plus_asc.len() - 1;
    let mut f = DMatrix::<C64>::zeros(boundary.len(), m);
    for (j, b) in boundary.iter().enumerate() {
        let p = b.normal_polynomial(xi_prime)?;
        let rem = poly::poly_mod(&p, m_plus_asc).remainder;
        for (l, r) in rem.into_iter().enumerate() {
            f[(j, l)] = r;
        }
    }
    Ok(f)
}

/// `|det F| / prod |row_j|`, zero when some row vanishes.
pub fn det_ratio(f: &DMatrix<C64>) -> (C64, f64) {
    let det = f.clone().lu().determinant();
    let rows: f64 = f.row_iter().map(|r| r.norm()).product();
    if rows == 0.0 {
        (det, 0.0)
    } else {
        (det, det.norm() / rows)
    }
}

/// Characteristic matrix of the principal boundary symbols at the mode of
/// `fact`. Fails when the complementing condition breaks down there.
pub fn char_matrix(tuple: &OperatorTuple, fact: &SymbolFactorization) -> Result<CharMatrix> {
    let boundary: Vec<DifferentialSymbol> = tuple.boundary.iter().map(|b| b.principal_part()).collect();
    let f = char_rows(&boundary, &fact.xi_prime, &fact.m_plus_ascending())?;
    let (det, ratio) = det_ratio(&f);
    if !(ratio >= DET_TOL) {
        return Err(Error::SingularCharMatrix {
            mode: fact.mode(),
            ratio,
        });
    }
    let f_inv = f.clone().lu().try_inverse().ok_or(Error::SingularCharMatrix {
        mode: fact.mode(),
        ratio,
    })?;
    let cond = one_norm(&f) * one_norm(&f_inv);
    Ok(CharMatrix {
        f,
        f_inv,
        cond,
        det,
        det_ratio: ratio,
    })
}

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn polar(t: f64) -> C64 {
        C64::from_polar(1.0, t)
    }

    fn assert_set(got: &[C64], want: &[C64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for w in want {
            assert!(
                got.iter().any(|g| (g - w).norm() < tol),
                "missing {w} in {got:?}"
            );
        }
    }

    #[test]
    fn heat_roots() {
        let s = split_roots(&DifferentialSymbol::heat(1), 1.0, &[]).unwrap();
        assert_set(&s.plus, &[polar(3.0 * PI / 4.0)], 1e-12);
        assert_set(&s.minus, &[polar(-PI / 4.0)], 1e-12);
    }

    #[test]
    fn backward_heat_roots() {
        let sym = DifferentialSymbol::heat(1).scaled(C64::new(-1.0, 0.0));
        let s = split_roots(&sym, 1.0, &[]).unwrap();
        assert_set(&s.plus, &[polar(PI / 4.0)], 1e-12);
        assert_set(&s.minus, &[-polar(PI / 4.0)], 1e-12);
    }

    #[test]
    fn biharmonic_roots() {
        let s = split_roots(&DifferentialSymbol::biharmonic(1), 1.0, &[]).unwrap();
        assert_set(&s.plus, &[polar(3.0 * PI / 8.0), polar(7.0 * PI / 8.0)], 1e-12);
        assert_set(&s.minus, &[polar(-PI / 8.0), polar(-5.0 * PI / 8.0)], 1e-12);
    }

    #[test]
    fn imaginary_heat_has_real_roots_for_negative_eta() {
        let sym = DifferentialSymbol::heat(1).scaled(C64::i());
        assert!(matches!(
            split_roots(&sym, -1.0, &[]),
            Err(Error::RootOnRealAxis { .. })
        ));
    }

    #[test]
    fn origin_is_rejected() {
        assert!(split_roots(&DifferentialSymbol::heat(2), 0.0, &[0.0]).is_err());
    }

    #[test]
    fn heat_dirichlet_char_matrix_is_identity() {
        let tuple = OperatorTuple::dirichlet(DifferentialSymbol::heat(2)).unwrap();
        for (eta, xp) in [(1.0, 0.0), (-3.0, 2.0), (0.0, 1.0)] {
            let fact = SymbolFactorization::new(&tuple.interior, eta, &[xp]).unwrap();
            let cm = char_matrix(&tuple, &fact).unwrap();
            assert_eq!(cm.f[(0, 0)], C64::new(1.0, 0.0));
            assert_eq!(cm.f_inv[(0, 0)], C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn heat_neumann_char_matrix_is_root() {
        let heat = DifferentialSymbol::heat(1);
        let tuple = OperatorTuple::new(
            heat.clone(),
            vec![DifferentialSymbol::normal_monomial(1, 1, C64::new(1.0, 0.0))],
        )
        .unwrap();
        let fact = SymbolFactorization::new(&heat, 1.0, &[]).unwrap();
        let cm = char_matrix(&tuple, &fact).unwrap();
        assert!((cm.f[(0, 0)] - polar(3.0 * PI / 4.0)).norm() < 1e-12);
    }

    #[test]
    fn tangential_boundary_operator_is_singular_at_pole() {
        let lap = DifferentialSymbol::heat(2);
        let tangential = DifferentialSymbol::new(2, 1, [(vec![1, 0], C64::new(1.0, 0.0))]).unwrap();
        let tuple = OperatorTuple::new(lap.clone(), vec![tangential]).unwrap();
        let fact = SymbolFactorization::new(&lap, 1.0, &[0.0]).unwrap();
        match char_matrix(&tuple, &fact) {
            Err(Error::SingularCharMatrix { ratio, .. }) => assert_eq!(ratio, 0.0),
            other => panic!("expected singular matrix, got {other:?}"),
        }
    }

    #[test]
    fn factor_product_reproduces_symbol() {
        let sym = DifferentialSymbol::biharmonic(3);
        let fact = SymbolFactorization::new(&sym, 2.5, &[0.3, -0.8]).unwrap();
        for z in [C64::new(0.3, 0.2), C64::new(-2.0, 1.0), C64::new(5.0, -3.0)] {
            let direct = C64::new(0.0, 2.5) + sym.eval_mixed(&[0.3, -0.8], z).unwrap();
            assert!((fact.product(z) - direct).norm() <= 1e-12 * direct.norm());
        }
    }
}
