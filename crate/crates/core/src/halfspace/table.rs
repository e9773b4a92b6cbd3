//! Per-mode factorizations `i k + A^H(xi', z) = a M_+(z) M_-(z)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factor::{char_matrix, CharMatrix, SymbolFactorization};
use crate::field::{map_modes, TPField};
use crate::fourier::ensure_oscillatory;
use crate::grid::GroupGrid;
use crate::poly;
use crate::symbol::OperatorTuple;

use super::Layout;

type C64 = Complex64;

/// Which factor of the symbol to invert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Factorizations at every retained `(k, xi')` of a half-space grid, `k != 0`.
/// Nyquist planes are tabulated as well although solves never touch them.
#[derive(Debug, Clone)]
pub struct FactorTable {
    pub(crate) layout: Layout,
    tuple: OperatorTuple,
    entries: Vec<Option<SymbolFactorization>>,
    /// `min |Im rho|` over all roots of all retained modes.
    pub min_margin: f64,
    /// `min Im rho_+` over all retained modes (decay rate of the kernels).
    pub min_plus_margin: f64,
}

impl FactorTable {
    /// Principal-part tuple the table was built for.
    pub fn tuple(&self) -> &OperatorTuple {
        &self.tuple
    }

    pub fn m(&self) -> usize {
        self.tuple.m()
    }

    /// Entry at time index `ti` and flat tangential index `tflat`.
    pub fn entry(&self, ti: usize, tflat: usize) -> Option<&SymbolFactorization> {
        self.entries[ti * self.layout.tang_len + tflat].as_ref()
    }

    pub fn entries(&self) -> impl Iterator<Item = &SymbolFactorization> {
        self.entries.iter().flatten()
    }

    /// Number of tabulated modes.
    pub fn retained(&self) -> usize {
        self.entries.iter().flatten().count()
    }

    /// Number of distinct retained time frequencies.
    pub fn retained_time_modes(&self) -> usize {
        self.layout.n_t - 1
    }

    /// Message when the slowest decaying mode has not died out at the edge
    /// of the half box, `exp(-margin L_n) > 1e-8`.
    pub fn truncation_warning(&self) -> Option<String> {
        let decay = (-self.min_margin * self.layout.half_length).exp();
        (decay > 1e-8).then(|| {
            format!(
                "slowest mode decays only to {decay:.2e} across the half box (margin {:.3e}, L_n = {}); increase L_n to at least {:.3e}",
                self.min_margin,
                self.layout.half_length,
                8.0 / self.min_margin
            )
        })
    }
}

/// Splits `i k + A^H(xi', z)` at every retained mode. Fails at the first
/// offending mode in storage order.
pub fn build_factor_table(tuple: &OperatorTuple, grid: &GroupGrid) -> Result<FactorTable> {
    let layout = Layout::of(grid)?;
    if tuple.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: tuple.dim(),
        });
    }
    if !tuple.interior.is_homogeneous() || tuple.boundary.iter().any(|b| !b.is_homogeneous()) {
        return Err(Error::InvalidSymbol(
            "half-space operators must be homogeneous (principal parts only)".into(),
        ));
    }
    let principal = tuple.clone();
    let ks = grid.time_frequencies();
    let results: Vec<Result<Option<SymbolFactorization>>> = (0..layout.n_t * layout.tang_len)
        .into_par_iter()
        .map(|idx| {
            let ti = idx / layout.tang_len;
            if ti == 0 {
                return Ok(None);
            }
            let xi = layout.tangential_frequencies(grid, idx % layout.tang_len);
            SymbolFactorization::new(&principal.interior, ks[ti], &xi).map(Some)
        })
        .collect();
    let entries = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut min_margin = f64::INFINITY;
    let mut min_plus = f64::INFINITY;
    for e in entries.iter().flatten() {
        min_margin = min_margin.min(e.margin);
        min_plus = e.rho_plus.iter().map(|r| r.im).fold(min_plus, f64::min);
    }
    Ok(FactorTable {
        layout,
        tuple: principal,
        entries,
        min_margin,
        min_plus_margin: min_plus,
    })
}

/// Characteristic matrices at every retained mode.
pub fn build_char_table(table: &FactorTable) -> Result<Vec<Option<CharMatrix>>> {
    table
        .entries
        .par_iter()
        .map(|e| e.as_ref().map(|f| char_matrix(&table.tuple, f)).transpose())
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

fn factor_value(f: &SymbolFactorization, side: Side, z: C64) -> C64 {
    match side {
        Side::Plus => poly::horner_desc(&f.c_plus, z),
        Side::Minus => f.leading * poly::horner_desc(&f.c_minus, z),
    }
}

fn apply_factor_power(u: &TPField, table: &FactorTable, side: Side, invert: bool) -> Result<TPField> {
    ensure_oscillatory(u)?;
    table.layout.check(u.grid())?;
    let state = u.state();
    let mut s = u.to_spectral();
    let grid = s.grid_arc().clone();
    let lay = &table.layout;
    map_modes(&grid, s.data_mut(), |mode, v| {
        if mode.time_index == 0 || mode.nyquist {
            *v = C64::new(0.0, 0.0);
            return;
        }
        let tflat = lay.tflat(mode.spatial_index);
        let f = table.entry(mode.time_index, tflat).expect("retained mode");
        let val = factor_value(f, side, C64::new(mode.xi[lay.dim - 1], 0.0));
        *v = if invert { *v / val } else { *v * val };
    });
    Ok(s.to_state(state))
}

/// Spectral multiplication by `1/M_+` or by `1/(a M_-)`, evaluated at real
/// `xi_n` on the full box.
pub fn apply_factor_inverse(u: &TPField, table: &FactorTable, side: Side) -> Result<TPField> {
    apply_factor_power(u, table, side, true)
}

/// Spectral multiplication by `M_+` or `a M_-`.
pub fn apply_factor(u: &TPField, table: &FactorTable, side: Side) -> Result<TPField> {
    apply_factor_power(u, table, side, false)
}

/// Fraction of the L2 mass of a full-box field on `x_n < 0`.
pub fn lower_fraction(u: &TPField) -> Result<f64> {
    let p = u.to_physical();
    let lower = crate::fourier::restrict_lower(&p)?;
    let total = crate::fourier::lp_norm(&p, 2.0);
    Ok(if total == 0.0 { 0.0 } else { crate::fourier::lp_norm(&lower, 2.0) / total })
}

