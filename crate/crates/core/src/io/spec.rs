//! Problem specifications in TOML.
//!
//! ```toml
//! period = 1.0
//! dimension = 1
//! domain = "half"            # "whole" or "half"; the normal axis is the last one
//! trace = "partial"          # Dirichlet data as d_n^j u ("partial") or D_n^j u ("symbol")
//! tasks = ["check", "solve", "verify"]
//! seed = 7
//!
//! [interior]                 # A(xi) = sum a_alpha xi^alpha, D = -i d
//! terms = [{ alpha = [2], re = 1.0 }]
//!
//! [[boundary]]               # m operators on the half space
//! terms = [{ alpha = [0], re = 1.0 }]
//!
//! [grid]
//! n_t = 16
//! axes = [{ half_length = 16.0, points = 256 }]
//!
//! [data]                     # modes use signed integer indices
//! f = [{ k = 1, xi = [0], re = 1.0 }]
//! profile = { centre = 4.0, width = 1.0 }   # half space: f = modes(t, x') * exp(-((x_n - c)/w)^2)
//! g = [[{ k = 1, xi_prime = [], re = 1.0 }]]
//! ```
//!
//! Field files may replace inline data via `data.f_file` and `data.g_files`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::ellipticity::SamplingPolicy;
use crate::error::{Error, Result};
use crate::field::{State, TPField};
use crate::fourier::{synthesize, SpectralMode};
use crate::grid::GroupGrid;
use crate::io::field_file::read_field_file;
use crate::symbol::{DifferentialSymbol, OperatorTuple};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Whole,
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFlavor {
    /// `d_n^j u`, converted to `D_n^j u = (-i)^j d_n^j u` on input.
    #[default]
    Partial,
    Symbol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Check,
    Solve,
    Verify,
    Sweep,
    OracleCompare,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Check => "check",
            Task::Solve => "solve",
            Task::Verify => "verify",
            Task::Sweep => "sweep",
            Task::OracleCompare => "oracle-compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    /// Defaults to the largest `|alpha|`.
    #[serde(default)]
    pub order: Option<u32>,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub half_length: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_t: usize,
    pub axes: Vec<AxisSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: i64,
    #[serde(default)]
    pub xi: Option<Vec<i64>>,
    #[serde(default)]
    pub xi_prime: Option<Vec<i64>>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub centre: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default)]
    pub f: Vec<Spanned<ModeSpec>>,
    #[serde(default)]
    pub f_file: Option<PathBuf>,
    #[serde(default)]
    pub profile: Option<Profile>,
    #[serde(default)]
    pub g: Vec<Vec<Spanned<ModeSpec>>>,
    #[serde(default)]
    pub g_files: Option<Vec<PathBuf>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Bound on the manufactured residual for `verify`.
    pub residual: f64,
    /// Bound on the relative solver/oracle disagreement.
    pub oracle: f64,
    /// Bound on the two-resolution drift of sweep suprema.
    pub drift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-2,
            oracle: 1e-3,
            drift: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub samples: usize,
    pub p: f64,
    /// Largest `|k|` index of half-space sweep data.
    pub time_band: i64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            samples: 100,
            p: 2.0,
            time_band: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub period: f64,
    pub dimension: usize,
    #[serde(default)]
    pub m: Option<usize>,
    pub domain: DomainKind,
    #[serde(default)]
    pub trace: TraceFlavor,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub seed: u64,
    pub interior: Spanned<OperatorSpec>,
    #[serde(default)]
    pub boundary: Vec<Spanned<OperatorSpec>>,
    pub grid: Spanned<GridSpec>,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub sampling: SamplingPolicy,
    /// Directory that relative file references are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_tasks() -> Vec<Task> {
    vec![Task::Check, Task::Solve]
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn schema(text: &str, span: std::ops::Range<usize>, message: impl Into<String>) -> Error {
    Error::Schema {
        line: Some(line_of(text, span.start)),
        message: message.into(),
    }
}

/// Parses and validates a specification. Errors carry the line of the
/// offending entry.
pub fn parse_spec(text: &str) -> Result<ProblemSpec> {
    let spec: ProblemSpec = toml::from_str(text).map_err(|e| Error::Schema {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    spec.validate(text)?;
    Ok(spec)
}

/// Reads a specification file; relative data paths resolve against its
/// directory.
pub fn load_spec(path: impl AsRef<Path>) -> Result<ProblemSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut spec = parse_spec(&text)?;
    spec.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(spec)
}

fn build_symbol(n: usize, op: &OperatorSpec) -> Result<DifferentialSymbol> {
    let order = op
        .order
        .unwrap_or_else(|| op.terms.iter().map(|t| t.alpha.iter().sum()).max().unwrap_or(0));
    DifferentialSymbol::new(n, order, op.terms.iter().map(|t| (t.alpha.clone(), C64::new(t.re, t.im))))
}

impl ProblemSpec {
    fn validate(&self, text: &str) -> Result<()> {
        let n = self.dimension;
        if n == 0 {
            return Err(Error::Schema {
                line: None,
                message: "dimension must be at least 1".into(),
            });
        }
        let interior = build_symbol(n, self.interior.get_ref())
            .map_err(|e| schema(text, self.interior.span(), format!("interior: {e}")))?;
        let order = interior.order() as usize;
        if order == 0 || order % 2 != 0 {
            return Err(schema(text, self.interior.span(), format!("interior order {order} is not even and positive")));
        }
        let m = order / 2;
        if let Some(mm) = self.m {
            if mm != m {
                return Err(Error::Schema {
                    line: None,
                    message: format!("m = {mm} but the interior operator has order {order}"),
                });
            }
        }
        let grid = self.grid.get_ref();
        if grid.axes.len() != n {
            return Err(schema(text, self.grid.span(), format!("{} grid axes for dimension {n}", grid.axes.len())));
        }
        match self.domain {
            DomainKind::Whole => {
                if let Some(b) = self.boundary.first() {
                    return Err(schema(text, b.span(), "boundary operators given for the whole space"));
                }
            }
            DomainKind::Half => {
                if self.boundary.len() != m {
                    let span = self.boundary.first().map(|b| b.span()).unwrap_or(self.interior.span());
                    return Err(schema(
                        text,
                        span,
                        format!("expected m = {m} boundary operators, got {}", self.boundary.len()),
                    ));
                }
                for b in &self.boundary {
                    build_symbol(n, b.get_ref()).map_err(|e| schema(text, b.span(), format!("boundary: {e}")))?;
                }
            }
        }
        self.tuple().map_err(|e| Error::Schema {
            line: None,
            message: e.to_string(),
        })?;

        let tang = match self.domain {
            DomainKind::Whole => n,
            DomainKind::Half => n - 1,
        };
        let check_modes = |name: &str, modes: &[Spanned<ModeSpec>], len: usize| -> Result<()> {
            for (i, md) in modes.iter().enumerate() {
                let v = md.get_ref();
                if v.k == 0 {
                    return Err(Error::MeanModePresent {
                        entry: format!("{name}[{i}] at line {}", line_of(text, md.span().start)),
                    });
                }
                let xi = v.xi.as_ref().or(v.xi_prime.as_ref());
                let got = xi.map_or(0, Vec::len);
                if got != len || (v.xi.is_some() && v.xi_prime.is_some()) {
                    return Err(schema(
                        text,
                        md.span(),
                        format!("{name}[{i}] needs exactly one of xi/xi_prime with {len} entries"),
                    ));
                }
            }
            Ok(())
        };
        check_modes("data.f", &self.data.f, tang)?;
        for (j, g) in self.data.g.iter().enumerate() {
            check_modes(&format!("data.g[{j}]"), g, n - 1)?;
        }
        if self.domain == DomainKind::Half && !self.data.g.is_empty() && self.data.g.len() != m {
            return Err(Error::Schema {
                line: None,
                message: format!("data.g has {} entries, expected m = {m}", self.data.g.len()),
            });
        }
        if let Some(files) = &self.data.g_files {
            if files.len() != m {
                return Err(Error::Schema {
                    line: None,
                    message: format!("data.g_files has {} entries, expected m = {m}", files.len()),
                });
            }
        }
        Ok(())
    }

    pub fn interior_symbol(&self) -> Result<DifferentialSymbol> {
        build_symbol(self.dimension, self.interior.get_ref())
    }

    /// The operator tuple; for the whole space the Dirichlet tuple of the
    /// interior symbol (used only for the ellipticity checks).
    pub fn tuple(&self) -> Result<OperatorTuple> {
        let interior = self.interior_symbol()?;
        match self.domain {
            DomainKind::Whole => OperatorTuple::dirichlet(interior),
            DomainKind::Half => OperatorTuple::new(
                interior,
                self.boundary
                    .iter()
                    .map(|b| build_symbol(self.dimension, b.get_ref()))
                    .collect::<Result<_>>()?,
            ),
        }
    }

    pub fn m(&self) -> usize {
        self.interior_symbol().map(|s| s.order() as usize / 2).unwrap_or(0)
    }

    pub fn grid(&self) -> Result<Arc<GroupGrid>> {
        let g = self.grid.get_ref();
        let axes: Vec<(f64, usize)> = g.axes.iter().map(|a| (a.half_length, a.points)).collect();
        let half = (self.domain == DomainKind::Half).then(|| self.dimension - 1);
        Ok(Arc::new(GroupGrid::make(self.period, self.dimension, g.n_t, &axes, half)?))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn modes(entries: &[Spanned<ModeSpec>]) -> Vec<SpectralMode> {
        entries
            .iter()
            .map(|e| {
                let v = e.get_ref();
                SpectralMode {
                    k: v.k,
                    xi: v.xi.clone().or_else(|| v.xi_prime.clone()).unwrap_or_default(),
                    amplitude: C64::new(v.re, v.im),
                }
            })
            .collect()
    }

    /// Interior data on the full box (whole space) or half box.
    pub fn interior_data(&self, grid: &Arc<GroupGrid>) -> Result<TPField> {
        if let Some(p) = &self.data.f_file {
            return read_field_file(self.resolve(p))?.into_field(grid.clone());
        }
        let modes = Self::modes(&self.data.f);
        match self.domain {
            DomainKind::Whole => synthesize(grid.clone(), &modes),
            DomainKind::Half => {
                let n = self.dimension;
                let profile = self.profile(grid);
                let tangential = synthesize(Arc::new(grid.boundary()), &modes)?;
                let lay = crate::halfspace::Layout::of(grid)?;
                let nodes = grid.nodes(n - 1);
                let mut data = vec![C64::new(0.0, 0.0); grid.len()];
                for (line, out) in data.chunks_mut(lay.n_n).enumerate() {
                    let a = tangential.data()[line];
                    for (j, v) in out.iter_mut().enumerate() {
                        let x = nodes[j];
                        if x >= 0.0 {
                            *v = a * (-((x - profile.centre) / profile.width).powi(2)).exp();
                        }
                    }
                }
                TPField::from_data(grid.clone(), State::Physical, data)
            }
        }
    }

    /// The `x_n` profile of half-space interior data.
    pub fn profile(&self, grid: &GroupGrid) -> Profile {
        self.data.profile.unwrap_or(Profile {
            centre: grid.axis(self.dimension - 1).half_length / 4.0,
            width: 1.0,
        })
    }

    /// Boundary data as internal symbol traces (`D_n^j`) when the tuple is
    /// Dirichlet, else as the values `B_j u`.
    pub fn boundary_data(&self, grid: &Arc<GroupGrid>) -> Result<Vec<TPField>> {
        let m = self.m();
        let bgrid = Arc::new(grid.boundary());
        let mut g: Vec<TPField> = if let Some(files) = &self.data.g_files {
            files
                .iter()
                .map(|p| read_field_file(self.resolve(p))?.into_field(bgrid.clone()))
                .collect::<Result<_>>()?
        } else if self.data.g.is_empty() {
            (0..m).map(|_| TPField::zeros(bgrid.clone(), State::Physical)).collect()
        } else {
            self.data
                .g
                .iter()
                .map(|modes| synthesize(bgrid.clone(), &Self::modes(modes)))
                .collect::<Result<_>>()?
        };
        if self.trace == TraceFlavor::Partial && self.tuple()?.is_dirichlet() {
            for (j, gj) in g.iter_mut().enumerate() {
                gj.scale(C64::new(0.0, -1.0).powu(j as u32));
            }
        }
        Ok(g)
    }
}
