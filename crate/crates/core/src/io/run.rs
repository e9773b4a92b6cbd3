//! Execution of a specification's task list.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::ellipticity::{check_agmon_ray, check_properly_elliptic, check_tuple, EllipticityReport};
use crate::error::{Error, Result};
use crate::field::TPField;
use crate::fourier::{lp_norm, sobolev_norm};
use crate::grid::GroupGrid;
use crate::halfspace::{
    bootstrap_chain, build_char_table, build_factor_table, half_lp_norm, half_sobolev_norm, HalfSpaceSolution,
    HalfSpaceSolver,
};
use crate::io::field_file::write_field;
use crate::io::format::{csv, fmt_f64, to_json};
use crate::io::spec::{DomainKind, ProblemSpec, Task};
use crate::oracle::{
    compare_halfspace, manufactured_residual, relative_l2, sweep_halfspace, sweep_wholespace, Domain, HalfSweepConfig,
    SweepReport,
};
use crate::wholespace::{apply_operator, check_invertible, solve_wholespace, WholeSpaceProblem};


pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CONDITION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit code for an error: 2 when a structural condition fails, 1 for bad
/// input or I/O, 3 for numerical trouble.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_condition_failure() {
        return EXIT_CONDITION;
    }
    match err {
        Error::Schema { .. }
        | Error::MeanModePresent { .. }
        | Error::BadMagic
        | Error::SizeMismatch { .. }
        | Error::UnsupportedVersion(_)
        | Error::Io(_)
        | Error::InvalidInput(_)
        | Error::InvalidGrid(_)
        | Error::InvalidSymbol(_)
        | Error::DimensionMismatch { .. }
        | Error::GridMismatch
        | Error::StateMismatch { .. }
        | Error::MeanNotZero { .. } => EXIT_INPUT,
        _ => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    ConditionFailure,
    NumericalFailure,
    InputError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => EXIT_OK,
            Status::InputError => EXIT_INPUT,
            Status::ConditionFailure => EXIT_CONDITION,
            Status::NumericalFailure => EXIT_NUMERICAL,
        }
    }

    fn of_error(err: &Error) -> Self {
        match exit_code(err) {
            EXIT_CONDITION => Status::ConditionFailure,
            EXIT_INPUT => Status::InputError,
            _ => Status::NumericalFailure,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskOutcome {
    pub task: Task,
    pub status: Status,
    pub message: String,
    /// File names relative to the output directory.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub outcomes: Vec<TaskOutcome>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the spec's task list.
    pub tasks: Option<Vec<Task>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

/// Runs the tasks in order, stopping at the first failure, and writes
/// `summary.json` next to the task artifacts in `out_dir`.
pub fn run(spec: &ProblemSpec, out_dir: &Path, opts: &RunOptions) -> Result<RunSummary> {
    fs::create_dir_all(out_dir)?;
    let mut ctx = Context::new(spec, out_dir, opts)?;
    let tasks = opts.tasks.clone().unwrap_or_else(|| spec.tasks.clone());
    let mut outcomes = Vec::new();
    for task in tasks {
        let out = match ctx.run_task(task) {
            Ok(o) => o,
            Err(e) => TaskOutcome {
                task,
                status: Status::of_error(&e),
                message: e.to_string(),
                artifacts: vec![],
            },
        };
        let stop = out.status != Status::Pass;
        outcomes.push(out);
        if stop {
            break;
        }
    }
    let exit_code = outcomes.last().map_or(EXIT_OK, |o| o.status.exit_code());
    let summary = RunSummary { outcomes, exit_code };
    fs::write(out_dir.join("summary.json"), to_json(&summary)?)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub domain: DomainKind,
    pub passed: bool,
    pub ellipticity: EllipticityReport,
    /// Failure of the per-mode checks on the grid (invertibility of
    /// `ik + A`, root splits, `det F`), with the offending mode.
    pub grid_failure: Option<String>,
}

struct Context<'a> {
    spec: &'a ProblemSpec,
    out: PathBuf,
    opts: &'a RunOptions,
    grid: Arc<GroupGrid>,
    solver: Option<HalfSpaceSolver>,
    solution: Option<(TPField, Option<HalfSpaceSolution>)>,
}

impl<'a> Context<'a> {
    fn new(spec: &'a ProblemSpec, out: &Path, opts: &'a RunOptions) -> Result<Self> {
        Ok(Self {
            spec,
            out: out.to_path_buf(),
            opts,
            grid: spec.grid()?,
            solver: None,
            solution: None,
        })
    }

    fn write(&self, name: &str, text: &str) -> Result<String> {
        fs::write(self.out.join(name), text)?;
        Ok(name.to_string())
    }

    fn outcome(task: Task, ok: bool, fail: Status, message: String, artifacts: Vec<String>) -> TaskOutcome {
        TaskOutcome {
            task,
            status: if ok { Status::Pass } else { fail },
            message,
            artifacts,
        }
    }

    fn run_task(&mut self, task: Task) -> Result<TaskOutcome> {
        match task {
            Task::Check => self.check(),
            Task::Solve => self.solve(),
            Task::Verify => self.verify(),
            Task::Sweep => self.sweep(),
            Task::OracleCompare => self.oracle_compare(),
        }
    }

    fn half_solver(&mut self) -> Result<&HalfSpaceSolver> {
        if self.solver.is_none() {
            self.solver = Some(HalfSpaceSolver::new(&self.spec.tuple()?, self.grid.clone())?);
        }
        Ok(self.solver.as_ref().unwrap())
    }

    fn check(&mut self) -> Result<TaskOutcome> {
        let spec = self.spec;
        let ellipticity = match spec.domain {
            DomainKind::Half => check_tuple(&spec.tuple()?, &spec.sampling)?,
            DomainKind::Whole => {
                let op = spec.interior_symbol()?;
                let proper = check_properly_elliptic(&op, &spec.sampling)?;
                let agmon = [std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2]
                    .iter()
                    .map(|&t| check_agmon_ray(&op, t, &spec.sampling))
                    .collect::<Result<Vec<_>>>()?;
                EllipticityReport {
                    passed: proper.passed && agmon.iter().all(|a| a.passed),
                    samples_used: proper.samples + agmon.iter().map(|a| a.samples).sum::<usize>(),
                    properly_elliptic: proper,
                    agmon,
                    complementing: vec![],
                }
            }
        };
        let grid_result = match spec.domain {
            DomainKind::Whole => check_invertible(&spec.interior_symbol()?, &self.grid),
            DomainKind::Half => {
                build_factor_table(&spec.tuple()?, &self.grid).and_then(|t| build_char_table(&t).map(|_| ()))
            }
        };
        let mut status = Status::Pass;
        let grid_failure = match grid_result {
            Ok(()) => None,
            Err(e) => {
                status = Status::of_error(&e);
                Some(e.to_string())
            }
        };
        if !ellipticity.passed {
            status = Status::ConditionFailure;
        }
        let report = CheckReport {
            domain: spec.domain,
            passed: status == Status::Pass,
            ellipticity,
            grid_failure,
        };
        let message = if report.passed {
            "all conditions hold".to_string()
        } else if let Some(w) = first_witness(&report.ellipticity) {
            format!("condition fails, witness {w}")
        } else {
            report.grid_failure.clone().unwrap_or_default()
        };
        let a = self.write("check.json", &to_json(&report)?)?;
        Ok(TaskOutcome {
            task: Task::Check,
            status,
            message,
            artifacts: vec![a],
        })
    }

    fn ensure_solution(&mut self) -> Result<()> {
        if self.solution.is_some() {
            return Ok(());
        }
        let f = self.spec.interior_data(&self.grid)?;
        let sol = match self.spec.domain {
            DomainKind::Whole => {
                let prob = WholeSpaceProblem::new(self.spec.interior_symbol()?, f)?;
                (solve_wholespace(&prob)?, None)
            }
            DomainKind::Half => {
                let g = self.spec.boundary_data(&self.grid)?;
                let s = self.half_solver()?.solve(&f, &g)?;
                (s.u.clone(), Some(s))
            }
        };
        self.solution = Some(sol);
        Ok(())
    }

    fn solve(&mut self) -> Result<TaskOutcome> {
        self.ensure_solution()?;
        let m = self.spec.m();
        let (u, half) = self.solution.as_ref().unwrap();
        let mut rows: Vec<(String, f64)> = Vec::new();
        match half {
            None => {
                rows.push(("l2".into(), lp_norm(u, 2.0)));
                rows.push(("sobolev_2".into(), sobolev_norm(u, 2.0, m)));
            }
            Some(s) => {
                rows.push(("l2".into(), half_lp_norm(u, 2.0)?));
                rows.push(("sobolev_2".into(), half_sobolev_norm(u, 2.0, m)?));
                rows.push(("leakage".into(), s.leakage));
                for (j, v) in bootstrap_chain(u, m)?.into_iter().enumerate() {
                    rows.push((format!("bootstrap_h{}", m + j), v));
                }
            }
        }
        let mut artifacts = vec![];
        write_field(self.out.join("u.tpf"), u)?;
        artifacts.push("u.tpf".to_string());
        let text = csv(&["quantity", "value"], rows.iter().map(|(q, v)| vec![q.clone(), fmt_f64(*v)]));
        artifacts.push(self.write("norms.csv", &text)?);
        Ok(TaskOutcome {
            task: Task::Solve,
            status: Status::Pass,
            message: format!("solved on {} nodes", self.grid.len()),
            artifacts,
        })
    }

    fn verify(&mut self) -> Result<TaskOutcome> {
        self.ensure_solution()?;
        let tol = self.spec.tolerances;
        let f = self.spec.interior_data(&self.grid)?;
        let op = self.spec.interior_symbol()?;
        let (u, half) = self.solution.as_ref().unwrap();
        let mut rows: Vec<(String, f64, f64)> = Vec::new();
        match half {
            None => rows.push(("interior_residual".into(), manufactured_residual(u, &f, &op, Domain::Whole)?, tol.residual)),
            Some(_) => {
                rows.push(("interior_residual".into(), manufactured_residual(u, &f, &op, Domain::Half)?, tol.residual));
                let g = self.spec.boundary_data(&self.grid)?;
                let tuple = self.spec.tuple()?;
                let bu = if tuple.is_dirichlet() {
                    crate::halfspace::normal_traces(u, tuple.m())?
                } else {
                    crate::halfspace::boundary_values(u, &tuple)?
                };
                for (j, (b, gj)) in bu.iter().zip(&g).enumerate() {
                    let den = lp_norm(gj, 2.0);
                    let num = lp_norm(&b.sub(gj)?, 2.0);
                    let r = if den == 0.0 { num } else { num / den };
                    rows.push((format!("boundary_residual_{j}"), r, tol.residual));
                }
            }
        }
        let ok = rows.iter().all(|r| r.1 <= r.2);
        let text = csv(
            &["quantity", "value", "tolerance", "pass"],
            rows.iter().map(|(q, v, t)| vec![q.clone(), fmt_f64(*v), fmt_f64(*t), (v <= t).to_string()]),
        );
        let a = self.write("verify.csv", &text)?;
        let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        Ok(Self::outcome(
            Task::Verify,
            ok,
            Status::NumericalFailure,
            format!("largest residual {}", fmt_f64(worst)),
            vec![a],
        ))
    }

    fn sweep(&mut self) -> Result<TaskOutcome> {
        let spec = self.spec;
        let samples = self.opts.samples.unwrap_or(spec.sweep.samples);
        let seed = self.opts.seed.unwrap_or(spec.seed);
        let report: SweepReport = match spec.domain {
            DomainKind::Whole => sweep_wholespace(&spec.interior_symbol()?, &self.grid, samples, spec.sweep.p, seed)?,
            DomainKind::Half => sweep_halfspace(
                &spec.tuple()?,
                &self.grid,
                &HalfSweepConfig {
                    samples,
                    p: spec.sweep.p,
                    seed,
                    time_band: spec.sweep.time_band,
                },
            )?,
        };
        let ok = report.sup.is_finite() && report.sup_refined.is_finite() && report.drift < spec.tolerances.drift;
        let a = self.write("sweep.json", &to_json(&report)?)?;
        let b = self.write(
            "sweep.csv",
            &csv(
                &["sample", "ratio", "ratio_refined"],
                report.csv_rows().into_iter().map(|(i, r, s)| vec![i.to_string(), fmt_f64(r), fmt_f64(s)]),
            ),
        )?;
        Ok(Self::outcome(
            Task::Sweep,
            ok,
            Status::NumericalFailure,
            format!("sup {} / {}, drift {}", fmt_f64(report.sup), fmt_f64(report.sup_refined), fmt_f64(report.drift)),
            vec![a, b],
        ))
    }

    fn oracle_compare(&mut self) -> Result<TaskOutcome> {
        let tol = self.spec.tolerances.oracle;
        let (rows, header): (Vec<Vec<String>>, Vec<&str>) = match self.spec.domain {
            DomainKind::Whole => {
                // The data define a band-limited u_0; solve op[M] u_0 and compare.
                let op = self.spec.interior_symbol()?;
                let u0 = self.spec.interior_data(&self.grid)?;
                let f = apply_operator(&op, &u0).to_physical();
                let u = solve_wholespace(&WholeSpaceProblem::new(op, f)?)?;
                let e = relative_l2(u.data(), u0.data());
                (vec![vec!["manufactured".into(), fmt_f64(e)]], vec!["comparison", "relative_l2"])
            }
            DomainKind::Half => {
                self.ensure_solution()?;
                let tuple = self.spec.tuple()?;
                let f = self.spec.interior_data(&self.grid)?;
                let g = self.spec.boundary_data(&self.grid)?;
                let u = &self.solution.as_ref().unwrap().0;
                let rows = compare_halfspace(&tuple, &f, &g, u, 32)?
                    .into_iter()
                    .map(|c| {
                        let xs: Vec<String> = c.xi_prime.iter().map(|x| fmt_f64(*x)).collect();
                        vec![fmt_f64(c.k), xs.join(" "), fmt_f64(c.relative_l2)]
                    })
                    .collect();
                (rows, vec!["k", "xi_prime", "relative_l2"])
            }
        };
        let worst = rows
            .iter()
            .map(|r| r.last().unwrap().parse::<f64>().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        let a = self.write("oracle.csv", &csv(&header, rows))?;
        Ok(Self::outcome(
            Task::OracleCompare,
            worst <= tol,
            Status::NumericalFailure,
            format!("largest disagreement {}", fmt_f64(worst)),
            vec![a],
        ))
    }

}

fn first_witness(r: &EllipticityReport) -> Option<String> {
    let w = r
        .properly_elliptic
        .witness
        .as_ref()
        .or_else(|| r.agmon.iter().find_map(|a| a.witness.as_ref()))
        .or_else(|| r.complementing.iter().find_map(|c| c.witness.as_ref()))?;
    serde_json::to_string(w).ok()
}
