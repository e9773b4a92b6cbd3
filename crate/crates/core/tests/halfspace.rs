use std::f64::consts::PI;
use std::sync::Arc;

use tppar::halfspace::{build_factor_table, normal_traces, HalfSpaceSolver};
use tppar::oracle::{analytic_heat_halfspace, manufactured_residual, ode_oracle, Domain, ModeODEProblem};
use tppar::{Complex64 as C64, DifferentialSymbol, Error, GroupGrid, OperatorTuple, State, TPField};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn grid(n: usize, tang: (f64, usize), normal: (f64, usize)) -> Arc<GroupGrid> {
    let mut axes = vec![tang; n - 1];
    axes.push(normal);
    Arc::new(GroupGrid::make(1.0, n, 8, &axes, Some(n - 1)).unwrap())
}

fn boundary_mode(g: &GroupGrid, k: f64, xi: &[f64], amp: C64) -> TPField {
    let b = Arc::new(g.boundary());
    let xi = xi.to_vec();
    TPField::from_fn(b, move |t, x| amp * C64::from_polar(1.0, k * t + xi.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()))
}

#[test]
fn heat_dirichlet_matches_analytic_mode() {
    let g = grid(1, (0.0, 0), (8.0, 1024));
    let k = 2.0 * PI;
    let tuple = OperatorTuple::dirichlet(DifferentialSymbol::heat(1)).unwrap();
    let solver = HalfSpaceSolver::new(&tuple, g.clone()).unwrap();
    let f = TPField::zeros(g.clone(), State::Physical);
    let gd = boundary_mode(&g, k, &[], c(1.0, 0.0));
    let sol = solver.solve(&f, &[gd]).unwrap();
    let exact = analytic_heat_halfspace(k, &[], c(1.0, 0.0)).unwrap();
    let nodes = g.nodes(0);
    let mut err: f64 = 0.0;
    for (ti, line) in sol.u.data().chunks(1024).enumerate() {
        let t = g.time_node(ti);
        for j in 512..1024 {
            let want = exact.eval(nodes[j]) * C64::from_polar(1.0, k * t);
            err = err.max((line[j] - want).norm());
        }
    }
    assert!(err < 1e-6, "err {err}");
}

#[test]
fn analytic_heat_root() {
    let e = analytic_heat_halfspace(2.0 * PI, &[], c(1.0, 0.0)).unwrap();
    assert!((e.rho_plus - c(-PI.sqrt(), PI.sqrt())).norm() < 1e-12);
    let v = analytic_heat_halfspace(1.0, &[], c(1.0, 0.0)).unwrap().eval(1.0);
    assert!((v - c(0.3748528086, -0.3203156354)).norm() < 1e-9, "{v}");
}

#[test]
fn lift_reproduces_dirichlet_traces() {
    let g = grid(2, (8.0, 32), (8.0, 512));
    let tuple = OperatorTuple::dirichlet(DifferentialSymbol::biharmonic(2)).unwrap();
    let solver = HalfSpaceSolver::new(&tuple, g.clone()).unwrap();
    let xi = PI / 8.0;
    let d = vec![
        boundary_mode(&g, 2.0 * PI, &[xi], c(1.0, 0.5)),
        boundary_mode(&g, -2.0 * PI, &[-xi], c(0.0, -0.3)),
    ];
    let u = solver.lift_dirichlet(&d).unwrap();
    let tr = normal_traces(&u, 2).unwrap();
    for (a, b) in tr.iter().zip(&d) {
        let e = a.sub(b).unwrap().max_abs() / b.max_abs();
        assert!(e < 1e-6, "trace error {e}");
    }
}

#[test]
fn zero_trace_solution_stays_in_half_space() {
    let tuple = OperatorTuple::dirichlet(DifferentialSymbol::heat(1)).unwrap();
    let leak = |n: usize| {
        let g = grid(1, (0.0, 0), (16.0, n));
        let solver = HalfSpaceSolver::new(&tuple, g.clone()).unwrap();
        let f = TPField::from_fn(g.clone(), |t, x| {
            if x[0] < 0.0 {
                c(0.0, 0.0)
            } else {
                C64::from_polar((-(x[0] - 4.0).powi(2)).exp(), 2.0 * PI * t)
            }
        });
        let zt = solver.solve_zero_trace(&f).unwrap();
        let r = manufactured_residual(&zt.u, &f, &tuple.interior, Domain::Half).unwrap();
        assert!(r < 1e-3, "residual {r}");
        zt.leakage
    };
    let (a, b) = (leak(256), leak(512));
    assert!(a < 1e-3, "leakage {a}");
    assert!(b < a, "{b} !< {a}");
}

#[test]
fn neumann_matches_ode_oracle() {
    let g = grid(1, (0.0, 0), (8.0, 1024));
    let k = 2.0 * PI;
    let neumann = DifferentialSymbol::normal_monomial(1, 1, c(1.0, 0.0));
    let tuple = OperatorTuple::new(DifferentialSymbol::heat(1), vec![neumann]).unwrap();
    let solver = HalfSpaceSolver::new(&tuple, g.clone()).unwrap();
    let f = TPField::zeros(g.clone(), State::Physical);
    let gd = boundary_mode(&g, k, &[], c(1.0, 0.0));
    let sol = solver.solve(&f, &[gd]).unwrap();
    let prob = ModeODEProblem::from_fn(k, &[], &tuple, |_| c(0.0, 0.0), vec![c(1.0, 0.0)], 12.0, 768);
    let ode = ode_oracle(&prob).unwrap();
    // Same spacing 1/64; time index 0 is t = 0.
    let line = &sol.u.data()[..1024];
    let mut err: f64 = 0.0;
    for (i, v) in ode.iter().enumerate().take(512) {
        err = err.max((line[512 + i] - v).norm());
    }
    assert!(err < 1e-6, "err {err}");
}

#[test]
fn lower_order_terms_are_rejected() {
    let g = grid(1, (0.0, 0), (8.0, 64));
    let robin = DifferentialSymbol::new(1, 1, vec![(vec![1], c(1.0, 0.0)), (vec![0], c(1.0, 0.0))]).unwrap();
    let tuple = OperatorTuple::new(DifferentialSymbol::heat(1), vec![robin]).unwrap();
    assert!(matches!(HalfSpaceSolver::new(&tuple, g), Err(Error::InvalidSymbol(_))));
}

#[test]
fn root_on_real_axis_is_reported() {
    let g = grid(1, (0.0, 0), (8.0, 64));
    let op = DifferentialSymbol::heat(1).scaled(c(0.0, 1.0));
    let tuple = OperatorTuple::dirichlet(op).unwrap();
    match build_factor_table(&tuple, &g) {
        Err(Error::RootOnRealAxis { .. }) | Err(Error::WrongSplit { .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn tangential_condition_is_singular_at_zero_frequency() {
    // B = D_1 on T x R^2_+: F vanishes at xi' = 0.
    let tuple = OperatorTuple::new(
        DifferentialSymbol::heat(2),
        vec![DifferentialSymbol::new(2, 1, vec![(vec![1, 0], c(1.0, 0.0))]).unwrap()],
    )
    .unwrap();
    let prob = ModeODEProblem::from_fn(2.0 * PI, &[0.0], &tuple, |_| c(0.0, 0.0), vec![c(1.0, 0.0)], 12.0, 600);
    assert!(matches!(ode_oracle(&prob), Err(Error::SingularSystem { .. })));
}

#[test]
fn biharmonic_kernel_decay_rate() {
    let fact = tppar::SymbolFactorization::new(&DifferentialSymbol::biharmonic(1), 1.0, &[]).unwrap();
    let kernel = tppar::halfspace::build_mode_kernel(&fact).unwrap();
    // Independent: roots of z^4 = -i in the upper half plane are e^{i 3pi/8}, e^{i 7pi/8}.
    let expected = (PI / 8.0).sin();
    assert!((kernel.decay - expected).abs() < 1e-12);
    assert!((kernel.decay - 0.382683432365).abs() < 1e-11);
    let t = kernel.symbol_trace();
    for b in 0..2 {
        for a in 0..2 {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((t[(b, a)] - want).norm() < 1e-12);
        }
    }
}
