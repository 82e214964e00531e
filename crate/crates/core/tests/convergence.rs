use oseen_core::experiments::{emit_table, run_problem_convergence, write_convergence, Format};
use oseen_core::problem::ExactSolution;
use oseen_core::spaces::project_velocity;
use oseen_core::{
    make_square_piecewise_uniform, make_unit_square_uniform, run_convergence, solve_oseen, ElementKind, HdivSpace, Matrix2, Mode, ProblemId,
    ProblemSpec, RunConfig,
};

/// Stokes data (`b = 0`, `c = 0`) for a user-supplied exact solution with
/// `div σ` constant, so `f = -div σ`.
fn stokes(
    name: &str,
    u: fn([f64; 2]) -> [f64; 2],
    grad: fn([f64; 2]) -> Matrix2<f64>,
    p: fn([f64; 2]) -> f64,
    f: [f64; 2],
) -> ProblemSpec<f64> {
    ProblemSpec::new(name, Box::new(|_| [0.0, 0.0]), Box::new(|_| 0.0), Box::new(move |_| f), Box::new(u))
        .with_exact(ExactSolution { u: Box::new(u), p: Box::new(p), grad_u: Box::new(grad) })
}

fn max_entry(m: Matrix2<f64>) -> f64 {
    (0..2).flat_map(|i| m.row(i)).fold(0.0, |a, v| a.max(v.abs()))
}

/// With `σ` in the discrete space the Stokes error equations force
/// `σ_h = σ` (up to the trace-mean constant) and `u_h = P_h u`.
fn assert_reproduced(problem: &ProblemSpec<f64>, kind: ElementKind) {
    let mesh = make_square_piecewise_uniform::<f64>();
    let space = HdivSpace::new(&mesh, kind).unwrap();
    let sol = solve_oseen(problem, &space).unwrap();
    let exact = problem.exact.as_ref().unwrap();
    let pu = project_velocity(&mesh, &exact.u);
    // The trace-mean fix pins the pressure constant; the exact p has zero mean.
    for t in 0..mesh.nt() {
        for x in mesh.points(t) {
            let err = max_entry(sol.sigma.eval(t, x) - problem.sigma(x).unwrap());
            assert!(err < 1e-10, "{kind} triangle {t}: {err:e}");
        }
        let (a, b) = (pu.values[t], sol.u.values[t]);
        assert!((a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10, "{kind} triangle {t}");
    }
}

#[test]
fn constant_pseudostress_is_exact_for_rt0() {
    let p = stokes("linear", |x| [x[0] + 2.0 * x[1], 3.0 * x[0] - x[1]], |_| Matrix2::new(1.0, 2.0, 3.0, -1.0), |_| 0.0, [0.0, 0.0]);
    assert_reproduced(&p, ElementKind::Rt0);
    assert_reproduced(&p, ElementKind::Bdm1);
}

#[test]
fn linear_pseudostress_is_exact_for_bdm1() {
    // u = (x² - y², -2xy) is divergence free; div σ = Δu - ∇p = (-1, -1).
    let p = stokes(
        "quadratic",
        |x| [x[0] * x[0] - x[1] * x[1], -2.0 * x[0] * x[1]],
        |x| Matrix2::new(2.0 * x[0], -2.0 * x[1], -2.0 * x[1], -2.0 * x[0]),
        |x| x[0] + x[1] - 1.0,
        [1.0, 1.0],
    );
    assert_reproduced(&p, ElementKind::Bdm1);
}

#[test]
fn user_problem_converges_at_the_expected_rates() {
    let p = stokes(
        "quadratic",
        |x| [x[0] * x[0] - x[1] * x[1], -2.0 * x[0] * x[1]],
        |x| Matrix2::new(2.0 * x[0], -2.0 * x[1], -2.0 * x[1], -2.0 * x[0]),
        |x| x[0] + x[1] - 1.0,
        [1.0, 1.0],
    );
    let t = run_problem_convergence(&p, ElementKind::Rt0, make_unit_square_uniform(2), 6, &mut |_| {}).unwrap();
    let [u, eh, _, sigma, ..] = t.orders[..] else { panic!("six columns expected") };
    assert!((u.unwrap() - 1.0).abs() < 0.05);
    assert!(eh.unwrap() >= 1.85, "{:?}", t.orders);
    assert!((sigma.unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn six_level_table_has_six_rows_and_an_order_row() {
    let cfg = RunConfig::new(ProblemId::P1, ElementKind::Rt0, Mode::Uniform);
    let table = run_convergence::<f64>(&cfg).unwrap();
    let text = emit_table(&table, Format::Table);
    let body: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(body.len(), 7);
    assert!(body[6].trim_start().starts_with("order"));
    assert_eq!(table.nt, vec![19, 76, 304, 1216, 4864, 19456]);
    assert!(table.residuals.iter().all(|r| *r <= 1e-9));
    assert_eq!(text.lines().next().unwrap().split_whitespace().count(), 7);
}

#[test]
fn bdm1_table_has_five_error_columns() {
    let cfg = RunConfig::new(ProblemId::P1, ElementKind::Bdm1, Mode::Uniform).with_levels(2);
    let table = run_convergence::<f64>(&cfg).unwrap();
    let csv = emit_table(&table, Format::Csv);
    assert_eq!(csv.lines().next().unwrap(), "nt,err_u,err_eh,err_ustar,err_sigma,err_xih");
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn output_files_are_reproducible() {
    let cfg = RunConfig::new(ProblemId::P1, ElementKind::Rt0, Mode::Uniform).with_levels(3);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_convergence(a.path(), &run_convergence::<f64>(&cfg).unwrap()).unwrap();
    write_convergence(b.path(), &run_convergence::<f64>(&cfg).unwrap()).unwrap();
    for name in ["errors.csv", "orders.csv", "mesh_final.txt"] {
        let (x, y) = (std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn mesh_file_override_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.txt");
    let mut f = std::fs::File::create(&path).unwrap();
    oseen_core::write_mesh(&make_unit_square_uniform::<f64>(3), &mut f).unwrap();
    let mut cfg = RunConfig::new(ProblemId::P1, ElementKind::Rt0, Mode::Uniform).with_levels(2);
    cfg.mesh_file = Some(path);
    assert_eq!(run_convergence::<f64>(&cfg).unwrap().nt, vec![18, 72]);
}
