//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always
//! printed. A failing criterion is reported, not turned into a panic; the
//! process only fails if a run cannot be carried out at all.

use std::time::Instant;

use oseen_core::problem::zero_problem;
use oseen_core::quadrature::QuadRule;
use oseen_core::spaces::{interpolate_canonical, VectorField};
use oseen_core::{
    adaptive_solve, apply_deviatoric, lu_solve, make_lshape_mesh, make_square_piecewise_uniform, make_unit_square_uniform, postprocess_velocity,
    problem1, problem2, problem3, recover_pseudostress, run_convergence, solve_oseen, uniform_quad_refine, AdaptiveHistory, Column, ConvergenceTable,
    CsrMatrix, ElementKind, HdivSpace, Matrix2, Mesh, Mode, ProblemId, RunConfig, StopRule, TripletBuffer,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Rows at nt = 4864 of the reference RT0 and BDM1 tables, in table column
/// order.
const RT0_4864: [f64; 6] = [2.032e-2, 1.653e-4, 3.880e-4, 8.530e-2, 1.390e-3, 1.088e-2];
const BDM1_4864: [f64; 5] = [2.032e-2, 1.051e-4, 2.606e-4, 2.031e-3, 1.818e-3];

struct Report {
    passed: usize,
    total: usize,
}

impl Report {
    fn line(&mut self, id: usize, ok: bool, title: &str, detail: String) {
        self.total += 1;
        self.passed += ok as usize;
        println!("[{}] criterion {id}: {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn order(table: &ConvergenceTable<f64>, col: Column) -> f64 {
    let k = table.columns().iter().position(|c| *c == col).expect("column present");
    table.orders[k].unwrap_or(f64::NAN)
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    v >= lo && v <= hi
}

fn orders_text(table: &ConvergenceTable<f64>) -> String {
    table.columns().iter().map(|c| format!("{} {:.3}", c.name(), order(table, *c))).collect::<Vec<_>>().join(", ")
}

fn criterion_1(r: &mut Report, table: &ConvergenceTable<f64>, seconds: f64) {
    let ok = within(order(table, Column::U), 0.95, 1.05)
        && order(table, Column::Eh) >= 1.85
        && order(table, Column::Ustar) >= 1.85
        && within(order(table, Column::Sigma), 0.95, 1.05)
        && order(table, Column::Xih) >= 1.75
        && order(table, Column::SigmaStar) >= 1.8
        && seconds <= 180.0;
    r.line(1, ok, "RT0 orders on problem 1", format!("{}; {seconds:.1} s", orders_text(table)));
}

fn criterion_2(r: &mut Report, table: &ConvergenceTable<f64>) {
    let ok = order(table, Column::Sigma) >= 1.9
        && within(order(table, Column::Xih), 1.85, 2.2)
        && order(table, Column::Eh) >= 1.85
        && within(order(table, Column::U), 0.95, 1.05);
    r.line(2, ok, "BDM1 orders on problem 1", orders_text(table));
}

fn criterion_3(r: &mut Report, rt0: &ConvergenceTable<f64>, bdm1: &ConvergenceTable<f64>) {
    let mut worst: Vec<String> = Vec::new();
    let mut ok = true;
    for (table, reference) in [(rt0, &RT0_4864[..]), (bdm1, &BDM1_4864[..])] {
        let k = table.nt.iter().position(|&n| n == 4864).expect("level with 4864 triangles");
        for (c, p) in table.columns().iter().zip(reference) {
            let ratio = c.get(&table.rows[k]).unwrap() / p;
            if !within(ratio, 0.5, 2.0) {
                ok = false;
                worst.push(format!("{} {} ratio {ratio:.2}", table.element, c.name()));
            }
        }
    }
    let ratios = |table: &ConvergenceTable<f64>, reference: &[f64]| {
        let k = table.nt.iter().position(|&n| n == 4864).unwrap();
        table.columns().iter().zip(reference).map(|(c, p)| format!("{:.2}", c.get(&table.rows[k]).unwrap() / p)).collect::<Vec<_>>().join(" ")
    };
    let detail = format!(
        "ratios to the reference nt=4864 rows: rt0 [{}], bdm1 [{}]{}",
        ratios(rt0, &RT0_4864),
        ratios(bdm1, &BDM1_4864),
        if worst.is_empty() { String::new() } else { format!("; outside [0.5, 2]: {}", worst.join(", ")) }
    );
    r.line(3, ok, "error magnitudes at nt = 4864", detail);
}

fn max_entry(m: Matrix2<f64>) -> f64 {
    (0..2).flat_map(|i| m.row(i)).fold(0.0, |a, v| a.max(v.abs()))
}

fn random_matrix(rng: &mut StdRng) -> Matrix2<f64> {
    Matrix2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn criterion_4(r: &mut Report) {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut dev = 0.0f64;
    for _ in 0..1000 {
        let (s, t) = (random_matrix(&mut rng), random_matrix(&mut rng));
        let a = apply_deviatoric(s);
        dev = dev.max(max_entry(apply_deviatoric(a) - a)).max(a.trace().abs()).max((a.inner(&t) - s.inner(&apply_deviatoric(t))).abs());
    }

    let mesh = uniform_quad_refine(&make_square_piecewise_uniform::<f64>()).unwrap();
    let mut commute = 0.0f64;
    for kind in [ElementKind::Rt0, ElementKind::Bdm1] {
        let space = HdivSpace::new(&mesh, kind).unwrap();
        for _ in 0..50 {
            let (c, g1, g2) = (random_matrix(&mut rng), random_matrix(&mut rng), random_matrix(&mut rng));
            let div = [g1.row(0)[0] + g2.row(0)[1], g1.row(1)[0] + g2.row(1)[1]];
            let pi = interpolate_canonical(&space, |x| c + g1 * x[0] + g2 * x[1]);
            for t in 0..mesh.nt() {
                let d = pi.div(t);
                commute = commute.max((d[0] - div[0]).abs()).max((d[1] - div[1]).abs());
            }
        }
    }

    let mut zero = 0.0f64;
    let mut trace = 0.0f64;
    for kind in [ElementKind::Rt0, ElementKind::Bdm1] {
        let space = HdivSpace::new(&mesh, kind).unwrap();
        let sol = solve_oseen(&zero_problem([1.0, -0.5], 1.0), &space).unwrap();
        zero = zero.max(sol.sigma.l2_norm()).max(sol.u.l2_norm(&mesh));
        let sol = solve_oseen(&problem1(), &space).unwrap();
        trace = trace.max(sol.sigma.trace_mean().abs() / (sol.sigma.l2_norm() / mesh.domain_area().sqrt()));
    }
    let lshape = make_lshape_mesh::<f64>();
    let lspace = HdivSpace::new(&lshape, ElementKind::Rt0).unwrap();
    let lsol = solve_oseen(&problem2(), &lspace).unwrap();
    trace = trace.max(lsol.sigma.trace_mean().abs() / (lsol.sigma.l2_norm() / lshape.domain_area().sqrt()));

    let space = HdivSpace::new(&mesh, ElementKind::Rt0).unwrap();
    let sol = solve_oseen(&problem1(), &space).unwrap();
    let ustar = postprocess_velocity(&sol.sigma, &sol.u).unwrap();
    let rule = QuadRule::<f64>::triangle(2).unwrap();
    let mut means = 0.0f64;
    for t in 0..mesh.nt() {
        for i in 0..2 {
            let m = rule.integrate(&mesh.points(t), |x| ustar.eval_in(t, x)[i]) / mesh.area(t);
            means = means.max((m - sol.u.values[t][i]).abs());
        }
    }

    let free = Matrix2::new(0.75, -1.0, 2.0, -0.75);
    let rec_c = recover_pseudostress(&interpolate_canonical(&space, |_| free)).unwrap();
    let rec_i = recover_pseudostress(&interpolate_canonical(&space, |_| Matrix2::identity())).unwrap();
    let recovery = rec_c.values.iter().map(|v| max_entry(*v - free)).chain(rec_i.values.iter().map(|v| max_entry(*v))).fold(0.0, f64::max);

    let ok = dev <= 1e-14 && commute <= 1e-10 && zero <= 1e-10 && means <= 1e-12 && recovery <= 1e-12 && trace <= 1e-9;
    r.line(
        4,
        ok,
        "property suite",
        format!(
            "deviator {dev:.1e}, commuting diagram {commute:.1e}, zero data {zero:.1e}, P_h u* - u_h {means:.1e}, recovery {recovery:.1e}, trace mean {trace:.1e}"
        ),
    );
}

/// Least-squares slope of `ln err` against `ln dofs`.
fn loglog_slope(dofs: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = dofs.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn criterion_5(r: &mut Report, h: &AdaptiveHistory<f64>) {
    let rec = &h.records;
    let n = rec.len();
    let dofs: Vec<f64> = rec.iter().map(|r| r.dofs as f64).collect();
    let err: Vec<f64> = rec.iter().map(|r| r.true_error.unwrap()).collect();
    let rel = -loglog_slope(&dofs[n - 5..], &err[n - 5..]) / 0.5;
    let half = -loglog_slope(&dofs[n / 2..], &err[n / 2..]) / 0.5;
    let tail = &rec[n - n.div_ceil(3)..];
    let (emin, emax) = tail.iter().map(|r| r.effectivity.unwrap()).fold((f64::INFINITY, 0.0f64), |(a, b), e| (a.min(e), b.max(e)));

    let m = &h.final_mesh;
    let amin = (0..m.nt()).map(|t| m.area(t)).fold(f64::INFINITY, f64::min);
    let smallest: Vec<usize> = (0..m.nt()).filter(|&t| m.area(t) <= amin * (1.0 + 1e-9)).collect();
    let hmin = m.diameter(smallest[0]);
    let near = smallest.iter().all(|&t| {
        let c = m.centroid(t);
        c[0].hypot(c[1]) <= 3.0 * hmin
    });
    let touches = smallest.iter().any(|&t| m.points(t).contains(&[0.0, 0.0]));

    let (a, b, c) = (within(rel, 0.85, 1.15), emin >= 0.7 && emax <= 1.3, near && touches);
    r.line(
        5,
        a && b && c,
        "adaptive L-shape",
        format!(
            "{} iterations to {} dofs; (a) last-5 slope / optimal {rel:.3} [{}] (last-half fit {half:.3}); (b) effectivity on final third in [{emin:.3}, {emax:.3}] [{}]; (c) {} smallest elements at the corner [{}]",
            n,
            rec[n - 1].dofs,
            if a { "ok" } else { "out of [0.85, 1.15]" },
            if b { "ok" } else { "out of [0.7, 1.3]" },
            smallest.len(),
            if c { "ok" } else { "not at the corner" },
        ),
    );
}

fn criterion_6(r: &mut Report, h: &AdaptiveHistory<f64>) {
    let m = &h.final_mesh;
    let median = |keep: &dyn Fn(f64) -> bool| {
        let mut d: Vec<f64> = (0..m.nt()).filter(|&t| keep(m.centroid(t)[0])).map(|t| m.diameter(t)).collect();
        d.sort_by(f64::total_cmp);
        d.get(d.len() / 2).copied().unwrap_or(f64::NAN)
    };
    let (right, left) = (median(&|x| x > 0.95), median(&|x| x < 0.5));
    let ok = h.records.len() == 10 && right * 4.0 <= left;
    r.line(
        6,
        ok,
        "boundary layer",
        format!("{} solves, final nt {}; median diameter x1 > 0.95: {right:.3e}, x1 < 0.5: {left:.3e} (ratio {:.1})", h.records.len(), m.nt(), left / right),
    );
}

#[allow(clippy::needless_range_loop)]
fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, &bi)| row.iter().copied().chain([bi]).collect()).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..=n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

fn criterion_7(r: &mut Report, residuals: &[f64]) {
    let worst_residual = residuals.iter().copied().fold(0.0, f64::max);
    let mut rng = StdRng::seed_from_u64(99);
    let mut worst_oracle = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(10..200);
        let mut t = TripletBuffer::new(n, n);
        for i in 0..n {
            for _ in 0..rng.gen_range(1..5) {
                t.push(i, rng.gen_range(0..n), rng.gen_range(-1.0..1.0));
            }
            t.push(i, i, rng.gen_range(1.0..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
        }
        let a: CsrMatrix<f64> = t.to_csr();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = lu_solve(&a, &b).unwrap();
        let y = dense_solve(&a.to_dense(), &b);
        let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        worst_oracle = worst_oracle.max(x.iter().zip(&y).fold(0.0f64, |m, (p, q)| m.max((p - q).abs())) / scale);
    }
    let ok = worst_residual <= 1e-9 && worst_oracle <= 1e-10;
    r.line(
        7,
        ok,
        "solver contract",
        format!("largest relative residual {worst_residual:.1e} over {} solves; dense oracle deviation {worst_oracle:.1e} on 20 systems", residuals.len()),
    );
}

fn main() {
    let mut report = Report { passed: 0, total: 0 };
    let mut residuals = Vec::new();

    let start = Instant::now();
    let rt0 = run_convergence::<f64>(&RunConfig::new(ProblemId::P1, ElementKind::Rt0, Mode::Uniform)).expect("RT0 study");
    let seconds = start.elapsed().as_secs_f64();
    let bdm1 = run_convergence::<f64>(&RunConfig::new(ProblemId::P1, ElementKind::Bdm1, Mode::Uniform)).expect("BDM1 study");
    residuals.extend(&rt0.residuals);
    residuals.extend(&bdm1.residuals);
    criterion_1(&mut report, &rt0, seconds);
    criterion_2(&mut report, &bdm1);
    criterion_3(&mut report, &rt0, &bdm1);
    criterion_4(&mut report);

    let p2 = adaptive_solve(&problem2::<f64>(), make_lshape_mesh::<f64>(), 0.7, StopRule { max_dofs: 30_000, max_iters: None }).expect("adaptive L-shape run");
    residuals.extend(p2.records.iter().map(|r| r.residual));
    criterion_5(&mut report, &p2);

    // Ten solves: the initial one and nine refinements.
    let p3_mesh: Mesh<f64> = make_unit_square_uniform(4);
    let p3 = adaptive_solve(&problem3::<f64>(), p3_mesh, 0.3, StopRule { max_dofs: usize::MAX, max_iters: Some(9) }).expect("boundary-layer run");
    residuals.extend(p3.records.iter().map(|r| r.residual));
    criterion_6(&mut report, &p3);

    criterion_7(&mut report, &residuals);
    println!("acceptance: {} of {} criteria passed", report.passed, report.total);
}
