//! Error norms, supercloseness quantities and convergence-order fits.

use crate::assembly::OseenSolution;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::postprocess::{postprocess_velocity, recover_pseudostress};
use crate::problem::ProblemSpec;
use crate::quadrature::QuadRule;
use crate::scalar::{midpoint, sub, Point, Real};
use crate::spaces::{interpolate_pseudostress, ElementKind, TensorField, VectorField, VelocityField};
use crate::tensor::Matrix2;

/// Nested corner refinements used on triangles touching a singular point.
pub const GRADED_LEVELS: usize = 16;

/// Element quadrature for error norms: a degree-6 rule, replaced by a
/// geometrically graded composite rule on triangles with a vertex at the
/// problem's singular point.
#[derive(Clone, Debug)]
pub struct ErrorQuadrature<T> {
    rule: QuadRule<T>,
    singularity: Option<Point<T>>,
    levels: usize,
}

impl<T: Real> ErrorQuadrature<T> {
    pub fn new(singularity: Option<Point<T>>) -> Self {
        Self { rule: QuadRule::triangle(6).expect("degree-6 rule"), singularity, levels: GRADED_LEVELS }
    }

    pub fn for_problem(problem: &ProblemSpec<T>) -> Self {
        Self::new(problem.singularity)
    }

    fn corner(&self, mesh: &Mesh<T>, t: usize) -> Option<usize> {
        let s = self.singularity?;
        let tol = T::lit(1e-12) * mesh.diameter(t);
        mesh.points(t).iter().position(|p| {
            let d = sub(*p, s);
            d[0].abs() <= tol && d[1].abs() <= tol
        })
    }

    /// `∫_K f dx` over triangle `t`.
    pub fn integrate<F: FnMut(Point<T>) -> T>(&self, mesh: &Mesh<T>, t: usize, mut f: F) -> T {
        let p = mesh.points(t);
        match self.corner(mesh, t) {
            None => self.rule.integrate(&p, f),
            Some(k) => {
                // c is the singular corner; each level keeps the half-size
                // corner triangle and integrates the remaining trapezoid.
                let (c, mut a, mut b) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
                let mut total = T::zero();
                for _ in 0..self.levels {
                    let (ma, mb) = (midpoint(c, a), midpoint(c, b));
                    total += self.rule.integrate(&[ma, a, b], &mut f);
                    total += self.rule.integrate(&[ma, b, mb], &mut f);
                    a = ma;
                    b = mb;
                }
                total + self.rule.integrate(&[c, a, b], &mut f)
            }
        }
    }

    /// `√(Σ_K ∫_K f)` for a nonnegative integrand `f(t, x)`.
    pub fn norm<F: FnMut(usize, Point<T>) -> T>(&self, mesh: &Mesh<T>, mut f: F) -> T {
        (0..mesh.nt()).map(|t| self.integrate(mesh, t, |x| f(t, x))).sum::<T>().sqrt()
    }
}

fn sq2<T: Real>(a: Point<T>, b: Point<T>) -> T {
    let d = sub(a, b);
    d[0] * d[0] + d[1] * d[1]
}

/// `‖field - exact‖` for vector fields.
pub fn l2_error_vector<T: Real, F: VectorField<T> + ?Sized>(
    mesh: &Mesh<T>,
    field: &F,
    exact: impl Fn(Point<T>) -> Point<T>,
    quad: &ErrorQuadrature<T>,
) -> T {
    quad.norm(mesh, |t, x| sq2(field.eval_in(t, x), exact(x)))
}

/// `‖field - exact‖` for tensor fields (Frobenius pointwise).
pub fn l2_error_tensor<T: Real, F: TensorField<T> + ?Sized>(
    mesh: &Mesh<T>,
    field: &F,
    exact: impl Fn(Point<T>) -> Matrix2<T>,
    quad: &ErrorQuadrature<T>,
) -> T {
    quad.norm(mesh, |t, x| (field.eval_in(t, x) - exact(x)).norm_sq())
}

/// Element averages of `u`, using the error quadrature.
pub fn project_velocity_graded<T: Real>(mesh: &Mesh<T>, u: impl Fn(Point<T>) -> Point<T>, quad: &ErrorQuadrature<T>) -> VelocityField<T> {
    let values = (0..mesh.nt())
        .map(|t| {
            let a = mesh.area(t);
            [quad.integrate(mesh, t, |x| u(x)[0]) / a, quad.integrate(mesh, t, |x| u(x)[1]) / a]
        })
        .collect();
    VelocityField { values }
}

/// `(‖P_h u - u_h‖, ‖Π_h σ - σ_h‖)`, both exact piecewise-polynomial norms.
pub fn supercloseness<T: Real>(problem: &ProblemSpec<T>, solution: &OseenSolution<'_, T>) -> Result<(T, T)> {
    let exact = problem.exact.as_ref().ok_or_else(|| Error::MissingExact(problem.name.clone()))?;
    let mesh = solution.sigma.mesh();
    let quad = ErrorQuadrature::for_problem(problem);
    let pu = project_velocity_graded(mesh, &exact.u, &quad);
    let eh = pu
        .values
        .iter()
        .zip(&solution.u.values)
        .enumerate()
        .map(|(t, (a, b))| sq2(*a, *b) * mesh.area(t))
        .sum::<T>()
        .sqrt();
    let pi_sigma = interpolate_pseudostress(solution.sigma.space(), |x| problem.sigma(x).expect("exact"));
    let xi = pi_sigma.combine(T::one(), &solution.sigma, -T::one()).l2_norm();
    Ok((eh, xi))
}

/// `‖div σ - div σ_h‖` with `div σ` taken from the PDE.
pub fn hdiv_error<T: Real>(problem: &ProblemSpec<T>, solution: &OseenSolution<'_, T>) -> Result<T> {
    if problem.exact.is_none() {
        return Err(Error::MissingExact(problem.name.clone()));
    }
    let mesh = solution.sigma.mesh();
    let quad = ErrorQuadrature::for_problem(problem);
    let divs: Vec<Point<T>> = (0..mesh.nt()).map(|t| solution.sigma.div(t)).collect();
    Ok(quad.norm(mesh, |t, x| sq2(problem.div_sigma(x).expect("exact"), divs[t])))
}

/// One row of a convergence table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub nt: usize,
    pub err_u: f64,
    pub err_eh: f64,
    pub err_ustar: f64,
    pub err_sigma: f64,
    pub err_xih: f64,
    /// Recovered pseudostress error; RT0 only.
    pub err_sigmastar: Option<f64>,
    pub err_div: f64,
    pub err_rho: f64,
    pub err_zeta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Column {
    U,
    Eh,
    Ustar,
    Sigma,
    Xih,
    SigmaStar,
    Div,
    Rho,
    Zeta,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::U => "err_u",
            Column::Eh => "err_eh",
            Column::Ustar => "err_ustar",
            Column::Sigma => "err_sigma",
            Column::Xih => "err_xih",
            Column::SigmaStar => "err_sigmastar",
            Column::Div => "err_div",
            Column::Rho => "err_rho",
            Column::Zeta => "err_zeta",
        }
    }

    pub fn get(self, row: &ErrorRow) -> Option<f64> {
        match self {
            Column::U => Some(row.err_u),
            Column::Eh => Some(row.err_eh),
            Column::Ustar => Some(row.err_ustar),
            Column::Sigma => Some(row.err_sigma),
            Column::Xih => Some(row.err_xih),
            Column::SigmaStar => row.err_sigmastar,
            Column::Div => Some(row.err_div),
            Column::Rho => Some(row.err_rho),
            Column::Zeta => Some(row.err_zeta),
        }
    }

    /// Table columns for an element: six for RT0, five for BDM1.
    pub fn table(kind: ElementKind) -> &'static [Column] {
        match kind {
            ElementKind::Rt0 => &[Column::U, Column::Eh, Column::Ustar, Column::Sigma, Column::Xih, Column::SigmaStar],
            ElementKind::Bdm1 => &[Column::U, Column::Eh, Column::Ustar, Column::Sigma, Column::Xih],
        }
    }
}

impl ErrorRow {
    /// Every error quantity of a solved problem with known exact solution.
    pub fn compute<T: Real>(problem: &ProblemSpec<T>, solution: &OseenSolution<'_, T>) -> Result<Self> {
        let exact = problem.exact.as_ref().ok_or_else(|| Error::MissingExact(problem.name.clone()))?;
        let mesh = solution.sigma.mesh();
        let quad = ErrorQuadrature::for_problem(problem);
        let sigma = |x: Point<T>| problem.sigma(x).expect("exact");

        let err_u = l2_error_vector(mesh, &solution.u, &exact.u, &quad);
        let ustar = postprocess_velocity(&solution.sigma, &solution.u)?;
        let err_ustar = l2_error_vector(mesh, &ustar, &exact.u, &quad);
        let err_sigma = l2_error_tensor(mesh, &solution.sigma, sigma, &quad);
        let (err_eh, err_xih) = supercloseness(problem, solution)?;
        let err_sigmastar = match solution.sigma.space().kind() {
            ElementKind::Rt0 => Some(l2_error_tensor(mesh, &recover_pseudostress(&solution.sigma)?, sigma, &quad).as_f64()),
            ElementKind::Bdm1 => None,
        };
        let err_div = hdiv_error(problem, solution)?;
        let pu = project_velocity_graded(mesh, &exact.u, &quad);
        let err_rho = l2_error_vector(mesh, &pu, &exact.u, &quad);
        let pi = interpolate_pseudostress(solution.sigma.space(), sigma);
        let err_zeta = l2_error_tensor(mesh, &pi, sigma, &quad);
        Ok(Self {
            nt: mesh.nt(),
            err_u: err_u.as_f64(),
            err_eh: err_eh.as_f64(),
            err_ustar: err_ustar.as_f64(),
            err_sigma: err_sigma.as_f64(),
            err_xih: err_xih.as_f64(),
            err_sigmastar,
            err_div: err_div.as_f64(),
            err_rho: err_rho.as_f64(),
            err_zeta: err_zeta.as_f64(),
        })
    }
}

/// Least-squares slope of `ln err` against `ln h`, `h = nt^(-1/2)`,
/// skipping the first entry.
pub fn fit_order(nt: &[usize], err: &[f64]) -> Result<f64> {
    if nt.len() != err.len() {
        return Err(Error::Dimension(format!("{} mesh sizes for {} errors", nt.len(), err.len())));
    }
    if nt.len() < 3 {
        return Err(Error::OrderFit(format!("need at least 3 rows, got {}", nt.len())));
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if let Some(bad) = err.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::OrderFit(format!("error value {bad} is not positive")));
    }
    let xs: Vec<f64> = nt[1..].iter().map(|&n| -0.5 * (n as f64).ln()).collect();
    let ys: Vec<f64> = err[1..].iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::OrderFit("all mesh sizes are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Fitted order of each requested column.
pub fn fit_orders(rows: &[ErrorRow], columns: &[Column]) -> Result<Vec<f64>> {
    let nt: Vec<usize> = rows.iter().map(|r| r.nt).collect();
    columns
        .iter()
        .map(|c| {
            let err = rows
                .iter()
                .map(|r| c.get(r).ok_or_else(|| Error::OrderFit(format!("column {} is missing", c.name()))))
                .collect::<Result<Vec<f64>>>()?;
            fit_order(&nt, &err)
        })
        .collect()
}
