//! Problem data for `-div σ + (Aσ) b + c u = f`, `σ = ∇u - pI`, `u = g` on ∂Ω.
//!
//! With exact data, `div σ = (∇u) b + c u - f` is taken from the PDE, so
//! only `u`, `p` and `∇u` need closed forms.

use std::f64::consts::PI;

use crate::mesh::Mesh;
use crate::quadrature::GaussLine;
use crate::scalar::{lerp, Point, Real};
use crate::tensor::Matrix2;

pub type ScalarFn<T> = Box<dyn Fn(Point<T>) -> T + Send + Sync>;
pub type VectorFn<T> = Box<dyn Fn(Point<T>) -> Point<T> + Send + Sync>;
pub type TensorFn<T> = Box<dyn Fn(Point<T>) -> Matrix2<T> + Send + Sync>;

pub struct ExactSolution<T> {
    pub u: VectorFn<T>,
    pub p: ScalarFn<T>,
    /// `grad_u[i][j] = ∂u_i/∂x_j`.
    pub grad_u: TensorFn<T>,
}

pub struct ProblemSpec<T> {
    pub name: String,
    pub b: VectorFn<T>,
    pub c: ScalarFn<T>,
    pub f: VectorFn<T>,
    pub g: VectorFn<T>,
    pub exact: Option<ExactSolution<T>>,
    /// Point where the exact solution is singular; error norms grade
    /// their quadrature towards it.
    pub singularity: Option<Point<T>>,
}

impl<T: Real> std::fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("has_exact", &self.exact.is_some())
            .field("singularity", &self.singularity)
            .finish()
    }
}

impl<T: Real> ProblemSpec<T> {
    pub fn new(name: impl Into<String>, b: VectorFn<T>, c: ScalarFn<T>, f: VectorFn<T>, g: VectorFn<T>) -> Self {
        Self { name: name.into(), b, c, f, g, exact: None, singularity: None }
    }

    pub fn with_exact(mut self, exact: ExactSolution<T>) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn with_singularity(mut self, x: Point<T>) -> Self {
        self.singularity = Some(x);
        self
    }

    pub fn sigma(&self, x: Point<T>) -> Option<Matrix2<T>> {
        self.exact.as_ref().map(|e| (e.grad_u)(x) - Matrix2::identity() * (e.p)(x))
    }

    /// Row-wise `div σ = (∇u) b + c u - f`.
    pub fn div_sigma(&self, x: Point<T>) -> Option<Point<T>> {
        self.exact.as_ref().map(|e| {
            let conv = (e.grad_u)(x).mul_vec((self.b)(x));
            let u = (e.u)(x);
            let c = (self.c)(x);
            let f = (self.f)(x);
            [conv[0] + c * u[0] - f[0], conv[1] + c * u[1] - f[1]]
        })
    }

    /// Largest `|g - u|` over 3-point Gauss nodes of the boundary edges.
    pub fn boundary_mismatch(&self, mesh: &Mesh<T>) -> Option<T> {
        let exact = self.exact.as_ref()?;
        let gauss = GaussLine::<T>::new(3).expect("3-point rule");
        let mut worst = T::zero();
        for &e in mesh.boundary_edges() {
            let [a, b] = mesh.edges()[e];
            for &s in &gauss.points {
                let x = lerp(mesh.vertices()[a], mesh.vertices()[b], s);
                let (g, u) = ((self.g)(x), (exact.u)(x));
                worst = worst.max((g[0] - u[0]).abs()).max((g[1] - u[1]).abs());
            }
        }
        Some(worst)
    }

    /// `∮ g·n ds` with the outward normal.
    pub fn boundary_flux(&self, mesh: &Mesh<T>) -> T {
        self.boundary_flux_parts(mesh).0
    }

    /// `(∮ g·n ds, ∮ |g·n| ds)`, both by 3-point Gauss rules per edge.
    pub(crate) fn boundary_flux_parts(&self, mesh: &Mesh<T>) -> (T, T) {
        let gauss = GaussLine::<T>::new(3).expect("3-point rule");
        let (mut total, mut magnitude) = (T::zero(), T::zero());
        for &e in mesh.boundary_edges() {
            let n = outward_normal(mesh, e);
            let [a, b] = mesh.edges()[e];
            let len = mesh.edge_length(e);
            for (&s, &w) in gauss.points.iter().zip(&gauss.weights) {
                let g = (self.g)(lerp(mesh.vertices()[a], mesh.vertices()[b], s));
                let gn = w * len * (g[0] * n[0] + g[1] * n[1]);
                total += gn;
                magnitude += gn.abs();
            }
        }
        (total, magnitude)
    }
}

/// Unit normal of boundary edge `e` pointing out of the domain.
pub(crate) fn outward_normal<T: Real>(mesh: &Mesh<T>, e: usize) -> Point<T> {
    let n = mesh.edge_normal(e);
    let t = mesh.edge_triangles(e)[0].expect("edge has a triangle");
    let c = mesh.centroid(t);
    let m = mesh.edge_midpoint(e);
    if (m[0] - c[0]) * n[0] + (m[1] - c[1]) * n[1] >= T::zero() {
        n
    } else {
        [-n[0], -n[1]]
    }
}

/// Smooth benchmark on the unit square:
/// `u = (sin π(x₁+x₂), -sin π(x₁+x₂))`, `p = x₁ + x₂ - 1`,
/// `b = (cos x₂, sin x₁)`, `c = 0`, `g = u|∂Ω`.
pub fn problem1<T: Real>() -> ProblemSpec<T> {
    let pi = T::PI();
    let u = move |x: Point<T>| {
        let s = (pi * (x[0] + x[1])).sin();
        [s, -s]
    };
    let grad = move |x: Point<T>| {
        let d = pi * (pi * (x[0] + x[1])).cos();
        Matrix2::new(d, d, -d, -d)
    };
    let b = |x: Point<T>| [x[1].cos(), x[0].sin()];
    let f = move |x: Point<T>| {
        let s = (pi * (x[0] + x[1])).sin();
        let cv = pi * (pi * (x[0] + x[1])).cos() * (x[1].cos() + x[0].sin());
        let lap = T::lit(2.0) * pi * pi * s;
        [lap + cv + T::one(), -lap - cv + T::one()]
    };
    ProblemSpec::new("p1", Box::new(b), Box::new(|_| T::zero()), Box::new(f), Box::new(u)).with_exact(ExactSolution {
        u: Box::new(u),
        p: Box::new(|x: Point<T>| x[0] + x[1] - T::one()),
        grad_u: Box::new(grad),
    })
}

/// Polar angle measured into the L-shaped domain, in `[0, 3π/2]`.
fn lshape_angle<T: Real>(x: Point<T>) -> T {
    let th = x[1].atan2(x[0]);
    if th < T::zero() {
        th + T::lit(2.0 * PI)
    } else {
        th
    }
}

/// Corner singularity on `[-1,1]² \ ([0,1]×[-1,0])`:
/// `u = r^α (sin αθ, cos αθ)`, `α = 2/3`, `p = x₁ + x₂`, `b = (1, 2)`,
/// `c = 0`, `g = u|∂Ω`, `f = (1,1) + (∇u) b`.
pub fn problem2<T: Real>() -> ProblemSpec<T> {
    let alpha = T::lit(2.0 / 3.0);
    let u = move |x: Point<T>| {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let th = lshape_angle(x);
        let ra = r.powf(alpha);
        [ra * (alpha * th).sin(), ra * (alpha * th).cos()]
    };
    // u₂ + i u₁ = z^α, so the Cauchy-Riemann equations give every entry of
    // ∇u from α z^(α-1) = U + iV.
    let grad = move |x: Point<T>| {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if r == T::zero() {
            return Matrix2::zero();
        }
        let th = lshape_angle(x);
        let k = alpha * r.powf(alpha - T::one());
        let (uu, vv) = (k * ((alpha - T::one()) * th).cos(), k * ((alpha - T::one()) * th).sin());
        Matrix2::new(vv, uu, uu, -vv)
    };
    let b = |_: Point<T>| [T::one(), T::lit(2.0)];
    let f = move |x: Point<T>| {
        let cv = grad(x).mul_vec([T::one(), T::lit(2.0)]);
        [T::one() + cv[0], T::one() + cv[1]]
    };
    ProblemSpec::new("p2", Box::new(b), Box::new(|_| T::zero()), Box::new(f), Box::new(u))
        .with_exact(ExactSolution { u: Box::new(u), p: Box::new(|x: Point<T>| x[0] + x[1]), grad_u: Box::new(grad) })
        .with_singularity([T::zero(), T::zero()])
}

/// Convection-dominated flow on the unit square: `b = (500, 1)`, `c = 0`,
/// `g = 0`, `f = 5000 (x₂, -x₁)`. No closed-form solution.
pub fn problem3<T: Real>() -> ProblemSpec<T> {
    let k = T::lit(5000.0);
    ProblemSpec::new(
        "p3",
        Box::new(|_| [T::lit(500.0), T::one()]),
        Box::new(|_| T::zero()),
        Box::new(move |x: Point<T>| [k * x[1], -k * x[0]]),
        Box::new(|_| [T::zero(); 2]),
    )
}

/// Homogeneous data with the given convection and reaction; the exact
/// solution is zero.
pub fn zero_problem<T: Real>(b: Point<T>, c: T) -> ProblemSpec<T> {
    ProblemSpec::new("zero", Box::new(move |_| b), Box::new(move |_| c), Box::new(|_| [T::zero(); 2]), Box::new(|_| [T::zero(); 2]))
        .with_exact(ExactSolution {
            u: Box::new(|_| [T::zero(); 2]),
            p: Box::new(|_| T::zero()),
            grad_u: Box::new(|_| Matrix2::zero()),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_lshape_mesh, make_square_piecewise_uniform};

    /// Central differences of the closed-form `u`, `p`.
    fn fd_residual(p: &ProblemSpec<f64>, x: Point<f64>) -> f64 {
        let e = p.exact.as_ref().unwrap();
        let h = 1e-4;
        let u = |y: Point<f64>| (e.u)(y);
        let grad = |y: Point<f64>| {
            let (xp, xm, yp, ym) = (u([y[0] + h, y[1]]), u([y[0] - h, y[1]]), u([y[0], y[1] + h]), u([y[0], y[1] - h]));
            [[(xp[0] - xm[0]) / (2.0 * h), (yp[0] - ym[0]) / (2.0 * h)], [(xp[1] - xm[1]) / (2.0 * h), (yp[1] - ym[1]) / (2.0 * h)]]
        };
        let g = grad(x);
        let ga = (e.grad_u)(x);
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((g[i][j] - ga.m[i][j]).abs());
            }
        }
        // -Δu + ∇p + (∇u) b + c u - f
        let u0 = u(x);
        let (xp, xm, yp, ym) = (u([x[0] + h, x[1]]), u([x[0] - h, x[1]]), u([x[0], x[1] + h]), u([x[0], x[1] - h]));
        let lap = [0, 1].map(|i| (xp[i] + xm[i] + yp[i] + ym[i] - 4.0 * u0[i]) / (h * h));
        let pp = |y: Point<f64>| (e.p)(y);
        let gp = [(pp([x[0] + h, x[1]]) - pp([x[0] - h, x[1]])) / (2.0 * h), (pp([x[0], x[1] + h]) - pp([x[0], x[1] - h])) / (2.0 * h)];
        let b = (p.b)(x);
        let c = (p.c)(x);
        let f = (p.f)(x);
        for i in 0..2 {
            let conv = g[i][0] * b[0] + g[i][1] * b[1];
            let r = -lap[i] + gp[i] + conv + c * u0[i] - f[i];
            worst = worst.max(r.abs() / (1.0 + f[i].abs()));
        }
        worst
    }

    #[test]
    fn problem1_load_matches_finite_differences() {
        let p = problem1::<f64>();
        for x in [[0.1, 0.2], [0.5, 0.5], [0.93, 0.31], [0.27, 0.77]] {
            assert!(fd_residual(&p, x) < 1e-5, "{x:?}: {}", fd_residual(&p, x));
        }
    }

    #[test]
    fn problem2_load_matches_finite_differences() {
        let p = problem2::<f64>();
        for x in [[0.5, 0.5], [-0.4, 0.3], [-0.6, -0.7], [0.3, 0.8], [-0.2, -0.9]] {
            assert!(fd_residual(&p, x) < 1e-5, "{x:?}: {}", fd_residual(&p, x));
        }
    }

    #[test]
    fn problem2_velocity_is_divergence_free() {
        let p = problem2::<f64>();
        let e = p.exact.as_ref().unwrap();
        for x in [[0.5, 0.5], [-0.4, 0.3], [-0.6, -0.7]] {
            assert!((e.grad_u)(x).trace().abs() < 1e-14);
        }
    }

    #[test]
    fn problem2_angle_covers_the_domain() {
        assert_eq!(lshape_angle([1.0, 0.0]), 0.0);
        assert!((lshape_angle([0.0, -1.0]) - 1.5 * PI).abs() < 1e-15);
        assert!((lshape_angle([-1.0, -1.0]) - 1.25 * PI).abs() < 1e-15);
    }

    #[test]
    fn boundary_data_matches_exact_velocity() {
        let m = make_square_piecewise_uniform::<f64>();
        assert!(problem1::<f64>().boundary_mismatch(&m).unwrap() < 1e-10);
        let l = make_lshape_mesh::<f64>();
        assert!(problem2::<f64>().boundary_mismatch(&l).unwrap() < 1e-10);
        assert!(problem3::<f64>().boundary_mismatch(&m).is_none());
    }

    #[test]
    fn divergence_free_data_has_zero_boundary_flux() {
        let m = make_square_piecewise_uniform::<f64>();
        assert!(problem1::<f64>().boundary_flux(&m).abs() < 1e-3);
        assert_eq!(problem3::<f64>().boundary_flux(&m), 0.0);
    }

    #[test]
    fn div_sigma_agrees_with_laplacian_form() {
        // div σ = Δu - ∇p = (-2π² s - 1, 2π² s - 1) for the smooth benchmark.
        let p = problem1::<f64>();
        let x = [0.3, 0.45];
        let s = (PI * 0.75).sin();
        let d = p.div_sigma(x).unwrap();
        assert!((d[0] - (-2.0 * PI * PI * s - 1.0)).abs() < 1e-12);
        assert!((d[1] - (2.0 * PI * PI * s - 1.0)).abs() < 1e-12);
    }
}
