//! H(div)-conforming RT0 / BDM1 spaces, the piecewise-constant velocity
//! space, canonical interpolation and L2 projection.
//!
//! Degrees of freedom are global edge functionals, so normal-trace
//! continuity holds by construction:
//!
//! * RT0: `∫_E v·n ds`
//! * BDM1: `∫_E v·n ds` and `∫_E v·n q ds`, `q = 2t - 1` with `t` running
//!   from the lower to the higher vertex of `E`
//!
//! where `n` is the global edge normal. Local basis functions are built
//! dual to these functionals directly in physical coordinates, which
//! coincides with the contravariant Piola image of the reference basis.

use std::io::Write;

use crate::dense::solve_in_place;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quadrature::{GaussLine, QuadRule};
use crate::scalar::{dot, lerp, sub, Point, Real};
use crate::tensor::Matrix2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Rt0,
    Bdm1,
}

impl ElementKind {
    pub fn local_dofs(self) -> usize {
        match self {
            ElementKind::Rt0 => 3,
            ElementKind::Bdm1 => 6,
        }
    }

    pub fn dofs_per_edge(self) -> usize {
        match self {
            ElementKind::Rt0 => 1,
            ElementKind::Bdm1 => 2,
        }
    }
}

impl std::fmt::Display for ElementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ElementKind::Rt0 => "rt0",
            ElementKind::Bdm1 => "bdm1",
        })
    }
}

impl std::str::FromStr for ElementKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rt0" => Ok(ElementKind::Rt0),
            "bdm1" => Ok(ElementKind::Bdm1),
            other => Err(Error::InvalidInput(format!("unknown element `{other}`"))),
        }
    }
}

/// Affine vector field `value + grad (x - origin)` on one triangle.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct LinearVector<T> {
    pub origin: Point<T>,
    pub value: Point<T>,
    /// `grad[i][j] = ∂v_i/∂x_j`.
    pub grad: [[T; 2]; 2],
}

impl<T: Real> LinearVector<T> {
    pub fn eval(&self, x: Point<T>) -> Point<T> {
        let d = sub(x, self.origin);
        [
            self.value[0] + self.grad[0][0] * d[0] + self.grad[0][1] * d[1],
            self.value[1] + self.grad[1][0] * d[0] + self.grad[1][1] * d[1],
        ]
    }

    pub fn div(&self) -> T {
        self.grad[0][0] + self.grad[1][1]
    }

    fn axpy(&mut self, s: T, other: &Self) {
        for i in 0..2 {
            self.value[i] += s * other.value[i];
            for j in 0..2 {
                self.grad[i][j] += s * other.grad[i][j];
            }
        }
    }
}

#[derive(Clone, Debug)]
struct ElementBasis<T> {
    dofs: [usize; 6],
    funcs: [LinearVector<T>; 6],
}

/// One row space (RT0 or BDM1) on a mesh; the pseudostress uses two copies.
#[derive(Clone, Debug)]
pub struct HdivSpace<'m, T> {
    kind: ElementKind,
    mesh: &'m Mesh<T>,
    n_dofs_per_row: usize,
    local: Vec<ElementBasis<T>>,
}

impl<'m, T: Real> HdivSpace<'m, T> {
    pub fn new(mesh: &'m Mesh<T>, kind: ElementKind) -> Result<Self> {
        let local = (0..mesh.nt())
            .map(|t| match kind {
                ElementKind::Rt0 => Ok(rt0_element(mesh, t)),
                ElementKind::Bdm1 => bdm1_element(mesh, t),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind, mesh, n_dofs_per_row: mesh.ne() * kind.dofs_per_edge(), local })
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn mesh(&self) -> &'m Mesh<T> {
        self.mesh
    }

    pub fn n_dofs_per_row(&self) -> usize {
        self.n_dofs_per_row
    }

    pub fn local_dofs(&self, t: usize) -> &[usize] {
        &self.local[t].dofs[..self.kind.local_dofs()]
    }

    pub fn local_basis(&self, t: usize) -> &[LinearVector<T>] {
        &self.local[t].funcs[..self.kind.local_dofs()]
    }

    /// Basis values and divergences at reference coordinates `(xi, eta)` of triangle `t`.
    pub fn eval_basis(&self, t: usize, xi: T, eta: T) -> Vec<(Point<T>, T)> {
        let tol = T::lit(1e-12);
        if xi < -tol || eta < -tol || xi + eta > T::one() + tol {
            log::debug!("basis evaluated outside the reference triangle at ({xi}, {eta})");
        }
        let x = self.mesh.map_reference(t, xi, eta);
        self.local_basis(t).iter().map(|f| (f.eval(x), f.div())).collect()
    }

    /// Global degrees of freedom of a vector field, via 3-point Gauss on each edge.
    pub fn edge_dofs<F: Fn(Point<T>) -> Point<T>>(&self, f: F) -> Vec<T> {
        let gauss = GaussLine::<T>::new(3).expect("3-point rule");
        let mut out = vec![T::zero(); self.n_dofs_per_row];
        let per = self.kind.dofs_per_edge();
        for e in 0..self.mesh.ne() {
            let [a, b] = self.mesh.edges()[e];
            let (pa, pb) = (self.mesh.vertices()[a], self.mesh.vertices()[b]);
            let n = self.mesh.edge_normal(e);
            let len = self.mesh.edge_length(e);
            for (&s, &w) in gauss.points.iter().zip(&gauss.weights) {
                let flux = dot(f(lerp(pa, pb, s)), n) * w * len;
                out[per * e] += flux;
                if per == 2 {
                    out[per * e + 1] += flux * (T::lit(2.0) * s - T::one());
                }
            }
        }
        out
    }

    /// Coefficients of the constant vector field `c` (exact in both spaces).
    pub fn constant_row(&self, c: Point<T>) -> Vec<T> {
        let per = self.kind.dofs_per_edge();
        let mut out = vec![T::zero(); self.n_dofs_per_row];
        for e in 0..self.mesh.ne() {
            out[per * e] = dot(c, self.mesh.edge_normal(e)) * self.mesh.edge_length(e);
        }
        out
    }

    /// Restriction of a row coefficient vector to triangle `t`.
    pub fn local_field(&self, t: usize, coeffs: &[T]) -> LinearVector<T> {
        let el = &self.local[t];
        let mut v = LinearVector { origin: el.funcs[0].origin, ..Default::default() };
        for (f, &d) in el.funcs.iter().zip(&el.dofs).take(self.kind.local_dofs()) {
            v.axpy(coeffs[d], f);
        }
        v
    }
}

fn rt0_element<T: Real>(mesh: &Mesh<T>, t: usize) -> ElementBasis<T> {
    let p = mesh.points(t);
    let origin = mesh.centroid(t);
    let two_area = T::lit(2.0) * mesh.area(t);
    let mut dofs = [0; 6];
    let mut funcs = [LinearVector::default(); 6];
    for (i, &(e, sign)) in mesh.tri_edges()[t].iter().enumerate() {
        let s = if sign > 0 { T::one() } else { -T::one() } / two_area;
        let d = sub(origin, p[i]);
        dofs[i] = e;
        funcs[i] = LinearVector { origin, value: [s * d[0], s * d[1]], grad: [[s, T::zero()], [T::zero(), s]] };
    }
    ElementBasis { dofs, funcs }
}

fn bdm1_element<T: Real>(mesh: &Mesh<T>, t: usize) -> Result<ElementBasis<T>> {
    let origin = mesh.centroid(t);
    let h = mesh.diameter(t);
    let gauss = GaussLine::<T>::new(2)?;
    // Monomials in scaled coordinates (ξ, η) = (x - origin) / h:
    // (1,0), (ξ,0), (η,0), (0,1), (0,ξ), (0,η).
    let mono = |x: Point<T>| -> [Point<T>; 6] {
        let xi = (x[0] - origin[0]) / h;
        let eta = (x[1] - origin[1]) / h;
        let (o, z) = (T::one(), T::zero());
        [[o, z], [xi, z], [eta, z], [z, o], [z, xi], [z, eta]]
    };
    let mut dof_matrix = vec![T::zero(); 36];
    let mut dofs = [0; 6];
    for (i, &(e, _)) in mesh.tri_edges()[t].iter().enumerate() {
        let [a, b] = mesh.edges()[e];
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let n = mesh.edge_normal(e);
        let len = mesh.edge_length(e);
        dofs[2 * i] = 2 * e;
        dofs[2 * i + 1] = 2 * e + 1;
        for (&s, &w) in gauss.points.iter().zip(&gauss.weights) {
            let q = T::lit(2.0) * s - T::one();
            for (c, m) in mono(lerp(pa, pb, s)).iter().enumerate() {
                let flux = dot(*m, n) * w * len;
                dof_matrix[(2 * i) * 6 + c] += flux;
                dof_matrix[(2 * i + 1) * 6 + c] += flux * q;
            }
        }
    }
    let mut funcs = [LinearVector::default(); 6];
    for (j, func) in funcs.iter_mut().enumerate() {
        let mut a = dof_matrix.clone();
        let mut rhs = vec![T::zero(); 6];
        rhs[j] = T::one();
        solve_in_place(&mut a, &mut rhs, 6, T::epsilon() * T::lit(100.0))
            .ok_or_else(|| Error::InvalidInput(format!("BDM1 dual basis is singular on triangle {t}")))?;
        *func = LinearVector {
            origin,
            value: [rhs[0], rhs[3]],
            grad: [[rhs[1] / h, rhs[2] / h], [rhs[4] / h, rhs[5] / h]],
        };
    }
    Ok(ElementBasis { dofs, funcs })
}

/// Tensor field that can be evaluated inside any triangle of its mesh.
pub trait TensorField<T: Real> {
    fn eval_in(&self, t: usize, x: Point<T>) -> Matrix2<T>;
}

/// Vector field that can be evaluated inside any triangle of its mesh.
pub trait VectorField<T: Real> {
    fn eval_in(&self, t: usize, x: Point<T>) -> Point<T>;
}

/// Pseudostress: two H(div) rows sharing one space.
#[derive(Clone, Debug)]
pub struct PseudostressField<'a, T> {
    space: &'a HdivSpace<'a, T>,
    pub rows: [Vec<T>; 2],
    pub trace_mean_corrected: bool,
}

impl<'a, T: Real> PseudostressField<'a, T> {
    pub fn new(space: &'a HdivSpace<'a, T>, rows: [Vec<T>; 2], trace_mean_corrected: bool) -> Self {
        assert_eq!(rows[0].len(), space.n_dofs_per_row());
        assert_eq!(rows[1].len(), space.n_dofs_per_row());
        Self { space, rows, trace_mean_corrected }
    }

    pub fn zeros(space: &'a HdivSpace<'a, T>) -> Self {
        let n = space.n_dofs_per_row();
        Self::new(space, [vec![T::zero(); n], vec![T::zero(); n]], true)
    }

    pub fn space(&self) -> &'a HdivSpace<'a, T> {
        self.space
    }

    pub fn mesh(&self) -> &'a Mesh<T> {
        self.space.mesh()
    }

    pub fn local_rows(&self, t: usize) -> [LinearVector<T>; 2] {
        [self.space.local_field(t, &self.rows[0]), self.space.local_field(t, &self.rows[1])]
    }

    pub fn eval(&self, t: usize, x: Point<T>) -> Matrix2<T> {
        let [r0, r1] = self.local_rows(t);
        Matrix2::from_rows(r0.eval(x), r1.eval(x))
    }

    /// Row-wise divergence on triangle `t` (constant for both element kinds).
    pub fn div(&self, t: usize) -> Point<T> {
        let [r0, r1] = self.local_rows(t);
        [r0.div(), r1.div()]
    }

    /// `∫_Ω tr σ dx`, exact: the trace is affine on each triangle.
    pub fn trace_mean(&self) -> T {
        let mesh = self.mesh();
        (0..mesh.nt())
            .map(|t| {
                let [r0, r1] = self.local_rows(t);
                let c = mesh.centroid(t);
                (r0.eval(c)[0] + r1.eval(c)[1]) * mesh.area(t)
            })
            .sum()
    }

    /// Subtracts `(1/(2|Ω|)) ∫ tr σ · I`.
    pub fn correct_trace_mean(&mut self) {
        let shift = self.trace_mean() / (T::lit(2.0) * self.mesh().domain_area());
        let e1 = self.space.constant_row([T::one(), T::zero()]);
        let e2 = self.space.constant_row([T::zero(), T::one()]);
        for (r, c) in self.rows[0].iter_mut().zip(&e1) {
            *r -= shift * *c;
        }
        for (r, c) in self.rows[1].iter_mut().zip(&e2) {
            *r -= shift * *c;
        }
        self.trace_mean_corrected = true;
    }

    /// `a * self + b * other` on the same space.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        let rows = [0, 1].map(|i| self.rows[i].iter().zip(&other.rows[i]).map(|(&x, &y)| a * x + b * y).collect());
        Self::new(self.space, rows, self.trace_mean_corrected && other.trace_mean_corrected)
    }

    /// L2 norm, exact for the piecewise-linear field.
    pub fn l2_norm(&self) -> T {
        let rule = QuadRule::<T>::triangle(2).expect("degree-2 rule");
        let mesh = self.mesh();
        (0..mesh.nt())
            .map(|t| {
                let [r0, r1] = self.local_rows(t);
                rule.integrate(&mesh.points(t), |x| {
                    let (a, b) = (r0.eval(x), r1.eval(x));
                    dot(a, a) + dot(b, b)
                })
            })
            .sum::<T>()
            .sqrt()
    }

    /// CSV dump `dof_index,row,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "dof_index,row,value")?;
        for (row, coeffs) in self.rows.iter().enumerate() {
            for (d, v) in coeffs.iter().enumerate() {
                writeln!(out, "{d},{row},{:e}", v.as_f64())?;
            }
        }
        Ok(())
    }
}

impl<T: Real> TensorField<T> for PseudostressField<'_, T> {
    fn eval_in(&self, t: usize, x: Point<T>) -> Matrix2<T> {
        self.eval(t, x)
    }
}

/// Piecewise-constant velocity, one 2-vector per triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField<T> {
    pub values: Vec<Point<T>>,
}

impl<T: Real> VelocityField<T> {
    pub fn zeros(nt: usize) -> Self {
        Self { values: vec![[T::zero(); 2]; nt] }
    }

    pub fn l2_norm(&self, mesh: &Mesh<T>) -> T {
        self.values.iter().enumerate().map(|(t, v)| dot(*v, *v) * mesh.area(t)).sum::<T>().sqrt()
    }

    /// CSV dump `tri_index,comp,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "tri_index,comp,value")?;
        for (t, v) in self.values.iter().enumerate() {
            for (c, x) in v.iter().enumerate() {
                writeln!(out, "{t},{c},{:e}", x.as_f64())?;
            }
        }
        Ok(())
    }
}

impl<T: Real> VectorField<T> for VelocityField<T> {
    fn eval_in(&self, t: usize, _x: Point<T>) -> Point<T> {
        self.values[t]
    }
}

/// Canonical interpolation without the trace-mean correction.
pub fn interpolate_canonical<'a, T: Real, F>(space: &'a HdivSpace<'a, T>, sigma: F) -> PseudostressField<'a, T>
where
    F: Fn(Point<T>) -> Matrix2<T>,
{
    let r0 = space.edge_dofs(|x| sigma(x).row(0));
    let r1 = space.edge_dofs(|x| sigma(x).row(1));
    PseudostressField::new(space, [r0, r1], false)
}

/// Canonical interpolation followed by the trace-mean correction.
pub fn interpolate_pseudostress<'a, T: Real, F>(space: &'a HdivSpace<'a, T>, sigma: F) -> PseudostressField<'a, T>
where
    F: Fn(Point<T>) -> Matrix2<T>,
{
    let mut f = interpolate_canonical(space, sigma);
    f.correct_trace_mean();
    f
}

/// Element averages of `u`, computed with the degree-6 rule.
pub fn project_velocity<T: Real, F>(mesh: &Mesh<T>, u: F) -> VelocityField<T>
where
    F: Fn(Point<T>) -> Point<T>,
{
    let rule = QuadRule::<T>::triangle(6).expect("degree-6 rule");
    let values = (0..mesh.nt())
        .map(|t| {
            let p = mesh.points(t);
            let area = mesh.area(t);
            let mut acc = [T::zero(); 2];
            for (x, w) in rule.on_triangle(&p) {
                let v = u(x);
                acc[0] += w * v[0];
                acc[1] += w * v[1];
            }
            [acc[0] / area, acc[1] / area]
        })
        .collect();
    VelocityField { values }
}

/// Projection of a scalar function onto piecewise constants.
pub fn project_scalar<T: Real, F: Fn(Point<T>) -> T>(mesh: &Mesh<T>, f: F) -> Vec<T> {
    let rule = QuadRule::<T>::triangle(6).expect("degree-6 rule");
    (0..mesh.nt()).map(|t| rule.integrate(&mesh.points(t), &f) / mesh.area(t)).collect()
}
