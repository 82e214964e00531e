//! Velocity postprocessing, pseudostress recovery and derived quantities.

use std::collections::HashSet;
use std::io::Write;

use crate::dense::solve_in_place;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::scalar::{dot, sub, Point, Real};
use crate::spaces::{ElementKind, LinearVector, PseudostressField, TensorField, VectorField, VelocityField};
use crate::tensor::{apply_deviatoric, Matrix2};

/// Discontinuous piecewise-linear velocity, one affine map per triangle
/// centred at the centroid.
#[derive(Clone, Debug, PartialEq)]
pub struct P1VelocityField<T> {
    pub elements: Vec<LinearVector<T>>,
}

impl<T: Real> P1VelocityField<T> {
    /// Element means; exact since each piece is affine about its centroid.
    pub fn means(&self) -> VelocityField<T> {
        VelocityField { values: self.elements.iter().map(|e| e.value).collect() }
    }
}

impl<T: Real> VectorField<T> for P1VelocityField<T> {
    fn eval_in(&self, t: usize, x: Point<T>) -> Point<T> {
        self.elements[t].eval(x)
    }
}

/// Local postprocessing: on each triangle `u*` has mean `u_h` and gradient
/// solving `(∇u*, ∇v)_K = (σ_h + p_h I, ∇v)_K` for linear `v` with zero
/// mean, where `p_h = -tr σ_h / 2`. In centroid coordinates the local 6×6
/// system decouples: the mean is `u_h` and the gradient is the element
/// average of `Aσ_h`.
pub fn postprocess_velocity<T: Real>(sigma_h: &PseudostressField<'_, T>, u_h: &VelocityField<T>) -> Result<P1VelocityField<T>> {
    let mesh = sigma_h.mesh();
    if u_h.values.len() != mesh.nt() {
        return Err(Error::MeshMismatch);
    }
    let elements = (0..mesh.nt())
        .map(|t| {
            let c = mesh.centroid(t);
            // σ_h is affine, so its element mean is its centroid value.
            let g = apply_deviatoric(sigma_h.eval(t, c));
            LinearVector { origin: c, value: u_h.values[t], grad: g.m }
        })
        .collect();
    Ok(P1VelocityField { elements })
}

/// Continuous piecewise-linear tensor field given by vertex values.
#[derive(Clone, Debug)]
pub struct RecoveredTensorField<'a, T> {
    mesh: &'a Mesh<T>,
    pub values: Vec<Matrix2<T>>,
}

impl<'a, T: Real> RecoveredTensorField<'a, T> {
    pub fn new(mesh: &'a Mesh<T>, values: Vec<Matrix2<T>>) -> Result<Self> {
        if values.len() != mesh.nv() {
            return Err(Error::MeshMismatch);
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &'a Mesh<T> {
        self.mesh
    }

    pub fn eval(&self, t: usize, x: Point<T>) -> Matrix2<T> {
        let lam = self.mesh.barycentric(t, x);
        let v = self.mesh.triangles()[t];
        (0..3).fold(Matrix2::zero(), |acc, i| acc + self.values[v[i]] * lam[i])
    }

    /// `∫_Ω tr σ dx`, exact for the piecewise-linear field.
    pub fn trace_integral(&self) -> T {
        let three = T::lit(3.0);
        (0..self.mesh.nt())
            .map(|t| {
                let s: T = self.mesh.triangles()[t].iter().map(|&v| self.values[v].trace()).sum();
                s / three * self.mesh.area(t)
            })
            .sum()
    }

    /// Subtracts `(1/(2|Ω|)) ∫ tr σ · I` at every vertex.
    pub fn correct_trace_mean(&mut self) {
        let shift = self.trace_integral() / (T::lit(2.0) * self.mesh.domain_area());
        for v in &mut self.values {
            *v = *v - Matrix2::identity() * shift;
        }
    }

    /// `-tr σ / 2` at every vertex.
    pub fn vertex_pressure(&self) -> Vec<T> {
        self.values.iter().map(|m| -m.trace() / T::lit(2.0)).collect()
    }

    /// CSV dump `vertex,x,y,s11,s12,s21,s22`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "vertex,x,y,s11,s12,s21,s22")?;
        for (v, (m, p)) in self.values.iter().zip(self.mesh.vertices()).enumerate() {
            writeln!(
                out,
                "{v},{:e},{:e},{:e},{:e},{:e},{:e}",
                p[0].as_f64(),
                p[1].as_f64(),
                m.m[0][0].as_f64(),
                m.m[0][1].as_f64(),
                m.m[1][0].as_f64(),
                m.m[1][1].as_f64()
            )?;
        }
        Ok(())
    }
}

impl<T: Real> TensorField<T> for RecoveredTensorField<'_, T> {
    fn eval_in(&self, t: usize, x: Point<T>) -> Matrix2<T> {
        self.eval(t, x)
    }
}

/// Least-squares linear fit `P(x) = a + B (x - x_v)/h` to the mean normal
/// fluxes of both σ rows over the edges of the patch of vertex `v`.
struct PatchFit<T> {
    rows: [[T; 6]; 2],
    center: Point<T>,
    scale: T,
}

impl<T: Real> PatchFit<T> {
    fn eval(&self, x: Point<T>) -> Matrix2<T> {
        let d = sub(x, self.center);
        let (dx, dy) = (d[0] / self.scale, d[1] / self.scale);
        let row = |c: &[T; 6]| [c[0] + c[2] * dx + c[3] * dy, c[1] + c[4] * dx + c[5] * dy];
        Matrix2::from_rows(row(&self.rows[0]), row(&self.rows[1]))
    }
}

fn fit_patch<T: Real>(
    mesh: &Mesh<T>,
    sigma: &PseudostressField<'_, T>,
    center: Point<T>,
    edges: &[usize],
    linear: bool,
) -> Option<PatchFit<T>> {
    let scale = edges.iter().map(|&e| mesh.edge_length(e)).fold(T::zero(), T::max);
    let nu = if linear { 6 } else { 2 };
    let mut ata = vec![T::zero(); nu * nu];
    let mut atb = [vec![T::zero(); nu], vec![T::zero(); nu]];
    for &e in edges {
        let n = mesh.edge_normal(e);
        let d = sub(mesh.edge_midpoint(e), center);
        let (dx, dy) = (d[0] / scale, d[1] / scale);
        let coef = [n[0], n[1], n[0] * dx, n[0] * dy, n[1] * dx, n[1] * dy];
        let len = mesh.edge_length(e);
        for i in 0..nu {
            for j in 0..nu {
                ata[i * nu + j] += coef[i] * coef[j];
            }
            for r in 0..2 {
                atb[r][i] += coef[i] * sigma.rows[r][e] / len;
            }
        }
    }
    let mut rows = [[T::zero(); 6]; 2];
    for r in 0..2 {
        let mut a = ata.clone();
        let mut b = atb[r].clone();
        solve_in_place(&mut a, &mut b, nu, T::lit(1e-10))?;
        rows[r][..nu].copy_from_slice(&b);
    }
    Some(PatchFit { rows, center, scale })
}

/// Polynomial-preserving recovery of an RT0 pseudostress.
///
/// For every vertex, a linear vector polynomial per σ row is fitted by
/// least squares to the mean normal fluxes `dof_E / |E|` of all edges of the
/// vertex patch; for a field whose RT0 interpolant is being recovered these
/// data are exact point values `P(m_E)·n_E` of any linear `P`, so linear
/// fields are reproduced. Boundary vertices evaluate the fit of the nearest
/// interior vertex, found by a breadth-first search along edges; without
/// one, their own fit is used, falling back to a constant fit on
/// rank-deficient patches. The result is trace-mean corrected.
pub fn recover_pseudostress<'a, T: Real>(sigma_h: &PseudostressField<'a, T>) -> Result<RecoveredTensorField<'a, T>> {
    if sigma_h.space().kind() != ElementKind::Rt0 {
        return Err(Error::Unsupported("pseudostress recovery is implemented for RT0 only".into()));
    }
    let mesh = sigma_h.mesh();
    let vt = mesh.vertex_triangles();
    let on_boundary = mesh.boundary_vertex_flags();
    let neighbors = mesh.vertex_neighbors();

    let patch_edges = |v: usize| -> Vec<usize> {
        let mut e: Vec<usize> = vt[v].iter().flat_map(|&t| mesh.tri_edges()[t].iter().map(|&(e, _)| e)).collect();
        e.sort_unstable();
        e.dedup();
        e
    };
    let own_fit = |v: usize| -> PatchFit<T> {
        let center = mesh.vertices()[v];
        let edges = patch_edges(v);
        fit_patch(mesh, sigma_h, center, &edges, true)
            .or_else(|| fit_patch(mesh, sigma_h, center, &edges, false))
            .expect("a triangle's three normals span the plane")
    };

    let interior_fits: Vec<Option<PatchFit<T>>> = (0..mesh.nv())
        .map(|v| {
            if on_boundary[v] || vt[v].is_empty() {
                None
            } else {
                Some(own_fit(v))
            }
        })
        .collect();

    let values = (0..mesh.nv())
        .map(|v| {
            let x = mesh.vertices()[v];
            if let Some(fit) = &interior_fits[v] {
                return fit.eval(x);
            }
            let donor = nearest_with_fit(mesh, &neighbors, v, |w| interior_fits[w].is_some());
            match donor {
                Some(w) => interior_fits[w].as_ref().expect("filtered").eval(x),
                None if vt[v].is_empty() => Matrix2::zero(),
                None => own_fit(v).eval(x),
            }
        })
        .collect();

    let mut field = RecoveredTensorField::new(mesh, values)?;
    field.correct_trace_mean();
    Ok(field)
}

/// Breadth-first search along edges for the closest vertex accepted by
/// `ok`: the smallest edge distance wins, then the Euclidean distance, then
/// the index.
fn nearest_with_fit<T: Real>(mesh: &Mesh<T>, neighbors: &[Vec<usize>], v: usize, ok: impl Fn(usize) -> bool) -> Option<usize> {
    let x = mesh.vertices()[v];
    let mut seen = HashSet::from([v]);
    let mut front = vec![v];
    while !front.is_empty() {
        let mut next = Vec::new();
        for &a in &front {
            for &w in &neighbors[a] {
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        let best = next
            .iter()
            .filter(|&&w| ok(w))
            .map(|&w| {
                let d = sub(mesh.vertices()[w], x);
                (dot(d, d), w)
            })
            .min_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        if let Some((_, w)) = best {
            return Some(w);
        }
        front = next;
    }
    None
}

/// Pressure `-tr σ / 2` of a tensor field at `x` in triangle `t`.
pub fn derived_pressure<T: Real, F: TensorField<T>>(field: &F, t: usize, x: Point<T>) -> T {
    -field.eval_in(t, x).trace() / T::lit(2.0)
}

/// Symmetric part `(σ + σᵀ)/2` at every vertex.
pub fn symmetric_stress<'a, T: Real>(field: &RecoveredTensorField<'a, T>) -> RecoveredTensorField<'a, T> {
    RecoveredTensorField { mesh: field.mesh, values: field.values.iter().map(Matrix2::symmetric).collect() }
}
