//! Assembly and solution of the discrete saddle-point system
//!
//! ```text
//! (Aσ_h, τ) + (div τ, u_h) + λ (tr τ, 1) = ⟨g, τ n⟩
//! -(div σ_h, v) + ((Aσ_h) b, v) + (c u_h, v) = (f, v)
//! (tr σ_h, 1) = 0
//! ```
//!
//! Unknowns are ordered `σ row 1 | σ row 2 | u₁ | u₂ | λ`, each σ row using
//! the global dofs of the H(div) space and each velocity component one
//! value per triangle.

use std::io::Write;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::problem::{outward_normal, ProblemSpec};
use crate::quadrature::{GaussLine, QuadRule};
use crate::scalar::{dot, lerp, Point, Real};
use crate::spaces::{HdivSpace, PseudostressField, VelocityField};
use crate::sparse::{lu_solve, relative_residual, CsrMatrix, TripletBuffer};

const ASSEMBLY_DEGREE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    pub n_dofs_per_row: usize,
    pub nt: usize,
}

impl BlockLayout {
    pub fn sigma_row(&self, i: usize) -> Range<usize> {
        i * self.n_dofs_per_row..(i + 1) * self.n_dofs_per_row
    }

    pub fn velocity(&self, m: usize) -> Range<usize> {
        let start = 2 * self.n_dofs_per_row + m * self.nt;
        start..start + self.nt
    }

    pub fn multiplier(&self) -> usize {
        2 * self.n_dofs_per_row + 2 * self.nt
    }

    pub fn size(&self) -> usize {
        self.multiplier() + 1
    }
}

#[derive(Clone, Debug)]
pub struct LinearSystem<T> {
    pub matrix: CsrMatrix<T>,
    pub rhs: Vec<T>,
    pub layout: BlockLayout,
}

impl<T: Real> LinearSystem<T> {
    pub fn write_matrix_market<W: Write>(&self, out: W) -> Result<()> {
        self.matrix.write_matrix_market(out)
    }
}

/// Discrete solution together with the diagnostics of its linear solve.
#[derive(Clone, Debug)]
pub struct OseenSolution<'a, T> {
    pub sigma: PseudostressField<'a, T>,
    pub u: VelocityField<T>,
    pub multiplier: T,
    pub residual: T,
}

pub fn assemble<T: Real>(problem: &ProblemSpec<T>, space: &HdivSpace<'_, T>) -> Result<LinearSystem<T>> {
    let mesh = space.mesh();
    if mesh.nt() == 0 {
        return Err(Error::EmptyMesh);
    }
    let rule = QuadRule::<T>::triangle(ASSEMBLY_DEGREE)?;
    let layout = BlockLayout { n_dofs_per_row: space.n_dofs_per_row(), nt: mesh.nt() };
    let n = layout.n_dofs_per_row;
    let nl = space.kind().local_dofs();
    let lam = layout.multiplier();
    let half = T::lit(0.5);
    let mut trip = TripletBuffer::with_capacity(layout.size(), layout.size(), mesh.nt() * (4 * nl * nl + 12 * nl + 2));
    let mut rhs = vec![T::zero(); layout.size()];

    let mut phi = vec![[T::zero(); 2]; nl];
    for t in 0..mesh.nt() {
        let basis = space.local_basis(t);
        let dofs = space.local_dofs(t);
        let area = mesh.area(t);
        let u_col = [layout.velocity(0).start + t, layout.velocity(1).start + t];

        // mass: ∫ φ_a·φ_l, cross: ∫ φ_a[i] φ_l[k], phi_b: ∫ φ_l·b,
        // phi_bm: ∫ φ_l[k] b_m, mean: ∫ φ_l
        let mut mass = vec![T::zero(); nl * nl];
        let mut cross = vec![[[T::zero(); 2]; 2]; nl * nl];
        let mut phi_b = vec![T::zero(); nl];
        let mut phi_bm = vec![[[T::zero(); 2]; 2]; nl];
        let mut mean = vec![[T::zero(); 2]; nl];
        let mut c_int = T::zero();
        let mut f_int = [T::zero(); 2];
        for (x, w) in rule.on_triangle(&mesh.points(t)) {
            for (p, f) in phi.iter_mut().zip(basis) {
                *p = f.eval(x);
            }
            let b = (problem.b)(x);
            c_int += w * (problem.c)(x);
            let f = (problem.f)(x);
            f_int[0] += w * f[0];
            f_int[1] += w * f[1];
            for l in 0..nl {
                phi_b[l] += w * dot(phi[l], b);
                for k in 0..2 {
                    mean[l][k] += w * phi[l][k];
                    for m in 0..2 {
                        phi_bm[l][k][m] += w * phi[l][k] * b[m];
                    }
                }
                for a in 0..nl {
                    mass[a * nl + l] += w * dot(phi[a], phi[l]);
                    for i in 0..2 {
                        for k in 0..2 {
                            cross[a * nl + l][i][k] += w * phi[a][i] * phi[l][k];
                        }
                    }
                }
            }
        }

        for i in 0..2 {
            for a in 0..nl {
                let row = i * n + dofs[a];
                for k in 0..2 {
                    for l in 0..nl {
                        let mut v = -half * cross[a * nl + l][i][k];
                        if i == k {
                            v += mass[a * nl + l];
                        }
                        trip.push(row, k * n + dofs[l], v);
                    }
                }
                trip.push(row, u_col[i], basis[a].div() * area);
                trip.push(row, lam, mean[a][i]);
                trip.push(lam, row, mean[a][i]);
            }
        }

        for m in 0..2 {
            let row = u_col[m];
            for l in 0..nl {
                trip.push(row, m * n + dofs[l], -basis[l].div() * area);
                for k in 0..2 {
                    let mut v = -half * phi_bm[l][k][m];
                    if k == m {
                        v += phi_b[l];
                    }
                    if v != T::zero() {
                        trip.push(row, k * n + dofs[l], v);
                    }
                }
            }
            if c_int != T::zero() {
                trip.push(row, row, c_int);
            }
            rhs[row] = f_int[m];
        }
    }

    let g_rhs = assemble_dirichlet_rhs(&problem.g, space)?;
    for (r, v) in rhs.iter_mut().zip(&g_rhs) {
        *r += *v;
    }
    Ok(LinearSystem { matrix: trip.to_csr(), rhs, layout })
}

/// `⟨g, τ n⟩` for every basis function of both σ rows: entry `i·n + d`
/// holds `∫_∂Ω g_i (φ_d · n_out) ds`.
pub fn assemble_dirichlet_rhs<T: Real, G>(g: G, space: &HdivSpace<'_, T>) -> Result<Vec<T>>
where
    G: Fn(Point<T>) -> Point<T>,
{
    let mesh = space.mesh();
    let n = space.n_dofs_per_row();
    let gauss = GaussLine::<T>::new(3)?;
    let mut out = vec![T::zero(); 2 * n];
    for &e in mesh.boundary_edges() {
        let t = mesh.edge_triangles(e)[0].expect("boundary edge has a triangle");
        let nout = outward_normal(mesh, e);
        let [a, b] = mesh.edges()[e];
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let len = mesh.edge_length(e);
        let basis = space.local_basis(t);
        for (&s, &w) in gauss.points.iter().zip(&gauss.weights) {
            let x = lerp(pa, pb, s);
            let gx = g(x);
            if gx[0] == T::zero() && gx[1] == T::zero() {
                continue;
            }
            for (f, &d) in basis.iter().zip(space.local_dofs(t)) {
                let flux = w * len * dot(f.eval(x), nout);
                out[d] += gx[0] * flux;
                out[n + d] += gx[1] * flux;
            }
        }
    }
    Ok(out)
}

/// Splits a solution vector into fields; the returned pseudostress is
/// trace-mean corrected.
pub fn split_solution<'a, T: Real>(space: &'a HdivSpace<'a, T>, layout: &BlockLayout, x: &[T]) -> (PseudostressField<'a, T>, VelocityField<T>, T) {
    let rows = [x[layout.sigma_row(0)].to_vec(), x[layout.sigma_row(1)].to_vec()];
    let mut sigma = PseudostressField::new(space, rows, false);
    sigma.correct_trace_mean();
    let (u1, u2) = (&x[layout.velocity(0)], &x[layout.velocity(1)]);
    let u = VelocityField { values: u1.iter().zip(u2).map(|(&a, &b)| [a, b]).collect() };
    (sigma, u, x[layout.multiplier()])
}

/// Coefficients of the constant field `I`: the null vector, from both
/// sides, of the system without its multiplier row and column.
pub fn identity_kernel<T: Real>(space: &HdivSpace<'_, T>) -> Vec<T> {
    let n = space.n_dofs_per_row();
    let mut z = vec![T::zero(); 2 * n + 2 * space.mesh().nt() + 1];
    z[..n].copy_from_slice(&space.constant_row([T::one(), T::zero()]));
    z[n..2 * n].copy_from_slice(&space.constant_row([T::zero(), T::one()]));
    z
}

/// Solves the bordered system without factoring its dense multiplier row.
///
/// With `z` the null vector of the unbordered operator `M` and `c` the
/// multiplier column, the multiplier is `λ = zᵀb / zᵀc`. The remaining
/// consistent singular system is solved with the gauge fixed on the dof
/// where `z` is largest, and the constraint row is then restored by a
/// shift along `z`. The result solves the full system.
pub fn solve_system<T: Real>(system: &LinearSystem<T>, kernel: &[T]) -> Result<Vec<T>> {
    let a = &system.matrix;
    let size = system.layout.size();
    let lam = system.layout.multiplier();
    if kernel.len() != size || a.nrows() != size || system.rhs.len() != size {
        return Err(Error::Dimension(format!("system of size {size} with kernel of length {}", kernel.len())));
    }
    let mut col = vec![T::zero(); size];
    let mut trip = TripletBuffer::with_capacity(size, size, a.nnz());
    for r in 0..size {
        for (c, v) in a.row(r) {
            if c == lam {
                col[r] = v;
            } else if r != lam {
                trip.push(r, c, v);
            }
        }
    }
    let zc: T = kernel.iter().zip(&col).map(|(z, c)| *z * *c).sum();
    if zc == T::zero() {
        return Err(Error::Singular { n: size, h: f64::NAN });
    }
    let zb: T = kernel.iter().zip(&system.rhs).take(lam).map(|(z, b)| *z * *b).sum();
    let multiplier = zb / zc;
    let gauge = (0..lam).max_by(|&i, &j| kernel[i].abs().partial_cmp(&kernel[j].abs()).expect("finite")).expect("nonempty");
    trip.push(gauge, lam, T::one());
    trip.push(lam, gauge, T::one());
    let mut rhs: Vec<T> = system.rhs.iter().zip(&col).map(|(b, c)| *b - multiplier * *c).collect();
    rhs[lam] = T::zero();

    let mut x = lu_solve(&trip.to_csr(), &rhs)?;
    x[lam] = T::zero();
    let shift = (col.iter().zip(&x).map(|(c, v)| *c * *v).sum::<T>() - system.rhs[lam]) / zc;
    for (v, z) in x.iter_mut().zip(kernel) {
        *v -= shift * *z;
    }
    x[lam] = multiplier;

    let tol = T::residual_tolerance();
    let res = relative_residual(a, &x, &system.rhs);
    // Written negated so a NaN residual is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(res <= tol) {
        return Err(Error::Residual { residual: res.as_f64(), tolerance: tol.as_f64() });
    }
    Ok(x)
}

/// Assembles and solves on `space`. Incompatible boundary data only
/// triggers a warning: the net flux `∮ g·n` is compared with `∮ |g·n|`,
/// which leaves room for the quadrature error of compatible data.
pub fn solve_oseen<'a, T: Real>(problem: &ProblemSpec<T>, space: &'a HdivSpace<'a, T>) -> Result<OseenSolution<'a, T>> {
    let mesh: &Mesh<T> = space.mesh();
    let (flux, magnitude) = problem.boundary_flux_parts(mesh);
    if flux.abs() > T::lit(1e-2) * magnitude {
        log::warn!("{}: boundary data has net flux {:e} (total {:e})", problem.name, flux.as_f64(), magnitude.as_f64());
    }
    let system = assemble(problem, space)?;
    let h = mesh.stats().h_max.as_f64();
    let x = solve_system(&system, &identity_kernel(space)).map_err(|e| match e {
        Error::Singular { n, .. } => Error::Singular { n, h },
        other => other,
    })?;
    let residual = relative_residual(&system.matrix, &x, &system.rhs);
    log::debug!(
        "{} {}: nt={} unknowns={} residual={:.2e}",
        problem.name,
        space.kind(),
        mesh.nt(),
        system.layout.size(),
        residual.as_f64()
    );
    let (sigma, u, multiplier) = split_solution(space, &system.layout, &x);
    Ok(OseenSolution { sigma, u, multiplier, residual })
}
