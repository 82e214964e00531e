//! Recovery-based error indicators, maximum marking and the adaptive loop.

use std::io::Write;

use crate::assembly::solve_oseen;
use crate::error::{Error, Result};
use crate::mesh::{refine_marked, Mesh};
use crate::metrics::{l2_error_tensor, l2_error_vector, ErrorQuadrature};
use crate::postprocess::{postprocess_velocity, recover_pseudostress, P1VelocityField, RecoveredTensorField};
use crate::problem::ProblemSpec;
use crate::quadrature::QuadRule;
use crate::scalar::{sub, Real};
use crate::spaces::{ElementKind, HdivSpace, PseudostressField, TensorField, VectorField, VelocityField};

/// Per-triangle indicators and their root-sum-square.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorSet<T> {
    local: Vec<T>,
    global: T,
}

impl<T: Real> IndicatorSet<T> {
    pub fn new(local: Vec<T>) -> Result<Self> {
        if local.is_empty() {
            return Err(Error::InvalidInput("empty indicator set".into()));
        }
        if let Some(k) = local.iter().position(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidInput(format!("indicator {k} is negative or not finite")));
        }
        let global = local.iter().map(|v| *v * *v).sum::<T>().sqrt();
        Ok(Self { local, global })
    }

    pub fn local(&self) -> &[T] {
        &self.local
    }

    pub fn global(&self) -> T {
        self.global
    }

    pub fn len(&self) -> usize {
        self.local.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local.is_empty()
    }

    pub fn max(&self) -> T {
        self.local.iter().copied().fold(T::zero(), T::max)
    }

    /// First triangle attaining the largest indicator.
    pub fn argmax(&self) -> usize {
        let m = self.max();
        self.local.iter().position(|v| *v == m).unwrap_or(0)
    }
}

fn same_mesh<T: Real>(a: &Mesh<T>, b: &Mesh<T>) -> bool {
    std::ptr::eq(a, b) || (a.vertices() == b.vertices() && a.triangles() == b.triangles())
}

/// `E(K) = (‖σ* - σ_h‖²_K + ‖u* - u_h‖²_K)^{1/2}`, integrated exactly by a
/// degree-4 rule.
pub fn compute_indicators<T: Real>(
    sigma_h: &PseudostressField<'_, T>,
    u_h: &VelocityField<T>,
    sigma_star: &RecoveredTensorField<'_, T>,
    u_star: &P1VelocityField<T>,
    mesh: &Mesh<T>,
) -> Result<IndicatorSet<T>> {
    let nt = mesh.nt();
    if !same_mesh(sigma_h.mesh(), mesh)
        || !same_mesh(sigma_star.mesh(), mesh)
        || u_h.values.len() != nt
        || u_star.elements.len() != nt
    {
        return Err(Error::MeshMismatch);
    }
    let rule = QuadRule::triangle(4)?;
    let local = (0..nt)
        .map(|t| {
            let p = mesh.points(t);
            rule.integrate(&p, |x| {
                let ds = (sigma_star.eval_in(t, x) - sigma_h.eval(t, x)).norm_sq();
                let du = sub(u_star.eval_in(t, x), u_h.values[t]);
                ds + du[0] * du[0] + du[1] * du[1]
            })
            .max(T::zero())
            .sqrt()
        })
        .collect();
    IndicatorSet::new(local)
}

/// Maximum marking: every triangle with `E(K) >= θ max E`, ascending.
pub fn mark_max<T: Real>(indicators: &IndicatorSet<T>, theta: T) -> Result<Vec<usize>> {
    if !(theta > T::zero() && theta <= T::one()) {
        return Err(Error::InvalidInput(format!("marking fraction {theta} not in (0, 1]")));
    }
    let max = indicators.max();
    if max <= T::zero() {
        return Err(Error::ZeroIndicators);
    }
    let threshold = theta * max;
    Ok(indicators.local.iter().enumerate().filter(|(_, v)| **v >= threshold).map(|(k, _)| k).collect())
}

/// When the adaptive loop stops. The loop always solves at least once and
/// stops after the first solve with `dofs >= max_dofs` or after
/// `max_iters` refinements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StopRule {
    pub max_dofs: usize,
    pub max_iters: Option<usize>,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { max_dofs: 200_000, max_iters: None }
    }
}

/// One SOLVE→ESTIMATE→MARK step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveRecord {
    pub iter: usize,
    pub nt: usize,
    /// Pseudostress plus velocity unknowns.
    pub dofs: usize,
    pub estimator: f64,
    /// `(‖σ - σ_h‖² + ‖u - u_h‖²)^{1/2}` when the exact solution is known.
    pub true_error: Option<f64>,
    pub effectivity: Option<f64>,
    /// Triangles marked for refinement; zero on the last iteration.
    pub marked: usize,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct AdaptiveHistory<T> {
    pub records: Vec<AdaptiveRecord>,
    pub final_mesh: Mesh<T>,
}

impl<T: Real> AdaptiveHistory<T> {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iter,nt,dofs,estimator,true_error,effectivity,marked")?;
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.3e}")).unwrap_or_default();
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{:.3e},{},{},{}",
                r.iter,
                r.nt,
                r.dofs,
                r.estimator,
                opt(r.true_error),
                opt(r.effectivity),
                r.marked
            )?;
        }
        Ok(())
    }
}

/// Unknown count reported in histories: both pseudostress rows and the
/// piecewise-constant velocity.
pub fn dof_count<T: Real>(space: &HdivSpace<'_, T>) -> usize {
    2 * space.n_dofs_per_row() + 2 * space.mesh().nt()
}

/// Adaptive RT0 loop with maximum marking.
pub fn adaptive_solve<T: Real>(problem: &ProblemSpec<T>, initial: Mesh<T>, theta: T, stop: StopRule) -> Result<AdaptiveHistory<T>> {
    let quad = ErrorQuadrature::for_problem(problem);
    let mut mesh = initial;
    let mut records = Vec::new();
    for iter in 0.. {
        let (record, marked) = {
            let space = HdivSpace::new(&mesh, ElementKind::Rt0)?;
            let sol = solve_oseen(problem, &space)?;
            let u_star = postprocess_velocity(&sol.sigma, &sol.u)?;
            let sigma_star = recover_pseudostress(&sol.sigma)?;
            let ind = compute_indicators(&sol.sigma, &sol.u, &sigma_star, &u_star, &mesh)?;
            let true_error = problem.exact.as_ref().map(|ex| {
                let es = l2_error_tensor(&mesh, &sol.sigma, |x| problem.sigma(x).expect("exact"), &quad);
                let eu = l2_error_vector(&mesh, &sol.u, &ex.u, &quad);
                es.hypot(eu).as_f64()
            });
            let estimator = ind.global().as_f64();
            let done = stop.max_iters.is_some_and(|m| iter >= m) || dof_count(&space) >= stop.max_dofs;
            let marked = if done { Vec::new() } else { mark_max(&ind, theta)? };
            let record = AdaptiveRecord {
                iter,
                nt: mesh.nt(),
                dofs: dof_count(&space),
                estimator,
                true_error,
                effectivity: true_error.map(|e| estimator / e),
                marked: marked.len(),
                residual: sol.residual.as_f64(),
            };
            (record, marked)
        };
        log::info!(
            "{} iter {}: nt={} dofs={} estimator={:.3e} marked={}",
            problem.name,
            iter,
            record.nt,
            record.dofs,
            record.estimator,
            record.marked
        );
        if marked.is_empty() {
            records.push(record);
            break;
        }
        mesh = refine_marked(&mesh, &marked)?;
        records.push(record);
    }
    Ok(AdaptiveHistory { records, final_mesh: mesh })
}
