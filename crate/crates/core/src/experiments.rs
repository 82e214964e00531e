//! Problem registry, convergence and adaptive drivers, and table output.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::adaptivity::{adaptive_solve, AdaptiveHistory, StopRule};
use crate::assembly::solve_oseen;
use crate::error::{Error, Result};
use crate::mesh::{make_lshape_mesh, make_square_piecewise_uniform, make_unit_square_uniform, read_mesh, uniform_quad_refine, write_mesh, Mesh};
use crate::metrics::{fit_order, Column, ErrorRow};
use crate::problem::{problem1, problem2, problem3, ProblemSpec};
use crate::scalar::Real;
use crate::spaces::{ElementKind, HdivSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemId {
    P1,
    P2,
    P3,
}

impl ProblemId {
    pub fn spec<T: Real>(self) -> ProblemSpec<T> {
        match self {
            ProblemId::P1 => problem1(),
            ProblemId::P2 => problem2(),
            ProblemId::P3 => problem3(),
        }
    }

    /// Built-in starting mesh: the 19-triangle square, the 12-triangle
    /// L-shape, and a 4×4 grid of the square.
    pub fn initial_mesh<T: Real>(self) -> Mesh<T> {
        match self {
            ProblemId::P1 => make_square_piecewise_uniform(),
            ProblemId::P2 => make_lshape_mesh(),
            ProblemId::P3 => make_unit_square_uniform(4),
        }
    }

    pub fn default_theta(self) -> f64 {
        match self {
            ProblemId::P3 => 0.3,
            _ => 0.7,
        }
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(ProblemId::P1),
            "p2" => Ok(ProblemId::P2),
            "p3" => Ok(ProblemId::P3),
            other => Err(Error::InvalidInput(format!("unknown problem `{other}`"))),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemId::P1 => "p1",
            ProblemId::P2 => "p2",
            ProblemId::P3 => "p3",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Uniform,
    Adaptive,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Mode::Uniform),
            "adaptive" => Ok(Mode::Adaptive),
            other => Err(Error::InvalidInput(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Uniform => "uniform",
            Mode::Adaptive => "adaptive",
        })
    }
}

/// One experiment. In uniform mode `levels` is the number of meshes
/// solved; in adaptive mode it caps the number of refinements.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub element: ElementKind,
    pub mode: Mode,
    pub levels: Option<usize>,
    pub theta: Option<f64>,
    pub max_dofs: usize,
    pub mesh_file: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(problem: ProblemId, element: ElementKind, mode: Mode) -> Self {
        Self { problem, element, mode, levels: None, theta: None, max_dofs: StopRule::default().max_dofs, mesh_file: None }
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = Some(levels);
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta.unwrap_or_else(|| self.problem.default_theta())
    }

    pub fn initial_mesh<T: Real>(&self) -> Result<Mesh<T>> {
        match &self.mesh_file {
            Some(path) => read_mesh(BufReader::new(File::open(path)?)),
            None => Ok(self.problem.initial_mesh()),
        }
    }

    fn check(&self) -> Result<()> {
        if self.mode == Mode::Adaptive && self.element != ElementKind::Rt0 {
            return Err(Error::Unsupported("adaptive refinement uses the RT0 element only".into()));
        }
        if let Some(t) = self.theta {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidInput(format!("theta {t} not in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Rows of a uniform-refinement study and their fitted orders.
#[derive(Clone, Debug)]
pub struct ConvergenceTable<T> {
    pub element: ElementKind,
    /// Triangle count of every level.
    pub nt: Vec<usize>,
    /// One row per level; empty when the problem has no exact solution.
    pub rows: Vec<ErrorRow>,
    /// Relative linear residual of each solve.
    pub residuals: Vec<f64>,
    /// `None` where no order can be fitted (fewer than three rows or a
    /// vanishing error).
    pub orders: Vec<Option<f64>>,
    pub final_mesh: Mesh<T>,
}

impl<T> ConvergenceTable<T> {
    /// Reported error columns; none without an exact solution.
    pub fn columns(&self) -> &'static [Column] {
        if self.rows.is_empty() {
            &[]
        } else {
            Column::table(self.element)
        }
    }
}

/// Convergence study, default six levels. `on_row` sees each row as soon
/// as it is computed, so a failing level still leaves earlier output.
pub fn run_convergence_with<T: Real>(cfg: &RunConfig, mut on_row: impl FnMut(&ErrorRow)) -> Result<ConvergenceTable<T>> {
    cfg.check()?;
    if cfg.mode != Mode::Uniform {
        return Err(Error::InvalidInput("convergence studies use uniform refinement".into()));
    }
    let problem = cfg.problem.spec::<T>();
    run_problem_convergence(&problem, cfg.element, cfg.initial_mesh()?, cfg.levels.unwrap_or(6), &mut on_row)
}

pub fn run_convergence<T: Real>(cfg: &RunConfig) -> Result<ConvergenceTable<T>> {
    run_convergence_with(cfg, |_| {})
}

/// Uniform refinement study of any problem. Errors are computed only when
/// the exact solution is known.
pub fn run_problem_convergence<T: Real>(
    problem: &ProblemSpec<T>,
    element: ElementKind,
    initial: Mesh<T>,
    levels: usize,
    on_row: &mut dyn FnMut(&ErrorRow),
) -> Result<ConvergenceTable<T>> {
    if levels == 0 {
        return Err(Error::InvalidInput("at least one level is required".into()));
    }
    let mut mesh = initial;
    let mut nt = Vec::with_capacity(levels);
    let mut rows = Vec::with_capacity(levels);
    let mut residuals = Vec::with_capacity(levels);
    for level in 0..levels {
        if level > 0 {
            mesh = uniform_quad_refine(&mesh)?;
        }
        let space = HdivSpace::new(&mesh, element)?;
        let sol = solve_oseen(problem, &space)?;
        log::info!("{} {element} level {level}: nt={} residual={:.2e}", problem.name, mesh.nt(), sol.residual.as_f64());
        if problem.exact.is_some() {
            let row = ErrorRow::compute(problem, &sol)?;
            on_row(&row);
            rows.push(row);
        }
        nt.push(mesh.nt());
        residuals.push(sol.residual.as_f64());
    }
    let orders = if rows.is_empty() {
        Vec::new()
    } else {
        Column::table(element)
            .iter()
            .map(|c| {
                let err: Option<Vec<f64>> = rows.iter().map(|r| c.get(r)).collect();
                err.and_then(|e| fit_order(&nt, &e).ok())
            })
            .collect()
    };
    Ok(ConvergenceTable { element, nt, rows, residuals, orders, final_mesh: mesh })
}

/// Adaptive run with the configured marking fraction and stop rule.
pub fn run_adaptive<T: Real>(cfg: &RunConfig) -> Result<AdaptiveHistory<T>> {
    cfg.check()?;
    if cfg.mode != Mode::Adaptive {
        return Err(Error::InvalidInput("adaptive runs need adaptive mode".into()));
    }
    let stop = StopRule { max_dofs: cfg.max_dofs, max_iters: cfg.levels };
    adaptive_solve(&cfg.problem.spec::<T>(), cfg.initial_mesh()?, T::lit(cfg.theta()), stop)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Table,
}

fn sci(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into())
}

fn fixed(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into())
}

/// Error rows under `columns`, followed by the order row in the aligned
/// format. Both formats start with a header line.
pub fn emit_rows(nt: &[usize], rows: &[ErrorRow], orders: &[Option<f64>], columns: &[Column], format: Format) -> String {
    let mut lines: Vec<Vec<String>> = Vec::with_capacity(nt.len() + 2);
    lines.push(std::iter::once("nt".to_string()).chain(columns.iter().map(|c| c.name().to_string())).collect());
    for (k, n) in nt.iter().enumerate() {
        let cells = columns.iter().map(|c| sci(rows.get(k).and_then(|r| c.get(r))));
        lines.push(std::iter::once(n.to_string()).chain(cells).collect());
    }
    match format {
        Format::Csv => lines.iter().map(|l| l.join(",") + "\n").collect(),
        Format::Table => {
            if !columns.is_empty() {
                let cells = (0..columns.len()).map(|k| fixed(orders.get(k).copied().flatten()));
                lines.push(std::iter::once("order".to_string()).chain(cells).collect());
            }
            let width: Vec<usize> = (0..=columns.len()).map(|k| lines.iter().map(|l| l[k].len()).max().unwrap_or(0)).collect();
            let mut out = String::new();
            for l in &lines {
                let cells: Vec<String> = l.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
                out.push_str(&cells.join("  "));
                out.push('\n');
            }
            out
        }
    }
}

pub fn emit_table<T>(table: &ConvergenceTable<T>, format: Format) -> String {
    emit_rows(&table.nt, &table.rows, &table.orders, table.columns(), format)
}

/// `column,order` pairs.
pub fn emit_orders(orders: &[Option<f64>], columns: &[Column]) -> String {
    let mut out = String::from("column,order\n");
    for (c, o) in columns.iter().zip(orders) {
        out.push_str(&format!("{},{}\n", c.name(), fixed(*o)));
    }
    out
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    let mut f = File::create(dir.join(name))?;
    f.write_all(contents)?;
    Ok(())
}

/// Writes `errors.csv`, `orders.csv` and `mesh_final.txt` into `dir`.
pub fn write_convergence<T: Real>(dir: &Path, table: &ConvergenceTable<T>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_file(dir, "errors.csv", emit_table(table, Format::Csv).as_bytes())?;
    write_file(dir, "orders.csv", emit_orders(&table.orders, table.columns()).as_bytes())?;
    let mut mesh = Vec::new();
    write_mesh(&table.final_mesh, &mut mesh)?;
    write_file(dir, "mesh_final.txt", &mesh)
}

/// Writes `history.csv` and `mesh_final.txt` into `dir`.
pub fn write_adaptive<T: Real>(dir: &Path, history: &AdaptiveHistory<T>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut csv = Vec::new();
    history.write_csv(&mut csv)?;
    write_file(dir, "history.csv", &csv)?;
    let mut mesh = Vec::new();
    write_mesh(&history.final_mesh, &mut mesh)?;
    write_file(dir, "mesh_final.txt", &mesh)
}
