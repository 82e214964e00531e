use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use oseen_core::experiments::{emit_table, run_adaptive, run_convergence_with, write_adaptive, write_convergence, Format, Mode, ProblemId, RunConfig};
use oseen_core::{ElementKind, Mesh};

#[derive(Parser)]
#[command(name = "oseen", version, about = "Pseudostress-velocity mixed FEM for the 2D Oseen equation")]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a uniform convergence study or an adaptive loop.
    Solve(SolveArgs),
}

#[derive(Parser)]
struct SolveArgs {
    /// Benchmark problem: p1, p2 or p3.
    #[arg(long)]
    problem: ProblemId,
    /// Pseudostress element: rt0 or bdm1.
    #[arg(long, default_value = "rt0")]
    element: ElementKind,
    /// uniform or adaptive; defaults to uniform for p1, adaptive otherwise.
    #[arg(long)]
    mode: Option<Mode>,
    /// Uniform: number of meshes (default 6). Adaptive: maximum number of
    /// refinements.
    #[arg(long)]
    levels: Option<usize>,
    /// Marking fraction; 0.7 for p1 and p2, 0.3 for p3.
    #[arg(long)]
    theta: Option<f64>,
    /// Adaptive runs stop once a solve reaches this many unknowns.
    #[arg(long, default_value_t = 200_000)]
    max_dofs: usize,
    /// Initial mesh file replacing the built-in one.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Print CSV instead of an aligned table.
    #[arg(long)]
    csv: bool,
}

fn solve(args: SolveArgs) -> Result<()> {
    let mode = args.mode.unwrap_or(if args.problem == ProblemId::P1 { Mode::Uniform } else { Mode::Adaptive });
    let cfg = RunConfig {
        problem: args.problem,
        element: args.element,
        mode,
        levels: args.levels,
        theta: args.theta,
        max_dofs: args.max_dofs,
        mesh_file: args.mesh,
    };
    let mut stdout = std::io::stdout().lock();
    match mode {
        Mode::Uniform => {
            let mut done = Vec::new();
            let table = run_convergence_with::<f64>(&cfg, |row| done.push(*row));
            let table = match table {
                Ok(t) => t,
                Err(e) => {
                    // Keep whatever finished before the failure.
                    if !done.is_empty() {
                        let nt: Vec<usize> = done.iter().map(|r| r.nt).collect();
                        let cols = oseen_core::Column::table(cfg.element);
                        let text = oseen_core::experiments::emit_rows(&nt, &done, &[], cols, Format::Csv);
                        std::fs::create_dir_all(&args.out)?;
                        std::fs::write(args.out.join("errors.csv"), text)?;
                    }
                    return Err(e).context("convergence study failed");
                }
            };
            write_convergence(&args.out, &table).with_context(|| format!("writing {}", args.out.display()))?;
            let format = if args.csv { Format::Csv } else { Format::Table };
            write!(stdout, "{}", emit_table(&table, format))?;
            let worst = table.residuals.iter().copied().fold(0.0, f64::max);
            log::info!("largest relative residual {worst:.2e}");
        }
        Mode::Adaptive => {
            let history = run_adaptive::<f64>(&cfg)?;
            write_adaptive(&args.out, &history).with_context(|| format!("writing {}", args.out.display()))?;
            history.write_csv(&mut stdout)?;
            report_mesh(&history.final_mesh);
        }
    }
    Ok(())
}

fn report_mesh(mesh: &Mesh<f64>) {
    let s = mesh.stats();
    log::info!("final mesh: nt={} nv={} h_min={:.3e} h_max={:.3e}", mesh.nt(), mesh.nv(), s.h_min, s.h_max);
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match cli.command {
        Command::Solve(args) => {
            if let Some(t) = args.theta {
                if !(t > 0.0 && t <= 1.0) {
                    bail!("--theta must lie in (0, 1], got {t}");
                }
            }
            solve(args)
        }
    }
}
