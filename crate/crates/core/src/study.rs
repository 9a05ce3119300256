//! Convergence studies over uniform mesh refinements.
//!
//! A study runs one manufactured case at one polynomial degree over a
//! doubling sequence of mesh resolutions, solves each system, measures
//! energy and L2 errors against the exact solution, and reports observed
//! convergence orders. Rows stream to the given writer as they finish, so
//! long runs show progress, and the same rows can be saved as CSV.
//!
//! Everything in a study is deterministic: assembly order is fixed and the
//! solver does not depend on thread count, so repeated runs produce
//! bit-identical errors, orders, and iteration counts. Only the wall-clock
//! seconds column varies between runs.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use crate::assembly::assemble_system;
use crate::constraints::TangentialBc;
use crate::error::MwgError;
use crate::errornorms::solution_error;
use crate::field::DiscreteField;
use crate::manufactured::{get_case, ManufacturedCase};
use crate::mesh::Mesh;
use crate::solver::{constrained_cg_solve, constrained_cholesky_solve, SolveReport};
use crate::space::MwgSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    ConjugateGradient,
    DenseCholesky,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Manufactured case id (1, 2, or 3).
    pub example: u8,
    /// Polynomial degree k of the trial space.
    pub degree: usize,
    /// Mesh resolutions; each level must double the previous one.
    pub levels: Vec<usize>,
    pub solver: SolverChoice,
    /// Relative residual tolerance for the iterative solver.
    pub tol: f64,
    /// Iteration cap for the iterative solver.
    pub max_iterations: usize,
    /// Optional CSV output path.
    pub csv_path: Option<PathBuf>,
    /// Optional worker thread count (defaults to the rayon global pool).
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(example: u8, degree: usize, levels: Vec<usize>) -> Self {
        RunConfig {
            example,
            degree,
            levels,
            solver: SolverChoice::ConjugateGradient,
            tol: 1e-12,
            max_iterations: 200_000,
            csv_path: None,
            threads: None,
        }
    }
}

/// Assemble and solve one refinement level: build the system, impose the
/// tangential boundary conditions as trace constraints, and solve on the
/// reduced space with the chosen method.
pub fn solve_level(
    mesh: &Mesh,
    space: &MwgSpace,
    case: &ManufacturedCase,
    solver: SolverChoice,
    tol: f64,
    max_iterations: usize,
) -> Result<(DiscreteField, SolveReport), MwgError> {
    let sys = assemble_system(mesh, space, case)?;
    let bc = TangentialBc::build(mesh, space, case);
    let (x, report) = match solver {
        SolverChoice::ConjugateGradient => {
            constrained_cg_solve(&sys.matrix, &sys.rhs, &bc, &sys.dofs, tol, max_iterations)?
        }
        SolverChoice::DenseCholesky => {
            constrained_cholesky_solve(&sys.matrix, &sys.rhs, &bc, &sys.dofs)?
        }
    };
    Ok((DiscreteField::from_values(sys.dofs, x), report))
}

/// One measured refinement level.
#[derive(Debug, Clone)]
pub struct ErrorRow {
    pub n: usize,
    /// Grid spacing 1/N of the underlying square grid.
    pub h: f64,
    pub dofs: usize,
    pub energy_error: f64,
    /// log2 ratio to the previous level; NaN on the first level.
    pub energy_order: f64,
    pub l2_error: f64,
    pub l2_order: f64,
    /// Solver iterations (0 for the direct solver).
    pub iterations: usize,
    pub seconds: f64,
}

/// Default resolution sequence for a study: 4 to 128, extended to 256 for
/// the two slower-resolving first-order runs of cases 2 and 3, and capped
/// at 64 in quick mode.
pub fn default_levels(example: u8, degree: usize, quick: bool) -> Vec<usize> {
    let max = if quick {
        64
    } else if degree == 1 && (example == 2 || example == 3) {
        256
    } else {
        128
    };
    let mut levels = Vec::new();
    let mut n = 4;
    while n <= max {
        levels.push(n);
        n *= 2;
    }
    levels
}

/// Scientific notation in table style: 5.98E-02.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return "NaN".to_string();
    }
    let s = format!("{:.2e}", x);
    let (mant, exp) = s.split_once('e').expect("exponential format");
    let e: i32 = exp.parse().expect("exponent");
    format!("{}E{}{:02}", mant, if e < 0 { '-' } else { '+' }, e.abs())
}

/// Observed order with two decimals; N/A when there is no previous level.
pub fn format_order(x: f64) -> String {
    if x.is_nan() {
        "N/A".to_string()
    } else {
        format!("{x:.2}")
    }
}

/// CSV line for one row; full-precision floats, NaN for missing orders.
pub fn csv_line(row: &ErrorRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        row.n,
        row.h,
        row.dofs,
        row.energy_error,
        row.energy_order,
        row.l2_error,
        row.l2_order,
        row.iterations,
        row.seconds
    )
}

pub const CSV_HEADER: &str = "N,h,dofs,energy_error,energy_order,l2_error,l2_order,cg_iters,seconds";

fn validate(cfg: &RunConfig) -> Result<(), MwgError> {
    if cfg.levels.is_empty() {
        return Err(MwgError::EmptyLevels);
    }
    for w in cfg.levels.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(MwgError::NonDoublingLevels(cfg.levels.clone()));
        }
    }
    if !(cfg.tol > 0.0) {
        return Err(MwgError::InvalidConfig(format!(
            "solver tolerance must be positive, got {}",
            cfg.tol
        )));
    }
    Ok(())
}

/// Run a convergence study, streaming a formatted table to `out`.
pub fn run_convergence(cfg: &RunConfig, out: &mut (dyn Write + Send)) -> Result<Vec<ErrorRow>, MwgError> {
    validate(cfg)?;
    match cfg.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| MwgError::InvalidConfig(e.to_string()))?;
            pool.install(|| run_inner(cfg, out))
        }
        None => run_inner(cfg, out),
    }
}

fn run_inner(cfg: &RunConfig, out: &mut (dyn Write + Send)) -> Result<Vec<ErrorRow>, MwgError> {
    let case = get_case(cfg.example)?;
    let space = MwgSpace::new(cfg.degree)?;
    writeln!(
        out,
        "case {} | degree k = {} | solver {}",
        case.id,
        cfg.degree,
        match cfg.solver {
            SolverChoice::ConjugateGradient => "cg",
            SolverChoice::DenseCholesky => "cholesky",
        }
    )?;
    writeln!(
        out,
        "{:>6} {:>8} {:>10} {:>14} {:>7} {:>14} {:>7} {:>7} {:>9}",
        "N", "h", "dofs", "energy error", "order", "L2 error", "order", "iters", "seconds"
    )?;

    let mut rows: Vec<ErrorRow> = Vec::with_capacity(cfg.levels.len());
    for &n in &cfg.levels {
        let start = Instant::now();
        let mesh = Mesh::uniform_square(n)?;
        let (field, report) =
            solve_level(&mesh, &space, &case, cfg.solver, cfg.tol, cfg.max_iterations)?;
        let err = solution_error(&mesh, &space, &field, &case)?;
        let seconds = start.elapsed().as_secs_f64();

        let energy_error = err.energy();
        let l2_error = err.l2();
        let (energy_order, l2_order) = match rows.last() {
            Some(prev) => (
                (prev.energy_error / energy_error).log2(),
                (prev.l2_error / l2_error).log2(),
            ),
            None => (f64::NAN, f64::NAN),
        };
        let row = ErrorRow {
            n,
            h: 1.0 / n as f64,
            dofs: field.map.n(),
            energy_error,
            energy_order,
            l2_error,
            l2_order,
            iterations: report.iterations,
            seconds,
        };
        writeln!(
            out,
            "{:>6} {:>8} {:>10} {:>14} {:>7} {:>14} {:>7} {:>7} {:>9.2}",
            row.n,
            format!("1/{n}"),
            row.dofs,
            format_sci(row.energy_error),
            format_order(row.energy_order),
            format_sci(row.l2_error),
            format_order(row.l2_order),
            row.iterations,
            row.seconds
        )?;
        rows.push(row);
    }

    if let Some(path) = &cfg.csv_path {
        let mut file = std::fs::File::create(path)?;
        writeln!(file, "{CSV_HEADER}")?;
        for row in &rows {
            writeln!(file, "{}", csv_line(row))?;
        }
    }
    Ok(rows)
}
