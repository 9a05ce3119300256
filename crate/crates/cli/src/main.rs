//! Convergence-study driver: runs one manufactured case at one polynomial
//! degree over a doubling mesh sequence and prints the error table the
//! library measures, optionally saving the rows as CSV.
//!
//! Exit codes: 0 on success, 1 when the linear solver fails (divergence,
//! loss of positive definiteness, I/O), 2 for unusable arguments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mwg_core::study::{default_levels, run_convergence, RunConfig, SolverChoice};
use mwg_core::MwgError;

#[derive(Parser, Debug)]
#[command(
    name = "mwg",
    about = "Convergence studies for the modified weak Galerkin curl-curl solver",
    long_about = "Solves curl curl u + u = f on the unit square with tangential\n\
                  boundary conditions for one of three manufactured solutions,\n\
                  refining a uniform triangle mesh from --nmin to --nmax and\n\
                  reporting energy/L2 errors with observed convergence orders."
)]
struct Cli {
    /// Manufactured case: 1 and 2 have homogeneous tangential data, 3 does not
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    example: u8,

    /// Polynomial degree k of the vector trial space
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), default_value_t = 1)]
    degree: u8,

    /// Coarsest mesh resolution N (grid of 2 N^2 triangles)
    #[arg(long)]
    nmin: Option<usize>,

    /// Finest mesh resolution N; must be nmin times a power of two
    #[arg(long)]
    nmax: Option<usize>,

    /// Relative residual tolerance of the iterative solver
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,

    /// Linear solver: cg (sparse, any size) or cholesky (dense, small meshes)
    #[arg(long, default_value = "cg", value_parser = ["cg", "cholesky"])]
    solver: String,

    /// Write the table rows to this file as CSV
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Stop the default mesh sequence at N = 64
    #[arg(long)]
    quick: bool,

    /// Worker threads for assembly (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn levels_from(cli: &Cli) -> Result<Vec<usize>, String> {
    let defaults = default_levels(cli.example, cli.degree as usize, cli.quick);
    let lo = cli.nmin.unwrap_or(defaults[0]);
    let hi = cli
        .nmax
        .unwrap_or_else(|| *defaults.last().expect("default levels are never empty"));
    if lo == 0 {
        return Err("--nmin must be at least 1".to_string());
    }
    if hi < lo {
        return Err(format!("--nmax {hi} is below --nmin {lo}"));
    }
    let mut levels = Vec::new();
    let mut n = lo;
    while n <= hi {
        levels.push(n);
        n *= 2;
    }
    if *levels.last().expect("at least nmin") != hi {
        return Err(format!(
            "--nmax {hi} is not --nmin {lo} times a power of two"
        ));
    }
    Ok(levels)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let levels = match levels_from(&cli) {
        Ok(levels) => levels,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    let cfg = RunConfig {
        example: cli.example,
        degree: cli.degree as usize,
        levels,
        solver: if cli.solver == "cholesky" {
            SolverChoice::DenseCholesky
        } else {
            SolverChoice::ConjugateGradient
        },
        tol: cli.tol,
        max_iterations: 200_000,
        csv_path: cli.csv,
        threads: cli.threads,
    };

    let mut out = std::io::stdout();
    match run_convergence(&cfg, &mut out) {
        Ok(_) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                MwgError::CgDiverged { .. }
                | MwgError::NotPositiveDefinite { .. }
                | MwgError::DenseTooLarge { .. }
                | MwgError::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
