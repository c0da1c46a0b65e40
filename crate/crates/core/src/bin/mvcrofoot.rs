use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mvcrofoot::demo::{parse_complex, parse_complex_list, scalar_demo};
use mvcrofoot::instance::{generate, to_canonical_json, GenOptions, InstanceFile, DEFAULT_W_NORM_CAP};
use mvcrofoot::inner_function::DEFAULT_RADIUS_CAP;
use mvcrofoot::oracle::DEFAULT_GRID;
use mvcrofoot::suite::{run_suite, Suite, SuiteConfig, DEFAULT_TOL};
use mvcrofoot::Error;

const GRID_ENV: &str = "MVCROFOOT_GRID";
const CLI_MIN_GRID: usize = 64;

/// Matrix-valued Crofoot transform toolkit.
#[derive(Parser)]
#[command(name = "mvcrofoot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance file.
    Gen {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Symmetric Θ and W, with entrywise conjugation.
        #[arg(long)]
        symmetric: bool,
        #[arg(long, default_value_t = DEFAULT_W_NORM_CAP)]
        w_norm_cap: f64,
        #[arg(long, default_value_t = DEFAULT_RADIUS_CAP)]
        radius_cap: f64,
        /// Output path; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a residual suite on an instance.
    Verify {
        instance: PathBuf,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Quadrature nodes (power of two); falls back to $MVCROFOOT_GRID, then 1024.
        #[arg(long)]
        grid: Option<usize>,
        /// Report path; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Scalar Crofoot transform next to the Möbius formula.
    DemoScalar {
        /// Complex number such as 0.5 or 0.2-0.1i.
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        /// Comma-separated zeros of the Blaschke product.
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        zeros: String,
        /// CSV output path.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen { dim, degree, seed, symmetric, w_norm_cap, radius_cap, out } => {
            cmd_gen(GenOptions { dim, degree, seed, symmetric, w_norm_cap, radius_cap }, out)
        }
        Command::Verify { instance, suite, tol, grid, report } => cmd_verify(instance, &suite, tol, grid, report),
        Command::DemoScalar { w, zeros, out } => cmd_demo(&w, &zeros, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(2)
        }
    }
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(opts: GenOptions, out: Option<PathBuf>) -> Result<ExitCode, Error> {
    let (mut file, _) = generate(&opts)?;
    write_or_print(out.as_ref(), &file.to_canonical_string()?)?;
    Ok(ExitCode::SUCCESS)
}

fn resolve_grid(flag: Option<usize>) -> Result<usize, Error> {
    let grid = match flag {
        Some(g) => g,
        None => match std::env::var(GRID_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| Error::Malformed(format!("{GRID_ENV}={v:?} is not a number")))?,
            Err(_) => DEFAULT_GRID,
        },
    };
    if grid < CLI_MIN_GRID || !grid.is_power_of_two() {
        return Err(Error::Malformed(format!("grid {grid} must be a power of two ≥ {CLI_MIN_GRID}")));
    }
    Ok(grid)
}

fn cmd_verify(
    path: PathBuf,
    suite: &str,
    tol: f64,
    grid: Option<usize>,
    report_path: Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let suite: Suite = suite.parse()?;
    let grid = resolve_grid(grid)?;
    let (file, instance) = InstanceFile::load(&path)?;
    let cfg = SuiteConfig::new(tol, grid, file.seed)?;
    let report = run_suite(&instance, suite, &cfg);
    for c in &report.checks {
        let status = if c.pass { "pass" } else { "FAIL" };
        eprintln!("{status}  {:<36} {:.3e} (tol {:.1e})", c.name, c.residual, c.tolerance);
        if let Some(d) = &c.detail {
            eprintln!("      {d}");
        }
    }
    write_or_print(report_path.as_ref(), &to_canonical_json(&report)?)?;
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_demo(w: &str, zeros: &str, out: Option<PathBuf>) -> Result<ExitCode, Error> {
    let w = parse_complex(w)?;
    if w.norm() >= 1.0 {
        return Err(Error::NotStrict { norm: w.norm() });
    }
    let zeros = parse_complex_list(zeros)?;
    let table = scalar_demo(w, &zeros)?;
    println!(
        "{:>10} {:>10} | {:>23} {:>23} | {:>23} {:>23} | {:>9}",
        "Re z", "Im z", "Re Θ′ (matrix)", "Im Θ′ (matrix)", "Re Möbius", "Im Möbius", "|diff|"
    );
    for r in &table.rows {
        println!(
            "{:>10.6} {:>10.6} | {:>23.16e} {:>23.16e} | {:>23.16e} {:>23.16e} | {:>9.2e}",
            r.z_re, r.z_im, r.formula_re, r.formula_im, r.mobius_re, r.mobius_im, r.discrepancy
        );
    }
    println!("max |Θ′ − Möbius|          = {:.3e}", table.max_discrepancy);
    println!("max ||Θ′| − 1| on 𝕋         = {:.3e}", table.boundary_modulus);
    println!("J_w inner-product deviation = {:.3e}", table.norm_preservation);
    if let Some(path) = out {
        let mut wtr = csv::Writer::from_path(&path).map_err(|e| Error::Io(e.to_string()))?;
        for r in &table.rows {
            wtr.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        wtr.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}
