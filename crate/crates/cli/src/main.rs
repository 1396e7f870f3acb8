use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use tomo2d::decompose::{decompose_elastic, decompose_sym2, DecomposeOptions, DEFAULT_MEAN_TOL};
use tomo2d::grid_field::{
    gen_elastic_potential, gen_gaussian, gen_hessian_field, gen_random_bandlimited, mean_integral,
    DEFAULT_EXTENT, DEFAULT_GRID_N,
};
use tomo2d::io::{read_grid_field, write_grid_field, write_json, write_sinogram_csv};
use tomo2d::raytransforms::{elastic_x, mixed_m, momentum_i, LineGrid, Sinogram};
use tomo2d::verify::{run_suite, Suite, VerifyConfig};
use tomo2d::{AnalyticScalar, Error, FieldKind, Grid2, GridField};

#[derive(Parser, Debug)]
#[command(name = "tomo2d", version, about = "Tensor tomography toolkit for planar tensor fields")]
struct Cli {
    /// Grid points per axis (power of two, at least 16).
    #[arg(long, global = true, default_value_t = DEFAULT_GRID_N)]
    grid: usize,
    /// Half-width L of the periodic box [-L, L)^2.
    #[arg(long, global = true, default_value_t = DEFAULT_EXTENT)]
    extent: f64,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Relative residual tolerance for `decompose` (default 1e-10 symmetric, 1e-9 elastic).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a test field as a grid-field directory.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        /// Gaussian envelope width; defaults to 1 for the plain Gaussians and 0.9 for
        /// the differentiated kinds.
        #[arg(long)]
        width: Option<f64>,
        /// Per-component amplitudes for the Gaussian kinds.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Tensor kind for `random-bandlimited` and `zero`.
        #[arg(long, default_value = "sym2")]
        field: FieldKind,
        /// Spectral cutoff as a fraction of the grid maximum.
        #[arg(long, default_value_t = 0.25)]
        band: f64,
        #[arg(long)]
        mean_zero: bool,
    },
    /// Split a symmetric or elastic 2-tensor field into solenoidal and potential parts.
    Decompose { input: PathBuf },
    /// Evaluate ray transforms on a line grid and write a sinogram CSV.
    Transform {
        input: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "i0")]
        transform: Vec<TransformKind>,
        /// Number of angles in [0, pi); defaults to 64.
        #[arg(long)]
        angles: Option<usize>,
        /// Number of offsets in [-L, L]; defaults to N + 1.
        #[arg(long)]
        offsets: Option<usize>,
    },
    /// Run a verification suite and write its report.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Run independent checks concurrently.
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GenKind {
    GaussianScalar,
    GaussianVector,
    GaussianSym2,
    GaussianSym3,
    GaussianElastic2,
    Hessian,
    ElasticPotential,
    RandomBandlimited,
    Zero,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TransformKind {
    I0,
    I1,
    I2,
    X1,
    X2,
    Mixed,
}

/// Failure that maps onto a process exit code.
enum Failure {
    Check(String),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Gen { kind, width, weights, field, band, mean_zero } => {
            let grid = Grid2::new(cli.grid, cli.extent)?;
            let f = generate(&grid, *kind, *width, weights.as_deref(), *field, *band, *mean_zero, cli.seed)?;
            write_grid_field(&cli.out, &f).with_context(|| format!("writing {}", cli.out.display()))?;
            println!("wrote {} field to {}", f.kind(), cli.out.display());
            Ok(())
        }
        Command::Decompose { input } => decompose(input, &cli.out, cli.tol),
        Command::Transform { input, transform, angles, offsets } => {
            let f = read_grid_field(input).with_context(|| format!("reading {}", input.display()))?;
            let grid = *f.grid();
            let default = LineGrid::desk(&grid);
            let lines = LineGrid::new(
                &grid,
                angles.unwrap_or(default.n_angles()),
                offsets.unwrap_or(default.n_offsets()),
            )?;
            let mut sino: Option<Sinogram> = None;
            for t in transform {
                let s = match t {
                    TransformKind::I0 => momentum_i(&f, &[0], &lines)?,
                    TransformKind::I1 => momentum_i(&f, &[1], &lines)?,
                    TransformKind::I2 => momentum_i(&f, &[2], &lines)?,
                    TransformKind::X1 => elastic_x(&f, 1, &lines)?,
                    TransformKind::X2 => elastic_x(&f, 2, &lines)?,
                    TransformKind::Mixed => mixed_m(&f, &lines)?,
                };
                sino = Some(match sino {
                    None => s,
                    Some(acc) => acc.stack(s)?,
                });
            }
            let sino = sino.context("no transform requested")?;
            let path = cli.out.join("sinogram.csv");
            write_sinogram_csv(&path, &sino)?;
            println!("wrote {} channel(s) to {}", sino.channels().len(), path.display());
            Ok(())
        }
        Command::Verify { suite, parallel } => {
            let grid = Grid2::new(cli.grid, cli.extent)?;
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse()?]
            };
            let cfg = VerifyConfig { grid, seed: cli.seed, parallel: *parallel };
            let mut failed = Vec::new();
            for s in suites {
                let report = run_suite(s, &cfg)?;
                for c in &report.checks {
                    let op = if c.comparison == tomo2d::verify::Comparison::Le { "<=" } else { ">=" };
                    println!(
                        "{} {s}/{}: {:.3e} {op} {:.1e}",
                        if c.pass { "PASS" } else { "FAIL" },
                        c.name,
                        c.measured,
                        c.tolerance
                    );
                }
                write_json(&cli.out.join(format!("report-{s}.json")), &report)?;
                if !report.pass {
                    failed.push(s.to_string());
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Check(failed.join(", ")))
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn generate(
    grid: &Grid2,
    kind: GenKind,
    width: Option<f64>,
    weights: Option<&[f64]>,
    field: FieldKind,
    band: f64,
    mean_zero: bool,
    seed: u64,
) -> anyhow::Result<GridField> {
    let width = width.unwrap_or(match kind {
        GenKind::Hessian | GenKind::ElasticPotential => 0.9,
        _ => 1.0,
    });
    let gaussian = |k: FieldKind| -> anyhow::Result<GridField> {
        let ones = vec![1.0; k.num_components()];
        Ok(gen_gaussian(grid, k, [0.0, 0.0], width, weights.unwrap_or(&ones), None)?)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centre = || [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
    let f = match kind {
        GenKind::GaussianScalar => gaussian(FieldKind::Scalar)?,
        GenKind::GaussianVector => gaussian(FieldKind::Vector)?,
        GenKind::GaussianSym2 => gaussian(FieldKind::Sym2)?,
        GenKind::GaussianSym3 => gaussian(FieldKind::Sym3)?,
        GenKind::GaussianElastic2 => gaussian(FieldKind::Elastic2)?,
        GenKind::Hessian => gen_hessian_field(grid, &AnalyticScalar::gaussian(centre(), width, 1.0)),
        GenKind::ElasticPotential => {
            let v = [
                AnalyticScalar::gaussian(centre(), width, 1.0),
                AnalyticScalar::gaussian(centre(), width, -0.5),
                AnalyticScalar::gaussian(centre(), width, 0.7),
            ];
            let psi = AnalyticScalar::gaussian(centre(), width, 1.0);
            gen_elastic_potential(grid, &v, &[psi.deriv(1), psi.deriv(0).scaled(-1.0)])
        }
        GenKind::RandomBandlimited => gen_random_bandlimited(grid, field, seed, band, mean_zero)?,
        GenKind::Zero => GridField::zeros(*grid, field),
    };
    let ratio = f.boundary_decay();
    if ratio >= tomo2d::grid_field::DECAY_GATE && kind != GenKind::RandomBandlimited {
        bail!(Error::DecayGate { ratio, gate: tomo2d::grid_field::DECAY_GATE });
    }
    Ok(f)
}

#[derive(Serialize)]
struct DecomposeReport<R: Serialize> {
    schema: &'static str,
    kind: FieldKind,
    pass: bool,
    tolerance: f64,
    mean_tolerance: f64,
    means: Vec<(String, f64)>,
    /// `||g||_inf / ||f||_inf`.
    solenoidal_fraction: f64,
    residuals: Option<R>,
    error: Option<String>,
}

fn decompose(input: &Path, out: &Path, tol: Option<f64>) -> Result<(), Failure> {
    let f = read_grid_field(input).with_context(|| format!("reading {}", input.display()))?;
    let opts = DecomposeOptions::default();
    let named_means: Vec<(String, f64)> =
        f.kind().component_names().into_iter().zip(mean_integral(&f)).collect();
    let report = |pass, tolerance, frac, residuals: Option<serde_json::Value>, error: Option<String>| {
        DecomposeReport {
            schema: tomo2d::verify::REPORT_SCHEMA,
            kind: f.kind(),
            pass,
            tolerance,
            mean_tolerance: DEFAULT_MEAN_TOL,
            means: named_means.clone(),
            solenoidal_fraction: frac,
            residuals,
            error,
        }
    };
    let gate = |e: Error, tolerance: f64| -> Failure {
        if let Error::MeanNotZero { .. } = e {
            if let Err(w) = write_json(&out.join("report.json"), &report(false, tolerance, f64::NAN, None, Some(e.to_string()))) {
                return w.into();
            }
        }
        e.into()
    };
    let frac = |g: &GridField| {
        let peak = f.max_abs();
        if peak == 0.0 { 0.0 } else { g.max_abs() / peak }
    };
    let (pass, tolerance) = match f.kind() {
        FieldKind::Sym2 => {
            let tolerance = tol.unwrap_or(1e-10);
            let s = decompose_sym2(&f, opts).map_err(|e| gate(e, tolerance))?;
            write_grid_field(&out.join("g"), &s.g)?;
            write_grid_field(&out.join("v"), &s.v)?;
            let r = &s.residuals;
            let pass = r.reconstruction <= tolerance && r.solenoidal <= tolerance;
            write_json(&out.join("report.json"), &report(pass, tolerance, frac(&s.g), Some(json!(r)), None))?;
            (pass, tolerance)
        }
        FieldKind::Elastic2 => {
            let tolerance = tol.unwrap_or(1e-9);
            let s = decompose_elastic(&f, opts).map_err(|e| gate(e, tolerance))?;
            write_grid_field(&out.join("g"), &s.g)?;
            write_grid_field(&out.join("v"), &s.v)?;
            write_grid_field(&out.join("u"), &s.u)?;
            let r = &s.residuals;
            let pass = [r.reconstruction, r.h_star, r.k_star, r.u_orthogonality].iter().all(|&x| x <= tolerance);
            write_json(&out.join("report.json"), &report(pass, tolerance, frac(&s.g), Some(json!(r)), None))?;
            (pass, tolerance)
        }
        other => {
            return Err(Error::KindMismatch { expected: "sym2 or elastic2".into(), got: other.to_string() }.into())
        }
    };
    println!("wrote split to {} (pass: {pass})", out.display());
    if pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("residuals exceed tolerance {tolerance:.1e}")))
    }
}
