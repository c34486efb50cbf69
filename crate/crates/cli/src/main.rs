//! `corrgeom`: evaluate metrics, curvature, geodesics, Jacobi fields,
//! complexity and scattering observables, and run the verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or domain error.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use corrgeom::chaos::{
    jacobi_intensity, jacobi_intensity_derivative, lyapunov_estimate, lyapunov_exponent,
    JacobiState,
};
use corrgeom::complexity::complexity_report;
use corrgeom::curvature::curvature_bundle;
use corrgeom::geodesics::{amplitude_a0, joined_path, tau_grid_with_junction};
use corrgeom::models::{eigenvalues3, eigenvalues4, metric_corr3, metric_corr4};
use corrgeom::oracle::suite::{run_verify, Fault, VerifyOptions};
use corrgeom::scattering::{prolongation_sweep, r_bound, scatter_report};
use corrgeom::{Error, InitialConditions, ModelParams, ScatteringConfig};

use config::Resolver;
use output::{to_canonical, Format, Output, Payload};

#[derive(Parser)]
#[command(
    name = "corrgeom",
    version,
    about = "Information geometry of correlated Gaussian manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON object of parameters; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Reduced Planck constant (only the scattering observables depend on it).
    #[arg(long, global = true)]
    hbar: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fisher–Rao metric with determinant and eigenvalues.
    Metric(MetricArgs),
    /// Christoffel symbols, Riemann, Ricci, scalar, sectional and Weyl curvature.
    Curvature(PointArgs),
    /// Joined geodesic table (tau, mu1, mu2, sigma) across the collision.
    Geodesic(GeodesicArgs),
    /// Jacobi field intensity and the Lyapunov exponent.
    Jacobi(JacobiArgs),
    /// IGC/IGE sweep over horizons and correlations.
    Complexity(ComplexityArgs),
    /// Scattering report: r_qm, phase shift, cross section, potential, purity, prolongation.
    Scatter(ScatterArgs),
    /// Prolongation sweep over correlations.
    Prolongation(ProlongationArgs),
    /// Run the oracle-vs-closed-form verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct MetricArgs {
    /// Manifold dimension: 3 (equal spreads) or 4 (distinct spreads).
    #[arg(long)]
    dim: Option<u8>,
    /// Common spread (3D).
    #[arg(long)]
    sigma: Option<f64>,
    /// Spread along x (4D).
    #[arg(long)]
    sigma_x: Option<f64>,
    /// Spread along y (4D).
    #[arg(long)]
    sigma_y: Option<f64>,
    /// Micro-correlation coefficient.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args)]
struct IcArgs {
    /// Initial momentum magnitude.
    #[arg(long)]
    p0: Option<f64>,
    /// Initial momentum spread.
    #[arg(long)]
    sigma0: Option<f64>,
    /// Collision time scale.
    #[arg(long)]
    tau0: Option<f64>,
    /// Initial separation.
    #[arg(long = "R0")]
    r0: Option<f64>,
}

#[derive(Args)]
struct GeodesicArgs {
    #[command(flatten)]
    ic: IcArgs,
    #[arg(long)]
    r: Option<f64>,
    /// Grid start (default −tau0).
    #[arg(long, allow_hyphen_values = true)]
    tau_min: Option<f64>,
    /// Grid end (default tau0).
    #[arg(long, allow_hyphen_values = true)]
    tau_max: Option<f64>,
    /// Number of uniform grid points (the junction is added if missing).
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct JacobiArgs {
    #[command(flatten)]
    ic: IcArgs,
    /// Initial growth rate of the Jacobi field.
    #[arg(long, allow_hyphen_values = true)]
    omega0: Option<f64>,
    /// Horizon of the table and of the Lyapunov estimate.
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct ComplexityArgs {
    #[command(flatten)]
    ic: IcArgs,
    /// Correlations to tabulate (comma separated).
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    #[arg(long)]
    tau_min: Option<f64>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct ScatterArgs {
    /// Mean wave number of each packet.
    #[arg(long)]
    k0: Option<f64>,
    /// Wave-number spread.
    #[arg(long)]
    sigma_k0: Option<f64>,
    /// Initial separation.
    #[arg(long = "R0")]
    r0: Option<f64>,
    /// Range of the square well.
    #[arg(long = "L")]
    l: Option<f64>,
    /// s-wave scattering length.
    #[arg(long)]
    a_s: Option<f64>,
    #[arg(long)]
    reduced_mass: Option<f64>,
    /// Collision time scale used for the prolongation.
    #[arg(long)]
    tau0: Option<f64>,
}

#[derive(Args)]
struct ProlongationArgs {
    #[command(flatten)]
    ic: IcArgs,
    /// Correlations to evaluate (comma separated). Default: n points
    /// uniformly covering [0, r_bound).
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only these suites (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
    /// Multiply every residual tolerance by this factor.
    #[arg(long)]
    tolerance_scale: Option<f64>,
    /// Test hook: perturb the (0, 0) entry of the closed-form metrics.
    #[arg(long, hide = true, allow_hyphen_values = true)]
    inject_fault: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let res = Resolver::load(cli.config.as_deref())?;
    let mut warnings = Vec::new();
    let hbar = res.get("hbar", cli.hbar, 1.0)?;
    if hbar != 1.0 && !matches!(cli.command, Command::Scatter(_)) {
        warnings.push(format!(
            "hbar = {hbar} has no effect on '{}': geometric quantities use hbar = 1",
            command_name(&cli.command)
        ));
    }
    let (payload, verify_passed) = match &cli.command {
        Command::Metric(a) => (cmd_metric(a, &res)?, true),
        Command::Curvature(a) => (cmd_curvature(a, &res)?, true),
        Command::Geodesic(a) => (cmd_geodesic(a, &res)?, true),
        Command::Jacobi(a) => (cmd_jacobi(a, &res, &mut warnings)?, true),
        Command::Complexity(a) => (cmd_complexity(a, &res, &mut warnings)?, true),
        Command::Scatter(a) => (cmd_scatter(a, hbar, &res, &mut warnings)?, true),
        Command::Prolongation(a) => (cmd_prolongation(a, &res, &mut warnings)?, true),
        Command::Verify(a) => cmd_verify(a, &res)?,
    };
    let out = Output {
        command: command_name(&cli.command),
        config: res.finish()?,
        payload,
        warnings,
    };
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    output::emit(&out.render(cli.format)?, cli.out.as_deref())?;
    Ok(if verify_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Metric(_) => "metric",
        Command::Curvature(_) => "curvature",
        Command::Geodesic(_) => "geodesic",
        Command::Jacobi(_) => "jacobi",
        Command::Complexity(_) => "complexity",
        Command::Scatter(_) => "scatter",
        Command::Prolongation(_) => "prolongation",
        Command::Verify(_) => "verify",
    }
}

fn initial_conditions(a: &IcArgs, res: &Resolver) -> Result<InitialConditions> {
    let d = InitialConditions::desk();
    Ok(InitialConditions::new(
        res.get("p0", a.p0, d.p0)?,
        res.get("sigma0", a.sigma0, d.sigma0)?,
        res.get("tau0", a.tau0, d.tau0)?,
        res.get("R0", a.r0, d.r0)?,
    )?)
}

fn params(flag: Option<f64>, res: &Resolver, default: f64) -> Result<ModelParams> {
    Ok(ModelParams::new(res.get("r", flag, default)?)?)
}

fn cmd_metric(a: &MetricArgs, res: &Resolver) -> Result<Payload> {
    let dim = res.get("dim", a.dim, 3)?;
    let pr = params(a.r, res, 0.0)?;
    let (names, matrix, det, eig): (&[&str], Vec<Vec<f64>>, f64, Vec<f64>) = match dim {
        3 => {
            let g = metric_corr3(res.get("sigma", a.sigma, 1.0)?, pr)?;
            let rows = g.row_iter().map(|r| r.iter().copied().collect()).collect();
            (
                &["mu1", "mu2", "sigma"],
                rows,
                g.determinant(),
                eigenvalues3(&g),
            )
        }
        4 => {
            let g = metric_corr4(
                res.get("sigma_x", a.sigma_x, 1.0)?,
                res.get("sigma_y", a.sigma_y, 1.0)?,
                pr,
            )?;
            let rows = g.row_iter().map(|r| r.iter().copied().collect()).collect();
            (
                &["mu_x", "sigma_x", "mu_y", "sigma_y"],
                rows,
                g.determinant(),
                eigenvalues4(&g),
            )
        }
        other => bail!("--dim must be 3 or 4, got {other}"),
    };
    // The metric is symmetric: list each independent entry once.
    let mut entries = Map::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, g) in row.iter().enumerate().skip(i) {
            entries.insert(format!("g{}{}", i + 1, j + 1), json!(g));
        }
    }
    let core = json!({
        "coordinates": names,
        "entries": entries,
        "determinant": det,
        "eigenvalues": eig,
    });
    let mut full = core.clone();
    full["matrix"] = json!(matrix);
    Ok(Payload::Report {
        json: to_canonical(&full)?,
        csv: to_canonical(&core)?,
    })
}

fn cmd_curvature(a: &PointArgs, res: &Resolver) -> Result<Payload> {
    let bundle = curvature_bundle(res.get("sigma", a.sigma, 1.0)?, params(a.r, res, 0.0)?)?;
    let v = to_canonical(&bundle)?;
    Ok(Payload::Report {
        json: v.clone(),
        csv: v,
    })
}

fn cmd_geodesic(a: &GeodesicArgs, res: &Resolver) -> Result<Payload> {
    let ic = initial_conditions(&a.ic, res)?;
    let pr = params(a.r, res, 0.0)?;
    let grid = tau_grid_with_junction(
        res.get("tau_min", a.tau_min, -ic.tau0)?,
        res.get("tau_max", a.tau_max, ic.tau0)?,
        res.get("n", a.n, 101)?,
    )?;
    let rows = grid
        .par_iter()
        .map(|&t| {
            let s = joined_path(t, pr, &ic)?;
            to_canonical(&json!({"tau": t, "mu1": s.mu1, "mu2": s.mu2, "sigma": s.sigma}))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Payload::Table {
        columns: vec!["tau", "mu1", "mu2", "sigma"],
        rows,
        extra: Map::new(),
    })
}

fn cmd_jacobi(a: &JacobiArgs, res: &Resolver, warnings: &mut Vec<String>) -> Result<Payload> {
    let ic = initial_conditions(&a.ic, res)?;
    let a0 = amplitude_a0(&ic)?;
    let omega0 = res.get("omega0", a.omega0, 1.0)?;
    let tau_max = res.get("tau_max", a.tau_max, 2.0)?;
    let grid = tau_grid_with_junction(0.0, tau_max, res.get("n", a.n, 101)?)?;
    let rows = grid
        .par_iter()
        .map(|&t| {
            to_canonical(&json!({
                "tau": t,
                "intensity": jacobi_intensity(t, omega0, a0)?,
                "intensity_derivative": jacobi_intensity_derivative(t, omega0, a0)?,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let estimate = lyapunov_estimate(omega0, a0, tau_max)?;
    warnings.extend(estimate.warnings);
    let mut extra = Map::new();
    extra.insert(
        "state".into(),
        to_canonical(&JacobiState::new(omega0, a0)?)?,
    );
    extra.insert(
        "lyapunov".into(),
        to_canonical(&json!({"closed_form": lyapunov_exponent(a0)?, "estimate": estimate.value}))?,
    );
    Ok(Payload::Table {
        columns: vec!["tau", "intensity", "intensity_derivative"],
        rows,
        extra,
    })
}

fn cmd_complexity(
    a: &ComplexityArgs,
    res: &Resolver,
    warnings: &mut Vec<String>,
) -> Result<Payload> {
    let ic = initial_conditions(&a.ic, res)?;
    let rs = res.get("r", a.r.clone(), vec![0.0, 0.5])?;
    let ps = rs
        .iter()
        .map(|&r| ModelParams::new(r))
        .collect::<corrgeom::Result<Vec<_>>>()?;
    let grid = tau_grid_with_junction(
        res.get("tau_min", a.tau_min, 0.1)?,
        res.get("tau_max", a.tau_max, 2.0)?,
        res.get("n", a.n, 20)?,
    )?;
    let per_tau: Vec<corrgeom::Result<Vec<_>>> = grid
        .par_iter()
        .map(|&t| ps.iter().map(|&p| complexity_report(t, p, &ic)).collect())
        .collect();
    let mut rows = Vec::new();
    for (i, reports) in per_tau.into_iter().enumerate() {
        match reports {
            Ok(reps) => {
                for rep in reps {
                    warnings.extend(rep.warnings);
                    rows.push(to_canonical(&rep.value)?);
                }
            }
            Err(e @ Error::Saturation(_)) => {
                warnings.push(format!(
                    "table truncated at tau = {} ({} of {} horizons kept): {e}",
                    grid[i],
                    i,
                    grid.len()
                ));
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    warnings.dedup();
    Ok(Payload::Table {
        columns: vec!["tau", "r", "lambda", "igc", "ige", "ratio", "gap"],
        rows,
        extra: Map::new(),
    })
}

fn cmd_scatter(
    a: &ScatterArgs,
    hbar: f64,
    res: &Resolver,
    warnings: &mut Vec<String>,
) -> Result<Payload> {
    let d = ScatteringConfig::default();
    let cfg = ScatteringConfig {
        k0: res.get("k0", a.k0, d.k0)?,
        sigma_k0: res.get("sigma_k0", a.sigma_k0, d.sigma_k0)?,
        r0: res.get("R0", a.r0, d.r0)?,
        l: res.get("L", a.l, d.l)?,
        a_s: res.get("a_s", a.a_s, d.a_s)?,
        reduced_mass: res.get("reduced_mass", a.reduced_mass, d.reduced_mass)?,
        hbar,
    };
    let report = scatter_report(&cfg, res.get("tau0", a.tau0, 1.0)?)?;
    warnings.extend(report.warnings);
    let v = to_canonical(&report.value)?;
    Ok(Payload::Report {
        json: v.clone(),
        csv: v,
    })
}

fn cmd_prolongation(
    a: &ProlongationArgs,
    res: &Resolver,
    warnings: &mut Vec<String>,
) -> Result<Payload> {
    let ic = initial_conditions(&a.ic, res)?;
    let bound = r_bound(&ic)?;
    let n = res.get("n", a.n, 11)?;
    let default: Vec<f64> = (0..n).map(|i| bound * i as f64 / n as f64).collect();
    let rs = res.get("r", a.r.clone(), default)?;
    let sweep = prolongation_sweep(&ic, &rs)?;
    for row in &sweep {
        if let Some(flag) = &row.flag {
            warnings.push(format!("r = {}: {flag}", row.r));
        }
    }
    let mut extra = Map::new();
    extra.insert("r_bound".into(), to_canonical(&bound)?);
    Ok(Payload::Table {
        columns: vec!["r", "delta_approx", "delta_exact", "rel_gap", "flag"],
        rows: sweep.iter().map(to_canonical).collect::<Result<_>>()?,
        extra,
    })
}

fn cmd_verify(a: &VerifyArgs, res: &Resolver) -> Result<(Payload, bool)> {
    let opts = VerifyOptions {
        only: res.get("only", a.only.clone(), Vec::new())?,
        tolerance_scale: res.get("tolerance_scale", a.tolerance_scale, 1.0)?,
        fault: a.inject_fault.map(Fault::MetricEntry),
    };
    let report = run_verify(&opts)?;
    let failed: Vec<_> = report.failures().collect();
    eprintln!(
        "verify: {} checks, {} failed",
        report.checks.len(),
        failed.len()
    );
    for c in &failed {
        match &c.error {
            Some(e) => eprintln!("FAIL {}: {} (error: {e})", c.suite, c.name),
            None => eprintln!(
                "FAIL {}: {} (residual {:e}, tolerance {:e})",
                c.suite, c.name, c.residual, c.tolerance
            ),
        }
    }
    let mut extra = Map::new();
    extra.insert("passed".into(), Value::Bool(report.passed));
    let rows = report
        .checks
        .iter()
        .map(to_canonical)
        .collect::<Result<_>>()?;
    Ok((
        Payload::Table {
            columns: vec![
                "suite",
                "name",
                "residual",
                "lower",
                "tolerance",
                "passed",
                "error",
            ],
            rows,
            extra,
        },
        report.passed,
    ))
}
