//! ODE oracles: the geodesic equations driven by the connection, and the
//! vector Jacobi–Levi-Civita equation along the closed-form path.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::ode::{integrate, OdeSpec};
use crate::curvature::{christoffel, christoffel_derivative, riemann, DIM};
use crate::error::{positive, Error, Result};
use crate::geodesics::{Branch, GeodesicPath, InitialConditions};
use crate::models::{metric_corr3, ModelParams};

/// Numeric geodesic sampled on a grid, alongside the closed-form path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicRun {
    pub tau: Vec<f64>,
    pub numeric: Vec<[f64; 3]>,
    pub closed: Vec<[f64; 3]>,
    /// `max ‖x_num − x_closed‖ / ‖x_closed‖` over the grid.
    pub max_rel_error: f64,
}

/// Right-hand side `ẍ^a = −Γ^a_bc ẋ^b ẋ^c` on the manifold with correlation `r`.
fn geodesic_rhs(params: ModelParams) -> impl FnMut(f64, &[f64], &mut [f64]) {
    move |_, y, dy| {
        dy[..3].copy_from_slice(&y[3..]);
        match christoffel(y[2], params) {
            Ok(g) => {
                for a in 0..DIM {
                    let mut s = 0.0;
                    for b in 0..DIM {
                        for c in 0..DIM {
                            s += g.gamma[a][b][c] * y[3 + b] * y[3 + c];
                        }
                    }
                    dy[3 + a] = -s;
                }
            }
            // σ left the manifold: poison the step so the integrator shrinks it.
            Err(_) => dy[3..].fill(f64::NAN),
        }
    }
}

fn integrate_segment(
    params: ModelParams,
    y0: &[f64],
    ts: &[f64],
    spec: &OdeSpec,
) -> Result<Vec<Vec<f64>>> {
    if ts.len() < 2 {
        return Ok(vec![y0.to_vec(); ts.len()]);
    }
    integrate(geodesic_rhs(params), y0, ts, spec).map_err(|e| match e {
        Error::Convergence(m) => {
            Error::Saturation(format!("geodesic left the domain sigma > 0: {m}"))
        }
        other => other,
    })
}

/// Scales the momentum components of a phase-space state by `f`; models the
/// collision at `τ = 0`, which rescales the mean momenta by `√(1−r)` and
/// leaves the spread and its rate unchanged.
fn kick(y: &mut [f64], f: f64) {
    y[3] *= f;
    y[4] *= f;
}

/// Integrates the geodesic equations from `tau_span.0` with initial state and
/// velocity taken from the closed-form joined path, and compares against it
/// at `n` uniformly spaced points (plus the junction).
///
/// Spans that cross `τ = 0` are integrated in two legs: the uncorrelated
/// connection before the collision, then the correlated one after the
/// momentum kick.
pub fn geodesic_integrate(
    params: ModelParams,
    ic: &InitialConditions,
    tau_span: (f64, f64),
    n: usize,
    spec: &OdeSpec,
) -> Result<GeodesicRun> {
    params.validate()?;
    let (t0, t1) = tau_span;
    if !(t1 > t0) || n < 2 {
        return Err(Error::Domain {
            name: "tau_span",
            value: t1 - t0,
            expected: "increasing span with at least 2 samples",
        });
    }
    let grid = crate::geodesics::tau_grid_with_junction(t0, t1, n)?;
    let before = GeodesicPath::new(Branch::Before, params, *ic)?;
    let after = GeodesicPath::new(Branch::After, params, *ic)?;
    let path_at = |t: f64| if t < 0.0 { before } else { after };
    let start = path_at(t0);
    let mut y: Vec<f64> = start
        .state(t0)?
        .as_array()
        .into_iter()
        .chain(start.velocity(t0)?)
        .collect();

    let split = grid.partition_point(|&t| t < 0.0);
    let mut numeric = Vec::with_capacity(grid.len());
    if split > 0 {
        let mut leg: Vec<f64> = grid[..split].to_vec();
        let crosses = split < grid.len();
        if crosses {
            leg.push(0.0);
        }
        let sol = integrate_segment(ModelParams::UNCORRELATED, &y, &leg, spec)?;
        numeric.extend(sol[..split].iter().map(|s| [s[0], s[1], s[2]]));
        y = sol.last().cloned().unwrap_or(y);
        if crosses {
            kick(&mut y, (1.0 - params.r).sqrt());
        }
    }
    if split < grid.len() {
        let leg = &grid[split..];
        let sol = integrate_segment(params, &y, leg, spec)?;
        numeric.extend(sol.iter().map(|s| [s[0], s[1], s[2]]));
    }

    let mut closed = Vec::with_capacity(grid.len());
    let mut max_rel_error: f64 = 0.0;
    for (t, x) in grid.iter().zip(&numeric) {
        let c = path_at(*t).state(*t)?.as_array();
        let (vc, vx) = (Vector3::from(c), Vector3::from(*x));
        max_rel_error = max_rel_error.max((vx - vc).norm() / vc.norm());
        closed.push(c);
    }
    Ok(GeodesicRun {
        tau: grid,
        numeric,
        closed,
        max_rel_error,
    })
}

/// Forward–backward reversibility: integrates from `−τ₀` to `τ₀` and back
/// (undoing the collision kick on the way) and returns the relative
/// distance of the recovered phase-space start from the initial one.
pub fn geodesic_round_trip(
    params: ModelParams,
    ic: &InitialConditions,
    spec: &OdeSpec,
) -> Result<f64> {
    params.validate()?;
    let before = GeodesicPath::new(Branch::Before, params, *ic)?;
    let t0 = -ic.tau0;
    let y0: Vec<f64> = before
        .state(t0)?
        .as_array()
        .into_iter()
        .chain(before.velocity(t0)?)
        .collect();
    let f = (1.0 - params.r).sqrt();
    let mut y = integrate_segment(ModelParams::UNCORRELATED, &y0, &[t0, 0.0], spec)?[1].clone();
    kick(&mut y, f);
    let mut y = integrate_segment(params, &y, &[0.0, ic.tau0], spec)?[1].clone();
    y = integrate_segment(params, &y, &[ic.tau0, 0.0], spec)?[1].clone();
    kick(&mut y, 1.0 / f);
    let back = &integrate_segment(ModelParams::UNCORRELATED, &y, &[0.0, t0], spec)?[1];
    let num: f64 = back.iter().zip(&y0).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = y0.iter().map(|a| a * a).sum();
    Ok((num / den).sqrt())
}

/// Numeric Jacobi field along the correlated branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiRun {
    pub tau: Vec<f64>,
    /// `√(g_ab J^a J^b)` at each sample.
    pub intensity: Vec<f64>,
    /// Largest `|g(J, ϑ′)|/(|J||ϑ′|)` over samples with `J ≠ 0`.
    pub max_orthogonality: f64,
    /// Log-linear slope of the intensity over the final tenth of the span.
    pub growth_rate: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    pub omega0: f64,
}

/// Integrates the vector Jacobi–Levi-Civita equation along the closed-form
/// correlated geodesic from `τ = 0` to `tau_max`, with `J(0) = 0` and an
/// initial rate orthogonal to the velocity and of norm `omega0`.
///
/// The covariant second derivative is expanded in coordinates with
/// analytic connection derivatives; curvature enters through `R^a_bcd`.
pub fn jacobi_integrate(
    params: ModelParams,
    ic: &InitialConditions,
    tau_max: f64,
    n: usize,
    omega0: f64,
    spec: &OdeSpec,
) -> Result<JacobiRun> {
    positive("tau_max", tau_max)?;
    positive("omega0", omega0)?;
    if n < 10 {
        return Err(Error::Domain {
            name: "n",
            value: n as f64,
            expected: "at least 10 samples",
        });
    }
    let path = GeodesicPath::new(Branch::After, params, *ic)?;
    let a0 = path.a0;
    let metric = |t: f64| -> Result<Matrix3<f64>> { metric_corr3(path.state(t)?.sigma, params) };

    // Initial rate: a seed with components along every axis, projected
    // g-orthogonally off the velocity and scaled to norm ω₀.
    let g0 = metric(0.0)?;
    let v0 = Vector3::from(path.velocity(0.0)?);
    let seed = Vector3::new(1.0, 0.5, 1.0);
    let mut w = seed - v0 * (seed.dot(&(g0 * v0)) / v0.dot(&(g0 * v0)));
    w *= omega0 / w.dot(&(g0 * w)).sqrt();

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        dy[..3].copy_from_slice(&y[3..]);
        let eval = || -> Result<[f64; 3]> {
            let sigma = path.state(t)?.sigma;
            let v = path.velocity(t)?;
            let acc = path.acceleration(t)?;
            let gam = christoffel(sigma, params)?.gamma;
            let dgam = christoffel_derivative(sigma, params)?;
            let low = riemann(sigma, params)?;
            let ginv = metric_corr3(sigma, params)?
                .try_inverse()
                .ok_or_else(|| Error::Convergence("singular metric".into()))?;
            let (j, jp) = (&y[..3], &y[3..]);
            let mut out = [0.0; 3];
            for (a, o) in out.iter_mut().enumerate() {
                let mut s = 0.0;
                for b in 0..DIM {
                    for c in 0..DIM {
                        s += 2.0 * gam[a][b][c] * jp[b] * v[c];
                        s += gam[a][b][c] * j[b] * acc[c];
                        for d in 0..DIM {
                            s += dgam[d][a][b][c] * v[d] * v[c] * j[b];
                            for f in 0..DIM {
                                s += gam[a][b][c] * gam[b][d][f] * v[f] * v[c] * j[d];
                            }
                        }
                    }
                }
                let mut curv = 0.0;
                for e in 0..DIM {
                    for b in 0..DIM {
                        for c in 0..DIM {
                            for d in 0..DIM {
                                curv += ginv[(a, e)] * low[e][b][c][d] * v[b] * j[c] * v[d];
                            }
                        }
                    }
                }
                *o = -s - curv;
            }
            Ok(out)
        };
        match eval() {
            Ok(out) => dy[3..].copy_from_slice(&out),
            Err(_) => dy[3..].fill(f64::NAN),
        }
    };

    let tau: Vec<f64> = (0..n)
        .map(|i| tau_max * i as f64 / (n - 1) as f64)
        .collect();
    let y0 = [0.0, 0.0, 0.0, w[0], w[1], w[2]];
    let sol = integrate(rhs, &y0, &tau, spec)?;

    let mut intensity = Vec::with_capacity(n);
    let mut max_orthogonality: f64 = 0.0;
    for (t, y) in tau.iter().zip(&sol) {
        let g = metric(*t)?;
        let j = Vector3::new(y[0], y[1], y[2]);
        let jn = j.dot(&(g * j)).sqrt();
        intensity.push(jn);
        if jn > 0.0 {
            let v = Vector3::from(path.velocity(*t)?);
            let vn = v.dot(&(g * v)).sqrt();
            max_orthogonality = max_orthogonality.max((j.dot(&(g * v)) / (jn * vn)).abs());
        }
    }
    let growth_rate = log_linear_slope(&tau, &intensity, 0.9 * tau_max)?;
    Ok(JacobiRun {
        tau,
        intensity,
        max_orthogonality,
        growth_rate,
        a0,
        omega0,
    })
}

/// Least-squares slope of `ln y` against `t` over samples with `t ≥ t_from`.
fn log_linear_slope(t: &[f64], y: &[f64], t_from: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(t, y)| **t >= t_from && **y > 0.0)
        .map(|(t, y)| (*t, y.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Domain {
            name: "fit window",
            value: pts.len() as f64,
            expected: "at least 3 samples in the final tenth",
        });
    }
    let m = pts.len() as f64;
    let (mt, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, y)| (a + t / m, b + y / m));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| {
        (a + (t - mt) * (y - my), b + (t - mt) * (t - mt))
    });
    Ok(sxy / sxx)
}
