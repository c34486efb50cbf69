//! Curvature tensors by finite differences of the metric alone.
//!
//! Christoffel symbols come from second-order central differences of the
//! metric (with a numerically inverted metric); the Riemann tensor from
//! fourth-order central differences of those finite-difference Christoffel
//! symbols on a coarser stencil. A Richardson-style comparison with the
//! step halved detects steps that are too large (truncation) or too small
//! (rounding).

use nalgebra::Matrix3;
use serde::Serialize;

use crate::curvature::{
    contract_ricci, coordinate_sectionals, max_abs4, max_diff4, weyl_from, ChristoffelSymbols,
    CurvatureBundle, Tensor3, Tensor4, DIM,
};
use crate::error::{positive, Error, Result};
use crate::models::{metric_corr3, ModelParams};

/// Default relative step `h/σ` for metric differences.
pub const FD_STEP: f64 = 1e-5;
/// Ratio of the Christoffel-difference stencil to the metric stencil.
const OUTER_FACTOR: f64 = 100.0;
/// Largest accepted relative change between steps `h` and `h/2`.
const RICHARDSON_TOL: f64 = 1e-6;

/// Finite-difference curvature with its step-halving diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdCurvature {
    pub bundle: CurvatureBundle,
    /// Relative change of the Christoffel symbols when the step is halved.
    pub christoffel_change: f64,
    /// Relative change of the Riemann tensor when the step is halved.
    pub riemann_change: f64,
}

type MetricFn = dyn Fn([f64; 3]) -> Result<Matrix3<f64>>;

fn inverse(g: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    g.try_inverse()
        .ok_or_else(|| Error::Convergence("metric is numerically singular".into()))
}

/// `Γ^a_bc = ½ g^{ad}(∂_b g_dc + ∂_c g_db − ∂_d g_bc)` by central differences.
fn christoffel_fd(metric: &MetricFn, x: [f64; 3], h: f64) -> Result<Tensor3> {
    let mut dg = [Matrix3::zeros(); 3];
    for (k, d) in dg.iter_mut().enumerate() {
        let (mut xp, mut xm) = (x, x);
        xp[k] += h;
        xm[k] -= h;
        *d = (metric(xp)? - metric(xm)?) / (2.0 * h);
    }
    let ginv = inverse(&metric(x)?)?;
    let mut gam = [[[0.0; 3]; 3]; 3];
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                let mut s = 0.0;
                for d in 0..DIM {
                    s += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                gam[a][b][c] = 0.5 * s;
            }
        }
    }
    Ok(gam)
}

/// Lowered `R_abcd` from finite-difference connection derivatives.
fn riemann_fd(metric: &MetricFn, x: [f64; 3], h: f64) -> Result<Tensor4> {
    let big = OUTER_FACTOR * h;
    // dgam[k][a][b][c] = ∂_k Γ^a_bc by the five-point stencil.
    let mut dgam = [[[[0.0; 3]; 3]; 3]; 3];
    for (k, slot) in dgam.iter_mut().enumerate() {
        let at = |off: f64| {
            let mut y = x;
            y[k] += off * big;
            christoffel_fd(metric, y, h)
        };
        let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    slot[a][b][c] = (m2[a][b][c] - 8.0 * m1[a][b][c] + 8.0 * p1[a][b][c]
                        - p2[a][b][c])
                        / (12.0 * big);
                }
            }
        }
    }
    let gam = christoffel_fd(metric, x, h)?;
    let g = metric(x)?;
    let mut up = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let mut v = dgam[c][a][b][d] - dgam[d][a][b][c];
                    for e in 0..DIM {
                        v += gam[a][c][e] * gam[e][b][d] - gam[a][d][e] * gam[e][b][c];
                    }
                    up[a][b][c][d] = v;
                }
            }
        }
    }
    let mut low = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    low[a][b][c][d] = (0..DIM).map(|e| g[(a, e)] * up[e][b][c][d]).sum();
                }
            }
        }
    }
    Ok(low)
}

fn max_abs3(t: &Tensor3) -> f64 {
    t.iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

fn max_diff3(a: &Tensor3, b: &Tensor3) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                m = m.max((a[i][j][k] - b[i][j][k]).abs());
            }
        }
    }
    m
}

/// Curvature bundle at `(σ, r)` from finite differences of the metric,
/// with relative step `step` (`h = step·σ`).
///
/// Fails with [`Error::Convergence`] when halving the step changes the
/// Christoffel symbols or the Riemann tensor by more than `1e-6` relative
/// to their largest entries.
pub fn curvature_fd(sigma: f64, params: ModelParams, step: f64) -> Result<FdCurvature> {
    positive("sigma", sigma)?;
    positive("step", step)?;
    params.validate()?;
    if step * OUTER_FACTOR * 2.0 >= 0.5 {
        return Err(Error::Domain {
            name: "step",
            value: step,
            expected: "step << 1 so that the stencil stays inside sigma > 0",
        });
    }
    let metric = move |x: [f64; 3]| metric_corr3(x[2], params);
    // A generic point: the metric is μ-independent but the stencil is not told so.
    let x = [0.3, -0.2, sigma];
    let h = step * sigma;
    let gam = christoffel_fd(&metric, x, h)?;
    let gam_half = christoffel_fd(&metric, x, 0.5 * h)?;
    let riem = riemann_fd(&metric, x, h)?;
    let riem_half = riemann_fd(&metric, x, 0.5 * h)?;
    let christoffel_change = max_diff3(&gam, &gam_half) / max_abs3(&gam_half);
    let riemann_change = max_diff4(&riem, &riem_half) / max_abs4(&riem_half);
    if christoffel_change > RICHARDSON_TOL || riemann_change > RICHARDSON_TOL {
        return Err(Error::Convergence(format!(
            "finite-difference step {step} is unreliable: step halving changes \
             Christoffel by {christoffel_change:e} and Riemann by {riemann_change:e}"
        )));
    }
    let g = metric(x)?;
    let ginv = inverse(&g)?;
    let ric = contract_ricci(&riem_half, &ginv);
    let scalar = (0..DIM)
        .flat_map(|a| (0..DIM).map(move |c| (a, c)))
        .map(|(a, c)| ginv[(a, c)] * ric[a][c])
        .sum();
    Ok(FdCurvature {
        bundle: CurvatureBundle {
            sigma,
            r: params.r,
            christoffel: ChristoffelSymbols { gamma: gam_half },
            riemann: riem_half,
            ricci: ric,
            scalar,
            sectional: coordinate_sectionals(&riem_half, &g)?,
            weyl: weyl_from(&riem_half, &ric, &g),
        },
        christoffel_change,
        riemann_change,
    })
}
