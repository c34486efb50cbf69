//! Information geometric complexity by the literal nested integral: the
//! Fisher volume of the region explored by the geodesic up to `τ′`,
//! averaged over `τ′ ∈ [0, τ]`.

use super::quadrature::{adaptive_gk15, QuadratureSpec};
use crate::error::{positive, Error, Result};
use crate::geodesics::{Branch, GeodesicPath, InitialConditions};
use crate::models::{metric_corr3_determinant, ModelParams};

/// Largest admissible `λτ` for the nested integral.
const GUARD: f64 = 20.0;

/// Numeric IGC on the correlated branch at horizon `τ`.
///
/// The explored region at `τ′` is the box spanned by the path: `μ₁` and
/// `μ₂` between their junction values and their values at `τ′`, and `σ`
/// between `σ(τ′)` and the junction spread. Its volume integrates `√det g`
/// over `σ` with adaptive Gauss–Kronrod; the outer time average is adaptive
/// as well. The result is recomputed at a sixteenth of the tolerance and
/// must agree to ten times the tolerance.
pub fn igc_numeric(
    tau: f64,
    params: ModelParams,
    ic: &InitialConditions,
    spec: &QuadratureSpec,
) -> Result<f64> {
    positive("tau", tau)?;
    let path = GeodesicPath::new(Branch::After, params, *ic)?;
    let x = 2.0 * path.a0 * tau;
    if x > GUARD {
        return Err(Error::Saturation(format!(
            "lambda*tau = {x} exceeds the nested-integral guard {GUARD}"
        )));
    }
    let run = |tol: f64| -> Result<f64> {
        let start = path.state(0.0)?;
        let volume = |t: f64| -> Result<f64> {
            let here = path.state(t)?;
            let (lo, hi) = (here.sigma, start.sigma);
            if hi <= lo {
                return Ok(0.0);
            }
            let inner = adaptive_gk15(
                |s| {
                    metric_corr3_determinant(s, params)
                        .map(f64::sqrt)
                        .unwrap_or(f64::NAN)
                },
                lo,
                hi,
                0.0,
                tol,
            )?;
            Ok((here.mu1 - start.mu1).abs() * (here.mu2 - start.mu2).abs() * inner)
        };
        // The outer quadrature cannot propagate errors, so record the first one.
        let failure = std::cell::RefCell::new(None);
        let avg = adaptive_gk15(
            |t| match volume(t) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            0.0,
            tau,
            0.0,
            tol,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(avg / tau)
    };
    let tol = spec.tolerance.max(1e-14);
    let v = run(tol)?;
    let refined = run(tol / 16.0)?;
    if (v - refined).abs() > 10.0 * tol * refined.abs() {
        return Err(Error::Convergence(format!(
            "nested IGC integral changed from {v} to {refined} under refinement"
        )));
    }
    Ok(refined)
}
