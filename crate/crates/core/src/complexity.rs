//! Information geometric complexity (IGC) and entropy (IGE) of the 3D
//! manifold, and the bridge from complexities to correlation and purity.
//!
//! Both measures are written in terms of the Lyapunov exponent `λ = 2A₀`.
//! The correlated IGC differs from the uncorrelated one by the constant
//! factor `√((1−r)/(1+r))`, so the IGE gap is `½ln((1−r)/(1+r))`.

use serde::Serialize;

use crate::chaos::lyapunov_exponent;
use crate::error::{positive, Error, Result, Warned};
use crate::geodesics::{amplitude_a0, InitialConditions};
use crate::models::ModelParams;

/// Largest admissible `λτ` before `sinh(λτ)` overflows.
pub const OVERFLOW_GUARD: f64 = 700.0;
/// Smallest `λτ` at which the asymptotic IGE is considered valid.
pub const IGE_ASYMPTOTIC: f64 = 5.0;

/// Fisher density `√det g = 2/(√(1−r²)σ³)`.
pub fn fisher_density(sigma: f64, params: ModelParams) -> Result<f64> {
    positive("sigma", sigma)?;
    params.validate()?;
    let r = params.r;
    Ok(2.0 / ((1.0 - r * r).sqrt() * sigma.powi(3)))
}

/// `√((1−r)/(1+r))`.
pub fn igc_ratio(params: ModelParams) -> Result<f64> {
    params.validate()?;
    Ok(((1.0 - params.r) / (1.0 + params.r)).sqrt())
}

fn lambda_tau(tau: f64, ic: &InitialConditions) -> Result<(f64, f64)> {
    positive("tau", tau)?;
    let lambda = lyapunov_exponent(amplitude_a0(ic)?)?;
    Ok((lambda, lambda * tau))
}

/// Closed-form IGC at horizon `τ`:
/// `8√((1−r)/(1+r))/λ · [−¾λ + ¼ sinh(λτ)/τ + tanh(λτ/2)/τ]`.
///
/// The bracket vanishes to first order as `τ → 0⁺`. Rejects `λτ > 700`.
pub fn igc_closed(tau: f64, params: ModelParams, ic: &InitialConditions) -> Result<f64> {
    let (lambda, x) = lambda_tau(tau, ic)?;
    if x > OVERFLOW_GUARD {
        return Err(Error::Saturation(format!(
            "lambda*tau = {x} exceeds the overflow guard {OVERFLOW_GUARD}"
        )));
    }
    let bracket = if x < 0.1 {
        // The O(1) and O(x²) terms cancel; the series avoids that cancellation.
        let x2 = x * x;
        lambda * x2 * x2 * (1.0 / 160.0 - x2 / 2688.0 + x2 * x2 / 23040.0)
    } else {
        -0.75 * lambda + 0.25 * x.sinh() / tau + (0.5 * x).tanh() / tau
    };
    Ok(8.0 * igc_ratio(params)? / lambda * bracket)
}

/// Asymptotic IGE `λτ − ln(λτ) + ½ln((1−r)/(1+r))`; warns when `λτ < 5`.
pub fn ige_closed(tau: f64, params: ModelParams, ic: &InitialConditions) -> Result<Warned<f64>> {
    params.validate()?;
    let (_, x) = lambda_tau(tau, ic)?;
    let r = params.r;
    let value = x - x.ln() + 0.5 * ((1.0 - r) / (1.0 + r)).ln();
    let mut warnings = Vec::new();
    if x < IGE_ASYMPTOTIC {
        warnings.push(format!(
            "lambda*tau = {x} < {IGE_ASYMPTOTIC}: IGE is an asymptotic form"
        ));
    }
    Ok(Warned::with(value, warnings))
}

/// Correlation recovered from an uncorrelated/correlated complexity pair,
/// `r = (v₀² − v_r²)/(v₀² + v_r²)`.
pub fn r_from_complexities(v_noncorr: f64, v_corr: f64) -> Result<f64> {
    positive("v_noncorr", v_noncorr)?;
    positive("v_corr", v_corr)?;
    if v_corr > v_noncorr {
        return Err(Error::Domain {
            name: "v_corr",
            value: v_corr,
            expected: "v_corr <= v_noncorr (otherwise r < 0)",
        });
    }
    let (a, b) = (v_noncorr * v_noncorr, v_corr * v_corr);
    Ok((a - b) / (a + b))
}

/// Purity `1 − η_C r` from the correlation and the complexity coefficient.
pub fn purity_from_complexity(r: f64, eta_c: f64) -> Result<f64> {
    ModelParams::new(r)?;
    positive("eta_c", eta_c)?;
    let p = 1.0 - eta_c * r;
    if p < 0.0 {
        return Err(Error::Regime(format!(
            "eta_c*r = {} exceeds 1; the linear purity relation is perturbative",
            eta_c * r
        )));
    }
    Ok(p)
}

/// IGC/IGE at one horizon together with their uncorrelated references.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub tau: f64,
    pub r: f64,
    pub lambda: f64,
    pub igc: f64,
    pub ige: f64,
    /// `igc(r)/igc(0)` at the same horizon.
    pub ratio: f64,
    /// `ige(r) − ige(0)` at the same horizon.
    pub gap: f64,
}

/// Evaluates [`ComplexityReport`] at horizon `τ`.
pub fn complexity_report(
    tau: f64,
    params: ModelParams,
    ic: &InitialConditions,
) -> Result<Warned<ComplexityReport>> {
    let (lambda, _) = lambda_tau(tau, ic)?;
    let igc = igc_closed(tau, params, ic)?;
    let igc0 = igc_closed(tau, ModelParams::UNCORRELATED, ic)?;
    let ige = ige_closed(tau, params, ic)?;
    let ige0 = ige_closed(tau, ModelParams::UNCORRELATED, ic)?;
    Ok(Warned::with(
        ComplexityReport {
            tau,
            r: params.r,
            lambda,
            igc,
            ige: ige.value,
            ratio: igc / igc0,
            gap: ige.value - ige0.value,
        },
        ige.warnings,
    ))
}
