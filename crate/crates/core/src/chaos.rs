//! Jacobi–Levi-Civita reduction on the maximally symmetric 3D manifold,
//! Jacobi field intensity and the Lyapunov exponent.
//!
//! On a space of constant curvature the geodesic deviation equation reduces
//! to the scalar equation `𝒥″ + Q𝒥 = 0` with `Q = R‖v‖²/(n(n−1)) = −A₀²`,
//! whose solution with `𝒥(0) = 0`, `𝒥′(0) = ω₀` grows like `sinh(A₀τ)`.

use serde::Serialize;

use crate::curvature::{scalar_curvature, DIM};
use crate::error::{finite, positive, Error, Result, Warned};
use crate::geodesics::{amplitude_a0, joined_path, InitialConditions};
use crate::models::ModelParams;

/// Smallest `A₀τ_max` at which the finite-horizon Lyapunov estimate is
/// considered asymptotic.
pub const ASYMPTOTIC_HORIZON: f64 = 5.0;

/// Squared velocity norm `g_ab ϑ̇^a ϑ̇^b = 4A₀²`; constant along every
/// geodesic and independent of `r` and `τ`.
pub fn velocity_norm_squared(params: ModelParams, ic: &InitialConditions, tau: f64) -> Result<f64> {
    // Validates (r, ic, τ) against the same domain as the path itself.
    joined_path(tau, params, ic)?;
    let a0 = amplitude_a0(ic)?;
    Ok(4.0 * a0 * a0)
}

/// JLC coefficient `Q = R‖v‖²/(n(n−1))`, assembled from the scalar
/// curvature and `‖v‖² = 4A₀²`; equals `−A₀²`.
pub fn jlc_coefficient(a0: f64) -> Result<f64> {
    positive("A0", a0)?;
    let n = DIM as f64;
    let scalar = scalar_curvature(ModelParams::UNCORRELATED)?;
    Ok(scalar * 4.0 * a0 * a0 / (n * (n - 1.0)))
}

/// Scalar Jacobi data `(Q, ω₀, A₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiState {
    #[serde(rename = "Q")]
    pub q: f64,
    pub omega0: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
}

impl JacobiState {
    pub fn new(omega0: f64, a0: f64) -> Result<Self> {
        finite("omega0", omega0)?;
        let q = jlc_coefficient(a0)?;
        debug_assert!(q < 0.0);
        Ok(Self { q, omega0, a0 })
    }

    /// Growth rate `√(−Q)`.
    pub fn rate(&self) -> f64 {
        (-self.q).sqrt()
    }
}

/// Jacobi field intensity `𝒥(τ) = (ω₀/A₀) sinh(A₀τ)`.
pub fn jacobi_intensity(tau: f64, omega0: f64, a0: f64) -> Result<f64> {
    check_intensity_args(tau, omega0, a0)?;
    Ok(omega0 / a0 * (a0 * tau).sinh())
}

/// Derivative `𝒥′(τ) = ω₀ cosh(A₀τ)`.
pub fn jacobi_intensity_derivative(tau: f64, omega0: f64, a0: f64) -> Result<f64> {
    check_intensity_args(tau, omega0, a0)?;
    Ok(omega0 * (a0 * tau).cosh())
}

fn check_intensity_args(tau: f64, omega0: f64, a0: f64) -> Result<()> {
    positive("A0", a0)?;
    finite("omega0", omega0)?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            expected: "finite and >= 0",
        });
    }
    if a0 * tau > crate::geodesics::SATURATION_LIMIT {
        return Err(Error::Saturation(format!(
            "A0*tau = {} overflows sinh",
            a0 * tau
        )));
    }
    Ok(())
}

/// Closed-form Lyapunov exponent `λ = 2√(−Q) = 2A₀`, the same on the
/// correlated and uncorrelated manifolds.
pub fn lyapunov_exponent(a0: f64) -> Result<f64> {
    Ok(2.0 * (-jlc_coefficient(a0)?).sqrt())
}

/// Finite-horizon Lyapunov estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    /// Richardson-extrapolated value `2λ(τ_max) − λ(τ_max/2)`.
    pub value: f64,
    /// `λ(τ_max) = (1/τ_max) ln[(𝒥² + 𝒥′²)(τ_max) / (𝒥² + 𝒥′²)(0)]`.
    pub finite_tau: f64,
    pub tau_max: f64,
}

/// `(1/τ) ln[(𝒥² + 𝒥′²)(τ) / (𝒥² + 𝒥′²)(0)]`, evaluated without overflow.
///
/// The initial phase-space intensity is `𝒥′(0)² = ω₀²`, which cancels `ω₀`.
fn log_growth(tau: f64, a0: f64) -> f64 {
    let x = a0 * tau;
    let e = (-2.0 * x).exp();
    let inner = (1.0 - e) * (1.0 - e) / (a0 * a0) + (1.0 + e) * (1.0 + e);
    (2.0 * x - 2.0 * std::f64::consts::LN_2 + inner.ln()) / tau
}

/// Finite-horizon evaluation of the Lyapunov limit along the Jacobi field.
///
/// The ratio is normalized by the initial phase-space intensity
/// `|𝒥(0)|² + |𝒥′(0)|²` (the field itself starts at zero). `λ(τ)` approaches
/// `2A₀` with a `1/τ` offset; the reported `value` removes it by one
/// Richardson step over the last doubling. Warns when `A₀τ_max < 5`.
pub fn lyapunov_estimate(omega0: f64, a0: f64, tau_max: f64) -> Result<Warned<LyapunovEstimate>> {
    positive("A0", a0)?;
    positive("tau_max", tau_max)?;
    finite("omega0", omega0)?;
    if omega0 == 0.0 {
        return Err(Error::Domain {
            name: "omega0",
            value: omega0,
            expected: "nonzero initial growth rate",
        });
    }
    let finite_tau = log_growth(tau_max, a0);
    let half = log_growth(0.5 * tau_max, a0);
    let est = LyapunovEstimate {
        value: 2.0 * finite_tau - half,
        finite_tau,
        tau_max,
    };
    let mut warnings = Vec::new();
    if a0 * tau_max < ASYMPTOTIC_HORIZON {
        warnings.push(format!(
            "A0*tau_max = {} < {ASYMPTOTIC_HORIZON}: estimate is not asymptotic",
            a0 * tau_max
        ));
    }
    Ok(Warned::with(est, warnings))
}
