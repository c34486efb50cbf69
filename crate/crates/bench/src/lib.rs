//! Benchmark fixtures shared by the criterion benches.

use corrgeom::{InitialConditions, ScatteringConfig};

/// Desk-scale initial conditions `p₀ = 1, σ₀ = 0.1, τ₀ = 1, R₀ = 10`.
pub fn desk_ic() -> InitialConditions {
    InitialConditions::desk()
}

/// Default scattering set-up `k₀ = 1, σ = 0.1, R₀ = 10, a_s = 10⁻⁵`.
pub fn desk_scattering() -> ScatteringConfig {
    ScatteringConfig::default()
}
