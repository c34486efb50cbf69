//! Information geometry of correlated Gaussian statistical manifolds.
//!
//! The crate covers the closed-form side (Fisher–Rao metrics, connection and
//! curvature tensors, geodesics, Jacobi fields, complexity measures and the
//! scattering/purity chain) together with independent numeric oracles that
//! re-derive each closed form by quadrature, ODE integration or finite
//! differences.
//!
//! Internally ħ = 1, so momentum and wave number coincide. Only
//! [`scattering::ScatteringConfig`] carries an explicit ħ.
//!
//! Index conventions:
//! * 3D manifold coordinates are ordered `(μ₁, μ₂, σ)`.
//! * 4D manifold coordinates are ordered `(μ_x, σ_x, μ_y, σ_y)`.
//! * Riemann tensors use `R^a_bcd = ∂_c Γ^a_bd − ∂_d Γ^a_bc + Γ^a_fc Γ^f_bd − Γ^a_fd Γ^f_bc`.

// Tensor algebra reads most clearly with explicit index loops, and negated
// comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod complexity;
pub mod curvature;
mod error;
pub mod geodesics;
pub mod models;
pub mod oracle;
pub mod scattering;

pub use curvature::{ChristoffelSymbols, CurvatureBundle, Tensor4};
pub use error::{Error, Result, Warned};
pub use geodesics::{Branch, GeodesicPath, InitialConditions, RiccatiConstants};
pub use models::{Macrostate3, Macrostate4, Metric3, Metric4, ModelParams};
pub use scattering::{ProlongationReport, ScatteringConfig};
