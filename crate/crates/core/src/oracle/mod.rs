//! Independent numeric oracles for the closed forms.
//!
//! Each oracle recomputes a closed-form quantity from its definition —
//! Fisher metrics by quadrature of score products, geodesics and Jacobi
//! fields by ODE integration of the connection, curvature by finite
//! differences of the metric, purity by brute-force quadrature of the
//! reduced density matrix, and the complexity by the literal nested volume
//! integral. Oracles depend on the metric, connection and path primitives
//! but never on the closed-form result they validate.

mod fisher;
mod flows;
pub mod ode;
mod purity;
pub mod quadrature;
pub mod suite;
mod tensors;
mod volume;

pub use fisher::{fisher_metric_numeric, FisherMetric, FisherModel};
pub use flows::{
    geodesic_integrate, geodesic_round_trip, jacobi_integrate, GeodesicRun, JacobiRun,
};
pub use purity::{
    dimensional_reduction_check, purity_bruteforce, PurityNormalization, PurityRun, ReductionInput,
};
pub use tensors::{curvature_fd, FdCurvature, FD_STEP};
pub use volume::igc_numeric;

use crate::error::{Error, Result};
use quadrature::{legendre_on, normal_rule, QuadratureSpec, Scheme};

/// Nodes and weights integrating against Lebesgue measure on a line, for an
/// integrand concentrated around `center` with spread `s`.
///
/// Gauss–Legendre uses the box `center ± cutoff·s`; Gauss–Hermite divides
/// the normal-rule weights by the normal density at each node.
pub(crate) fn line_rule(
    spec: &QuadratureSpec,
    center: f64,
    s: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    match spec.scheme {
        Scheme::GaussLegendre => Ok(legendre_on(spec.order, center, spec.cutoff * s)),
        Scheme::GaussHermite => {
            let (x, w) = normal_rule(spec.order, center, s);
            let norm = (2.0 * std::f64::consts::PI).sqrt() * s;
            let w = x
                .iter()
                .zip(&w)
                .map(|(x, w)| {
                    let z = (x - center) / s;
                    w * norm * (0.5 * z * z).exp()
                })
                .collect();
            Ok((x, w))
        }
        Scheme::Adaptive => Err(Error::Inapplicable(
            "tensor-product quadrature needs a fixed-order scheme".into(),
        )),
    }
}
