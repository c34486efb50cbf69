//! Brute-force purity of the scattered two-particle packet and the
//! dimensional-reduction check of the Gaussian normalization integrals.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::line_rule;
use super::quadrature::QuadratureSpec;
use crate::error::{positive, Error, Result, Warned};
use crate::scattering::{varrho, ScatteringConfig};

/// Largest accepted deviation of the unscattered grid norm from 1.
const NORM_DRIFT: f64 = 1e-6;

/// How the scattered wave function is normalized before the purity is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PurityNormalization {
    /// Keep the incoming product-state normalization (`𝒩 = 1`).
    #[default]
    ProductState,
    /// Divide by the numerically computed norm of the scattered state.
    Renormalized,
}

/// Brute-force purity with its grid diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PurityRun {
    pub purity: f64,
    /// `∫|ψ|²` of the scattered state on the grid.
    pub norm: f64,
    /// `|∫|ψ₀|² − 1|` of the unscattered state on the same grid.
    pub grid_drift: f64,
    pub nodes: usize,
}

/// Purity `Tr ρ₁²` of the one-particle reduced state of
/// `ψ(k₁,k₂) = (2πσ²)^{−1/2} e^{−(K² + 4(k−k₀)²)/(8σ²)} (1 + ϱ(k)) e^{−i(k−k₀)R₀}`,
/// `K = k₁ + k₂`, `k = (k₁ − k₂)/2`, on a tensor grid centred at `(k₀, −k₀)`.
///
/// With weighted amplitudes `M_ij = √wᵢ ψ(k₁ᵢ, k₂ⱼ) √wⱼ`, the reduced density
/// matrix is `ρ = MM†` and the four-fold purity integral is `Σ|ρ_ij|²`.
/// Fails with [`Error::Convergence`] if the grid does not normalize the
/// unscattered state to within `1e-6`.
pub fn purity_bruteforce(
    cfg: &ScatteringConfig,
    spec: &QuadratureSpec,
    normalization: PurityNormalization,
) -> Result<Warned<PurityRun>> {
    cfg.validate()?;
    let mut warnings = cfg.regime_warnings();
    let s = cfg.sigma_k0;
    let (x1, w1) = line_rule(spec, cfg.k0, s)?;
    let (x2, w2) = line_rule(spec, -cfg.k0, s)?;
    let n = x1.len();
    let pref = 1.0 / (2.0 * std::f64::consts::PI * s * s).sqrt();
    let amp = |k1: f64, k2: f64, scatter: bool| -> Result<Complex64> {
        let big_k = k1 + k2;
        let k = 0.5 * (k1 - k2);
        let env = pref * (-(big_k * big_k + 4.0 * (k - cfg.k0).powi(2)) / (8.0 * s * s)).exp();
        let phase = Complex64::from_polar(1.0, -(k - cfg.k0) * cfg.r0);
        let dressing = if scatter {
            Complex64::new(1.0, 0.0) + varrho(cfg, k)?
        } else {
            Complex64::new(1.0, 0.0)
        };
        Ok(env * dressing * phase)
    };
    let rows: Vec<Result<(Vec<Complex64>, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(n);
            let mut norm0 = 0.0;
            for j in 0..n {
                let sw = (w1[i] * w2[j]).sqrt();
                row.push(amp(x1[i], x2[j], true)? * sw);
                norm0 += w1[i] * w2[j] * amp(x1[i], x2[j], false)?.norm_sqr();
            }
            Ok((row, norm0))
        })
        .collect();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut norm0 = 0.0;
    for (i, row) in rows.into_iter().enumerate() {
        let (row, n0) = row?;
        norm0 += n0;
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    let grid_drift = (norm0 - 1.0).abs();
    if grid_drift > NORM_DRIFT {
        return Err(Error::Convergence(format!(
            "quadrature grid normalizes the product state to {norm0} (drift {grid_drift:e} > {NORM_DRIFT:e})"
        )));
    }
    let rho = &m * m.adjoint();
    let norm = rho.trace().re;
    let raw: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
    let purity = match normalization {
        PurityNormalization::ProductState => raw,
        PurityNormalization::Renormalized => raw / (norm * norm),
    };
    let correction = 8.0 * cfg.coupling() * cfg.a_s;
    if correction >= 0.2 {
        warnings.push(format!(
            "scattering correction {correction} is not perturbative; 1 + varrho form is unreliable"
        ));
    }
    Ok(Warned::with(
        PurityRun {
            purity,
            norm,
            grid_drift,
            nodes: n,
        },
        warnings,
    ))
}

/// Isotropic Gaussian packets of mean wave numbers `±k₀` along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionInput {
    pub k0: f64,
    /// Spreads along the three axes; the reduction needs them equal.
    pub sigma: [f64; 3],
}

impl From<&ScatteringConfig> for ReductionInput {
    fn from(cfg: &ScatteringConfig) -> Self {
        Self {
            k0: cfg.k0,
            sigma: [cfg.sigma_k0; 3],
        }
    }
}

/// Relative residual between the six-dimensional two-particle normalization
/// integral (as a product of six one-dimensional quadratures with prefactor
/// `(2πσ²)^{−3}`) and the reduced two-dimensional integral along the
/// collision axis. Both equal one for isotropic packets.
///
/// Anisotropic spreads return [`Error::Inapplicable`].
pub fn dimensional_reduction_check(input: &ReductionInput, spec: &QuadratureSpec) -> Result<f64> {
    if !input.k0.is_finite() {
        return Err(Error::Domain {
            name: "k0",
            value: input.k0,
            expected: "finite",
        });
    }
    for &s in &input.sigma {
        positive("sigma", s)?;
    }
    let s = input.sigma[0];
    if input.sigma.iter().any(|&t| (t - s).abs() > 1e-12 * s) {
        return Err(Error::Inapplicable(format!(
            "spreads {:?} are anisotropic; the reduction requires equal spreads",
            input.sigma
        )));
    }
    let gauss = |x: f64, m: f64| (-(x - m).powi(2) / (2.0 * s * s)).exp();
    let line = |m: f64| -> Result<f64> {
        let (x, w) = line_rule(spec, m, s)?;
        Ok(x.iter().zip(&w).map(|(x, w)| w * gauss(*x, m)).sum())
    };
    // Particle 1 centred at (k₀, 0, 0), particle 2 at (−k₀, 0, 0).
    let mut six = (2.0 * std::f64::consts::PI * s * s).powi(-3);
    for m in [input.k0, 0.0, 0.0, -input.k0, 0.0, 0.0] {
        six *= line(m)?;
    }
    let (x1, w1) = line_rule(spec, input.k0, s)?;
    let (x2, w2) = line_rule(spec, -input.k0, s)?;
    let mut two = 0.0;
    for (a, wa) in x1.iter().zip(&w1) {
        for (b, wb) in x2.iter().zip(&w2) {
            two += wa * wb * gauss(*a, input.k0) * gauss(*b, -input.k0);
        }
    }
    two /= 2.0 * std::f64::consts::PI * s * s;
    Ok(((six - two) / two).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::purity_series;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::gauss_legendre(64, 8.0)
    }

    #[test]
    fn product_state_is_pure() {
        let cfg = ScatteringConfig::default().with_scattering_length(0.0);
        for norm in [
            PurityNormalization::ProductState,
            PurityNormalization::Renormalized,
        ] {
            let run = purity_bruteforce(&cfg, &spec(), norm).unwrap().value;
            assert!((run.purity - 1.0).abs() < 1e-10, "{}", run.purity);
        }
    }

    #[test]
    fn desk_purity_reference() {
        let cfg = ScatteringConfig::default();
        let run = purity_bruteforce(&cfg, &spec(), PurityNormalization::default())
            .unwrap()
            .value;
        assert!(
            (run.purity - 0.998_425_911_141_64).abs() < 1e-10,
            "{}",
            run.purity
        );
        let series = purity_series(&cfg).unwrap().value;
        assert!((run.purity - series).abs() < 5e-5);
    }

    #[test]
    fn residual_scales_quadratically() {
        let resid = |a: f64| {
            let cfg = ScatteringConfig::default().with_scattering_length(a);
            let p = purity_bruteforce(&cfg, &spec(), PurityNormalization::default())
                .unwrap()
                .value;
            (p.purity - purity_series(&cfg).unwrap().value).abs()
        };
        let ratio = resid(1e-5) / resid(5e-6);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn grid_convergence_and_drift() {
        let cfg = ScatteringConfig::default();
        let a = purity_bruteforce(&cfg, &spec(), PurityNormalization::default())
            .unwrap()
            .value;
        let b = purity_bruteforce(&cfg, &spec().doubled(), PurityNormalization::default())
            .unwrap()
            .value;
        assert!((a.purity - b.purity).abs() < 1e-12);
        let coarse = QuadratureSpec::gauss_legendre(8, 8.0);
        assert!(matches!(
            purity_bruteforce(&cfg, &coarse, PurityNormalization::default()),
            Err(Error::Convergence(_))
        ));
    }

    #[test]
    fn hermite_grid_agrees() {
        let cfg = ScatteringConfig::default();
        let a = purity_bruteforce(&cfg, &spec(), PurityNormalization::default())
            .unwrap()
            .value;
        let h = purity_bruteforce(
            &cfg,
            &QuadratureSpec::gauss_hermite(64),
            PurityNormalization::default(),
        )
        .unwrap()
        .value;
        assert!((a.purity - h.purity).abs() < 1e-10);
    }

    #[test]
    fn reduction_examples() {
        let spec = QuadratureSpec::gauss_legendre(40, 8.0);
        let cfg = ScatteringConfig::default();
        assert!(dimensional_reduction_check(&(&cfg).into(), &spec).unwrap() < 1e-9);
        let centred = ReductionInput {
            k0: 0.0,
            sigma: [1.0; 3],
        };
        assert!(dimensional_reduction_check(&centred, &spec).unwrap() < 1e-9);
        let aniso = ReductionInput {
            k0: 1.0,
            sigma: [0.1, 0.2, 0.1],
        };
        assert!(matches!(
            dimensional_reduction_check(&aniso, &spec),
            Err(Error::Inapplicable(_))
        ));
    }
}
