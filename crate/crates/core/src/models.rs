//! Gaussian probability families and their closed-form Fisher–Rao metrics.
//!
//! Three families are covered: the equal-spread correlated bivariate normal
//! on the 3D manifold `(μ₁, μ₂, σ)`, its uncorrelated special case, and the
//! distinct-spread family on the 4D manifold. The 4D metric is stored in the
//! index order `(μ_x, σ_x, μ_y, σ_y)`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};

/// Largest accepted correlation coefficient. Metric entries diverge as
/// `r → 1`; values beyond this are rejected rather than returned as huge floats.
pub const R_MAX: f64 = 1.0 - 1e-9;

/// Default validity limit of the second-order metric split.
pub const SPLIT_R_MAX: f64 = 0.1;

/// Fisher–Rao metric on the 3D manifold, indexed `(μ₁, μ₂, σ)`.
pub type Metric3 = Matrix3<f64>;
/// Fisher–Rao metric on the 4D manifold, indexed `(μ_x, σ_x, μ_y, σ_y)`.
pub type Metric4 = Matrix4<f64>;

/// Micro-correlation coefficient `r ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub r: f64,
}

impl ModelParams {
    pub const UNCORRELATED: ModelParams = ModelParams { r: 0.0 };

    pub fn new(r: f64) -> Result<Self> {
        let p = Self { r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r.is_finite() && (0.0..=R_MAX).contains(&self.r) {
            Ok(())
        } else {
            Err(Error::Domain {
                name: "r",
                value: self.r,
                expected: "0 <= r < 1",
            })
        }
    }
}

/// A point `Θ = (μ₁, μ₂, σ)` on the 3D manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Macrostate3 {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma: f64,
}

impl Macrostate3 {
    pub fn new(mu1: f64, mu2: f64, sigma: f64) -> Result<Self> {
        let s = Self { mu1, mu2, sigma };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        finite("mu1", self.mu1)?;
        finite("mu2", self.mu2)?;
        positive("sigma", self.sigma)?;
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.mu1, self.mu2, self.sigma]
    }
}

/// A point `Θ = (μ_x, μ_y, σ_x, σ_y)` on the 4D manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Macrostate4 {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

impl Macrostate4 {
    pub fn new(mu_x: f64, mu_y: f64, sigma_x: f64, sigma_y: f64) -> Result<Self> {
        let s = Self {
            mu_x,
            mu_y,
            sigma_x,
            sigma_y,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        finite("mu_x", self.mu_x)?;
        finite("mu_y", self.mu_y)?;
        positive("sigma_x", self.sigma_x)?;
        positive("sigma_y", self.sigma_y)?;
        Ok(())
    }
}

/// Equal-spread correlated bivariate normal density.
pub fn pdf_corr3(state: Macrostate3, params: ModelParams, point: (f64, f64)) -> Result<f64> {
    state.validate()?;
    params.validate()?;
    let r = params.r;
    let s2 = state.sigma * state.sigma;
    let dx = point.0 - state.mu1;
    let dy = point.1 - state.mu2;
    let q = dx * dx - 2.0 * r * dx * dy + dy * dy;
    let one_m_r2 = 1.0 - r * r;
    Ok((-q / (2.0 * one_m_r2 * s2)).exp() / (2.0 * PI * s2 * one_m_r2.sqrt()))
}

/// Uncorrelated equal-spread density; the `r = 0` member of [`pdf_corr3`].
pub fn pdf_noncorr3(state: Macrostate3, point: (f64, f64)) -> Result<f64> {
    pdf_corr3(state, ModelParams::UNCORRELATED, point)
}

/// Correlated bivariate normal with distinct spreads.
pub fn pdf_corr4(state: Macrostate4, params: ModelParams, point: (f64, f64)) -> Result<f64> {
    state.validate()?;
    params.validate()?;
    let r = params.r;
    let u = (point.0 - state.mu_x) / state.sigma_x;
    let v = (point.1 - state.mu_y) / state.sigma_y;
    let one_m_r2 = 1.0 - r * r;
    let q = u * u - 2.0 * r * u * v + v * v;
    Ok(
        (-q / (2.0 * one_m_r2)).exp()
            / (2.0 * PI * state.sigma_x * state.sigma_y * one_m_r2.sqrt()),
    )
}

/// Fisher–Rao metric of the correlated 3D family.
pub fn metric_corr3(sigma: f64, params: ModelParams) -> Result<Metric3> {
    positive("sigma", sigma)?;
    params.validate()?;
    let r = params.r;
    let s2 = sigma * sigma;
    let d = 1.0 - r * r;
    let a = 1.0 / (d * s2);
    let b = -r / (d * s2);
    Ok(Matrix3::new(a, b, 0.0, b, a, 0.0, 0.0, 0.0, 4.0 / s2))
}

/// Closed-form inverse of [`metric_corr3`].
pub fn metric_corr3_inverse(sigma: f64, params: ModelParams) -> Result<Metric3> {
    positive("sigma", sigma)?;
    params.validate()?;
    let r = params.r;
    let s2 = sigma * sigma;
    Ok(Matrix3::new(
        s2,
        r * s2,
        0.0,
        r * s2,
        s2,
        0.0,
        0.0,
        0.0,
        s2 / 4.0,
    ))
}

/// Closed-form determinant `4/((1−r²)σ⁶)` of [`metric_corr3`].
pub fn metric_corr3_determinant(sigma: f64, params: ModelParams) -> Result<f64> {
    positive("sigma", sigma)?;
    params.validate()?;
    let r = params.r;
    Ok(4.0 / ((1.0 - r * r) * sigma.powi(6)))
}

/// Fisher–Rao metric of the uncorrelated 3D family, `diag(1, 1, 4)/σ²`.
pub fn metric_noncorr3(sigma: f64) -> Result<Metric3> {
    metric_corr3(sigma, ModelParams::UNCORRELATED)
}

/// Fisher–Rao metric of the 4D family in index order `(μ_x, σ_x, μ_y, σ_y)`.
pub fn metric_corr4(sigma_x: f64, sigma_y: f64, params: ModelParams) -> Result<Metric4> {
    positive("sigma_x", sigma_x)?;
    positive("sigma_y", sigma_y)?;
    params.validate()?;
    let r = params.r;
    let r2 = r * r;
    let d = 1.0 - r2;
    let (sx2, sy2, sxy) = (sigma_x * sigma_x, sigma_y * sigma_y, sigma_x * sigma_y);
    let mut g = Matrix4::zeros();
    g[(0, 0)] = 1.0 / (sx2 * d);
    g[(1, 1)] = (2.0 - r2) / (sx2 * d);
    g[(2, 2)] = 1.0 / (sy2 * d);
    g[(3, 3)] = (2.0 - r2) / (sy2 * d);
    g[(0, 2)] = r / (sxy * (r2 - 1.0));
    g[(2, 0)] = g[(0, 2)];
    g[(1, 3)] = r2 / (sxy * (r2 - 1.0));
    g[(3, 1)] = g[(1, 3)];
    Ok(g)
}

/// Split `g(r) ≈ g₀ + h` with the perturbation kept to second order in `r`.
///
/// Rejects `r` above [`SPLIT_R_MAX`]; see [`metric_split_with_limit`].
pub fn metric_split(sigma: f64, params: ModelParams) -> Result<(Metric3, Metric3)> {
    metric_split_with_limit(sigma, params, SPLIT_R_MAX)
}

/// [`metric_split`] with a caller-chosen validity limit on `r`.
pub fn metric_split_with_limit(
    sigma: f64,
    params: ModelParams,
    r_max: f64,
) -> Result<(Metric3, Metric3)> {
    params.validate()?;
    if params.r > r_max {
        return Err(Error::Regime(format!(
            "metric split truncates at O(r^2); r = {} exceeds the limit {}",
            params.r, r_max
        )));
    }
    let g0 = metric_noncorr3(sigma)?;
    let r = params.r;
    let s2 = sigma * sigma;
    let h = Matrix3::new(r * r, -r, 0.0, -r, r * r, 0.0, 0.0, 0.0, 0.0) / s2;
    Ok((g0, h))
}

/// Normalized covariance `r = cov/σ²`.
pub fn micro_correlation(cov: f64, sigma: f64) -> Result<f64> {
    finite("cov", cov)?;
    positive("sigma", sigma)?;
    let r = cov / (sigma * sigma);
    if r.abs() >= 1.0 {
        return Err(Error::Domain {
            name: "r",
            value: r,
            expected: "|cov/sigma^2| < 1",
        });
    }
    Ok(r)
}

/// Eigenvalues of a symmetric 3×3 metric, ascending.
pub fn eigenvalues3(g: &Metric3) -> Vec<f64> {
    sorted(g.symmetric_eigenvalues().iter().copied().collect())
}

/// Eigenvalues of a symmetric 4×4 metric, ascending.
pub fn eigenvalues4(g: &Metric4) -> Vec<f64> {
    sorted(g.symmetric_eigenvalues().iter().copied().collect())
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::quadrature::gauss_legendre;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn p(r: f64) -> ModelParams {
        ModelParams::new(r).unwrap()
    }

    fn box_integral(f: impl Fn(f64, f64) -> f64, cx: f64, hx: f64, cy: f64, hy: f64) -> f64 {
        let (x, w) = gauss_legendre(160);
        let mut acc = 0.0;
        for i in 0..x.len() {
            for j in 0..x.len() {
                acc += w[i] * w[j] * f(cx + hx * x[i], cy + hy * x[j]);
            }
        }
        acc * hx * hy
    }

    #[test]
    fn pdf_corr3_peaks() {
        let s = Macrostate3::new(0.0, 0.0, 1.0).unwrap();
        let v0 = pdf_corr3(s, p(0.0), (0.0, 0.0)).unwrap();
        assert!((v0 - 0.159_154_943_091_895_34).abs() < 1e-15);
        let v5 = pdf_corr3(s, p(0.5), (0.0, 0.0)).unwrap();
        assert!((v5 - 0.183_776_298_473_930_68).abs() < 1e-15);
    }

    #[test]
    fn pdf_corr3_normalizes() {
        for &(sigma, r) in &[(1.0, 0.0), (0.3, 0.5), (2.0, 0.9)] {
            let s = Macrostate3::new(0.4, -1.2, sigma).unwrap();
            let total = box_integral(
                |x, y| pdf_corr3(s, p(r), (x, y)).unwrap(),
                0.4,
                8.0 * sigma,
                -1.2,
                8.0 * sigma,
            );
            assert!((total - 1.0).abs() < 1e-10, "sigma={sigma} r={r}: {total}");
        }
    }

    #[test]
    fn pdf_noncorr3_values() {
        let s = Macrostate3::new(1.0, -1.0, 1.0).unwrap();
        assert!((pdf_noncorr3(s, (1.0, -1.0)).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-16);
        let s = Macrostate3::new(0.0, 0.0, 2.0).unwrap();
        let v = pdf_noncorr3(s, (2.0, 0.0)).unwrap();
        assert!((v - 0.024_133_088_157_513_48).abs() < 1e-16);
    }

    #[test]
    fn pdf_noncorr3_is_r0_bitwise() {
        let s = Macrostate3::new(0.3, 0.7, 1.3).unwrap();
        for &pt in &[(0.0, 0.0), (1.1, -0.4), (-3.0, 2.5)] {
            assert_eq!(
                pdf_noncorr3(s, pt).unwrap().to_bits(),
                pdf_corr3(s, p(0.0), pt).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn pdf_corr4_reductions() {
        let s4 = Macrostate4::new(0.2, -0.1, 0.7, 0.7).unwrap();
        let s3 = Macrostate3::new(0.2, -0.1, 0.7).unwrap();
        for &pt in &[(0.0, 0.0), (0.5, 0.9), (-1.0, 0.3)] {
            let a = pdf_corr4(s4, p(0.4), pt).unwrap();
            let b = pdf_corr3(s3, p(0.4), pt).unwrap();
            assert!((a - b).abs() <= 1e-15 * b.max(1e-300));
        }
        let s4 = Macrostate4::new(1.0, 2.0, 0.5, 3.0).unwrap();
        let peak = pdf_corr4(s4, p(0.6), (1.0, 2.0)).unwrap();
        assert!((peak - 1.0 / (2.0 * PI * 1.5 * 0.8)).abs() < 1e-15);
        let total = box_integral(
            |x, y| pdf_corr4(s4, p(0.6), (x, y)).unwrap(),
            1.0,
            8.0 * 0.5,
            2.0,
            8.0 * 3.0,
        );
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn marginals_are_univariate_normals() {
        let (sigma, r) = (0.8, 0.7);
        let s = Macrostate3::new(0.5, -0.5, sigma).unwrap();
        let (y, w) = gauss_legendre(160);
        for &x in &[0.5, 0.0, 1.7] {
            let h = 8.0 * sigma;
            let m: f64 = y
                .iter()
                .zip(&w)
                .map(|(t, wt)| wt * pdf_corr3(s, p(r), (x, -0.5 + h * t)).unwrap())
                .sum::<f64>()
                * h;
            let expect = (-(x - 0.5) * (x - 0.5) / (2.0 * sigma * sigma)).exp()
                / ((2.0 * PI).sqrt() * sigma);
            assert!((m - expect).abs() < 1e-12, "{m} vs {expect}");
        }
    }

    #[test]
    fn domain_errors() {
        let s = Macrostate3 {
            mu1: 0.0,
            mu2: 0.0,
            sigma: 0.0,
        };
        assert!(pdf_corr3(s, ModelParams::UNCORRELATED, (0.0, 0.0)).is_err());
        assert!(ModelParams::new(1.0).is_err());
        assert!(ModelParams::new(-0.1).is_err());
        assert!(ModelParams::new(1.0 - 1e-10).is_err());
        assert!(metric_corr3(-1.0, ModelParams::UNCORRELATED).is_err());
        assert!(metric_corr4(1.0, 0.0, ModelParams::UNCORRELATED).is_err());
    }

    #[test]
    fn metric_entries() {
        let g = metric_corr3(1.0, p(0.0)).unwrap();
        assert_eq!(
            g,
            Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, 4.0))
        );
        let g = metric_corr3(2.0, p(0.5)).unwrap();
        assert!((g[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((g[(0, 1)] + 1.0 / 6.0).abs() < 1e-15);
        assert!((g[(2, 2)] - 1.0).abs() < 1e-15);
        let g = metric_noncorr3(2.0).unwrap();
        assert_eq!(
            g,
            Matrix3::from_diagonal(&nalgebra::Vector3::new(0.25, 0.25, 1.0))
        );
        let g = metric_corr4(1.0, 1.0, p(0.0)).unwrap();
        assert_eq!(
            g,
            Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 2.0, 1.0, 2.0))
        );
        let g = metric_corr4(1.0, 2.0, p(0.5)).unwrap();
        assert!((g[(0, 2)] + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn metric_inverse_and_determinant() {
        for &(s, r) in &[(0.1, 0.0), (1.0, 0.3), (7.0, 0.9)] {
            let g = metric_corr3(s, p(r)).unwrap();
            let gi = metric_corr3_inverse(s, p(r)).unwrap();
            let id = g * gi;
            assert!((id - Matrix3::identity()).abs().max() < 1e-12);
            let det = metric_corr3_determinant(s, p(r)).unwrap();
            assert!((g.determinant() - det).abs() <= 1e-12 * det);
        }
    }

    #[test]
    fn split_examples() {
        let (_, h) = metric_split(1.0, p(0.0)).unwrap();
        assert_eq!(h, Matrix3::zeros());
        let (_, h) = metric_split(1.0, p(0.01)).unwrap();
        assert!((h[(0, 1)] + 0.01).abs() < 1e-18);
        assert!((h[(0, 0)] - 1e-4).abs() < 1e-18);
        assert!(metric_split(1.0, p(0.2)).is_err());
        assert!(metric_split_with_limit(1.0, p(0.2), 0.3).is_ok());
    }

    #[test]
    fn split_error_is_third_order() {
        let c: Vec<f64> = [0.01, 0.02, 0.04]
            .iter()
            .map(|&r| {
                let (g0, h) = metric_split(1.3, p(r)).unwrap();
                let g = metric_corr3(1.3, p(r)).unwrap();
                (g - (g0 + h)).abs().max() / (r * r * r)
            })
            .collect();
        for w in c.windows(2) {
            assert!((w[0] / w[1] - 1.0).abs() < 0.01, "{c:?}");
        }
    }

    #[test]
    fn micro_correlation_definition() {
        assert_eq!(micro_correlation(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(micro_correlation(0.5, 1.0).unwrap(), 0.5);
        assert!(micro_correlation(1.0, 1.0).is_err());
        assert!(micro_correlation(-2.0, 1.0).is_err());
    }

    #[test]
    fn micro_correlation_from_samples() {
        // Rejection sampling from pdf_corr3 with an isotropic normal envelope
        // of spread 1.2σ; the envelope ratio peaks at the mean.
        let (sigma, r) = (1.0, 0.3);
        let s = Macrostate3::new(0.0, 0.0, sigma).unwrap();
        let se = 1.2 * sigma;
        let q = |x: f64, y: f64| (-(x * x + y * y) / (2.0 * se * se)).exp() / (2.0 * PI * se * se);
        let m = pdf_corr3(s, p(r), (0.0, 0.0)).unwrap() / q(0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let (mut sx, mut sy, mut sxy, mut k) = (0.0, 0.0, 0.0, 0usize);
        while k < n {
            let x: f64 = se * rng.sample::<f64, _>(StandardNormal);
            let y: f64 = se * rng.sample::<f64, _>(StandardNormal);
            let u: f64 = rng.random();
            if u * m * q(x, y) <= pdf_corr3(s, p(r), (x, y)).unwrap() {
                sx += x;
                sy += y;
                sxy += x * y;
                k += 1;
            }
        }
        let nf = n as f64;
        let cov = sxy / nf - (sx / nf) * (sy / nf);
        let est = micro_correlation(cov, sigma).unwrap();
        assert!((est - 0.3).abs() < 0.005, "estimate {est}");
    }

    proptest! {
        #[test]
        fn metrics_are_spd(sigma in 0.05f64..20.0, sy in 0.05f64..20.0, r in 0.0f64..0.99) {
            let g = metric_corr3(sigma, p(r)).unwrap();
            prop_assert!((g - g.transpose()).abs().max() == 0.0);
            prop_assert!(eigenvalues3(&g)[0] > 0.0);
            let det = metric_corr3_determinant(sigma, p(r)).unwrap();
            prop_assert!((g.determinant() - det).abs() <= 1e-10 * det);
            let g4 = metric_corr4(sigma, sy, p(r)).unwrap();
            prop_assert!((g4 - g4.transpose()).abs().max() == 0.0);
            prop_assert!(eigenvalues4(&g4)[0] > 0.0);
        }

        #[test]
        fn r0_metric_is_noncorr(sigma in 0.01f64..100.0) {
            prop_assert_eq!(metric_corr3(sigma, p(0.0)).unwrap(), metric_noncorr3(sigma).unwrap());
        }
    }
}
