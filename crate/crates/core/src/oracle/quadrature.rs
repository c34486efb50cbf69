//! Quadrature rules: Gauss–Legendre and Gauss–Hermite nodes by Newton
//! iteration on the three-term recurrences, and adaptive Gauss–Kronrod 7/15.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    GaussHermite,
    GaussLegendre,
    Adaptive,
}

/// Quadrature settings shared by the numeric oracles.
///
/// `cutoff` is the half-width of truncated domains in units of the relevant
/// spread; `tolerance` drives the adaptive scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub order: usize,
    pub cutoff: f64,
    pub tolerance: f64,
}

impl QuadratureSpec {
    pub fn gauss_hermite(order: usize) -> Self {
        Self {
            scheme: Scheme::GaussHermite,
            order,
            cutoff: 8.0,
            tolerance: 1e-12,
        }
    }

    pub fn gauss_legendre(order: usize, cutoff: f64) -> Self {
        Self {
            scheme: Scheme::GaussLegendre,
            order,
            cutoff,
            tolerance: 1e-12,
        }
    }

    pub fn adaptive(tolerance: f64) -> Self {
        Self {
            scheme: Scheme::Adaptive,
            order: 15,
            cutoff: 8.0,
            tolerance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 8 {
            return Err(Error::Domain {
                name: "order",
                value: self.order as f64,
                expected: "order >= 8",
            });
        }
        if self.scheme != Scheme::GaussHermite && !(self.cutoff >= 8.0) {
            return Err(Error::Domain {
                name: "cutoff",
                value: self.cutoff,
                expected: "cutoff >= 8 spreads",
            });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain {
                name: "tolerance",
                value: self.tolerance,
                expected: "tolerance > 0",
            });
        }
        Ok(())
    }

    /// The same spec with the order doubled, for convergence self-tests.
    pub fn doubled(&self) -> Self {
        Self {
            order: 2 * self.order,
            tolerance: self.tolerance / 16.0,
            ..*self
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::gauss_hermite(40)
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Hermite nodes and weights for the weight `exp(−x²)`, nodes ascending.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Hermite order must be positive");
    let nf = n as f64;
    let pim4 = PI.powf(-0.25);
    let mut roots: Vec<f64> = Vec::with_capacity(n);
    let mut weights: Vec<f64> = Vec::with_capacity(n);
    let mut z = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * roots[0],
            3 => 1.91 * z - 0.91 * roots[1],
            _ => 2.0 * z - roots[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // Orthonormal Hermite recurrence.
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        roots.push(z);
        weights.push(2.0 / (pp * pp));
    }
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(n);
    for (k, (&x, &wt)) in roots.iter().zip(&weights).enumerate() {
        if n % 2 == 1 && k == roots.len() - 1 {
            nodes.push((0.0, wt));
        } else {
            nodes.push((x, wt));
            nodes.push((-x, wt));
        }
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    nodes.into_iter().unzip()
}

/// Gauss–Legendre rule mapped onto `[center − half, center + half]`.
pub fn legendre_on(n: usize, center: f64, half: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| center + half * t).collect(),
        w.iter().map(|t| half * t).collect(),
    )
}

/// Rule for a normal density of mean `mu` and spread `s`: returns nodes and
/// weights such that `Σ wᵢ f(xᵢ) ≈ ∫ f(x) N(x; mu, s) dx`.
pub fn normal_rule(n: usize, mu: f64, s: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_hermite(n);
    let sqrt2 = 2f64.sqrt();
    let norm = PI.sqrt();
    (
        x.iter().map(|t| mu + sqrt2 * s * t).collect(),
        w.iter().map(|t| t / norm).collect(),
    )
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Kronrod-15 panel: returns (K15 estimate, |K15 − G7|).
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let (f1, f2) = (f(c - h * XGK[j]), f(c + h * XGK[j]));
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod 7/15 quadrature by recursive bisection.
///
/// A panel is accepted when its Kronrod/Gauss gap is below
/// `max(abs_tol·width/total_width, rel_tol·|estimate|)`.
pub fn adaptive_gk15(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    let total = (b - a).abs();
    let mut stack = vec![(a, b, 0u32)];
    let mut acc = 0.0;
    let mut comp = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (est, err) = gk15(&f, lo, hi);
        let share = (hi - lo).abs() / total;
        if err <= (abs_tol * share).max(rel_tol * est.abs()) {
            // Kahan summation keeps the total stable across many panels.
            let y = est - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        } else if depth >= 60 {
            return Err(Error::Convergence(format!(
                "adaptive quadrature did not converge on [{lo}, {hi}]"
            )));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        for k in 0..20 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 {
                0.0
            } else {
                2.0 / (k as f64 + 1.0)
            };
            assert!((s - exact).abs() < 1e-14, "k={k}: {s} vs {exact}");
        }
        let (x, _) = gauss_legendre(9);
        assert_eq!(x[4], 0.0);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn legendre_high_order_weights_sum() {
        for n in [64, 160, 256] {
            let (_, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn hermite_moments() {
        for n in [8, 9, 40, 80] {
            let (x, w) = gauss_hermite(n);
            assert_eq!(x.len(), n);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            // ∫ x^{2m} e^{-x²} dx = Γ(m + 1/2)
            let mut gamma = PI.sqrt();
            for m in 0..n.min(16) {
                let s: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| w * x.powi(2 * m as i32))
                    .sum();
                assert!(
                    (s - gamma).abs() < 1e-12 * gamma,
                    "n={n} m={m}: {s} vs {gamma}"
                );
                gamma *= m as f64 + 0.5;
            }
        }
    }

    #[test]
    fn normal_rule_variance() {
        let (x, w) = normal_rule(40, 1.5, 0.3);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x).sum();
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * (x - 1.5).powi(2)).sum();
        assert!((m - 1.5).abs() < 1e-14);
        assert!((v - 0.09).abs() < 1e-14);
    }

    #[test]
    fn adaptive_steep_integrand() {
        // ∫_{0.01}^{1} 2/σ³ dσ = 1/0.01² − 1
        let v = adaptive_gk15(|s| 2.0 / (s * s * s), 0.01, 1.0, 1e-12, 1e-13).unwrap();
        assert!((v - 9999.0).abs() < 1e-9 * 9999.0, "{v}");
        let v = adaptive_gk15(|x| x.sin(), 0.0, PI, 1e-14, 1e-14).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::gauss_hermite(4).validate().is_err());
        assert!(QuadratureSpec::gauss_legendre(64, 4.0).validate().is_err());
        assert!(QuadratureSpec::default().validate().is_ok());
        assert_eq!(QuadratureSpec::default().doubled().order, 80);
    }
}
