//! Fisher–Rao metrics by quadrature of `E[∂_a ln P ∂_b ln P]` with analytic
//! scores.

use nalgebra::DMatrix;
use serde::Serialize;

use super::quadrature::{legendre_on, normal_rule, QuadratureSpec, Scheme};
use crate::error::{Error, Result};
use crate::models::{Macrostate3, Macrostate4, Metric3, Metric4, ModelParams};

/// Statistical model and the point at which its metric is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FisherModel {
    Corr3(Macrostate3, ModelParams),
    NonCorr3(Macrostate3),
    Corr4(Macrostate4, ModelParams),
}

/// A numerically integrated metric of either dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum FisherMetric {
    Three(Metric3),
    Four(Metric4),
}

impl FisherMetric {
    pub fn as_dmatrix(&self) -> DMatrix<f64> {
        match self {
            Self::Three(m) => DMatrix::from_column_slice(3, 3, m.as_slice()),
            Self::Four(m) => DMatrix::from_column_slice(4, 4, m.as_slice()),
        }
    }
}

/// Standard bivariate normal rule in decorrelated variables: returns
/// `(u, v, weight)` with `(u, v)` of unit spreads and correlation `r`.
fn bivariate_rule(spec: &QuadratureSpec, r: f64) -> Result<Vec<(f64, f64, f64)>> {
    spec.validate()?;
    let (z, w): (Vec<f64>, Vec<f64>) = match spec.scheme {
        Scheme::GaussHermite => normal_rule(spec.order, 0.0, 1.0),
        Scheme::GaussLegendre => {
            let (x, w) = legendre_on(spec.order, 0.0, spec.cutoff);
            let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
            let w = x
                .iter()
                .zip(&w)
                .map(|(x, w)| w * c * (-0.5 * x * x).exp())
                .collect();
            (x, w)
        }
        Scheme::Adaptive => {
            return Err(Error::Inapplicable(
                "the Fisher oracle uses fixed-order tensor rules".into(),
            ))
        }
    };
    let s = (1.0 - r * r).sqrt();
    let mut out = Vec::with_capacity(z.len() * z.len());
    for (i, &z1) in z.iter().enumerate() {
        for (j, &z2) in z.iter().enumerate() {
            out.push((z1, r * z1 + s * z2, w[i] * w[j]));
        }
    }
    Ok(out)
}

/// Scores `∂_a ln P` at standardized deviations `(u, v)`.
fn scores(model: &FisherModel, u: f64, v: f64) -> Vec<f64> {
    match *model {
        FisherModel::Corr3(st, p) => scores3(st.sigma, p.r, u, v),
        FisherModel::NonCorr3(st) => scores3(st.sigma, 0.0, u, v),
        FisherModel::Corr4(st, p) => {
            let (r, sx, sy) = (p.r, st.sigma_x, st.sigma_y);
            let d = 1.0 - r * r;
            vec![
                (u - r * v) / (d * sx),
                -1.0 / sx + (u * u - r * u * v) / (d * sx),
                (v - r * u) / (d * sy),
                -1.0 / sy + (v * v - r * u * v) / (d * sy),
            ]
        }
    }
}

fn scores3(sigma: f64, r: f64, u: f64, v: f64) -> Vec<f64> {
    let d = 1.0 - r * r;
    let q = u * u - 2.0 * r * u * v + v * v;
    vec![
        (u - r * v) / (d * sigma),
        (v - r * u) / (d * sigma),
        -2.0 / sigma + q / (d * sigma),
    ]
}

fn integrate(model: &FisherModel, spec: &QuadratureSpec) -> Result<DMatrix<f64>> {
    let (r, n) = match model {
        FisherModel::Corr3(st, p) => {
            st.validate()?;
            p.validate()?;
            (p.r, 3)
        }
        FisherModel::NonCorr3(st) => {
            st.validate()?;
            (0.0, 3)
        }
        FisherModel::Corr4(st, p) => {
            st.validate()?;
            p.validate()?;
            (p.r, 4)
        }
    };
    let mut g = DMatrix::zeros(n, n);
    for (u, v, w) in bivariate_rule(spec, r)? {
        let s = scores(model, u, v);
        for a in 0..n {
            for b in a..n {
                g[(a, b)] += w * s[a] * s[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            g[(a, b)] = g[(b, a)];
        }
    }
    Ok(g)
}

/// Fisher–Rao metric of `model` by quadrature, with a built-in convergence
/// self-test: the result at doubled order must agree to within ten times
/// `spec.tolerance`, relative to the largest entry.
pub fn fisher_metric_numeric(model: FisherModel, spec: &QuadratureSpec) -> Result<FisherMetric> {
    let g = integrate(&model, spec)?;
    let g2 = integrate(&model, &spec.doubled())?;
    let scale = g2.amax().max(f64::MIN_POSITIVE);
    let change = (&g - &g2).amax() / scale;
    if change > 10.0 * spec.tolerance.max(1e-14) {
        return Err(Error::Convergence(format!(
            "Fisher quadrature changed by {change:e} (relative) when the order was doubled"
        )));
    }
    Ok(match model {
        FisherModel::Corr4(..) => FisherMetric::Four(Metric4::from_iterator(g2.iter().copied())),
        _ => FisherMetric::Three(Metric3::from_iterator(g2.iter().copied())),
    })
}
