//! Closed-form Levi-Civita connection and curvature tensors of the 3D
//! correlated manifold `(μ₁, μ₂, σ)`.
//!
//! Conventions: `Γ^a_bc` is stored as `gamma[a][b][c]`;
//! `R^a_bcd = ∂_c Γ^a_bd − ∂_d Γ^a_bc + Γ^a_ce Γ^e_bd − Γ^a_de Γ^e_bc`, lowered on
//! the first index, so a space of constant sectional curvature `K` has
//! `R_abcd = K (g_ac g_bd − g_ad g_bc)`. Ricci is `R_ac = g^{bd} R_abcd`.
//! Index lowering and raising use the closed-form metric and inverse.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::models::{metric_corr3, metric_corr3_inverse, Metric3, ModelParams};

/// Dense rank-4 tensor over the three manifold coordinates.
pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];
/// Dense rank-3 array over the three manifold coordinates.
pub type Tensor3 = [[[f64; 3]; 3]; 3];

/// Manifold dimension.
pub const DIM: usize = 3;

/// Connection coefficients `Γ^a_bc` at a manifold point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChristoffelSymbols {
    pub gamma: Tensor3,
}

impl ChristoffelSymbols {
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.gamma[a][b][c]
    }

    /// Largest violation of `Γ^a_bc = Γ^a_cb`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    m = m.max((self.gamma[a][b][c] - self.gamma[a][c][b]).abs());
                }
            }
        }
        m
    }
}

/// Curvature tensors at one manifold point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureBundle {
    pub sigma: f64,
    pub r: f64,
    pub christoffel: ChristoffelSymbols,
    pub riemann: Tensor4,
    pub ricci: [[f64; 3]; 3],
    pub scalar: f64,
    /// Sectional curvature of the coordinate planes `(e₁,e₂), (e₁,e₃), (e₂,e₃)`.
    pub sectional: [f64; 3],
    pub weyl: Tensor4,
}

/// Closed-form Christoffel symbols.
pub fn christoffel(sigma: f64, params: ModelParams) -> Result<ChristoffelSymbols> {
    positive("sigma", sigma)?;
    params.validate()?;
    let r = params.r;
    let den = 4.0 * sigma * (r * r - 1.0);
    let mut g = [[[0.0; 3]; 3]; 3];
    let m = -1.0 / sigma;
    g[0][0][2] = m;
    g[0][2][0] = m;
    g[1][1][2] = m;
    g[1][2][1] = m;
    g[2][2][2] = m;
    g[2][0][0] = -1.0 / den;
    g[2][1][1] = -1.0 / den;
    g[2][0][1] = r / den;
    g[2][1][0] = r / den;
    Ok(ChristoffelSymbols { gamma: g })
}

/// Analytic coordinate derivatives `∂_d Γ^a_bc`, stored as `[d][a][b][c]`.
///
/// Every coefficient scales as `1/σ` and is independent of `μ₁, μ₂`.
pub fn christoffel_derivative(sigma: f64, params: ModelParams) -> Result<Tensor4> {
    let g = christoffel(sigma, params)?;
    let mut d = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                d[2][a][b][c] = -g.gamma[a][b][c] / sigma;
            }
        }
    }
    Ok(d)
}

/// Closed-form lowered Riemann tensor `R_abcd`.
pub fn riemann(sigma: f64, params: ModelParams) -> Result<Tensor4> {
    positive("sigma", sigma)?;
    params.validate()?;
    let r = params.r;
    let s4 = sigma.powi(4);
    let d = r * r - 1.0;
    let mut t = [[[[0.0; 3]; 3]; 3]; 3];
    let mut put = |a: usize, b: usize, c: usize, e: usize, v: f64| {
        // Fill all images under antisymmetry in each pair and pair exchange.
        for &(i, j, k, l, s) in &[
            (a, b, c, e, 1.0),
            (b, a, c, e, -1.0),
            (a, b, e, c, -1.0),
            (b, a, e, c, 1.0),
            (c, e, a, b, 1.0),
            (e, c, a, b, -1.0),
            (c, e, b, a, -1.0),
            (e, c, b, a, 1.0),
        ] {
            t[i][j][k][l] = s * v;
        }
    };
    put(0, 1, 0, 1, 1.0 / (4.0 * s4 * d));
    put(0, 2, 0, 2, 1.0 / (s4 * d));
    put(1, 2, 1, 2, 1.0 / (s4 * d));
    put(0, 2, 1, 2, -r / (s4 * d));
    Ok(t)
}

/// Contraction `R_ac = g^{bd} R_abcd` with the closed-form inverse metric.
pub fn contract_ricci(riem: &Tensor4, ginv: &Metric3) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for a in 0..DIM {
        for c in 0..DIM {
            let mut s = 0.0;
            for b in 0..DIM {
                for d in 0..DIM {
                    s += ginv[(b, d)] * riem[a][b][c][d];
                }
            }
            out[a][c] = s;
        }
    }
    out
}

/// Closed-form Ricci tensor, `R_ab = −½ g_ab`.
pub fn ricci(sigma: f64, params: ModelParams) -> Result<Matrix3<f64>> {
    let g = metric_corr3(sigma, params)?;
    Ok(-0.5 * g)
}

/// Ricci scalar, `−3/2` on the whole manifold for every admissible `r`.
pub fn scalar_curvature(params: ModelParams) -> Result<f64> {
    params.validate()?;
    Ok(-1.5)
}

/// Sectional curvature of the plane spanned by `u`, `v`.
pub fn sectional(sigma: f64, params: ModelParams, u: [f64; 3], v: [f64; 3]) -> Result<f64> {
    let g = metric_corr3(sigma, params)?;
    let riem = riemann(sigma, params)?;
    sectional_from(&riem, &g, u, v)
}

/// Sectional curvature from a given Riemann tensor and metric.
pub fn sectional_from(riem: &Tensor4, g: &Metric3, u: [f64; 3], v: [f64; 3]) -> Result<f64> {
    let (uu, vv) = (Vector3::from(u), Vector3::from(v));
    let guu = uu.dot(&(g * uu));
    let gvv = vv.dot(&(g * vv));
    let guv = uu.dot(&(g * vv));
    let den = guu * gvv - guv * guv;
    if !(den > 1e-12 * guu * gvv) {
        return Err(Error::Domain {
            name: "plane",
            value: den,
            expected: "linearly independent u, v",
        });
    }
    let mut num = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    num += riem[a][b][c][d] * u[a] * v[b] * u[c] * v[d];
                }
            }
        }
    }
    Ok(num / den)
}

/// Weyl projective tensor `W_abcd = R_abcd − (R_bd g_ac − R_bc g_ad)/(n−1)`.
pub fn weyl_from(riem: &Tensor4, ric: &[[f64; 3]; 3], g: &Metric3) -> Tensor4 {
    let mut w = [[[[0.0; 3]; 3]; 3]; 3];
    let k = 1.0 / (DIM as f64 - 1.0);
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    w[a][b][c][d] =
                        riem[a][b][c][d] - k * (ric[b][d] * g[(a, c)] - ric[b][c] * g[(a, d)]);
                }
            }
        }
    }
    w
}

/// Closed-form Weyl projective tensor.
pub fn weyl(sigma: f64, params: ModelParams) -> Result<Tensor4> {
    let g = metric_corr3(sigma, params)?;
    let riem = riemann(sigma, params)?;
    let ric = matrix_to_array(&ricci(sigma, params)?);
    Ok(weyl_from(&riem, &ric, &g))
}

/// Residuals of the maximal-symmetry identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `max |R_ab − (R/n) g_ab|`.
    pub ricci_residual: f64,
    /// `max |R_abcd − R/(n(n−1)) (g_bd g_ac − g_bc g_ad)|`.
    pub riemann_residual: f64,
    /// `|g^{ab} g_ab − n|`.
    pub trace_residual: f64,
}

impl SymmetryReport {
    pub fn max(&self) -> f64 {
        self.ricci_residual
            .max(self.riemann_residual)
            .max(self.trace_residual)
    }
}

/// Checks the maximal-symmetry identities with the closed-form scalar.
pub fn maximal_symmetry_check(sigma: f64, params: ModelParams) -> Result<SymmetryReport> {
    maximal_symmetry_check_with_scalar(sigma, params, scalar_curvature(params)?)
}

/// [`maximal_symmetry_check`] with a caller-supplied scalar curvature, so a
/// wrong value can be shown to produce nonzero residuals.
pub fn maximal_symmetry_check_with_scalar(
    sigma: f64,
    params: ModelParams,
    scalar: f64,
) -> Result<SymmetryReport> {
    let g = metric_corr3(sigma, params)?;
    let gi = metric_corr3_inverse(sigma, params)?;
    let riem = riemann(sigma, params)?;
    let ric = contract_ricci(&riem, &gi);
    let n = DIM as f64;
    let mut ricci_residual: f64 = 0.0;
    let mut riemann_residual: f64 = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            ricci_residual = ricci_residual.max((ric[a][b] - scalar / n * g[(a, b)]).abs());
            for c in 0..DIM {
                for d in 0..DIM {
                    let model =
                        scalar / (n * (n - 1.0)) * (g[(b, d)] * g[(a, c)] - g[(b, c)] * g[(a, d)]);
                    riemann_residual = riemann_residual.max((riem[a][b][c][d] - model).abs());
                }
            }
        }
    }
    let trace_residual = ((gi * g).trace() - n).abs();
    Ok(SymmetryReport {
        ricci_residual,
        riemann_residual,
        trace_residual,
    })
}

/// Coordinate-plane sectional curvatures `(e₁,e₂), (e₁,e₃), (e₂,e₃)`.
pub fn coordinate_sectionals(riem: &Tensor4, g: &Metric3) -> Result<[f64; 3]> {
    let e = |i: usize| {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        v
    };
    Ok([
        sectional_from(riem, g, e(0), e(1))?,
        sectional_from(riem, g, e(0), e(2))?,
        sectional_from(riem, g, e(1), e(2))?,
    ])
}

/// All closed-form tensors at `(σ, r)`.
pub fn curvature_bundle(sigma: f64, params: ModelParams) -> Result<CurvatureBundle> {
    let g = metric_corr3(sigma, params)?;
    let riem = riemann(sigma, params)?;
    let ric = matrix_to_array(&ricci(sigma, params)?);
    Ok(CurvatureBundle {
        sigma,
        r: params.r,
        christoffel: christoffel(sigma, params)?,
        riemann: riem,
        ricci: ric,
        scalar: scalar_curvature(params)?,
        sectional: coordinate_sectionals(&riem, &g)?,
        weyl: weyl_from(&riem, &ric, &g),
    })
}

/// Largest absolute entry of a rank-4 tensor.
pub fn max_abs4(t: &Tensor4) -> f64 {
    t.iter()
        .flatten()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Largest absolute entrywise difference of two rank-4 tensors.
pub fn max_diff4(a: &Tensor4, b: &Tensor4) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    m = m.max((a[i][j][k][l] - b[i][j][k][l]).abs());
                }
            }
        }
    }
    m
}

pub(crate) fn matrix_to_array(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..DIM {
        for j in 0..DIM {
            out[i][j] = m[(i, j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(r: f64) -> ModelParams {
        ModelParams::new(r).unwrap()
    }

    /// Riemann tensor assembled from the connection by its definition, using
    /// the analytic Γ derivatives; independent of the tabulated components.
    fn riemann_from_connection(sigma: f64, r: f64) -> Tensor4 {
        let gam = christoffel(sigma, p(r)).unwrap().gamma;
        let dg = christoffel_derivative(sigma, p(r)).unwrap();
        let g = metric_corr3(sigma, p(r)).unwrap();
        let mut up = [[[[0.0; 3]; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let mut v = dg[c][a][b][d] - dg[d][a][b][c];
                        for e in 0..3 {
                            v += gam[a][c][e] * gam[e][b][d] - gam[a][d][e] * gam[e][b][c];
                        }
                        up[a][b][c][d] = v;
                    }
                }
            }
        }
        let mut low = [[[[0.0; 3]; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        low[a][b][c][d] = (0..3).map(|e| g[(a, e)] * up[e][b][c][d]).sum();
                    }
                }
            }
        }
        low
    }

    #[test]
    fn christoffel_examples() {
        let g = christoffel(1.0, p(0.0)).unwrap();
        assert_eq!(g.get(2, 0, 0), 0.25);
        assert_eq!(g.get(0, 0, 2), -1.0);
        assert_eq!(g.get(2, 0, 1), 0.0);
        let g = christoffel(2.0, p(0.5)).unwrap();
        assert!((g.get(2, 0, 1) + 1.0 / 12.0).abs() < 1e-16);
        assert_eq!(g.symmetry_defect(), 0.0);
    }

    #[test]
    fn christoffel_from_metric_definition() {
        // Γ^a_bc = ½ g^{ad}(∂_b g_dc + ∂_c g_db − ∂_d g_bc); only ∂_σ g ≠ 0,
        // and ∂_σ g = −2g/σ for this family.
        for &(s, r) in &[(0.7, 0.0), (2.0, 0.5), (5.0, 0.9)] {
            let g = metric_corr3(s, p(r)).unwrap();
            let gi = metric_corr3_inverse(s, p(r)).unwrap();
            let dg = |k: usize, i: usize, j: usize| if k == 2 { -2.0 * g[(i, j)] / s } else { 0.0 };
            let gam = christoffel(s, p(r)).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        let v: f64 = (0..3)
                            .map(|d| 0.5 * gi[(a, d)] * (dg(b, d, c) + dg(c, d, b) - dg(d, b, c)))
                            .sum();
                        assert!((v - gam.get(a, b, c)).abs() < 1e-12 * (1.0 + v.abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn riemann_examples() {
        let t = riemann(1.0, p(0.0)).unwrap();
        assert_eq!(t[0][1][0][1], -0.25);
        let t = riemann(1.0, p(0.5)).unwrap();
        assert!((t[0][2][1][2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn riemann_matches_connection_definition() {
        for &(s, r) in &[(0.3, 0.0), (1.0, 0.5), (4.0, 0.8)] {
            let a = riemann(s, p(r)).unwrap();
            let b = riemann_from_connection(s, r);
            assert!(max_diff4(&a, &b) < 1e-12 * max_abs4(&a), "s={s} r={r}");
        }
    }

    #[test]
    fn ricci_examples() {
        let m = ricci(1.0, p(0.0)).unwrap();
        assert_eq!(m[(0, 0)], -0.5);
        assert_eq!(m[(2, 2)], -2.0);
        let m = ricci(1.0, p(0.5)).unwrap();
        assert!((m[(0, 1)] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_and_sectional_examples() {
        assert_eq!(scalar_curvature(p(0.0)).unwrap(), -1.5);
        assert_eq!(scalar_curvature(p(0.5)).unwrap(), -1.5);
        let k = sectional(1.0, p(0.0), [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        assert!((k + 0.25).abs() < 1e-15);
        let k = sectional(2.0, p(0.5), [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        assert!((k + 0.25).abs() < 1e-14);
        assert!(sectional(1.0, p(0.2), [1.0, 2.0, 0.0], [2.0, 4.0, 0.0]).is_err());
    }

    #[test]
    fn scalar_is_sum_over_ordered_pairs() {
        let s = 1.7;
        let g = metric_corr3(s, p(0.4)).unwrap();
        let riem = riemann(s, p(0.4)).unwrap();
        let k = coordinate_sectionals(&riem, &g).unwrap();
        assert!((2.0 * k.iter().sum::<f64>() + 1.5).abs() < 1e-14);
    }

    #[test]
    fn weyl_vanishes() {
        for &(s, r) in &[(1.0, 0.0), (3.0, 0.7)] {
            assert!(max_abs4(&weyl(s, p(r)).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn maximal_symmetry() {
        let rep = maximal_symmetry_check(1.0, p(0.0)).unwrap();
        assert_eq!(rep.max(), 0.0);
        let rep = maximal_symmetry_check(2.0, p(0.5)).unwrap();
        assert!(rep.max() < 1e-12);
        let rep = maximal_symmetry_check_with_scalar(2.0, p(0.5), -1.4).unwrap();
        assert!(rep.ricci_residual > 1e-3 && rep.riemann_residual > 1e-4);
    }

    proptest! {
        #[test]
        fn riemann_symmetries(s in 0.1f64..10.0, r in 0.0f64..0.9) {
            let t = riemann(s, p(r)).unwrap();
            let scale = max_abs4(&t);
            for a in 0..3 { for b in 0..3 { for c in 0..3 { for d in 0..3 {
                let v = t[a][b][c][d];
                prop_assert!((v + t[b][a][c][d]).abs() <= 1e-12 * scale);
                prop_assert!((v + t[a][b][d][c]).abs() <= 1e-12 * scale);
                prop_assert!((v - t[c][d][a][b]).abs() <= 1e-12 * scale);
                let bianchi = v + t[a][c][d][b] + t[a][d][b][c];
                prop_assert!(bianchi.abs() <= 1e-12 * scale);
            }}}}
        }

        #[test]
        fn ricci_is_contraction(s in 0.1f64..10.0, r in 0.0f64..0.95) {
            let gi = metric_corr3_inverse(s, p(r)).unwrap();
            let c = contract_ricci(&riemann(s, p(r)).unwrap(), &gi);
            let m = ricci(s, p(r)).unwrap();
            let scale = m.abs().max();
            for a in 0..3 { for b in 0..3 {
                prop_assert!((c[a][b] - m[(a, b)]).abs() <= 1e-10 * scale);
            }}
            let scalar = (gi * m).trace();
            prop_assert!((scalar - scalar_curvature(p(r)).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn isotropy_random_planes(
            s in 0.1f64..10.0, r in 0.0f64..0.9,
            u in proptest::array::uniform3(-1.0f64..1.0),
            v in proptest::array::uniform3(-1.0f64..1.0),
        ) {
            match sectional(s, p(r), u, v) {
                Ok(k) => prop_assert!((k + 0.25).abs() < 1e-10, "K = {}", k),
                Err(_) => {
                    let (uu, vv) = (Vector3::from(u), Vector3::from(v));
                    prop_assert!(uu.cross(&vv).norm() < 1e-5 * (uu.norm() * vv.norm()).max(1e-300));
                }
            }
        }
    }
}
