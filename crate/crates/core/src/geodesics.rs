//! Closed-form geodesics of the 3D manifold, the rate constant `A₀`, the
//! Riccati integration constants, and a finite-difference geodesic residual.
//!
//! The collision is placed at `τ = 0`: the uncorrelated branch describes
//! `τ < 0` and the correlated branch `τ ≥ 0`. Both branches share the spread
//! profile `σ(τ) = b / cosh(A₀τ)` and differ only by a factor `√(1−r)` in the
//! momenta, which keeps the joined path continuous at the junction.

use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};
use crate::models::{Macrostate3, ModelParams};

/// Largest admissible `|A₀τ|`; beyond it `cosh` overflows and `σ` underflows.
pub const SATURATION_LIMIT: f64 = 700.0;

/// Wave-packet initial data `(p₀, σ₀, τ₀, R₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    pub p0: f64,
    pub sigma0: f64,
    pub tau0: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
}

impl InitialConditions {
    /// Largest accepted `σ₀/p₀` (well-localized packets).
    pub const MAX_SPREAD_RATIO: f64 = 0.1;

    pub fn new(p0: f64, sigma0: f64, tau0: f64, r0: f64) -> Result<Self> {
        let ic = Self {
            p0,
            sigma0,
            tau0,
            r0,
        };
        ic.validate()?;
        Ok(ic)
    }

    /// `p₀ = 1, σ₀ = 0.1, τ₀ = 1, R₀ = 10`.
    pub fn desk() -> Self {
        Self {
            p0: 1.0,
            sigma0: 0.1,
            tau0: 1.0,
            r0: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("p0", self.p0)?;
        positive("sigma0", self.sigma0)?;
        positive("tau0", self.tau0)?;
        positive("R0", self.r0)?;
        // A relative slack absorbs the representation error of e.g. 0.1/1.0.
        if self.sigma0 / self.p0 > Self::MAX_SPREAD_RATIO * (1.0 + 1e-12) {
            return Err(Error::Domain {
                name: "sigma0/p0",
                value: self.sigma0 / self.p0,
                expected: "sigma0/p0 <= 0.1 (well-localized packet)",
            });
        }
        Ok(())
    }
}

/// Geodesic rate constant `A₀ = asinh(p₀/(√2σ₀))/τ₀`.
pub fn amplitude_a0(ic: &InitialConditions) -> Result<f64> {
    ic.validate()?;
    Ok((ic.p0 / (2f64.sqrt() * ic.sigma0)).asinh() / ic.tau0)
}

/// Small-`σ₀/p₀` expansion of [`amplitude_a0`] through fourth order; a
/// validation target only.
pub fn amplitude_a0_series(ic: &InitialConditions) -> Result<f64> {
    ic.validate()?;
    let e = ic.sigma0 / ic.p0;
    let e2 = e * e;
    Ok(((2f64.sqrt() / e).ln() + 0.5 * e2 - 0.375 * e2 * e2) / ic.tau0)
}

/// Which side of the collision a path describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Uncorrelated motion before the collision.
    Before,
    /// Correlated motion after the collision.
    After,
}

/// One closed-form geodesic branch, defined for every `τ` with `|A₀τ| ≤ 700`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub branch: Branch,
    pub params: ModelParams,
    pub ic: InitialConditions,
    pub a0: f64,
}

impl GeodesicPath {
    pub fn new(branch: Branch, params: ModelParams, ic: InitialConditions) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            branch,
            params,
            ic,
            a0: amplitude_a0(&ic)?,
        })
    }

    /// Correlation of the metric this branch is a geodesic of.
    pub fn metric_params(&self) -> ModelParams {
        match self.branch {
            Branch::Before => ModelParams::UNCORRELATED,
            Branch::After => self.params,
        }
    }

    /// Momentum amplitude `√(1−r)·√(p₀²+2σ₀²)` of the branch.
    pub fn momentum_amplitude(&self) -> f64 {
        let a = (self.ic.p0 * self.ic.p0 + 2.0 * self.ic.sigma0 * self.ic.sigma0).sqrt();
        (1.0 - self.metric_params().r).sqrt() * a
    }

    /// Spread at the junction, `√(p₀²/2+σ₀²)`.
    pub fn junction_spread(&self) -> f64 {
        (0.5 * self.ic.p0 * self.ic.p0 + self.ic.sigma0 * self.ic.sigma0).sqrt()
    }

    fn phase(&self, tau: f64) -> Result<f64> {
        finite("tau", tau)?;
        let x = self.a0 * tau;
        if x.abs() > SATURATION_LIMIT {
            return Err(Error::Saturation(format!(
                "|A0*tau| = {} exceeds {SATURATION_LIMIT}; sigma underflows",
                x.abs()
            )));
        }
        Ok(x)
    }

    /// Macrostate `(μ₁, μ₂, σ)` at affine time `τ`.
    pub fn state(&self, tau: f64) -> Result<Macrostate3> {
        let x = self.phase(tau)?;
        let mu1 = -self.momentum_amplitude() * x.tanh();
        let sigma = self.junction_spread() / x.cosh();
        debug_assert!(sigma > 0.0);
        Ok(Macrostate3 {
            mu1,
            mu2: -mu1,
            sigma,
        })
    }

    /// Analytic velocity `dϑ/dτ`.
    pub fn velocity(&self, tau: f64) -> Result<[f64; 3]> {
        let x = self.phase(tau)?;
        let sech = 1.0 / x.cosh();
        let dmu1 = -self.momentum_amplitude() * self.a0 * sech * sech;
        let dsigma = -self.junction_spread() * self.a0 * x.tanh() * sech;
        Ok([dmu1, -dmu1, dsigma])
    }

    /// Analytic acceleration `d²ϑ/dτ²`.
    pub fn acceleration(&self, tau: f64) -> Result<[f64; 3]> {
        let x = self.phase(tau)?;
        let (sech, th) = (1.0 / x.cosh(), x.tanh());
        let a2 = self.a0 * self.a0;
        let ddmu1 = 2.0 * self.momentum_amplitude() * a2 * sech * sech * th;
        let ddsigma = self.junction_spread() * a2 * sech * (th * th - sech * sech);
        Ok([ddmu1, -ddmu1, ddsigma])
    }
}

/// Uncorrelated geodesic `μ₁ = −√(p₀²+2σ₀²) tanh(A₀τ)`, `μ₂ = −μ₁`,
/// `σ = √(p₀²/2+σ₀²)/cosh(A₀τ)`.
pub fn geodesic_noncorr(tau: f64, ic: &InitialConditions) -> Result<Macrostate3> {
    GeodesicPath::new(Branch::Before, ModelParams::UNCORRELATED, *ic)?.state(tau)
}

/// Correlated geodesic: momenta scaled by `√(1−r)`, spread unchanged.
pub fn geodesic_corr(tau: f64, params: ModelParams, ic: &InitialConditions) -> Result<Macrostate3> {
    GeodesicPath::new(Branch::After, params, *ic)?.state(tau)
}

/// Branch used by the joined path at `τ`.
pub fn branch_at(tau: f64) -> Branch {
    if tau < 0.0 {
        Branch::Before
    } else {
        Branch::After
    }
}

/// Joined path: uncorrelated for `τ < 0`, correlated for `τ ≥ 0`.
pub fn joined_path(tau: f64, params: ModelParams, ic: &InitialConditions) -> Result<Macrostate3> {
    GeodesicPath::new(branch_at(tau), params, *ic)?.state(tau)
}

/// Integration constants of the Riccati reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiConstants {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "C_r")]
    pub c_r: f64,
    #[serde(rename = "E_r")]
    pub e_r: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl RiccatiConstants {
    /// Geodesic rebuilt from the constants alone: `μ₁ = −√(2E_r(r−1)/C_r)·tanh(γτ)`,
    /// `σ = √(−E_r/C_r)/cosh(γτ)`.
    pub fn reconstruct(&self, tau: f64, params: ModelParams) -> Result<Macrostate3> {
        params.validate()?;
        finite("tau", tau)?;
        let x = self.gamma * tau;
        if x.abs() > SATURATION_LIMIT {
            return Err(Error::Saturation(format!(
                "|gamma*tau| = {} exceeds {SATURATION_LIMIT}",
                x.abs()
            )));
        }
        let amp = (2.0 * self.e_r * (params.r - 1.0) / self.c_r).sqrt();
        let mu1 = -amp * x.tanh();
        let arg = self.delta * x.cosh();
        assert!(arg > 0.0, "spread denominator must be positive");
        Ok(Macrostate3 {
            mu1,
            mu2: -mu1,
            sigma: (-self.e_r / self.c_r).sqrt() / arg,
        })
    }
}

/// Riccati constants with the sign choice `C < 0 < E`, `γ > 0`, `δ = 1`.
///
/// `C = −√2A₀/b`, `E = √2A₀b` with `b² = p₀²/2+σ₀²`, so that `−E/C = b²`
/// and `√(−CE/2) = A₀`; the correlated constants carry a common factor
/// `√(1−r)`, which preserves `E_r/C_r = E/C` (continuity of `σ` at the
/// junction) and yields `γ = √(C_rE_r/(2(r−1))) = A₀`.
pub fn riccati_constants(params: ModelParams, ic: &InitialConditions) -> Result<RiccatiConstants> {
    params.validate()?;
    let a0 = amplitude_a0(ic)?;
    let b = (0.5 * ic.p0 * ic.p0 + ic.sigma0 * ic.sigma0).sqrt();
    let c = -(2f64.sqrt()) * a0 / b;
    let e = 2f64.sqrt() * a0 * b;
    let s = (1.0 - params.r).sqrt();
    let (c_r, e_r) = (s * c, s * e);
    let gamma = if params.r == 0.0 {
        (-c * e / 2.0).sqrt()
    } else {
        (c_r * e_r / (2.0 * (params.r - 1.0))).sqrt()
    };
    Ok(RiccatiConstants {
        c,
        e,
        c_r,
        e_r,
        gamma,
        delta: 1.0,
    })
}

/// Left-hand sides of the three geodesic equations for a state, velocity
/// and acceleration on the manifold with correlation `r`.
pub fn geodesic_equation_lhs(r: f64, x: [f64; 3], v: [f64; 3], acc: [f64; 3]) -> [f64; 3] {
    let s = x[2];
    let d = r * r - 1.0;
    [
        acc[0] - 2.0 / s * v[0] * v[2],
        acc[1] - 2.0 / s * v[1] * v[2],
        acc[2] - v[2] * v[2] / s - (v[0] * v[0] + v[1] * v[1]) / (4.0 * s * d)
            + r * v[0] * v[1] / (2.0 * s * d),
    ]
}

/// Five-point central-difference first and second derivatives of `f` at `t`.
pub fn five_point(
    f: &impl Fn(f64) -> Result<[f64; 3]>,
    t: f64,
    h: f64,
) -> Result<([f64; 3], [f64; 3], [f64; 3])> {
    let (fm2, fm1, f0, fp1, fp2) = (
        f(t - 2.0 * h)?,
        f(t - h)?,
        f(t)?,
        f(t + h)?,
        f(t + 2.0 * h)?,
    );
    let mut d1 = [0.0; 3];
    let mut d2 = [0.0; 3];
    for i in 0..3 {
        d1[i] = (fm2[i] - 8.0 * fm1[i] + 8.0 * fp1[i] - fp2[i]) / (12.0 * h);
        d2[i] = (-fm2[i] + 16.0 * fm1[i] - 30.0 * f0[i] + 16.0 * fp1[i] - fp2[i]) / (12.0 * h * h);
    }
    Ok((f0, d1, d2))
}

/// Maximum over `tau_grid` of the Euclidean norm of the geodesic-equation
/// left sides, with velocities and accelerations of `path` taken by a
/// five-point stencil of step `h`.
pub fn geodesic_residual_of(
    path: impl Fn(f64) -> Result<[f64; 3]>,
    r: impl Fn(f64) -> f64,
    tau_grid: &[f64],
    h: f64,
) -> Result<f64> {
    if tau_grid.len() < 5 {
        return Err(Error::Domain {
            name: "tau_grid length",
            value: tau_grid.len() as f64,
            expected: "at least 5 grid points",
        });
    }
    positive("h", h)?;
    let mut worst: f64 = 0.0;
    for &t in tau_grid {
        worst = worst.max(residual_at(&path, r(t), t, h)?);
    }
    Ok(worst)
}

fn residual_at(path: &impl Fn(f64) -> Result<[f64; 3]>, r: f64, t: f64, h: f64) -> Result<f64> {
    let (x, v, a) = five_point(path, t, h)?;
    let lhs = geodesic_equation_lhs(r, x, v, a);
    Ok(lhs.iter().map(|c| c * c).sum::<f64>().sqrt())
}

/// Default stencil step `10⁻⁴/A₀`.
pub fn default_residual_step(a0: f64) -> f64 {
    1e-4 / a0
}

/// Geodesic residual of the joined closed-form path over `tau_grid`; each
/// stencil uses the branch of its centre point.
pub fn geodesic_residual(
    params: ModelParams,
    ic: &InitialConditions,
    tau_grid: &[f64],
) -> Result<f64> {
    let a0 = amplitude_a0(ic)?;
    geodesic_residual_with_step(params, ic, tau_grid, default_residual_step(a0))
}

/// [`geodesic_residual`] with an explicit stencil step.
pub fn geodesic_residual_with_step(
    params: ModelParams,
    ic: &InitialConditions,
    tau_grid: &[f64],
    h: f64,
) -> Result<f64> {
    if tau_grid.len() < 5 {
        return Err(Error::Domain {
            name: "tau_grid length",
            value: tau_grid.len() as f64,
            expected: "at least 5 grid points",
        });
    }
    positive("h", h)?;
    let before = GeodesicPath::new(Branch::Before, params, *ic)?;
    let after = GeodesicPath::new(Branch::After, params, *ic)?;
    let mut worst: f64 = 0.0;
    for &t in tau_grid {
        let path = if t < 0.0 { before } else { after };
        let f = |s: f64| path.state(s).map(|m| m.as_array());
        worst = worst.max(residual_at(&f, path.metric_params().r, t, h)?);
    }
    Ok(worst)
}

/// Mean momentum `√((1−r)(p₀²+2σ₀²))·tanh(A₀τ)` after the collision.
pub fn momentum_difference(tau: f64, params: ModelParams, ic: &InitialConditions) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            expected: "tau >= 0 (post-collision form)",
        });
    }
    Ok(geodesic_corr(tau, params, ic)?.mu2)
}

/// Uniform grid on `[t_min, t_max]` with `n` points, plus the junction
/// `τ = 0` inserted exactly once when it lies inside the range.
pub fn tau_grid_with_junction(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    finite("tau_min", t_min)?;
    finite("tau_max", t_max)?;
    if !(t_max > t_min) || n < 2 {
        return Err(Error::Domain {
            name: "tau grid",
            value: n as f64,
            expected: "tau_max > tau_min and at least 2 points",
        });
    }
    let step = (t_max - t_min) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| t_min + step * i as f64).collect();
    g[n - 1] = t_max;
    if t_min <= 0.0 && t_max >= 0.0 {
        // Snap near-zero points to the junction, then insert it if missing.
        for t in g.iter_mut() {
            if t.abs() < 1e-12 * step {
                *t = 0.0;
            }
        }
        if !g.contains(&0.0) {
            let pos = g.partition_point(|&t| t < 0.0);
            g.insert(pos, 0.0);
        }
    }
    Ok(g)
}
