//! Two-particle s-wave scattering: post-collision densities, purity, the
//! square-well phase-shift chain, correlation inversions and the prolongation
//! of the correlated geodesic.
//!
//! The scattering amplitude is the constant `f(k) = −a_s` (low-energy limit),
//! and only the repulsive branch (`a_s ≥ 0`, `V ≥ 0`, `r ≥ 0`) is supported.
//! Wave numbers are the primary inputs; ħ enters only through energies and
//! potentials.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result, Warned};
use crate::geodesics::{amplitude_a0, InitialConditions};
use crate::models::{pdf_corr3, Macrostate3, ModelParams};

/// Upper end of the low-energy regime `k₀L`.
pub const LOW_ENERGY_LIMIT: f64 = 0.3;
/// Largest `r_QM` for which the correlated-Gaussian identification is used.
pub const R_QM_LIMIT: f64 = 0.3;
/// Largest accepted `σ/k₀` (well-localized packets).
pub const SPREAD_LIMIT: f64 = 0.1;
/// Purity correction above which the first-order series is flagged.
pub const PURITY_WARN: f64 = 0.2;
/// Denominator magnitude treated as a resonance in the matching condition.
pub const RESONANCE_EPS: f64 = 1e-12;

/// Scattering set-up: packets of mean wave numbers `±k₀` and spread `σ`,
/// initial separation `R₀`, and a square well of range `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringConfig {
    pub k0: f64,
    pub sigma_k0: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub a_s: f64,
    pub reduced_mass: f64,
    pub hbar: f64,
}

impl Default for ScatteringConfig {
    /// `k₀ = 1, σ = 0.1, R₀ = 10, L = 0.1, a_s = 10⁻⁵, μ = 0.5, ħ = 1`.
    fn default() -> Self {
        Self {
            k0: 1.0,
            sigma_k0: 0.1,
            r0: 10.0,
            l: 0.1,
            a_s: 1e-5,
            reduced_mass: 0.5,
            hbar: 1.0,
        }
    }
}

impl ScatteringConfig {
    pub fn with_scattering_length(self, a_s: f64) -> Self {
        Self { a_s, ..self }
    }

    /// Hard preconditions: positive scales and a repulsive scattering length.
    pub fn validate(&self) -> Result<()> {
        positive("k0", self.k0)?;
        positive("sigma_k0", self.sigma_k0)?;
        positive("R0", self.r0)?;
        positive("L", self.l)?;
        positive("reduced_mass", self.reduced_mass)?;
        positive("hbar", self.hbar)?;
        finite("a_s", self.a_s)?;
        if self.a_s < 0.0 {
            return Err(Error::Domain {
                name: "a_s",
                value: self.a_s,
                expected: "a_s >= 0 (repulsive case only)",
            });
        }
        Ok(())
    }

    /// Soft regime checks: low energy `k₀L < 0.3` and `σ/k₀ ≤ 0.1`.
    ///
    /// The spread limit is inclusive (with a relative slack for the
    /// representation error of the quotient), matching
    /// [`InitialConditions::validate`].
    pub fn regime_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.k0 * self.l >= LOW_ENERGY_LIMIT {
            w.push(format!(
                "k0*L = {} is outside the low-energy regime (< {LOW_ENERGY_LIMIT})",
                self.k0 * self.l
            ));
        }
        if self.sigma_k0 / self.k0 > SPREAD_LIMIT * (1.0 + 1e-12) {
            w.push(format!(
                "sigma_k0/k0 = {} is not well localized (<= {SPREAD_LIMIT})",
                self.sigma_k0 / self.k0
            ));
        }
        w
    }

    /// `c = (2k₀² + σ²)R₀`, the combination that multiplies `a_s` in the purity.
    pub fn coupling(&self) -> f64 {
        (2.0 * self.k0 * self.k0 + self.sigma_k0 * self.sigma_k0) * self.r0
    }

    /// Relative kinetic energy `E = ħ²k₀²/(2μ)`.
    pub fn energy(&self) -> f64 {
        self.hbar * self.hbar * self.k0 * self.k0 / (2.0 * self.reduced_mass)
    }
}

impl InitialConditions {
    /// Packet data of a scattering set-up: `p₀ = ħk₀`, `σ₀ = ħσ`, `R₀`.
    pub fn from_scattering(cfg: &ScatteringConfig, tau0: f64) -> Result<Self> {
        cfg.validate()?;
        InitialConditions::new(cfg.hbar * cfg.k0, cfg.hbar * cfg.sigma_k0, tau0, cfg.r0)
    }
}

/// Uncorrelated two-particle momentum density before the collision.
pub fn density_pre(cfg: &ScatteringConfig, k1: f64, k2: f64) -> Result<f64> {
    cfg.validate()?;
    let s2 = cfg.sigma_k0 * cfg.sigma_k0;
    let (d1, d2) = (k1 - cfg.k0, k2 + cfg.k0);
    Ok((-(d1 * d1 + d2 * d2) / (2.0 * s2)).exp() / (2.0 * PI * s2))
}

/// Correlated density after the collision: the equal-spread correlated
/// Gaussian centred at `(k₀, −k₀)` with correlation `r_QM`.
pub fn density_post(cfg: &ScatteringConfig, r_qm: f64, k1: f64, k2: f64) -> Result<f64> {
    cfg.validate()?;
    let params = ModelParams::new(r_qm)?;
    if r_qm >= R_QM_LIMIT {
        return Err(Error::Regime(format!(
            "r_QM = {r_qm} >= {R_QM_LIMIT}: the correlated-Gaussian identification needs r_QM << 1"
        )));
    }
    let state = Macrostate3::new(cfg.k0, -cfg.k0, cfg.sigma_k0)?;
    pdf_corr3(state, params, (k1, k2))
}

/// `ϱ(k) = 4i(k₀ − iσ²R₀)k² f/σ²` with `f = −a_s`.
pub fn varrho(cfg: &ScatteringConfig, k: f64) -> Result<Complex64> {
    cfg.validate()?;
    finite("k", k)?;
    let s2 = cfg.sigma_k0 * cfg.sigma_k0;
    let f = -cfg.a_s;
    Ok(Complex64::new(0.0, 4.0) * Complex64::new(cfg.k0, -s2 * cfg.r0) * (k * k * f / s2))
}

/// The approximate real part `4R₀k² f`; exact for a real amplitude.
pub fn varrho_real_approx(cfg: &ScatteringConfig, k: f64) -> Result<f64> {
    cfg.validate()?;
    Ok(4.0 * cfg.r0 * k * k * (-cfg.a_s))
}

/// `|ϱ(k)|² = 16(k₀² + σ⁴R₀²)k⁴f²/σ⁴`.
pub fn varrho_norm_sqr(cfg: &ScatteringConfig, k: f64) -> Result<f64> {
    cfg.validate()?;
    let s2 = cfg.sigma_k0 * cfg.sigma_k0;
    Ok(
        16.0 * (cfg.k0 * cfg.k0 + s2 * s2 * cfg.r0 * cfg.r0) * k.powi(4) * cfg.a_s * cfg.a_s
            / (s2 * s2),
    )
}

/// Quantum correlation coefficient `r_QM = √(8(2k₀²+σ²)R₀a_s)`; warns if ≥ 0.3.
pub fn r_qm(cfg: &ScatteringConfig) -> Result<Warned<f64>> {
    cfg.validate()?;
    let v = (8.0 * cfg.coupling() * cfg.a_s).sqrt();
    let mut w = Vec::new();
    if v >= R_QM_LIMIT {
        w.push(format!("r_QM = {v} >= {R_QM_LIMIT}: not small"));
    }
    Ok(Warned::with(v, w))
}

/// `∫ e^{−k²/σ²} kⁿ dk = δ_{n,2m} (2m−1)!! √π σ (σ²/2)^m`.
pub fn gaussian_moment(n: u32, sigma: f64) -> Result<f64> {
    positive("sigma", sigma)?;
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let m = n / 2;
    let dfact: f64 = (1..=m).map(|j| (2 * j - 1) as f64).product();
    Ok(dfact * PI.sqrt() * sigma * (0.5 * sigma * sigma).powi(m as i32))
}

/// Moment `∫ e^{−(k−k₀)²/σ²} kⁿ dk` about a shifted centre.
fn shifted_moment(n: u32, k0: f64, sigma: f64) -> Result<f64> {
    let mut acc = 0.0;
    let mut binom = 1.0;
    for j in 0..=n {
        acc += binom * k0.powi((n - j) as i32) * gaussian_moment(j, sigma)?;
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    Ok(acc)
}

/// Normalization integral of the scattered two-particle packet,
/// `∬ e^{−(K² + 4(k−k₀)²)/(4σ²)} |1 + ϱ(k)|² dk₁ dk₂`, which equals
/// `2πσ²[1 − 4(2k₀²+σ²)R₀a_s + 4(k₀²+σ⁴R₀²)(4k₀⁴+12k₀²σ²+3σ⁴)a_s²/σ⁴]`.
pub fn normalization_integral(cfg: &ScatteringConfig) -> Result<f64> {
    cfg.validate()?;
    let s = cfg.sigma_k0;
    let s2 = s * s;
    let m0 = shifted_moment(0, cfg.k0, s)?;
    let m2 = shifted_moment(2, cfg.k0, s)?;
    let m4 = shifted_moment(4, cfg.k0, s)?;
    let lin = -8.0 * cfg.r0 * cfg.a_s;
    let quad = 16.0 * (cfg.k0 * cfg.k0 + s2 * s2 * cfg.r0 * cfg.r0) * cfg.a_s * cfg.a_s / (s2 * s2);
    // The centre-of-mass factor ∫ e^{−K²/(4σ²)} dK = 2σ√π.
    Ok(2.0 * s * PI.sqrt() * (m0 + lin * m2 + quad * m4))
}

fn purity_checked(correction: f64, what: &str) -> Result<Warned<f64>> {
    if correction >= 1.0 {
        return Err(Error::Regime(format!(
            "{what}: purity correction {correction} >= 1"
        )));
    }
    let mut w = Vec::new();
    if correction >= PURITY_WARN {
        w.push(format!(
            "{what}: purity correction {correction} >= {PURITY_WARN}; first-order series is unreliable"
        ));
    }
    Ok(Warned::with(1.0 - correction, w))
}

/// First-order purity `1 − 8(2k₀²+σ²)R₀a_s`.
pub fn purity_series(cfg: &ScatteringConfig) -> Result<Warned<f64>> {
    cfg.validate()?;
    purity_checked(8.0 * cfg.coupling() * cfg.a_s, "purity_series")
}

/// Purity from the cross section, `1 − 4(2k₀²+σ²)R₀√Σ/√π`.
pub fn purity_cross_section(cfg: &ScatteringConfig, sigma_cs: f64) -> Result<Warned<f64>> {
    cfg.validate()?;
    nonnegative("sigma_cs", sigma_cs)?;
    purity_checked(
        4.0 * cfg.coupling() * sigma_cs.sqrt() / PI.sqrt(),
        "purity_cross_section",
    )
}

fn nonnegative(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::Domain {
            name,
            value: v,
            expected: "finite and >= 0",
        })
    }
}

/// Exact s-wave phase shift of a square well whose interior wave number is
/// `k_r = √(1−r)k₀`:
/// `tan θ₀ = (k₀ tan(k_rL) − k_r tan(k₀L))/(k_r + k₀ tan(k₀L) tan(k_rL))`.
pub fn phase_shift_exact(cfg: &ScatteringConfig, r: f64) -> Result<f64> {
    cfg.validate()?;
    ModelParams::new(r)?;
    let k0 = cfg.k0;
    let kr = (1.0 - r).sqrt() * k0;
    let (t0, tr) = ((k0 * cfg.l).tan(), (kr * cfg.l).tan());
    let num = k0 * tr - kr * t0;
    let den = kr + k0 * t0 * tr;
    if den.abs() < RESONANCE_EPS || !num.is_finite() || !den.is_finite() {
        return Err(Error::Resonance(format!(
            "matching denominator {den} vanishes at k0*L = {}, r = {r}",
            k0 * cfg.l
        )));
    }
    Ok((num / den).atan())
}

fn phase_regime(cfg: &ScatteringConfig, r: f64) -> Vec<String> {
    let mut w = Vec::new();
    if cfg.k0 * cfg.l >= LOW_ENERGY_LIMIT {
        w.push(format!(
            "k0*L = {} >= {LOW_ENERGY_LIMIT}: low-energy series is unreliable",
            cfg.k0 * cfg.l
        ));
    }
    if r >= 0.3 {
        w.push(format!("r = {r} >= 0.3: small-r series is unreliable"));
    }
    w
}

/// Leading low-energy phase shift `θ₀ ≈ −r(k₀L)³/3`; warns outside
/// `k₀L < 0.3`, `r < 0.3`.
pub fn phase_shift_series(cfg: &ScatteringConfig, r: f64) -> Result<Warned<f64>> {
    cfg.validate()?;
    ModelParams::new(r)?;
    let x = cfg.k0 * cfg.l;
    Ok(Warned::with(-r * x.powi(3) / 3.0, phase_regime(cfg, r)))
}

/// Low-energy phase shift through fifth order in `k₀L` and second order in `r`:
/// `tan θ₀ ≈ [−(k₀L)³/3 + (k₀L)⁵/15] r + [2(k₀L)⁵/15] r²`.
pub fn phase_shift_series_full(cfg: &ScatteringConfig, r: f64) -> Result<Warned<f64>> {
    cfg.validate()?;
    ModelParams::new(r)?;
    let x = cfg.k0 * cfg.l;
    let (x3, x5) = (x.powi(3), x.powi(5));
    let t = (-x3 / 3.0 + x5 / 15.0) * r + 2.0 * x5 / 15.0 * r * r;
    Ok(Warned::with(t.atan(), phase_regime(cfg, r)))
}

/// Phase shift from the well depth, `θ₀ ≈ −2μVk₀L³/(3ħ²)`.
pub fn phase_shift_from_potential(v: f64, cfg: &ScatteringConfig) -> Result<f64> {
    cfg.validate()?;
    repulsive(v)?;
    Ok(-2.0 * cfg.reduced_mass * v * cfg.k0 * cfg.l.powi(3) / (3.0 * cfg.hbar * cfg.hbar))
}

fn repulsive(v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::Domain {
            name: "V",
            value: v,
            expected: "V >= 0 (repulsive potentials only)",
        })
    }
}

/// Potential identified with a correlation, `V = rħ²k₀²/(2μ) = rE`.
pub fn potential_from_r(r: f64, cfg: &ScatteringConfig) -> Result<f64> {
    cfg.validate()?;
    ModelParams::new(r)?;
    Ok(r * cfg.energy())
}

/// Cross section `Σ = 4πr²k₀⁴L⁶/9`, i.e. `4πa_s²` with `a_s = rk₀²L³/3`.
pub fn cross_section(cfg: &ScatteringConfig, r: f64) -> Result<f64> {
    cfg.validate()?;
    ModelParams::new(r)?;
    Ok(4.0 * PI * r * r * cfg.k0.powi(4) * cfg.l.powi(6) / 9.0)
}

/// Scattering length implied by a correlation, `a_s = rk₀²L³/3`.
pub fn scattering_length_from_r(cfg: &ScatteringConfig, r: f64) -> Result<f64> {
    cfg.validate()?;
    ModelParams::new(r)?;
    Ok(r * cfg.k0 * cfg.k0 * cfg.l.powi(3) / 3.0)
}

/// Observable from which a correlation coefficient is inferred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RInput {
    Potential(f64),
    CrossSection(f64),
    Purity(f64),
    /// Linear entropy `1 − 𝒫`; avoids the cancellation of [`RInput::Purity`]
    /// when the purity is within a few ulps of one.
    LinearEntropy(f64),
}

/// Inverts the potential, cross-section or purity relation for `r`:
/// `2μV/(ħ²k₀²)`, `3√Σ/(2√π k₀²L³)` or `3(1−𝒫)/(8k₀²(2k₀²+σ²)R₀L³)`.
///
/// A purity within `δ` of one carries a relative error of about
/// `10⁻¹⁶/δ` in `1 − 𝒫`; pass the linear entropy instead when `r` is tiny.
pub fn r_inversion(cfg: &ScatteringConfig, input: RInput) -> Result<f64> {
    cfg.validate()?;
    let (k0, l3) = (cfg.k0, cfg.l.powi(3));
    match input {
        RInput::Potential(v) => {
            repulsive(v)?;
            Ok(2.0 * cfg.reduced_mass * v / (cfg.hbar * cfg.hbar * k0 * k0))
        }
        RInput::CrossSection(s) => {
            nonnegative("sigma_cs", s)?;
            Ok(3.0 * s.sqrt() / (2.0 * PI.sqrt() * k0 * k0 * l3))
        }
        RInput::Purity(p) => {
            if !(p.is_finite() && p <= 1.0) {
                return Err(Error::Domain {
                    name: "purity",
                    value: p,
                    expected: "purity <= 1",
                });
            }
            Ok(3.0 * (1.0 - p) / (8.0 * k0 * k0 * cfg.coupling() * l3))
        }
        RInput::LinearEntropy(s) => {
            nonnegative("linear_entropy", s)?;
            Ok(3.0 * s / (8.0 * k0 * k0 * cfg.coupling() * l3))
        }
    }
}

/// Linear entropy `1 − 𝒫 = 8rk₀²(2k₀²+σ²)R₀L³/3` implied by a correlation.
pub fn linear_entropy_from_r(cfg: &ScatteringConfig, r: f64) -> Result<f64> {
    cfg.validate()?;
    ModelParams::new(r)?;
    Ok(r * eta_c(cfg)?)
}

/// Purity in terms of the correlation, `1 − 8rk₀²(2k₀²+σ²)R₀L³/3`.
pub fn purity_from_r(cfg: &ScatteringConfig, r: f64) -> Result<f64> {
    cfg.validate()?;
    ModelParams::new(r)?;
    let corr = r * eta_c(cfg)?;
    purity_checked(corr, "purity_from_r").map(|w| w.value)
}

/// Complexity–purity coefficient `η_C = (8/3)k₀²(2k₀²+σ²)R₀L³`.
pub fn eta_c(cfg: &ScatteringConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(8.0 / 3.0 * cfg.k0 * cfg.k0 * cfg.coupling() * cfg.l.powi(3))
}

/// Uniform potential density `V/L³ = 4ħ²k₀⁴(2k₀²+σ²)R₀/(3μ)`.
pub fn potential_density(cfg: &ScatteringConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(4.0 * cfg.hbar * cfg.hbar * cfg.k0.powi(4) * cfg.coupling() / (3.0 * cfg.reduced_mass))
}

/// Phase shift from the square-well matching condition
/// `k_in cot(k_in L) = k_out cot(k_out L + θ)`, with `k_in = √(2μ(E−V))/ħ`
/// and `k_out = k₀`; the result is reduced to `(−π/2, π/2]`.
pub fn square_well_matching(cfg: &ScatteringConfig, v: f64) -> Result<f64> {
    cfg.validate()?;
    repulsive(v)?;
    let e = cfg.energy();
    if e <= v {
        return Err(Error::Inapplicable(format!(
            "E = {e} <= V = {v}: evanescent interior is not supported"
        )));
    }
    let k_in = (2.0 * cfg.reduced_mass * (e - v)).sqrt() / cfg.hbar;
    let k_out = cfg.k0;
    let phi = (k_out * (k_in * cfg.l).sin()).atan2(k_in * (k_in * cfg.l).cos());
    let mut theta = phi - k_out * cfg.l;
    theta -= PI * (theta / PI).round();
    if theta <= -PI / 2.0 {
        theta += PI;
    }
    Ok(theta)
}

/// Duration of the correlated (entangled) stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProlongationReport {
    pub r: f64,
    /// Exact prolongation `τ* − τ₀`.
    pub delta: f64,
    pub delta_approx: f64,
    pub delta_exact: f64,
    pub tau_star: f64,
    pub eta_delta: f64,
    pub r_bound: f64,
}

/// `η_Δ = ½e^{2A₀τ₀}`.
pub fn eta_delta(ic: &InitialConditions) -> Result<f64> {
    let a0 = amplitude_a0(ic)?;
    Ok(0.5 * (2.0 * a0 * ic.tau0).exp())
}

/// Bound `r < 2/η_Δ` beyond which the approximate prolongation diverges.
pub fn r_bound(ic: &InitialConditions) -> Result<f64> {
    Ok(2.0 / eta_delta(ic)?)
}

/// Prolongation `Δ = τ* − τ₀` needed by the correlated path to reach the
/// momentum the uncorrelated path has at `τ₀`.
///
/// Two forms are returned: the exact solve of
/// `tanh(A₀τ*) = (1−r)^{−1/2} tanh(A₀τ₀)` by inverse hyperbolic tangent, and
/// the approximation `Δ ≈ −ln[1 − η_Δ((1−r)^{−1/2} − 1)]/(2A₀)`.
/// Errors with [`Error::Bound`] when `r ≥ 2/η_Δ` or when either form has no
/// solution.
pub fn prolongation(ic: &InitialConditions, r: f64) -> Result<ProlongationReport> {
    ModelParams::new(r)?;
    let a0 = amplitude_a0(ic)?;
    let eta = eta_delta(ic)?;
    let rb = 2.0 / eta;
    if r >= rb {
        return Err(Error::Bound { r, r_bound: rb });
    }
    // (1−r)^{−1/2} − 1 without cancellation for small r.
    let excess = (-0.5 * (-r).ln_1p()).exp_m1();
    let arg = -excess * eta;
    if arg <= -1.0 {
        return Err(Error::Bound { r, r_bound: rb });
    }
    let delta_approx = -arg.ln_1p() / (2.0 * a0) + 0.0;

    let x = a0 * ic.tau0;
    let t = x.tanh();
    let s = (1.0 - r).sqrt();
    let one_minus_t = 2.0 / (1.0 + (2.0 * x).exp());
    let s_minus_t = -r / (1.0 + s) + one_minus_t;
    if s_minus_t <= 0.0 {
        // (1−r)^{−1/2} tanh(A₀τ₀) ≥ 1: no finite τ* exists.
        return Err(Error::Bound {
            r,
            r_bound: 1.0 / (x.cosh() * x.cosh()),
        });
    }
    let y = t / s;
    let one_minus_y = s_minus_t / s;
    let delta_exact = 0.5 * ((1.0 + y) * one_minus_t / (one_minus_y * (1.0 + t))).ln() / a0 + 0.0;
    Ok(ProlongationReport {
        r,
        delta: delta_exact,
        delta_approx,
        delta_exact,
        tau_star: ic.tau0 + delta_exact,
        eta_delta: eta,
        r_bound: rb,
    })
}

/// One row of a prolongation sweep; rows at or beyond the bound are flagged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProlongationRow {
    pub r: f64,
    pub delta_approx: Option<f64>,
    pub delta_exact: Option<f64>,
    /// `|Δ_approx − Δ_exact|/Δ_exact` (0 when both vanish).
    pub rel_gap: Option<f64>,
    pub flag: Option<String>,
}

/// Evaluates [`prolongation`] on a grid of correlations, keeping order.
pub fn prolongation_sweep(ic: &InitialConditions, rs: &[f64]) -> Result<Vec<ProlongationRow>> {
    ic.validate()?;
    Ok(rs
        .iter()
        .map(|&r| match prolongation(ic, r) {
            Ok(rep) => ProlongationRow {
                r,
                delta_approx: Some(rep.delta_approx),
                delta_exact: Some(rep.delta_exact),
                rel_gap: Some(if rep.delta_exact == 0.0 {
                    0.0
                } else {
                    (rep.delta_approx - rep.delta_exact).abs() / rep.delta_exact
                }),
                flag: None,
            },
            Err(e) => ProlongationRow {
                r,
                delta_approx: None,
                delta_exact: None,
                rel_gap: None,
                flag: Some(e.to_string()),
            },
        })
        .collect())
}

/// Outcome of one inline consistency check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTrip {
    pub name: String,
    pub residual: f64,
    pub passed: bool,
}

/// Aggregated scattering observables for one set-up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterReport {
    pub r_qm: f64,
    /// Correlation implied by the scattering length, `3a_s/(k₀²L³)`.
    pub r: f64,
    pub theta0: f64,
    pub sigma_cs: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub purity: f64,
    pub delta: Option<f64>,
    pub r_bound: f64,
    pub checks: Vec<RoundTrip>,
}

/// Computes every scattering observable and cross-checks them against one
/// another. Regime problems become warnings; domain errors are returned.
pub fn scatter_report(cfg: &ScatteringConfig, tau0: f64) -> Result<Warned<ScatterReport>> {
    cfg.validate()?;
    let mut warnings = cfg.regime_warnings();
    let ic = InitialConditions::from_scattering(cfg, tau0)?;
    let rq = r_qm(cfg)?;
    warnings.extend(rq.warnings);
    let sigma_cs = 4.0 * PI * cfg.a_s * cfg.a_s;
    let r = r_inversion(cfg, RInput::CrossSection(sigma_cs))?;
    ModelParams::new(r)
        .map_err(|_| Error::Regime(format!("implied correlation r = {r} is outside [0, 1)")))?;
    let theta0 = phase_shift_exact(cfg, r)?;
    let v = potential_from_r(r, cfg)?;
    let purity = purity_series(cfg)?;
    warnings.extend(purity.warnings);
    let rb = r_bound(&ic)?;
    let delta = match prolongation(&ic, r) {
        Ok(rep) => Some(rep.delta),
        Err(e @ Error::Bound { .. }) => {
            warnings.push(format!("prolongation undefined: {e}"));
            None
        }
        Err(e) => return Err(e),
    };

    let tol = 1e-10;
    let mut checks = Vec::new();
    let mut check = |name: &str, a: f64, b: f64| {
        let residual = (a - b).abs() / b.abs().max(1e-300).max(if b == 0.0 { 1.0 } else { 0.0 });
        checks.push(RoundTrip {
            name: name.to_string(),
            residual,
            passed: residual <= tol,
        });
    };
    check(
        "purity: series vs 1 - r_qm^2",
        purity.value,
        1.0 - rq.value * rq.value,
    );
    let pcs = purity_cross_section(cfg, sigma_cs)?.value;
    check("purity: series vs cross section", pcs, purity.value);
    match purity_from_r(cfg, r) {
        Ok(pr) => check("purity: series vs purity_from_r", pr, purity.value),
        Err(e) => warnings.push(format!("purity_from_r: {e}")),
    }
    check(
        "r: cross-section round trip",
        r_inversion(cfg, RInput::CrossSection(cross_section(cfg, r)?))?,
        r,
    );
    check(
        "r: potential round trip",
        r_inversion(cfg, RInput::Potential(v))?,
        r,
    );
    if let Ok(pr) = purity_from_r(cfg, r) {
        check(
            "r: purity round trip",
            r_inversion(cfg, RInput::Purity(pr))?,
            r,
        );
    }
    match square_well_matching(cfg, v) {
        Ok(th) => check("theta0: matching vs exact", th, theta0),
        Err(e) => warnings.push(format!("square_well_matching: {e}")),
    }
    for c in &checks {
        if !c.passed {
            warnings.push(format!(
                "check failed: {} (residual {:e})",
                c.name, c.residual
            ));
        }
    }
    Ok(Warned::with(
        ScatterReport {
            r_qm: rq.value,
            r,
            theta0,
            sigma_cs,
            v,
            purity: purity.value,
            delta,
            r_bound: rb,
            checks,
        },
        warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::quadrature::{legendre_on, normal_rule};
    use proptest::prelude::*;

    fn cfg() -> ScatteringConfig {
        ScatteringConfig::default()
    }

    #[test]
    fn density_pre_examples() {
        let c = cfg();
        let peak = density_pre(&c, 1.0, -1.0).unwrap();
        assert!((peak - 1.0 / (2.0 * PI * 0.01)).abs() < 1e-12);
        // Normalization by tensor Gauss–Hermite: the density is a product of
        // two normals, so Σwᵢwⱼ f/(N₁N₂) with N the normal density.
        let (x1, w1) = normal_rule(40, 1.0, 0.1);
        let (x2, w2) = normal_rule(40, -1.0, 0.1);
        let n = |x: f64, m: f64| (-(x - m).powi(2) / 0.02).exp() / ((2.0 * PI).sqrt() * 0.1);
        let mut total = 0.0;
        for i in 0..40 {
            for j in 0..40 {
                total += w1[i] * w2[j] * density_pre(&c, x1[i], x2[j]).unwrap()
                    / (n(x1[i], 1.0) * n(x2[j], -1.0));
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
        let s = Macrostate3::new(1.0, -1.0, 0.1).unwrap();
        for &(a, b) in &[(1.0, -1.0), (1.1, -0.95), (0.7, -1.2)] {
            let q = pdf_corr3(s, ModelParams::UNCORRELATED, (a, b)).unwrap();
            assert!((density_pre(&c, a, b).unwrap() - q).abs() <= 1e-13 * q);
        }
    }

    #[test]
    fn density_post_examples() {
        let c = cfg();
        for &(a, b) in &[(1.0, -1.0), (1.05, -0.9)] {
            let x = density_post(&c, 0.0, a, b).unwrap();
            assert!((x - density_pre(&c, a, b).unwrap()).abs() <= 1e-13 * x);
        }
        let r = 0.04;
        let peak = density_post(&c, r, 1.0, -1.0).unwrap();
        assert!((peak - 1.0 / (2.0 * PI * 0.01 * (1.0 - r * r).sqrt())).abs() < 1e-12);
        let (x, w) = legendre_on(120, 1.0, 0.8);
        let (y, v) = legendre_on(120, -1.0, 0.8);
        let mut total = 0.0;
        for i in 0..x.len() {
            for j in 0..y.len() {
                total += w[i] * v[j] * density_post(&c, r, x[i], y[j]).unwrap();
            }
        }
        assert!((total - 1.0).abs() < 1e-10);
        assert!(density_post(&c, 0.3, 1.0, -1.0).is_err());
    }

    #[test]
    fn varrho_examples() {
        let c = cfg().with_scattering_length(0.0);
        assert_eq!(varrho(&c, 1.0).unwrap(), Complex64::new(0.0, 0.0));
        let c = cfg();
        for &k in &[0.9, 1.0, 1.3] {
            let z = varrho(&c, k).unwrap();
            assert!((z.re - varrho_real_approx(&c, k).unwrap()).abs() < 1e-15);
            let n = varrho_norm_sqr(&c, k).unwrap();
            assert!((z.norm_sqr() - n).abs() <= 1e-13 * n);
        }
    }

    #[test]
    fn r_qm_examples() {
        assert_eq!(r_qm(&cfg().with_scattering_length(0.0)).unwrap().value, 0.0);
        let v = r_qm(&cfg()).unwrap();
        assert!((v.value - 0.040_099_875_311_526_84).abs() < 1e-15);
        assert!(v.warnings.is_empty());
        assert!(r_qm(&cfg().with_scattering_length(-1e-5)).is_err());
        assert_eq!(
            r_qm(&cfg().with_scattering_length(1e-2))
                .unwrap()
                .warnings
                .len(),
            1
        );
    }

    #[test]
    fn normalization_examples() {
        let c0 = cfg().with_scattering_length(0.0);
        assert!((normalization_integral(&c0).unwrap() - 2.0 * PI * 0.01).abs() < 1e-15);
        let c = cfg();
        let s2: f64 = 0.01;
        let closed = 2.0
            * PI
            * s2
            * (1.0 - 4.0 * c.coupling() * c.a_s
                + 4.0
                    * (1.0 + s2 * s2 * 100.0)
                    * (4.0 + 12.0 * s2 + 3.0 * s2 * s2)
                    * c.a_s
                    * c.a_s
                    / (s2 * s2));
        assert!((normalization_integral(&c).unwrap() - closed).abs() <= 1e-13 * closed);
        // Linear coefficient read off the bracket.
        let h = 1e-9;
        let slope = (normalization_integral(&cfg().with_scattering_length(h)).unwrap()
            - normalization_integral(&c0).unwrap())
            / h;
        let expect = -4.0 * c.coupling() * 2.0 * PI * s2;
        assert!((slope - expect).abs() < 1e-4 * expect.abs());
    }

    #[test]
    fn normalization_matches_quadrature() {
        // Direct 2D quadrature over (k₁, k₂) of the scattered intensity.
        let c = cfg().with_scattering_length(1e-3);
        let s = c.sigma_k0;
        let (x, w) = legendre_on(160, c.k0, 8.0 * s);
        let (y, v) = legendre_on(160, -c.k0, 8.0 * s);
        let mut total = 0.0;
        for i in 0..x.len() {
            for j in 0..y.len() {
                let big_k = x[i] + y[j];
                let k = 0.5 * (x[i] - y[j]);
                let g = (-(big_k * big_k + 4.0 * (k - c.k0).powi(2)) / (4.0 * s * s)).exp();
                let z = Complex64::new(1.0, 0.0) + varrho(&c, k).unwrap();
                total += w[i] * v[j] * g * z.norm_sqr();
            }
        }
        let closed = normalization_integral(&c).unwrap();
        assert!(
            (total - closed).abs() < 1e-8 * closed,
            "{total} vs {closed}"
        );
    }

    #[test]
    fn gaussian_moment_examples() {
        assert_eq!(gaussian_moment(1, 1.0).unwrap(), 0.0);
        assert!((gaussian_moment(0, 1.0).unwrap() - PI.sqrt()).abs() < 1e-15);
        assert!((gaussian_moment(4, 1.0).unwrap() - 1.329_340_388_179_137).abs() < 1e-15);
        let (x, w) = legendre_on(200, 0.0, 12.0);
        for n in 0..10u32 {
            let q: f64 = x
                .iter()
                .zip(&w)
                .map(|(x, w)| w * (-x * x / 2.25).exp() * x.powi(n as i32))
                .sum();
            let m = gaussian_moment(n, 1.5).unwrap();
            assert!((q - m).abs() < 1e-12 * m.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn purity_examples() {
        assert_eq!(
            purity_series(&cfg().with_scattering_length(0.0))
                .unwrap()
                .value,
            1.0
        );
        let p = purity_series(&cfg()).unwrap().value;
        assert!((p - 0.998_392).abs() < 1e-15);
        let rq = r_qm(&cfg()).unwrap().value;
        assert!((p - (1.0 - rq * rq)).abs() < 1e-15);
        assert_eq!(purity_cross_section(&cfg(), 0.0).unwrap().value, 1.0);
        let sigma_cs = 4.0 * PI * 1e-10;
        let pc = purity_cross_section(&cfg(), sigma_cs).unwrap().value;
        assert!((pc - p).abs() < 1e-15);
        assert!(purity_series(&cfg().with_scattering_length(0.01)).is_err());
        assert_eq!(
            purity_series(&cfg().with_scattering_length(3e-3))
                .unwrap()
                .warnings
                .len(),
            1
        );
    }

    #[test]
    fn phase_shift_examples() {
        let c = cfg();
        assert_eq!(phase_shift_exact(&c, 0.0).unwrap(), 0.0);
        let th = phase_shift_exact(&c, 0.01).unwrap();
        assert!((th + 3.326_540_507_626_48e-6).abs() < 1e-17, "{th:e}");
        let ser = phase_shift_series(&c, 0.01).unwrap().value;
        assert!(((th - ser) / ser).abs() < 0.02);
        assert!((phase_shift_series(&c, 0.1).unwrap().value + 3.333e-5).abs() < 1e-8);
        assert_eq!(phase_shift_series(&c, 0.0).unwrap().value, 0.0);
        let resid = |l: f64| {
            let c = ScatteringConfig { l, ..cfg() };
            (phase_shift_exact(&c, 0.01).unwrap() - phase_shift_series(&c, 0.01).unwrap().value)
                .abs()
        };
        let ratio = resid(0.1) / resid(0.05);
        assert!((ratio - 32.0).abs() < 1.0, "{ratio}");
        let full = phase_shift_series_full(&c, 0.01).unwrap().value;
        // The next correction is O(r(k₀L)⁷), a few percent of the fifth-order term.
        assert!((full - th).abs() < 0.02 * (th - ser).abs());
        let wide = ScatteringConfig { l: 0.5, ..cfg() };
        assert_eq!(phase_shift_series(&wide, 0.5).unwrap().warnings.len(), 2);
    }

    #[test]
    fn potential_chain() {
        let c = cfg();
        assert_eq!(phase_shift_from_potential(0.0, &c).unwrap(), 0.0);
        let c1 = ScatteringConfig {
            l: 0.1,
            reduced_mass: 0.5,
            ..cfg()
        };
        assert!((phase_shift_from_potential(1.0, &c1).unwrap() + 1e-3 / 3.0).abs() < 1e-15);
        assert!(phase_shift_from_potential(-1.0, &c1).is_err());
        assert_eq!(potential_from_r(0.0, &c).unwrap(), 0.0);
        assert_eq!(potential_from_r(0.5, &c).unwrap(), 0.5);
        assert_eq!(c.energy(), 1.0);
        for &r in &[1e-4, 0.01, 0.1] {
            let v = potential_from_r(r, &c).unwrap();
            let a = phase_shift_from_potential(v, &c).unwrap();
            let b = phase_shift_series(&c, r).unwrap().value;
            assert!((a - b).abs() <= 1e-15 * b.abs());
        }
    }

    #[test]
    fn cross_section_examples() {
        let c = cfg();
        assert_eq!(cross_section(&c, 0.0).unwrap(), 0.0);
        let s = cross_section(&c, 0.1).unwrap();
        assert!((s - 1.396_263_401_595_463_7e-8).abs() < 1e-20);
        let a = scattering_length_from_r(&c, 0.1).unwrap();
        assert!((s - 4.0 * PI * a * a).abs() < 1e-22);
    }

    #[test]
    fn inversions() {
        let c = cfg();
        assert_eq!(r_inversion(&c, RInput::Purity(1.0)).unwrap(), 0.0);
        assert!(r_inversion(&c, RInput::Purity(1.1)).is_err());
        assert!(r_inversion(&c, RInput::CrossSection(-1.0)).is_err());
        let p = purity_from_r(&c, 0.01).unwrap();
        assert!((p - 0.999_464).abs() < 1e-15, "{p}");
        assert!((r_inversion(&c, RInput::Purity(p)).unwrap() - 0.01).abs() < 1e-12);
        for &r in &[1e-6, 1e-3, 0.01, 0.1] {
            let v = potential_from_r(r, &c).unwrap();
            assert!((r_inversion(&c, RInput::Potential(v)).unwrap() - r).abs() < 1e-12 * r);
            let s = cross_section(&c, r).unwrap();
            assert!((r_inversion(&c, RInput::CrossSection(s)).unwrap() - r).abs() < 1e-12 * r);
            // Through 𝒫 itself the round trip is limited by 10⁻¹⁶/(1 − 𝒫).
            let p = purity_from_r(&c, r).unwrap();
            let lim = 4.0 * f64::EPSILON / (1.0 - p);
            assert!((r_inversion(&c, RInput::Purity(p)).unwrap() - r).abs() <= lim.max(1e-12) * r);
            let s = linear_entropy_from_r(&c, r).unwrap();
            assert!((r_inversion(&c, RInput::LinearEntropy(s)).unwrap() - r).abs() < 1e-12 * r);
            assert!((s - (1.0 - p)).abs() <= 2.0 * f64::EPSILON);
        }
    }

    #[test]
    fn purity_from_r_matches_series() {
        let c = cfg();
        let r = 0.01;
        let a_s = scattering_length_from_r(&c, r).unwrap();
        let ps = purity_series(&c.with_scattering_length(a_s)).unwrap().value;
        assert!((purity_from_r(&c, r).unwrap() - ps).abs() < 1e-15);
        let pc = crate::complexity::purity_from_complexity(r, eta_c(&c).unwrap()).unwrap();
        assert!((pc - ps).abs() < 1e-15);
    }

    #[test]
    fn potential_density_examples() {
        let c = cfg();
        assert!((potential_density(&c).unwrap() - 53.6).abs() < 1e-12);
        let c2 = ScatteringConfig { r0: 20.0, ..cfg() };
        assert!((potential_density(&c2).unwrap() - 2.0 * 53.6).abs() < 1e-12);
        // The density is the potential at r = η_C spread over the well volume.
        let r_star = eta_c(&c).unwrap();
        let v = potential_from_r(r_star, &c).unwrap();
        assert!((v / c.l.powi(3) - potential_density(&c).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn prolongation_desk() {
        let ic = InitialConditions::desk();
        let z = prolongation(&ic, 0.0).unwrap();
        assert_eq!((z.delta_approx, z.delta_exact), (0.0, 0.0));
        assert!(z.delta_approx.is_sign_positive() && z.delta_exact.is_sign_positive());
        let rep = prolongation(&ic, 0.01).unwrap();
        assert!((rep.eta_delta - 100.997_524_691_810_39).abs() < 1e-10);
        assert!((rep.r_bound - 0.019_802_465_516_881_865).abs() < 1e-15);
        assert!((rep.delta_approx - 0.133_927_151_636_631_97).abs() < 1e-13);
        assert!((rep.delta_exact - 0.133_435_136_637_258_9).abs() < 1e-13);
        assert!((rep.delta_approx / rep.delta_exact - 1.0).abs() < 0.005);
        assert_eq!(rep.tau_star, 1.0 + rep.delta_exact);
        assert!(matches!(prolongation(&ic, 0.02), Err(Error::Bound { .. })));
    }

    #[test]
    fn prolongation_narrow_packet_bound() {
        let ic = InitialConditions::new(1.0, 1e-3, 1.0, 10.0).unwrap();
        let rb = r_bound(&ic).unwrap();
        assert!((rb - 1.999_998e-6).abs() < 1e-11, "{rb:e}");
        assert!((rb / 2e-6 - 1.0).abs() < 0.05);
    }

    #[test]
    fn prolongation_sweep_flags() {
        let ic = InitialConditions::desk();
        let rows = prolongation_sweep(&ic, &[0.0, 0.005, 0.01, 0.03]).unwrap();
        assert_eq!(rows[0].delta_exact, Some(0.0));
        assert!(rows[1].delta_exact < rows[2].delta_exact);
        assert!(rows[3].flag.is_some() && rows[3].delta_exact.is_none());
    }

    #[test]
    fn matching_examples() {
        let c = cfg();
        assert!(square_well_matching(&c, 0.0).unwrap().abs() < 1e-16);
        for &r in &[1e-3, 0.01, 0.2] {
            let v = potential_from_r(r, &c).unwrap();
            let a = square_well_matching(&c, v).unwrap();
            let b = phase_shift_exact(&c, r).unwrap();
            assert!((a - b).abs() < 1e-14, "r={r}: {a} {b}");
        }
        let c5 = ScatteringConfig { l: 0.05, ..cfg() };
        let v = 1e-3;
        let a = square_well_matching(&c5, v).unwrap();
        let b = phase_shift_from_potential(v, &c5).unwrap();
        assert!(((a - b) / b).abs() < 1e-2);
        assert!(square_well_matching(&c, 2.0).is_err());
    }

    #[test]
    fn scatter_report_consistency() {
        let rep = scatter_report(&cfg().with_scattering_length(1e-6), 1.0).unwrap();
        assert!(
            rep.value.checks.iter().all(|c| c.passed),
            "{:?}",
            rep.value.checks
        );
        let zero = scatter_report(&cfg().with_scattering_length(0.0), 1.0)
            .unwrap()
            .value;
        assert_eq!(
            (zero.purity, zero.theta0, zero.delta),
            (1.0, 0.0, Some(0.0))
        );
        let narrow = ScatteringConfig {
            sigma_k0: 1e-3,
            ..cfg().with_scattering_length(1e-12)
        };
        let rep = scatter_report(&narrow, 1.0).unwrap().value;
        assert!((rep.r_bound / 2e-6 - 1.0).abs() < 0.05);
    }

    #[test]
    fn wide_packet_bounds_below_nominal() {
        let ic = InitialConditions::desk();
        let rb = r_bound(&ic).unwrap();
        let x = amplitude_a0(&ic).unwrap() * ic.tau0;
        let sech2 = 1.0 / (x.cosh() * x.cosh());
        let eta = eta_delta(&ic).unwrap();
        // Approximate form: (1−r)^{−1/2} − 1 = 1/η_Δ.
        let approx_limit = 1.0 - (1.0 + 1.0 / eta).powi(-2);
        assert!(sech2 < rb && approx_limit < rb);
        assert!(prolongation(&ic, 0.95 * rb).is_ok());
        for r in [0.999 * sech2.min(approx_limit), 0.99 * rb] {
            let ok = prolongation(&ic, r);
            assert_eq!(ok.is_ok(), r < sech2.min(approx_limit), "r/rb = {}", r / rb);
        }
    }

    proptest! {
        #[test]
        fn prolongation_monotone(f1 in 0.0f64..0.94, df in 1e-4f64..0.04) {
            // For the wide desk packet both forms lose their solution a little
            // below 2/η_Δ (see `wide_packet_bounds_below_nominal`).
            let ic = InitialConditions::desk();
            let rb = r_bound(&ic).unwrap();
            let f2 = (f1 + df).min(0.95);
            let a = prolongation(&ic, f1 * rb).unwrap();
            let b = prolongation(&ic, f2 * rb).unwrap();
            prop_assert!(b.delta_exact > a.delta_exact);
            prop_assert!(b.delta_approx > a.delta_approx);
            prop_assert!(a.delta_exact >= 0.0);
        }

        #[test]
        fn inversions_round_trip(r in 1e-8f64..0.5) {
            let c = cfg();
            let v = potential_from_r(r, &c).unwrap();
            prop_assert!((r_inversion(&c, RInput::Potential(v)).unwrap() - r).abs() <= 1e-12 * r);
            let s = cross_section(&c, r).unwrap();
            prop_assert!((r_inversion(&c, RInput::CrossSection(s)).unwrap() - r).abs() <= 1e-12 * r);
        }
    }
}
