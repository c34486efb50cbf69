//! Oracle-versus-closed-form verification suite.
//!
//! Each suite runs a group of checks; a check records the measured
//! residual, the tolerance it is held to, and whether it passed. Errors
//! raised inside a check mark that check as failed instead of aborting the
//! run.

use serde::{Deserialize, Serialize};

use super::ode::OdeSpec;
use super::quadrature::QuadratureSpec;
use super::{
    curvature_fd, dimensional_reduction_check, fisher_metric_numeric, geodesic_integrate,
    geodesic_round_trip, igc_numeric, jacobi_integrate, purity_bruteforce, FisherMetric,
    FisherModel, PurityNormalization, ReductionInput, FD_STEP,
};
use crate::chaos::velocity_norm_squared;
use crate::complexity::{igc_closed, igc_ratio, ige_closed, r_from_complexities};
use crate::curvature::{
    coordinate_sectionals, max_abs4, maximal_symmetry_check, riemann, scalar_curvature, weyl,
};
use crate::error::{Error, Result};
use crate::geodesics::{
    amplitude_a0, geodesic_residual, tau_grid_with_junction, Branch, GeodesicPath,
    InitialConditions,
};
use crate::models::{metric_corr3, metric_corr4, Macrostate3, Macrostate4, ModelParams};
use crate::scattering::{
    cross_section, linear_entropy_from_r, phase_shift_exact, phase_shift_series, potential_from_r,
    prolongation, purity_series, r_bound, r_inversion, square_well_matching, RInput,
    ScatteringConfig,
};

/// Names of the available suites, in execution order.
pub const SUITES: &[&str] = &[
    "curvature",
    "geodesics",
    "chaos",
    "fisher",
    "complexity",
    "purity",
    "scattering",
    "prolongation",
    "inversions",
    "reduction",
];

/// Deliberate corruption used to demonstrate that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Adds the given amount to the `(0, 0)` entry of every closed-form
    /// metric the Fisher suite compares against.
    MetricEntry(f64),
}

/// Suite selection and tolerance overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Suites to run; empty means all.
    pub only: Vec<String>,
    /// Multiplier applied to every residual tolerance (not to ratio windows).
    pub tolerance_scale: f64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            only: Vec::new(),
            tolerance_scale: 1.0,
            fault: None,
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    /// Measured residual (or the measured quantity for window checks).
    pub residual: f64,
    /// Upper bound on `residual` (or the window's upper edge).
    pub tolerance: f64,
    /// Lower window edge for two-sided checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Full verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Recorder<'a> {
    suite: &'static str,
    scale: f64,
    checks: &'a mut Vec<Check>,
}

impl Recorder<'_> {
    /// `residual ≤ tol·scale`.
    fn below(&mut self, name: &str, tol: f64, residual: Result<f64>) {
        let tol = tol * self.scale;
        self.push(name, residual, tol, None, |v| v <= tol);
    }

    /// `lo ≤ value ≤ hi`, unaffected by the tolerance scale.
    fn within(&mut self, name: &str, lo: f64, hi: f64, value: Result<f64>) {
        self.push(name, value, hi, Some(lo), |v| (lo..=hi).contains(&v));
    }

    /// Boolean property; the residual is 0 on success and 1 on failure.
    fn holds(&mut self, name: &str, ok: Result<bool>) {
        let v = ok.map(|b| if b { 0.0 } else { 1.0 });
        self.push(name, v, 0.0, None, |v| v == 0.0);
    }

    fn push(
        &mut self,
        name: &str,
        v: Result<f64>,
        tol: f64,
        lower: Option<f64>,
        ok: impl Fn(f64) -> bool,
    ) {
        let (residual, passed, error) = match v {
            Ok(v) => (v, ok(v), None),
            Err(e) => (f64::NAN, false, Some(e.to_string())),
        };
        self.checks.push(Check {
            suite: self.suite.to_string(),
            name: name.to_string(),
            residual,
            tolerance: tol,
            lower,
            passed,
            error,
        });
    }
}

const SIGMAS: [f64; 3] = [0.1, 1.0, 10.0];
const RS: [f64; 4] = [0.0, 0.3, 0.7, 0.9];

fn p(r: f64) -> Result<ModelParams> {
    ModelParams::new(r)
}

fn over_grid(mut f: impl FnMut(f64, ModelParams) -> Result<f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in SIGMAS {
        for r in RS {
            worst = worst.max(f(s, p(r)?)?);
        }
    }
    Ok(worst)
}

fn suite_curvature(rec: &mut Recorder) {
    rec.below(
        "scalar curvature = -3/2 (closed form)",
        1e-12,
        over_grid(|_, pr| Ok((scalar_curvature(pr)? + 1.5).abs())),
    );
    rec.below(
        "coordinate sectionals = -1/4 (closed form)",
        1e-12,
        over_grid(|s, pr| {
            let ks = coordinate_sectionals(&riemann(s, pr)?, &metric_corr3(s, pr)?)?;
            Ok(ks.iter().map(|k| (k + 0.25).abs()).fold(0.0, f64::max))
        }),
    );
    rec.below(
        "scalar and sectionals (finite differences)",
        1e-5,
        over_grid(|s, pr| {
            let b = curvature_fd(s, pr, FD_STEP)?.bundle;
            let ks = b
                .sectional
                .iter()
                .map(|k| (k + 0.25).abs())
                .fold(0.0, f64::max);
            Ok(ks.max((b.scalar + 1.5).abs()))
        }),
    );
    rec.below(
        "Weyl / max|Riemann| (closed form)",
        1e-12,
        over_grid(|s, pr| Ok(max_abs4(&weyl(s, pr)?) / max_abs4(&riemann(s, pr)?))),
    );
    rec.below(
        "Weyl / max|Riemann| (finite differences)",
        1e-5,
        over_grid(|s, pr| {
            let b = curvature_fd(s, pr, FD_STEP)?.bundle;
            Ok(max_abs4(&b.weyl) / max_abs4(&b.riemann))
        }),
    );
    rec.below(
        "maximal-symmetry residuals / tensor scale",
        1e-12,
        over_grid(|s, pr| {
            let rep = maximal_symmetry_check(s, pr)?;
            let scale = max_abs4(&riemann(s, pr)?).max(metric_corr3(s, pr)?.amax());
            Ok(rep.max() / scale)
        }),
    );
}

fn suite_geodesics(rec: &mut Recorder) {
    let ic = InitialConditions::desk();
    for r in [0.0, 0.5] {
        rec.below(
            &format!("closed-form path satisfies geodesic equations, r={r}"),
            1e-6,
            p(r).and_then(|pr| geodesic_residual(pr, &ic, &tau_grid_with_junction(-1.0, 1.0, 81)?)),
        );
        rec.below(
            &format!("adaptive ODE reproduces path, r={r}"),
            1e-6,
            p(r).and_then(|pr| {
                Ok(
                    geodesic_integrate(pr, &ic, (-1.0, 1.0), 41, &OdeSpec::default())?
                        .max_rel_error,
                )
            }),
        );
        rec.below(
            &format!("forward-backward round trip, r={r}"),
            1e-8,
            p(r).and_then(|pr| geodesic_round_trip(pr, &ic, &OdeSpec::default())),
        );
    }
    let narrow = InitialConditions::new(1.0, 1e-3, 1.0, 10.0);
    rec.below(
        "A0*tau0 at sigma0/p0 = 1e-3",
        1e-6,
        narrow.and_then(|ic| Ok((amplitude_a0(&ic)? * ic.tau0 - 7.254_329_369).abs())),
    );
}

fn suite_chaos(rec: &mut Recorder) {
    let ic = InitialConditions::desk();
    rec.below(
        "velocity norm constant along paths (relative)",
        1e-9,
        (|| {
            let mut worst: f64 = 0.0;
            for r in [0.0, 0.5] {
                let pr = p(r)?;
                let expect = velocity_norm_squared(pr, &ic, 0.0)?;
                for branch in [Branch::Before, Branch::After] {
                    let path = GeodesicPath::new(branch, pr, ic)?;
                    for i in 0..=40 {
                        let t = -1.0 + 0.05 * i as f64;
                        let g = metric_corr3(path.state(t)?.sigma, path.metric_params())?;
                        let v = nalgebra::Vector3::from(path.velocity(t)?);
                        worst = worst.max((v.dot(&(g * v)) - expect).abs() / expect);
                    }
                }
            }
            Ok(worst)
        })(),
    );
    let a0 = amplitude_a0(&ic);
    let mut rates = Vec::new();
    for r in [0.0, 0.5] {
        let rate = a0.clone().and_then(|a0| {
            Ok(jacobi_integrate(p(r)?, &ic, 20.0 / a0, 201, 1.0, &OdeSpec::default())?.growth_rate)
        });
        rec.below(
            &format!("Jacobi growth fit: |2*rate - 2A0|/(2A0), r={r}"),
            0.01,
            rate.clone()
                .and_then(|rt| Ok((rt / a0.clone()? - 1.0).abs())),
        );
        rates.push(rate);
    }
    rec.below(
        "Jacobi growth rate r-independent (relative)",
        1e-6,
        (|| Ok((rates[0].clone()? - rates[1].clone()?).abs() / a0.clone()?))(),
    );
    rec.below(
        "vector Jacobi intensity vs sinh form on [0.5, 5]/A0 (relative)",
        1e-5,
        (|| {
            let a0 = a0.clone()?;
            let mut worst: f64 = 0.0;
            for r in [0.0, 0.5] {
                let run = jacobi_integrate(p(r)?, &ic, 5.0 / a0, 101, 1.0, &OdeSpec::default())?;
                for (t, j) in run.tau.iter().zip(&run.intensity) {
                    if *t >= 0.5 / a0 {
                        let e = crate::chaos::jacobi_intensity(*t, 1.0, a0)?;
                        worst = worst.max(((j - e) / e).abs());
                    }
                }
            }
            Ok(worst)
        })(),
    );
}

fn suite_fisher(rec: &mut Recorder, fault: Option<Fault>) {
    let bump = match fault {
        Some(Fault::MetricEntry(d)) => d,
        None => 0.0,
    };
    let spec = QuadratureSpec::default();
    rec.below(
        "3D metric quadrature vs closed form (entrywise)",
        1e-6,
        over_grid(|s, pr| {
            let FisherMetric::Three(num) = fisher_metric_numeric(
                FisherModel::Corr3(Macrostate3::new(0.2, -0.1, s)?, pr),
                &spec,
            )?
            else {
                unreachable!()
            };
            let mut closed = metric_corr3(s, pr)?;
            closed[(0, 0)] += bump;
            Ok((num - closed).amax() / closed.amax().max(1.0))
        }),
    );
    rec.below(
        "4D metric quadrature vs closed form (entrywise)",
        1e-6,
        (|| {
            let mut worst: f64 = 0.0;
            for (sx, sy) in [(1.0, 2.0), (0.1, 1.0), (10.0, 0.5)] {
                for r in RS {
                    let pr = p(r)?;
                    let model = FisherModel::Corr4(Macrostate4::new(0.0, 1.0, sx, sy)?, pr);
                    let FisherMetric::Four(num) = fisher_metric_numeric(model, &spec)? else {
                        unreachable!()
                    };
                    let mut closed = metric_corr4(sx, sy, pr)?;
                    closed[(0, 0)] += bump;
                    worst = worst.max((num - closed).amax() / closed.amax().max(1.0));
                }
            }
            Ok(worst)
        })(),
    );
}

fn suite_complexity(rec: &mut Recorder) {
    let ic = InitialConditions::desk();
    let spec = QuadratureSpec::adaptive(1e-10);
    for lt in [1.0, 5.0, 10.0] {
        rec.below(
            &format!(
                "nested volume integral vs closed-form IGC, lambda*tau={lt}, r=0.3 (relative)"
            ),
            1e-5,
            (|| {
                let tau = lt / (2.0 * amplitude_a0(&ic)?);
                let pr = p(0.3)?;
                let num = igc_numeric(tau, pr, &ic, &spec)?;
                let closed = igc_closed(tau, pr, &ic)?;
                Ok(((num - closed) / closed).abs())
            })(),
        );
    }
    rec.below(
        "IGC ratio and IGE gap vs sqrt((1-r)/(1+r))",
        1e-12,
        (|| {
            let mut worst: f64 = 0.0;
            let tau = 10.0 / (2.0 * amplitude_a0(&ic)?);
            for r in [0.1, 0.3, 0.7, 0.9] {
                let pr = p(r)?;
                let ratio =
                    igc_closed(tau, pr, &ic)? / igc_closed(tau, ModelParams::UNCORRELATED, &ic)?;
                worst = worst.max((ratio - igc_ratio(pr)?).abs());
                let gap = ige_closed(tau, pr, &ic)?.value
                    - ige_closed(tau, ModelParams::UNCORRELATED, &ic)?.value;
                worst = worst.max((gap - 0.5 * ((1.0 - r) / (1.0 + r)).ln()).abs());
            }
            Ok(worst)
        })(),
    );
}

fn suite_purity(rec: &mut Recorder) {
    let spec = QuadratureSpec::gauss_legendre(64, 8.0);
    let run = |a: f64| -> Result<(f64, f64)> {
        let cfg = ScatteringConfig::default().with_scattering_length(a);
        let b = purity_bruteforce(&cfg, &spec, PurityNormalization::default())?
            .value
            .purity;
        Ok((b, purity_series(&cfg)?.value))
    };
    rec.below(
        "product state purity = 1",
        1e-10,
        run(0.0).map(|(b, _)| (b - 1.0).abs()),
    );
    rec.within(
        "residual ratio a_s = 1e-5 vs 5e-6",
        3.5,
        4.5,
        (|| {
            let (b1, s1) = run(1e-5)?;
            let (b2, s2) = run(5e-6)?;
            Ok((b1 - s1).abs() / (b2 - s2).abs())
        })(),
    );
}

fn suite_scattering(rec: &mut Recorder) {
    let cfg = ScatteringConfig::default();
    rec.below(
        "exact vs series phase shift at k0L = 0.1, r = 0.01 (relative)",
        0.02,
        (|| {
            let e = phase_shift_exact(&cfg, 0.01)?;
            let s = phase_shift_series(&cfg, 0.01)?.value;
            Ok(((e - s) / s).abs())
        })(),
    );
    rec.below(
        "square-well matching vs tan-form phase shift",
        1e-12,
        (|| {
            let v = potential_from_r(0.01, &cfg)?;
            Ok((square_well_matching(&cfg, v)? - phase_shift_exact(&cfg, 0.01)?).abs())
        })(),
    );
    rec.within(
        "residual ratio when k0L halves (expect 2^5)",
        28.8,
        35.2,
        (|| {
            let resid = |l: f64| -> Result<f64> {
                let c = ScatteringConfig { l, ..cfg };
                Ok((phase_shift_exact(&c, 0.01)? - phase_shift_series(&c, 0.01)?.value).abs())
            };
            Ok(resid(0.1)? / resid(0.05)?)
        })(),
    );
}

fn suite_prolongation(rec: &mut Recorder) {
    let ic = InitialConditions::new(1.0, 1e-3, 1.0, 10.0);
    rec.below(
        "r_bound vs 2e-6 (relative)",
        0.05,
        ic.clone()
            .and_then(|ic| Ok((r_bound(&ic)? / 2e-6 - 1.0).abs())),
    );
    rec.below(
        "exact vs approximate prolongation for r <= r_bound/2 (relative)",
        0.01,
        ic.clone().and_then(|ic| {
            let rb = r_bound(&ic)?;
            let mut worst: f64 = 0.0;
            for f in [0.05, 0.1, 0.25, 0.4, 0.5] {
                let rep = prolongation(&ic, f * rb)?;
                worst = worst.max((rep.delta_approx / rep.delta_exact - 1.0).abs());
            }
            Ok(worst)
        }),
    );
    rec.holds(
        "Delta(0) = 0",
        ic.clone().and_then(|ic| {
            let z = prolongation(&ic, 0.0)?;
            Ok(z.delta_exact == 0.0 && z.delta_approx == 0.0)
        }),
    );
    rec.holds(
        "Delta monotone in r",
        ic.clone().and_then(|ic| {
            let rb = r_bound(&ic)?;
            let mut prev = (-1.0, -1.0);
            for i in 0..=19 {
                let rep = prolongation(&ic, rb * i as f64 / 20.0)?;
                if !(rep.delta_exact > prev.0 && rep.delta_approx > prev.1) {
                    return Ok(false);
                }
                prev = (rep.delta_exact, rep.delta_approx);
            }
            Ok(true)
        }),
    );
    rec.within(
        "Delta(0.9 r_bound) / Delta(0.5 r_bound) > 10",
        10.0,
        f64::INFINITY,
        ic.and_then(|ic| {
            let rb = r_bound(&ic)?;
            Ok(prolongation(&ic, 0.9 * rb)?.delta / prolongation(&ic, 0.5 * rb)?.delta)
        }),
    );
}

fn suite_inversions(rec: &mut Recorder) {
    let cfg = ScatteringConfig::default();
    rec.below(
        "potential, cross-section, purity and complexity inversions recover r (relative)",
        1e-10,
        (|| {
            let mut worst: f64 = 0.0;
            for r in [1e-6, 1e-3, 0.01, 0.1] {
                let back = [
                    r_inversion(&cfg, RInput::Potential(potential_from_r(r, &cfg)?))?,
                    r_inversion(&cfg, RInput::CrossSection(cross_section(&cfg, r)?))?,
                    r_inversion(&cfg, RInput::LinearEntropy(linear_entropy_from_r(&cfg, r)?))?,
                    r_from_complexities(1.0, igc_ratio(p(r)?)?)?,
                ];
                for b in back {
                    worst = worst.max(((b - r) / r).abs());
                }
            }
            Ok(worst)
        })(),
    );
}

fn suite_reduction(rec: &mut Recorder) {
    let spec = QuadratureSpec::gauss_legendre(40, 8.0);
    rec.below(
        "6D vs reduced 2D normalization, sigma=0.1, k0=1",
        1e-9,
        dimensional_reduction_check(&(&ScatteringConfig::default()).into(), &spec),
    );
    rec.below(
        "6D vs reduced 2D normalization, sigma=1, k0=0",
        1e-9,
        dimensional_reduction_check(
            &ReductionInput {
                k0: 0.0,
                sigma: [1.0; 3],
            },
            &spec,
        ),
    );
    rec.holds(
        "anisotropic spreads flagged inapplicable",
        Ok(matches!(
            dimensional_reduction_check(
                &ReductionInput {
                    k0: 1.0,
                    sigma: [0.1, 0.2, 0.1]
                },
                &spec
            ),
            Err(Error::Inapplicable(_))
        )),
    );
}

/// Runs the selected suites.
///
/// Unknown suite names are a [`Error::Domain`]-style usage error.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    if !(opts.tolerance_scale > 0.0 && opts.tolerance_scale.is_finite()) {
        return Err(Error::Domain {
            name: "tolerance_scale",
            value: opts.tolerance_scale,
            expected: "positive and finite",
        });
    }
    if let Some(bad) = opts.only.iter().find(|s| !SUITES.contains(&s.as_str())) {
        return Err(Error::Inapplicable(format!(
            "unknown suite '{bad}'; available: {}",
            SUITES.join(", ")
        )));
    }
    let mut checks = Vec::new();
    for &suite in SUITES {
        if !opts.only.is_empty() && !opts.only.iter().any(|s| s == suite) {
            continue;
        }
        let mut rec = Recorder {
            suite,
            scale: opts.tolerance_scale,
            checks: &mut checks,
        };
        match suite {
            "curvature" => suite_curvature(&mut rec),
            "geodesics" => suite_geodesics(&mut rec),
            "chaos" => suite_chaos(&mut rec),
            "fisher" => suite_fisher(&mut rec, opts.fault),
            "complexity" => suite_complexity(&mut rec),
            "purity" => suite_purity(&mut rec),
            "scattering" => suite_scattering(&mut rec),
            "prolongation" => suite_prolongation(&mut rec),
            "inversions" => suite_inversions(&mut rec),
            "reduction" => suite_reduction(&mut rec),
            _ => unreachable!("suite list and dispatch are kept in sync"),
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn only(s: &str) -> VerifyOptions {
        VerifyOptions {
            only: vec![s.to_string()],
            ..Default::default()
        }
    }

    #[test]
    fn curvature_suite_passes_and_filters() {
        let rep = run_verify(&only("curvature")).unwrap();
        assert!(rep.passed, "{:?}", rep.failures().collect::<Vec<_>>());
        assert!(rep.checks.iter().all(|c| c.suite == "curvature"));
    }

    #[test]
    fn injected_fault_fails() {
        let clean = run_verify(&only("fisher")).unwrap();
        assert!(clean.passed, "{:?}", clean.failures().collect::<Vec<_>>());
        let opts = VerifyOptions {
            fault: Some(Fault::MetricEntry(1e-3)),
            ..only("fisher")
        };
        assert!(!run_verify(&opts).unwrap().passed);
    }

    #[test]
    fn unknown_suite_rejected() {
        assert!(run_verify(&only("nope")).is_err());
        let bad = VerifyOptions {
            tolerance_scale: 0.0,
            ..Default::default()
        };
        assert!(run_verify(&bad).is_err());
    }

    #[test]
    fn prolongation_ratio_is_the_only_prolongation_failure() {
        let rep = run_verify(&only("prolongation")).unwrap();
        let failed: Vec<_> = rep.failures().map(|c| c.name.as_str()).collect();
        assert_eq!(failed, ["Delta(0.9 r_bound) / Delta(0.5 r_bound) > 10"]);
    }
}
