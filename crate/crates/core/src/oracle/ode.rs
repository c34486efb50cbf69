//! Explicit Runge–Kutta integrators: adaptive Dormand–Prince 5(4) and
//! fixed-step classic RK4.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integration method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rk4,
    Rk45Adaptive,
}

/// Integrator settings. `step` is used by RK4 and as the initial trial step
/// of the adaptive method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSpec {
    pub method: Method,
    pub step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl OdeSpec {
    pub fn adaptive(rtol: f64, atol: f64) -> Self {
        Self {
            method: Method::Rk45Adaptive,
            step: 1e-3,
            rtol,
            atol,
            max_steps: 2_000_000,
        }
    }

    pub fn rk4(step: f64) -> Self {
        Self {
            method: Method::Rk4,
            step,
            rtol: 0.0,
            atol: 0.0,
            max_steps: 50_000_000,
        }
    }

    /// The same spec with tolerances (or the fixed step) tightened, for
    /// convergence self-tests.
    pub fn refined(&self) -> Self {
        match self.method {
            Method::Rk4 => Self::rk4(self.step / 2.0),
            Method::Rk45Adaptive => Self {
                rtol: self.rtol / 2.0,
                atol: self.atol / 2.0,
                ..*self
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.step > 0.0
            && self.step.is_finite()
            && match self.method {
                Method::Rk4 => true,
                Method::Rk45Adaptive => self.rtol > 0.0 && self.atol > 0.0,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                name: "ode spec",
                value: self.step,
                expected: "positive step and tolerances",
            })
        }
    }
}

impl Default for OdeSpec {
    /// Adaptive Dormand–Prince with `rtol = atol = 1e-10`.
    fn default() -> Self {
        Self::adaptive(1e-10, 1e-10)
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y′ = f(t, y)` from `t_out[0]` (where `y = y0`) and returns the
/// state at every entry of `t_out`, which must be strictly monotone in either
/// direction. The integrator lands exactly on each output time.
pub fn integrate<F>(mut f: F, y0: &[f64], t_out: &[f64], spec: &OdeSpec) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    spec.validate()?;
    if t_out.is_empty() {
        return Ok(Vec::new());
    }
    let dir = if t_out.len() > 1 && t_out[1] < t_out[0] {
        -1.0
    } else {
        1.0
    };
    if t_out.windows(2).any(|w| (w[1] - w[0]) * dir <= 0.0) {
        return Err(Error::Domain {
            name: "t_out",
            value: t_out.len() as f64,
            expected: "strictly monotone output times",
        });
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(t_out.len());
    out.push(y.clone());
    let mut h = spec.step;
    let mut steps = 0usize;
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    for w in t_out.windows(2) {
        let (mut t, t_end) = (w[0], w[1]);
        match spec.method {
            Method::Rk4 => {
                let m = ((t_end - t).abs() / spec.step).ceil().max(1.0) as usize;
                let hh = (t_end - t) / m as f64;
                for i in 0..m {
                    rk4_step(&mut f, t, &mut y, hh, &mut k, &mut tmp);
                    t = w[0] + hh * (i + 1) as f64;
                    steps += 1;
                }
            }
            Method::Rk45Adaptive => {
                f(t, &y, &mut k[0]);
                while (t_end - t) * dir > 0.0 {
                    if steps >= spec.max_steps {
                        return Err(Error::Convergence(format!(
                            "ODE integration exceeded {} steps at t = {t}",
                            spec.max_steps
                        )));
                    }
                    let last = h >= (t_end - t).abs();
                    let hs = if last { t_end - t } else { dir * h };
                    let (err, y_new) = dopri_step(&mut f, t, &y, hs, spec, &mut k, &mut tmp);
                    steps += 1;
                    if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                        h *= 0.2;
                        if h < 1e-14 * t.abs().max(1.0) {
                            return Err(Error::Convergence(format!(
                                "ODE step underflow at t = {t} (solution left its domain)"
                            )));
                        }
                        continue;
                    }
                    if err <= 1.0 {
                        t = if last { t_end } else { t + hs };
                        y = y_new;
                        // First-same-as-last: the stage-7 slope starts the next step.
                        k.swap(0, 6);
                    }
                    let fac = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    if !(err <= 1.0 && last) {
                        h = hs.abs() * fac;
                    }
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::Convergence(format!(
                            "ODE step size underflow at t = {t}"
                        )));
                    }
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn rk4_step<F>(f: &mut F, t: f64, y: &mut [f64], h: f64, k: &mut [Vec<f64>], tmp: &mut [f64])
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    f(t, y, &mut k[0]);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k[0][i];
    }
    f(t + 0.5 * h, tmp, &mut k[1]);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k[1][i];
    }
    f(t + 0.5 * h, tmp, &mut k[2]);
    for i in 0..n {
        tmp[i] = y[i] + h * k[2][i];
    }
    f(t + h, tmp, &mut k[3]);
    for i in 0..n {
        y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
}

/// One Dormand–Prince step from `(t, y)` with `k[0] = f(t, y)` on entry.
/// Returns the scaled error norm and the fifth-order solution; `k[6]` holds
/// the slope at the new point.
fn dopri_step<F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    h: f64,
    spec: &OdeSpec,
    k: &mut [Vec<f64>],
    tmp: &mut [f64],
) -> (f64, Vec<f64>)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    for s in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += A[s][j] * kj[i];
            }
            tmp[i] = y[i] + h * acc;
        }
        f(t + C[s] * h, tmp, &mut k[s]);
    }
    // Stage 7 was evaluated at the fifth-order solution (tmp).
    let y_new = tmp.to_vec();
    let mut sum = 0.0;
    for i in 0..n {
        let mut e = 0.0;
        for (s, ks) in k.iter().enumerate() {
            e += E[s] * ks[i];
        }
        let sc = spec.atol + spec.rtol * y[i].abs().max(y_new[i].abs());
        let r = h * e / sc;
        sum += r * r;
    }
    ((sum / n as f64).sqrt(), y_new)
}
