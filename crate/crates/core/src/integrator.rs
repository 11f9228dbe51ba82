//! Adaptive Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! Step control and the fourth-order interpolant follow Hairer, Nørsett and
//! Wanner's DOPRI5. The error norm is the RMS of the componentwise error
//! scaled by `abs_tol + rel_tol * max(|y_old|, |y_new|)`.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self {
            rel,
            abs,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn rms<const D: usize>(v: &[f64; D], scale: &[f64; D]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(e, s)| (e / s).powi(2)).sum();
    (s / D as f64).sqrt()
}

fn finite<const D: usize>(y: &[f64; D]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates `y' = f(x, y)` from `x0` to `x_end` and returns the state at
/// each of `samples` (ascending, inside `[x0, x_end]`).
pub fn integrate<const D: usize, F>(
    mut f: F,
    x0: f64,
    y0: [f64; D],
    x_end: f64,
    samples: &[f64],
    tol: Tolerances,
) -> Result<(Vec<[f64; D]>, Stats)>
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D]>,
{
    if x_end.partial_cmp(&x0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Param(format!(
            "empty integration interval [{x0}, {x_end}]"
        )));
    }
    let mut stats = Stats::default();
    let mut out = Vec::with_capacity(samples.len());
    let mut next = 0usize;
    while next < samples.len() && samples[next] <= x0 {
        out.push(y0);
        next += 1;
    }

    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y)?;
    stats.rhs_evals += 1;
    let mut last_domain = None;
    let mut h = initial_step(&mut f, x, &y, &k1, tol, &mut stats)?.min(x_end - x0);

    while x < x_end {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::SolverDiverged {
                r: x,
                reason: format!("step budget of {} exhausted", tol.max_steps),
            });
        }
        let last = x + h >= x_end;
        if last {
            h = x_end - x;
        }
        if h <= 1e-14 * x.abs().max(1.0) {
            if let Some(e) = last_domain {
                return Err(e);
            }
            return Err(Error::SolverDiverged {
                r: x,
                reason: "step size underflow".into(),
            });
        }

        let stages = (|| -> Result<_> {
            let y2 = axpy(&y, h, &[(A21, &k1)]);
            let k2 = f(x + C2 * h, &y2)?;
            let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
            let k3 = f(x + C3 * h, &y3)?;
            let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            let k4 = f(x + C4 * h, &y4)?;
            let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            let k5 = f(x + C5 * h, &y5)?;
            let y6 = axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            let k6 = f(x + h, &y6)?;
            let y_new = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(x + h, &y_new)?;
            Ok((k3, k4, k5, k6, k7, y_new))
        })();
        stats.rhs_evals += 6;
        let (k3, k4, k5, k6, k7, y_new) = match stages {
            Ok(v) => v,
            // a trial stage left the domain of the right-hand side: retry smaller
            Err(e @ Error::Domain { .. }) => {
                stats.rejected += 1;
                last_domain = Some(e);
                h *= FAC_MIN;
                continue;
            }
            Err(e) => return Err(e),
        };

        let mut err_vec = [0.0; D];
        let mut scale = [0.0; D];
        for i in 0..D {
            err_vec[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            scale[i] = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
        }
        let err = rms(&err_vec, &scale);

        if !err.is_finite() || !finite(&y_new) {
            stats.rejected += 1;
            h *= FAC_MIN;
            continue;
        }

        if err <= 1.0 {
            stats.accepted += 1;
            let x_new = if last { x_end } else { x + h };
            // continuous extension on [x, x_new]
            while next < samples.len() && samples[next] <= x_new {
                let theta = ((samples[next] - x) / h).clamp(0.0, 1.0);
                let mut ys = [0.0; D];
                for i in 0..D {
                    let r1 = y[i];
                    let r2 = y_new[i] - y[i];
                    let r3 = h * k1[i] - r2;
                    let r4 = r2 - h * k7[i] - r3;
                    let r5 = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                    let t1 = 1.0 - theta;
                    ys[i] = r1 + theta * (r2 + t1 * (r3 + theta * (r4 + t1 * r5)));
                }
                out.push(ys);
                next += 1;
            }
            x = x_new;
            y = y_new;
            last_domain = None;
            k1 = k7;
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                SAFETY * err.powf(-0.2)
            };
            h *= fac.clamp(FAC_MIN, FAC_MAX);
        } else {
            stats.rejected += 1;
            h *= (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
        }
    }

    if next < samples.len() {
        return Err(Error::Param(format!(
            "sample point {} lies beyond the integration end {x_end}",
            samples[next]
        )));
    }
    Ok((out, stats))
}

fn initial_step<const D: usize, F>(
    f: &mut F,
    x: f64,
    y: &[f64; D],
    f0: &[f64; D],
    tol: Tolerances,
    stats: &mut Stats,
) -> Result<f64>
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D]>,
{
    let mut scale = [0.0; D];
    for i in 0..D {
        scale[i] = tol.abs + tol.rel * y[i].abs();
    }
    let d0 = rms(y, &scale);
    let d1 = rms(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = axpy(y, h0, &[(1.0, f0)]);
    let f1 = f(x + h0, &y1)?;
    stats.rhs_evals += 1;
    let mut diff = [0.0; D];
    for i in 0..D {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = rms(&diff, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}
