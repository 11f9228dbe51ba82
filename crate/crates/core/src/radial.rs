//! Radially reduced HJB equation.
//!
//! With `V(y) = u(|y|)` the exit-time HJB equation becomes a second-order ODE
//! in `r`. We integrate it forward from a small radius `r0` with prescribed
//! `u(r0)` and `u'(r0)` and read the boundary value `g = u(R)` off the result.
//! The ODE depends on `u` only through `u'`, so a Dirichlet target for `g`
//! is reached by an additive shift of the whole profile.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::integrator::{self, Tolerances};
use crate::params::{check_alpha, Convention, ModelParams, StateCost};
use crate::util::fmt_f64;

/// Radii below this are clamped before dividing by r.
pub const R_FLOOR: f64 = 1e-6;

#[inline]
pub fn h_quadratic(r: f64) -> f64 {
    r * r
}

/// Coefficient `(alpha - 1) * alpha^(-alpha/(alpha-1))` of the gradient term,
/// i.e. `-min_p (|p|^alpha + p.z) / |z|^(alpha/(alpha-1))`.
pub fn constant_a(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((alpha - 1.0) * alpha.powf(-alpha / (alpha - 1.0)))
}

/// `x^p` for the control exponents. `alpha = 2` gives integer powers, which
/// are defined for negative bases; otherwise the base must be non-negative.
#[inline]
pub(crate) fn control_pow(base: f64, exponent: f64, alpha: f64, r: f64) -> Result<f64> {
    if alpha == 2.0 {
        Ok(base.powi(exponent as i32))
    } else if base < 0.0 {
        Err(Error::Domain {
            r,
            what: format!("fractional power {exponent} of negative base {base}"),
        })
    } else {
        Ok(base.powf(exponent))
    }
}

/// Second-order radial ODE with all constants folded in.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialOde {
    n_minus_1: f64,
    two_over_sigma2: f64,
    const_a: f64,
    alpha: f64,
    q: f64,
    convention: Convention,
    h: StateCost,
}

impl RadialOde {
    pub(crate) fn new(params: &ModelParams, h: &StateCost) -> Result<Self> {
        Ok(Self {
            n_minus_1: params.n_dim as f64 - 1.0,
            two_over_sigma2: 2.0 / (params.sigma * params.sigma),
            const_a: constant_a(params.alpha)?,
            alpha: params.alpha,
            q: params.alpha / (params.alpha - 1.0),
            convention: params.convention,
            h: *h,
        })
    }

    /// u'' as a function of r and u'.
    #[inline]
    pub(crate) fn second_derivative(&self, r: f64, u_prime: f64) -> Result<f64> {
        let r = r.max(R_FLOOR);
        let h = self.h.eval(r);
        let transport = -(self.n_minus_1 / r) * u_prime;
        let ddu = match self.convention {
            Convention::Code => {
                let term = self.const_a * control_pow(-u_prime, self.q, self.alpha, r)?;
                transport + self.two_over_sigma2 * (term - h)
            }
            Convention::Derived => {
                let term = self.const_a * u_prime.abs().powf(self.q);
                transport + self.two_over_sigma2 * (h - term)
            }
        };
        Ok(ddu)
    }
}

/// Right-hand side of the first-order system `(u, u')' = (u', u'')`.
pub fn ode_rhs(
    r: f64,
    _u_val: f64,
    u_prime: f64,
    params: &ModelParams,
    h: &StateCost,
) -> Result<(f64, f64)> {
    let ode = RadialOde::new(params, h)?;
    Ok((u_prime, ode.second_derivative(r, u_prime)?))
}

/// Value function sampled on the output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// `-du`.
    pub v: Vec<f64>,
    /// u at the last grid node.
    pub g_at_r_end: f64,
    /// `u(r0) - trapz(v, r)`.
    pub g_integral: f64,
    pub const_a: f64,
    /// Exponent the solution was computed for.
    pub alpha: f64,
}

/// Uniform grid `r0, r0 + step, ...` up to `R` (inclusive within a tenth of
/// a step), matching `arange(r0, R + 0.1 * step, step)`.
pub fn output_grid(r0: f64, big_r: f64, step: f64) -> Vec<f64> {
    let span = (big_r - r0) / step + 0.1;
    let n = (span - 1e-9).ceil().max(0.0) as usize;
    if n < 2 {
        return vec![r0, big_r];
    }
    (0..n).map(|k| r0 + k as f64 * step).collect()
}

/// Forward-integrates the radial ODE from `r0` to `R`.
pub fn solve_radial(params: &ModelParams, h: &StateCost) -> Result<RadialSolution> {
    params.validate()?;
    let ode = RadialOde::new(params, h)?;
    let grid = output_grid(params.r0, params.big_r, params.r_step);
    let x_end = params.big_r.max(*grid.last().expect("grid is never empty"));

    // Integrate the displacement w = u - u0 rather than u itself so that the
    // step sequence does not depend on u0.
    let (states, _stats) = integrator::integrate(
        |r, y: &[f64; 2]| Ok([y[1], ode.second_derivative(r, y[1])?]),
        params.r0,
        [0.0, params.initial_derivative],
        x_end,
        &grid,
        Tolerances::new(params.rel_tol, params.abs_tol),
    )?;

    let mut u = Vec::with_capacity(grid.len());
    let mut du = Vec::with_capacity(grid.len());
    for (r, s) in grid.iter().zip(&states) {
        if !s[0].is_finite() || !s[1].is_finite() {
            return Err(Error::SolverDiverged {
                r: *r,
                reason: "non-finite state".into(),
            });
        }
        u.push(params.u0 + s[0]);
        du.push(s[1]);
    }
    let v: Vec<f64> = du.iter().map(|d| -d).collect();
    let mut sol = RadialSolution {
        r: grid,
        u,
        du,
        v,
        g_at_r_end: 0.0,
        g_integral: 0.0,
        const_a: ode.const_a,
        alpha: params.alpha,
    };
    let (g_integral, g_at_r_end) = boundary_g(&sol);
    sol.g_integral = g_integral;
    sol.g_at_r_end = g_at_r_end;
    Ok(sol)
}

/// Composite trapezoid rule.
pub fn trapezoid(y: &[f64], x: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// `(u(r0) - trapz(v), u[last])`.
pub fn boundary_g(sol: &RadialSolution) -> (f64, f64) {
    let g_integral = sol.u[0] - trapezoid(&sol.v, &sol.r);
    (
        g_integral,
        *sol.u.last().expect("solution has at least two nodes"),
    )
}

/// Shifts `u` so that the boundary value becomes `g_target`.
pub fn shift_to_match_g(sol: &RadialSolution, g_target: f64) -> RadialSolution {
    let delta = g_target - sol.g_at_r_end;
    let mut out = sol.clone();
    if delta == 0.0 {
        return out;
    }
    for u in &mut out.u {
        *u += delta;
    }
    *out.u.last_mut().expect("non-empty") = g_target;
    let (g_integral, _) = boundary_g(&out);
    out.g_integral = g_integral;
    out.g_at_r_end = g_target;
    out
}

/// Piecewise-linear `u'(r)`, clamped to the end values outside the grid.
pub fn interp_derivative(sol: &RadialSolution, r: f64) -> f64 {
    interp_clamped(&sol.r, &sol.du, r)
}

/// Piecewise-linear interpolation with endpoint clamping (numpy `interp`).
pub fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    // first index with xs[i] > x
    let hi = xs.partition_point(|&xi| xi <= x);
    let lo = hi - 1;
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + (ys[hi] - ys[lo]) * t
}

/// Largest absolute ODE residual `|u''_fd - F(r, u')|` over the interior
/// nodes, with `u''` from central differences of the stored `u'` samples.
pub fn residual(sol: &RadialSolution, params: &ModelParams, h: &StateCost) -> Result<f64> {
    if sol.r.len() < 3 {
        return Err(Error::Param(format!(
            "residual needs at least 3 grid points, got {}",
            sol.r.len()
        )));
    }
    let ode = RadialOde::new(params, h)?;
    let mut worst = 0.0f64;
    for i in 1..sol.r.len() - 1 {
        let fd = (sol.du[i + 1] - sol.du[i - 1]) / (sol.r[i + 1] - sol.r[i - 1]);
        let model = ode.second_derivative(sol.r[i], sol.du[i])?;
        worst = worst.max((fd - model).abs());
    }
    Ok(worst)
}

/// Writes `r,u,du,v` rows in grid order.
pub fn write_solution_csv(sol: &RadialSolution, path: &Path) -> Result<()> {
    let mut buf = String::from("r,u,du,v\n");
    for i in 0..sol.r.len() {
        buf.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(sol.r[i]),
            fmt_f64(sol.u[i]),
            fmt_f64(sol.du[i]),
            fmt_f64(sol.v[i])
        ));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(buf.as_bytes()))
        .map_err(|e| Error::io(path, e))
}
