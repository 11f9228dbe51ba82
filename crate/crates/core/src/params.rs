use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Sign convention for the nonlinear term of the radial ODE.
///
/// `Code` integrates `u'' = -(N-1)/r u' + 2/sigma^2 (A (-u')^q - h)` and yields a
/// decreasing value function for positive `h`. `Derived` integrates the
/// printed reduction of the HJB equation, `u'' = -(N-1)/r u' + 2/sigma^2 (h - A |u'|^q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    Code,
    Derived,
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "code" => Ok(Convention::Code),
            "derived" => Ok(Convention::Derived),
            other => Err(Error::Config(format!(
                "unknown convention '{other}' (expected 'code' or 'derived')"
            ))),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Code => "code",
            Convention::Derived => "derived",
        })
    }
}

/// Scalars of the exit-time control model and its radial solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// State dimension N.
    pub n_dim: usize,
    /// Diffusion coefficient.
    pub sigma: f64,
    /// Control-cost exponent, in (1, 2].
    pub alpha: f64,
    /// Exit radius R.
    pub big_r: f64,
    /// Start of the radial integration.
    pub r0: f64,
    /// u(r0).
    pub u0: f64,
    /// u'(r0), non-positive.
    pub initial_derivative: f64,
    /// Spacing of the output grid.
    pub r_step: f64,
    pub convention: Convention,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Euler–Maruyama time step.
    pub dt: f64,
    /// Simulation horizon.
    pub t_total: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n_dim: 2,
            sigma: 2.0,
            alpha: 2.0,
            big_r: 10.0,
            r0: 0.01,
            u0: 80.912,
            initial_derivative: -1e-6,
            r_step: 0.1,
            convention: Convention::Code,
            rel_tol: 1e-8,
            abs_tol: 1e-8,
            dt: 0.01,
            t_total: 10.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Param(msg()))
            }
        }
        check(self.n_dim >= 1, || "n_dim must be at least 1".into())?;
        check_alpha(self.alpha)?;
        check(self.sigma > 0.0 && self.sigma.is_finite(), || {
            format!("sigma must be positive, got {}", self.sigma)
        })?;
        check(
            self.r0 > 0.0 && self.r0 < self.big_r && self.big_r.is_finite(),
            || format!("need 0 < r0 < R, got r0={} R={}", self.r0, self.big_r),
        )?;
        check(self.r_step > 0.0 && self.r_step.is_finite(), || {
            format!("r_step must be positive, got {}", self.r_step)
        })?;
        check(self.initial_derivative <= 0.0, || {
            format!(
                "initial_derivative must be non-positive, got {}",
                self.initial_derivative
            )
        })?;
        check(self.u0.is_finite(), || "u0 must be finite".into())?;
        check(self.rel_tol > 0.0 && self.abs_tol > 0.0, || {
            "integrator tolerances must be positive".into()
        })?;
        check(self.dt > 0.0 && self.dt.is_finite(), || {
            format!("dt must be positive, got {}", self.dt)
        })?;
        check(self.t_total > 0.0 && self.t_total.is_finite(), || {
            format!("T must be positive, got {}", self.t_total)
        })?;
        Ok(())
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::Param(format!(
            "alpha must lie in (1, 2], got {alpha}"
        )))
    }
}

/// Radial state cost h(r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateCost {
    /// h(r) = r^2.
    Quadratic,
    /// h(r) = 0.
    Zero,
    /// h(r) = A r^q - (sigma^2 / 2) N, for which the derived-convention
    /// solution with u'(r0) = -r0 is v(r) = r.
    Manufactured {
        const_a: f64,
        exponent: f64,
        offset: f64,
    },
}

impl StateCost {
    pub fn manufactured(params: &ModelParams) -> Result<Self> {
        let const_a = crate::radial::constant_a(params.alpha)?;
        Ok(StateCost::Manufactured {
            const_a,
            exponent: params.alpha / (params.alpha - 1.0),
            offset: 0.5 * params.sigma * params.sigma * params.n_dim as f64,
        })
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            StateCost::Quadratic => crate::radial::h_quadratic(r),
            StateCost::Zero => 0.0,
            StateCost::Manufactured {
                const_a,
                exponent,
                offset,
            } => const_a * r.powf(exponent) - offset,
        }
    }
}
