//! Optimal feedback control derived from a radial value function.
//!
//! Minimising `|p|^alpha + grad V . p` gives
//! `p* = -alpha^(-1/(alpha-1)) |grad V|^((2-alpha)/(alpha-1)) grad V`.
//! For `V(y) = u(|y|)` and `u' <= 0` this is `p_unit(r) * y` with
//! `p_unit(r) = alpha^(-1/(alpha-1)) (-u'(r))^(1/(alpha-1)) / r`.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::check_alpha;
use crate::radial::{control_pow, interp_derivative, RadialSolution, R_FLOOR};
use crate::util::fmt_f64;

#[derive(Debug, Clone, Copy)]
pub struct ControlLaw<'a> {
    alpha: f64,
    solution: &'a RadialSolution,
    coeff: f64,
    exponent: f64,
}

impl<'a> ControlLaw<'a> {
    pub fn new(solution: &'a RadialSolution, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if alpha != solution.alpha {
            return Err(Error::Param(format!(
                "control alpha {alpha} does not match solution alpha {}",
                solution.alpha
            )));
        }
        Ok(Self::from_solution(solution))
    }

    pub fn from_solution(solution: &'a RadialSolution) -> Self {
        let alpha = solution.alpha;
        let exponent = 1.0 / (alpha - 1.0);
        Self {
            alpha,
            solution,
            coeff: alpha.powf(-exponent),
            exponent,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn solution(&self) -> &'a RadialSolution {
        self.solution
    }

    /// `alpha^(-1/(alpha-1)) (-u')^(1/(alpha-1))` for a given `u'`.
    #[inline]
    pub(crate) fn magnitude_from_slope(&self, u_prime: f64, r: f64) -> Result<f64> {
        Ok(self.coeff * control_pow(-u_prime, self.exponent, self.alpha, r)?)
    }

    /// Net restoration rate magnitude at radius `r`.
    pub fn rate_magnitude(&self, r: f64) -> Result<f64> {
        let r = r.max(R_FLOOR);
        self.magnitude_from_slope(interp_derivative(self.solution, r), r)
    }

    /// Restoration rate per unit deviation, `p*(y) = p_unit(|y|) y`.
    pub fn p_unit(&self, r: f64) -> Result<f64> {
        let r = r.max(R_FLOOR);
        Ok(self.magnitude_from_slope(interp_derivative(self.solution, r), r)? / r)
    }

    /// `grad V(y) = u'(|y|) y / |y|`, zero inside the clamp radius.
    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let r = norm(y);
        if r < R_FLOOR {
            return vec![0.0; y.len()];
        }
        let s = interp_derivative(self.solution, r) / r;
        y.iter().map(|yi| s * yi).collect()
    }

    pub fn feedback(&self, y: &[f64]) -> Result<Vec<f64>> {
        let rate = self.p_unit(norm(y))?;
        Ok(y.iter().map(|yi| rate * yi).collect())
    }

    /// Hamiltonian excess of `p` over the feedback control at `y`.
    pub fn hamiltonian_gap(&self, y: &[f64], p: &[f64]) -> Result<f64> {
        let grad = self.gradient(y);
        let p_star = self.feedback(y)?;
        let ham = |q: &[f64]| norm(q).powf(self.alpha) + dot(&grad, q);
        Ok(ham(p) - ham(&p_star))
    }

    /// `|alpha |p*|^(alpha-2) p* + grad V|` at `y`.
    pub fn first_order_residual(&self, y: &[f64]) -> Result<f64> {
        let grad = self.gradient(y);
        let p_star = self.feedback(y)?;
        let pn = norm(&p_star);
        let w = if pn == 0.0 {
            0.0
        } else {
            self.alpha * pn.powf(self.alpha - 2.0)
        };
        let res: Vec<f64> = p_star.iter().zip(&grad).map(|(p, g)| w * p + g).collect();
        Ok(norm(&res))
    }
}

#[inline]
pub fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solution table with the two control columns appended:
/// `r,u,du,v,p_unit,rate_magnitude`.
pub fn write_control_csv(law: &ControlLaw<'_>, path: &Path) -> Result<()> {
    let sol = law.solution();
    let mut buf = String::from("r,u,du,v,p_unit,rate_magnitude\n");
    for i in 0..sol.r.len() {
        let r = sol.r[i];
        buf.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(r),
            fmt_f64(sol.u[i]),
            fmt_f64(sol.du[i]),
            fmt_f64(sol.v[i]),
            fmt_f64(law.p_unit(r)?),
            fmt_f64(law.rate_magnitude(r)?)
        ));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(buf.as_bytes()))
        .map_err(|e| Error::io(path, e))
}
