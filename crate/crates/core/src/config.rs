//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! rejected. Values given later (including command-line overrides) replace
//! earlier ones.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::params::{Convention, ModelParams, StateCost};
use crate::tuning::{DEFAULT_DTS, DEFAULT_SIGMAS, DEFAULT_TS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostName {
    #[default]
    Quadratic,
    ManufacturedTest,
}

impl FromStr for CostName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(CostName::Quadratic),
            "manufactured-test" => Ok(CostName::ManufacturedTest),
            other => Err(Error::Config(format!(
                "unknown h '{other}' (expected 'quadratic' or 'manufactured-test')"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub h: CostName,
    /// Monte Carlo path count.
    pub paths: usize,
    pub seed: u64,
    /// Initial state for `simulate` / `mc-validate`; all ones when unset.
    pub y0: Option<Vec<f64>>,
    pub sigma_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub dt_values: Vec<f64>,
    pub restore_sigma: f64,
    pub restore_t: f64,
    pub restore_dt: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            h: CostName::Quadratic,
            paths: 10_000,
            seed: 0,
            y0: None,
            sigma_values: DEFAULT_SIGMAS.to_vec(),
            t_values: DEFAULT_TS.to_vec(),
            dt_values: DEFAULT_DTS.to_vec(),
            restore_sigma: 0.0189,
            restore_t: 0.197,
            restore_dt: 0.01,
        }
    }
}

pub const KEYS: &[&str] = &[
    "n_dim",
    "sigma",
    "alpha",
    "R",
    "r0",
    "u0",
    "initial_derivative",
    "r_step",
    "convention",
    "rel_tol",
    "abs_tol",
    "dt",
    "T",
    "h",
    "paths",
    "seed",
    "y0",
    "sigma_values",
    "T_values",
    "dt_values",
    "restore_sigma",
    "restore_T",
    "restore_dt",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for key '{key}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let items: Result<Vec<f64>> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(Error::Config(format!(
            "key '{key}' needs at least one value"
        )));
    }
    Ok(items)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key = value, got '{line}'",
                    lineno + 1
                ))
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{kv}' is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.params;
        match key {
            "n_dim" => p.n_dim = parse_num(key, value)?,
            "sigma" => p.sigma = parse_num(key, value)?,
            "alpha" => p.alpha = parse_num(key, value)?,
            "R" => p.big_r = parse_num(key, value)?,
            "r0" => p.r0 = parse_num(key, value)?,
            "u0" => p.u0 = parse_num(key, value)?,
            "initial_derivative" => p.initial_derivative = parse_num(key, value)?,
            "r_step" => p.r_step = parse_num(key, value)?,
            "convention" => p.convention = value.parse::<Convention>()?,
            "rel_tol" => p.rel_tol = parse_num(key, value)?,
            "abs_tol" => p.abs_tol = parse_num(key, value)?,
            "dt" => p.dt = parse_num(key, value)?,
            "T" => p.t_total = parse_num(key, value)?,
            "h" => self.h = value.parse()?,
            "paths" => self.paths = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "y0" => self.y0 = Some(parse_list(key, value)?),
            "sigma_values" => self.sigma_values = parse_list(key, value)?,
            "T_values" => self.t_values = parse_list(key, value)?,
            "dt_values" => self.dt_values = parse_list(key, value)?,
            "restore_sigma" => self.restore_sigma = parse_num(key, value)?,
            "restore_T" => self.restore_t = parse_num(key, value)?,
            "restore_dt" => self.restore_dt = parse_num(key, value)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.paths == 0 {
            return Err(Error::Config("paths must be at least 1".into()));
        }
        if let Some(y0) = &self.y0 {
            if y0.len() != self.params.n_dim {
                return Err(Error::Config(format!(
                    "y0 has {} components but n_dim = {}",
                    y0.len(),
                    self.params.n_dim
                )));
            }
        }
        let positive = |name: &str, v: &[f64]| {
            if v.iter().all(|x| *x > 0.0 && x.is_finite()) {
                Ok(())
            } else {
                Err(Error::Config(format!("all {name} must be positive")))
            }
        };
        positive("sigma_values", &self.sigma_values)?;
        positive("T_values", &self.t_values)?;
        positive("dt_values", &self.dt_values)?;
        positive(
            "restore parameters",
            &[self.restore_sigma, self.restore_t, self.restore_dt],
        )?;
        Ok(())
    }

    pub fn state_cost(&self) -> Result<StateCost> {
        match self.h {
            CostName::Quadratic => Ok(StateCost::Quadratic),
            CostName::ManufacturedTest => StateCost::manufactured(&self.params),
        }
    }

    pub fn initial_state(&self) -> Vec<f64> {
        self.y0
            .clone()
            .unwrap_or_else(|| vec![1.0; self.params.n_dim])
    }

    /// Every key with its current value, one per line, in config syntax.
    pub fn render(&self) -> String {
        let p = &self.params;
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let h = match self.h {
            CostName::Quadratic => "quadratic",
            CostName::ManufacturedTest => "manufactured-test",
        };
        let y0 = self
            .y0
            .as_deref()
            .map_or_else(|| "1 (each component)".to_string(), list);
        format!(
            "n_dim = {}\nsigma = {}\nalpha = {}\nR = {}\nr0 = {}\nu0 = {}\n\
             initial_derivative = {}\nr_step = {}\nconvention = {}\nrel_tol = {}\n\
             abs_tol = {}\ndt = {}\nT = {}\nh = {h}\npaths = {}\nseed = {}\ny0 = {y0}\n\
             sigma_values = {}\nT_values = {}\ndt_values = {}\nrestore_sigma = {}\n\
             restore_T = {}\nrestore_dt = {}\n",
            p.n_dim,
            p.sigma,
            p.alpha,
            p.big_r,
            p.r0,
            p.u0,
            p.initial_derivative,
            p.r_step,
            p.convention,
            p.rel_tol,
            p.abs_tol,
            p.dt,
            p.t_total,
            self.paths,
            self.seed,
            list(&self.sigma_values),
            list(&self.t_values),
            list(&self.dt_values),
            self.restore_sigma,
            self.restore_t,
            self.restore_dt,
        )
    }
}
