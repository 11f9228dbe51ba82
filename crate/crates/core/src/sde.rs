//! Euler–Maruyama simulation of the controlled exit-time diffusion
//! `dy = p*(y) dt + sigma dW`, stopped at the first step with `|y| >= R`.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::control::{norm, ControlLaw};
use crate::error::{Error, Result};
use crate::noise::{derive_seed, normal_at};
use crate::params::{ModelParams, StateCost};
use crate::radial::RadialSolution;
use crate::util::fmt_f64;

/// One simulated controlled path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub exited: bool,
    pub exit_time: Option<f64>,
    /// Left-endpoint sum of `(|p*|^alpha + h(|y|)) dt`.
    pub running_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean_cost: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub n_exited: usize,
}

#[derive(Debug, Clone, Copy)]
struct PathOutcome {
    exit_step: Option<usize>,
    cost: f64,
}

/// Number of Euler–Maruyama steps for horizon `t_total`, `floor(T / dt)`.
pub fn step_count(t_total: f64, dt: f64) -> usize {
    (t_total / dt).floor() as usize
}

fn evolve(
    y0: &[f64],
    params: &ModelParams,
    law: &ControlLaw<'_>,
    h: &StateCost,
    seed: u64,
    mut record: impl FnMut(&[f64]),
) -> Result<PathOutcome> {
    let dim = y0.len();
    let mut y = y0.to_vec();
    record(&y);
    if norm(&y) >= params.big_r {
        return Ok(PathOutcome {
            exit_step: Some(0),
            cost: 0.0,
        });
    }
    let n_steps = step_count(params.t_total, params.dt);
    let dt = params.dt;
    let noise_scale = params.sigma * dt.sqrt();
    let alpha = law.alpha();
    let mut cost = 0.0;
    for step in 0..n_steps {
        let r = norm(&y);
        let rate = law.p_unit(r)?;
        let control = (rate.abs() * r).powf(alpha);
        cost += (control + h.eval(r)) * dt;
        let base = (step * dim) as u64;
        for (i, yi) in y.iter_mut().enumerate() {
            let drift = rate * *yi;
            *yi += drift * dt + noise_scale * normal_at(seed, base + i as u64);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::SimulationDiverged { step: step + 1 });
        }
        record(&y);
        if norm(&y) >= params.big_r {
            return Ok(PathOutcome {
                exit_step: Some(step + 1),
                cost,
            });
        }
    }
    Ok(PathOutcome {
        exit_step: None,
        cost,
    })
}

/// Simulates one path from `y0` with noise stream `seed`.
pub fn simulate_exit(
    y0: &[f64],
    params: &ModelParams,
    sol: &RadialSolution,
    h: &StateCost,
    seed: u64,
) -> Result<Trajectory> {
    check_inputs(y0, params)?;
    let law = ControlLaw::new(sol, params.alpha)?;
    let mut states = Vec::new();
    let outcome = evolve(y0, params, &law, h, seed, |y| states.push(y.to_vec()))?;
    let times = (0..states.len()).map(|k| k as f64 * params.dt).collect();
    Ok(Trajectory {
        times,
        states,
        exited: outcome.exit_step.is_some(),
        exit_time: outcome.exit_step.map(|k| k as f64 * params.dt),
        running_cost: outcome.cost,
    })
}

fn check_inputs(y0: &[f64], params: &ModelParams) -> Result<()> {
    params.validate()?;
    if y0.is_empty() || !y0.iter().all(|v| v.is_finite()) {
        return Err(Error::Param(
            "initial state must be a non-empty finite vector".into(),
        ));
    }
    Ok(())
}

/// Monte Carlo estimate of the expected running cost until exit from `y0`.
///
/// Path `i` uses noise stream `derive_seed(seed, i)`. Paths that reach the
/// time cap without exiting are left out of the mean.
pub fn mc_value_estimate(
    y0: &[f64],
    params: &ModelParams,
    sol: &RadialSolution,
    h: &StateCost,
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_inputs(y0, params)?;
    if n_paths == 0 {
        return Err(Error::Param("n_paths must be at least 1".into()));
    }
    let law = ControlLaw::new(sol, params.alpha)?;
    let outcomes: Vec<Result<PathOutcome>> = (0..n_paths)
        .into_par_iter()
        .map(|i| evolve(y0, params, &law, h, derive_seed(seed, i as u64), |_| {}))
        .collect();

    let mut costs = Vec::with_capacity(n_paths);
    for o in outcomes {
        let o = o?;
        if o.exit_step.is_some() {
            costs.push(o.cost);
        }
    }
    let n_exited = costs.len();
    if n_exited == 0 {
        return Err(Error::EstimateUnavailable { n_paths });
    }
    let mean = costs.iter().sum::<f64>() / n_exited as f64;
    let std_error = if n_exited > 1 {
        let ss: f64 = costs.iter().map(|c| (c - mean).powi(2)).sum();
        (ss / (n_exited - 1) as f64).sqrt() / (n_exited as f64).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        mean_cost: mean,
        std_error,
        n_paths,
        n_exited,
    })
}

/// Writes `t,y1,...,yN`.
pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let dim = traj.states.first().map_or(0, Vec::len);
    let mut buf = String::from("t");
    for i in 1..=dim {
        buf.push_str(&format!(",y{i}"));
    }
    buf.push('\n');
    for (t, y) in traj.times.iter().zip(&traj.states) {
        buf.push_str(&fmt_f64(*t));
        for v in y {
            buf.push(',');
            buf.push_str(&fmt_f64(*v));
        }
        buf.push('\n');
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(buf.as_bytes()))
        .map_err(|e| Error::io(path, e))
}
