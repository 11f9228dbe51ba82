//! Grid search over (sigma, T, dt) for the restoration dynamics.

use std::io::Write;
use std::path::Path;

use ndarray::Array3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image_pipeline::{restore, uncenter, ImageState};
use crate::metrics::evaluate;
use crate::noise::derive_seed;
use crate::radial::RadialSolution;
use crate::util::fmt_f64;

pub const DEFAULT_SIGMAS: [f64; 4] = [0.002, 0.007, 0.0189, 0.05];
pub const DEFAULT_TS: [f64; 2] = [0.197, 1.0];
pub const DEFAULT_DTS: [f64; 2] = [0.01, 0.17];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneRecord {
    pub sigma: f64,
    pub t_total: f64,
    pub dt: f64,
    pub mse: f64,
    pub psnr_db: f64,
    pub ssim: f64,
}

/// Noise seed for the configuration at position `ordinal` of the grid.
pub fn config_seed(base: u64, ordinal: usize) -> u64 {
    derive_seed(base, ordinal as u64)
}

/// Restores `state` with one configuration and scores it against `reference`.
/// Returns the record and the restored image (float, in [0, 255]).
#[allow(clippy::too_many_arguments)]
pub fn run_config(
    state: &ImageState,
    sol: &RadialSolution,
    alpha: f64,
    sigma: f64,
    t_total: f64,
    dt: f64,
    reference: &Array3<f64>,
    seed: u64,
) -> Result<(TuneRecord, Array3<f64>)> {
    let annotate = |e: Error| Error::Tuning {
        sigma,
        t_total,
        dt,
        source: Box::new(e),
    };
    let restored = restore(state, sol, alpha, sigma, dt, t_total, seed).map_err(annotate)?;
    let image = uncenter(&restored);
    let m = evaluate(&image, reference).map_err(annotate)?;
    Ok((
        TuneRecord {
            sigma,
            t_total,
            dt,
            mse: m.mse,
            psnr_db: m.psnr_db,
            ssim: m.ssim,
        },
        image,
    ))
}

/// Evaluates every `(sigma, T, dt)` in Cartesian order, sigma outermost.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    state: &ImageState,
    sol: &RadialSolution,
    alpha: f64,
    sigmas: &[f64],
    ts: &[f64],
    dts: &[f64],
    reference: &Array3<f64>,
    seed: u64,
) -> Result<Vec<TuneRecord>> {
    if sigmas.is_empty() || ts.is_empty() || dts.is_empty() {
        return Err(Error::Param("tuning grids must be non-empty".into()));
    }
    if reference.dim() != state.data.dim() {
        return Err(Error::Param(format!(
            "reference shape {:?} does not match image shape {:?}",
            reference.dim(),
            state.data.dim()
        )));
    }
    let configs: Vec<(f64, f64, f64)> = sigmas
        .iter()
        .flat_map(|&s| {
            ts.iter()
                .flat_map(move |&t| dts.iter().map(move |&d| (s, t, d)))
        })
        .collect();
    let results: Vec<Result<TuneRecord>> = configs
        .par_iter()
        .enumerate()
        .map(|(k, &(s, t, d))| {
            run_config(state, sol, alpha, s, t, d, reference, config_seed(seed, k)).map(|r| r.0)
        })
        .collect();
    results.into_iter().collect()
}

/// Position of the maximal-PSNR record; ties go to the earliest.
pub fn best_index(records: &[TuneRecord]) -> Result<usize> {
    if records.is_empty() {
        return Err(Error::Param("no tuning records to choose from".into()));
    }
    let mut best = 0;
    for (i, r) in records.iter().enumerate().skip(1) {
        if r.psnr_db > records[best].psnr_db {
            best = i;
        }
    }
    Ok(best)
}

pub fn best_by_psnr(records: &[TuneRecord]) -> Result<TuneRecord> {
    best_index(records).map(|i| records[i])
}

/// `sigma,T,dt,mse,psnr,ssim`, one row per record.
pub fn write_records_csv(records: &[TuneRecord], path: &Path) -> Result<()> {
    let mut buf = String::from("sigma,T,dt,mse,psnr,ssim\n");
    for r in records {
        buf.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(r.sigma),
            fmt_f64(r.t_total),
            fmt_f64(r.dt),
            fmt_f64(r.mse),
            fmt_f64(r.psnr_db),
            fmt_f64(r.ssim)
        ));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(buf.as_bytes()))
        .map_err(|e| Error::io(path, e))
}
