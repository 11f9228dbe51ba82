//! MSE, PSNR and SSIM.
//!
//! SSIM uses a uniform `win x win` window, sample (n-1) statistics, and
//! averages the local index over pixels whose window fits inside the image,
//! then over channels.

use std::fmt;

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::image_pipeline::quantize;

const K1: f64 = 0.01;
const K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    /// `+inf` for identical quantized images.
    pub psnr_db: f64,
    pub ssim: f64,
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MSE={:.4}, PSNR={:.4}, SSIM={:.4}",
            self.mse, self.psnr_db, self.ssim
        )
    }
}

fn same_shape<A, B>(a: &Array3<A>, b: &Array3<B>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Param(format!(
            "shape mismatch: {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    if a.is_empty() {
        return Err(Error::Param("empty image".into()));
    }
    Ok(())
}

pub fn mse(a: &Array3<f64>, b: &Array3<f64>) -> Result<f64> {
    same_shape(a, b)?;
    let s: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(s / a.len() as f64)
}

pub fn psnr_from_mse(mse: f64, data_range: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (data_range * data_range / mse).log10()
    }
}

pub fn psnr(a: &Array3<u8>, b: &Array3<u8>, data_range: f64) -> Result<f64> {
    same_shape(a, b)?;
    let s: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum();
    Ok(psnr_from_mse(s / a.len() as f64, data_range))
}

pub fn ssim(a: &Array3<u8>, b: &Array3<u8>, win: usize, data_range: f64) -> Result<f64> {
    same_shape(a, b)?;
    if win < 3 || win.is_multiple_of(2) {
        return Err(Error::Param(format!(
            "SSIM window must be odd and >= 3, got {win}"
        )));
    }
    let (h, w, channels) = a.dim();
    if h < win || w < win {
        return Err(Error::Param(format!(
            "image {h}x{w} is smaller than the {win}x{win} SSIM window"
        )));
    }
    let c1 = (K1 * data_range).powi(2);
    let c2 = (K2 * data_range).powi(2);
    let n = (win * win) as f64;
    let cov_norm = n / (n - 1.0);
    let pad = (win - 1) / 2;

    let mut total = 0.0;
    for c in 0..channels {
        let mut acc = 0.0;
        for i in pad..h - pad {
            for j in pad..w - pad {
                let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for di in 0..win {
                    for dj in 0..win {
                        let x = f64::from(a[[i + di - pad, j + dj - pad, c]]);
                        let y = f64::from(b[[i + di - pad, j + dj - pad, c]]);
                        sa += x;
                        sb += y;
                        saa += x * x;
                        sbb += y * y;
                        sab += x * y;
                    }
                }
                let ux = sa / n;
                let uy = sb / n;
                let vx = cov_norm * (saa / n - ux * ux);
                let vy = cov_norm * (sbb / n - uy * uy);
                let vxy = cov_norm * (sab / n - ux * uy);
                let num = (2.0 * ux * uy + c1) * (2.0 * vxy + c2);
                let den = (ux * ux + uy * uy + c1) * (vx + vy + c2);
                acc += num / den;
            }
        }
        total += acc / ((h - 2 * pad) * (w - 2 * pad)) as f64;
    }
    Ok(total / channels as f64)
}

/// MSE on the float tensors; PSNR and SSIM (window 3, range 255) on their
/// quantized versions.
pub fn evaluate(restored: &Array3<f64>, reference: &Array3<f64>) -> Result<MetricReport> {
    let mse = mse(reference, restored)?;
    let a = quantize(reference);
    let b = quantize(restored);
    Ok(MetricReport {
        mse,
        psnr_db: psnr(&a, &b, 255.0)?,
        ssim: ssim(&a, &b, 3, 255.0)?,
    })
}
