//! Controlled-diffusion image restoration.
//!
//! Each pixel's colour vector, centred on the per-channel mean and scaled so
//! the largest deviation is `R/2`, is one state `y` of the exit-time model. It
//! evolves by Euler–Maruyama under the radial feedback `p_unit(|y|) y` and is
//! clipped to `[-R, R]` per component after every step.

use std::path::Path;

use ndarray::{Array3, Axis};
use rayon::prelude::*;

use crate::control::ControlLaw;
use crate::error::{Error, Result};
use crate::noise::normal_at;
use crate::radial::{interp_derivative, RadialSolution, R_FLOOR};
use crate::sde::step_count;

/// Centred and scaled image, plus what is needed to undo the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageState {
    /// Height × width × channels deviations.
    pub data: Array3<f64>,
    pub channel_mean: Vec<f64>,
    pub scale_factor: f64,
    /// Clip bound R for the dynamics.
    pub radius: f64,
}

impl ImageState {
    pub fn height(&self) -> usize {
        self.data.dim().0
    }

    pub fn width(&self) -> usize {
        self.data.dim().1
    }

    pub fn channels(&self) -> usize {
        self.data.dim().2
    }
}

/// Decodes a PNG or PPM into an 8-bit RGB tensor.
pub fn load_image(path: &Path) -> Result<Array3<u8>> {
    let img = image::open(path)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?
        .to_rgb8();
    let (w, h) = img.dimensions();
    Ok(
        Array3::from_shape_vec((h as usize, w as usize, 3), img.into_raw())
            .expect("rgb buffer has h*w*3 bytes"),
    )
}

pub fn to_float(img: &Array3<u8>) -> Array3<f64> {
    img.mapv(f64::from)
}

/// Clamp to [0, 255] and round half away from zero.
pub fn quantize(img: &Array3<f64>) -> Array3<u8> {
    img.mapv(|v| v.clamp(0.0, 255.0).round() as u8)
}

pub fn center_scale(img: &Array3<f64>, big_r: f64) -> ImageState {
    let channels = img.dim().2;
    let n_pix = (img.dim().0 * img.dim().1) as f64;
    let channel_mean: Vec<f64> = (0..channels)
        .map(|c| img.index_axis(Axis(2), c).sum() / n_pix)
        .collect();
    let mut centered = img.clone();
    for (c, mean) in channel_mean.iter().enumerate() {
        centered
            .index_axis_mut(Axis(2), c)
            .mapv_inplace(|v| v - mean);
    }
    let max_abs = centered.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale_factor = if max_abs != 0.0 {
        (big_r / 2.0) / max_abs
    } else {
        1.0
    };
    centered.mapv_inplace(|v| v * scale_factor);
    ImageState {
        data: centered,
        channel_mean,
        scale_factor,
        radius: big_r,
    }
}

/// `data / scale_factor + mean`, clipped to [0, 255].
pub fn uncenter(state: &ImageState) -> Array3<f64> {
    let mut out = state.data.mapv(|v| v / state.scale_factor);
    for (c, mean) in state.channel_mean.iter().enumerate() {
        out.index_axis_mut(Axis(2), c)
            .mapv_inplace(|v| (v + mean).clamp(0.0, 255.0));
    }
    out
}

/// Runs `floor(T/dt)` Euler–Maruyama steps of the restoration dynamics.
///
/// The draw for pixel `p`, channel `c` at step `t` is
/// `normal_at(seed, (t * pixels + p) * channels + c)`.
pub fn restore(
    state: &ImageState,
    sol: &RadialSolution,
    alpha: f64,
    sigma: f64,
    dt: f64,
    t_total: f64,
    seed: u64,
) -> Result<ImageState> {
    if !(sigma > 0.0 && dt > 0.0 && t_total >= 0.0) {
        return Err(Error::Param(format!(
            "restore needs sigma > 0, dt > 0, T >= 0 (got {sigma}, {dt}, {t_total})"
        )));
    }
    let law = ControlLaw::new(sol, alpha)?;
    let steps = step_count(t_total, dt);
    let mut out = state.clone();
    if steps == 0 {
        return Ok(out);
    }
    let channels = state.channels();
    let n_pix = (state.height() * state.width()) as u64;
    let big_r = state.radius;
    let noise_scale = sigma * dt.sqrt();
    let data = out
        .data
        .as_slice_mut()
        .expect("image tensors are kept in standard layout");

    for step in 0..steps {
        let step_base = step as u64 * n_pix;
        data.par_chunks_mut(channels)
            .enumerate()
            .try_for_each(|(pix, x)| -> Result<()> {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(R_FLOOR);
                let u_prime = interp_derivative(sol, r);
                let rate = law.magnitude_from_slope(u_prime, r)? / r;
                let counter = (step_base + pix as u64) * channels as u64;
                for (c, xc) in x.iter_mut().enumerate() {
                    let drift = rate * *xc;
                    let noise = noise_scale * normal_at(seed, counter + c as u64);
                    let next = *xc + drift * dt + noise;
                    if !next.is_finite() {
                        return Err(Error::SimulationDiverged { step: step + 1 });
                    }
                    *xc = next.clamp(-big_r, big_r);
                }
                Ok(())
            })?;
    }
    Ok(out)
}

/// Writes an 8-bit RGB PNG. Values must already lie in [0, 255].
pub fn save_image(img: &Array3<f64>, path: &Path) -> Result<()> {
    if let Some(bad) = img.iter().find(|v| !(0.0..=255.0).contains(*v)) {
        return Err(Error::Param(format!(
            "pixel value {bad} outside [0, 255] cannot be saved"
        )));
    }
    save_image_u8(&quantize(img), path)
}

pub fn save_image_u8(img: &Array3<u8>, path: &Path) -> Result<()> {
    let (h, w, c) = img.dim();
    if c != 3 {
        return Err(Error::Param(format!("expected 3 channels, got {c}")));
    }
    let raw: Vec<u8> = img.iter().copied().collect();
    let buf = image::RgbImage::from_raw(w as u32, h as u32, raw)
        .expect("buffer length matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}
