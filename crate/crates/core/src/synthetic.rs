//! Deterministic synthetic test images.

use ndarray::Array3;

use crate::image_pipeline::quantize;
use crate::noise::normal_at;

/// Clean RGB pattern: a diagonal colour ramp with a bright disc and a dark
/// square on top.
pub fn clean_pattern(height: usize, width: usize) -> Array3<f64> {
    let (hf, wf) = (height as f64, width as f64);
    Array3::from_shape_fn((height, width, 3), |(i, j, c)| {
        let (y, x) = (i as f64 / hf, j as f64 / wf);
        let ramp = match c {
            0 => 60.0 + 120.0 * x,
            1 => 60.0 + 120.0 * y,
            _ => 180.0 - 60.0 * (x + y),
        };
        let disc = (x - 0.35).powi(2) + (y - 0.4).powi(2) < 0.04;
        let square = (0.6..0.85).contains(&x) && (0.55..0.85).contains(&y);
        if disc {
            [230.0, 210.0, 90.0][c]
        } else if square {
            [30.0, 40.0, 70.0][c]
        } else {
            ramp
        }
    })
}

/// `clean_pattern` plus i.i.d. Gaussian noise of standard deviation
/// `noise_sd`, quantized to 8 bits. Returns `(clean, noisy)`.
pub fn noisy_pattern(
    height: usize,
    width: usize,
    noise_sd: f64,
    seed: u64,
) -> (Array3<u8>, Array3<u8>) {
    let clean = clean_pattern(height, width);
    let mut noisy = clean.clone();
    for (k, v) in noisy.iter_mut().enumerate() {
        *v += noise_sd * normal_at(seed, k as u64);
    }
    (quantize(&clean), quantize(&noisy))
}
