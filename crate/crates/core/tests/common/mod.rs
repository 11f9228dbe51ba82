//! Oracles shared by the integration test targets. The numerical oracles use no library code.

#![allow(dead_code)]

use hjb_restore::noise::normal_at;
use hjb_restore::ModelParams;
use ndarray::Array3;

/// Classical fixed-step RK4 on `(u, u')` for the quadratic cost with alpha = 2
/// in the code convention, written without any library code.
pub fn rk4_quadratic_alpha2(p: &ModelParams, r_end: f64, h_target: f64) -> f64 {
    let n_minus_1 = p.n_dim as f64 - 1.0;
    let k = 2.0 / (p.sigma * p.sigma);
    let f = |r: f64, du: f64| -n_minus_1 / r * du + k * (0.25 * du * du - r * r);
    let steps = ((r_end - p.r0) / h_target).round() as usize;
    let h = (r_end - p.r0) / steps as f64;
    let (mut u, mut du) = (p.u0, p.initial_derivative);
    for i in 0..steps {
        let r = p.r0 + i as f64 * h;
        let (k1u, k1v) = (du, f(r, du));
        let (k2u, k2v) = (du + 0.5 * h * k1v, f(r + 0.5 * h, du + 0.5 * h * k1v));
        let (k3u, k3v) = (du + 0.5 * h * k2v, f(r + 0.5 * h, du + 0.5 * h * k2v));
        let (k4u, k4v) = (du + h * k3v, f(r + h, du + h * k3v));
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        du += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    u
}

/// Per-window SSIM with centred two-pass moments, averaged the plain way.
pub fn ssim_brute(a: &Array3<u8>, b: &Array3<u8>) -> f64 {
    let (h, w, ch) = a.dim();
    let (c1, c2) = ((0.01f64 * 255.0).powi(2), (0.03f64 * 255.0).powi(2));
    let mut per_channel = Vec::new();
    for c in 0..ch {
        let mut vals = Vec::new();
        for i in 1..h - 1 {
            for j in 1..w - 1 {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for di in 0..3 {
                    for dj in 0..3 {
                        xs.push(f64::from(a[[i + di - 1, j + dj - 1, c]]));
                        ys.push(f64::from(b[[i + di - 1, j + dj - 1, c]]));
                    }
                }
                let mx = xs.iter().sum::<f64>() / 9.0;
                let my = ys.iter().sum::<f64>() / 9.0;
                let vx = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / 8.0;
                let vy = ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / 8.0;
                let cxy = xs
                    .iter()
                    .zip(&ys)
                    .map(|(x, y)| (x - mx) * (y - my))
                    .sum::<f64>()
                    / 8.0;
                vals.push(
                    ((2.0 * mx * my + c1) * (2.0 * cxy + c2))
                        / ((mx * mx + my * my + c1) * (vx + vy + c2)),
                );
            }
        }
        per_channel.push(vals.iter().sum::<f64>() / vals.len() as f64);
    }
    per_channel.iter().sum::<f64>() / ch as f64
}

pub fn random_u8_image(seed: u64, h: usize, w: usize) -> Array3<u8> {
    let mut k = 0u64;
    Array3::from_shape_fn((h, w, 3), |_| {
        k += 1;
        (128.0 + 60.0 * normal_at(seed, k))
            .clamp(0.0, 255.0)
            .round() as u8
    })
}
