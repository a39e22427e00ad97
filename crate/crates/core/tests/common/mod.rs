//! Straight-line reference implementations used as test oracles. None of
//! these call into the crate's numeric code paths.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retinex_pso::{Plane, RgbImage};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plane(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Plane {
    Plane::from_fn(w, h, |_, _| rng.random_range(0.0..255.0)).unwrap()
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> RgbImage {
    RgbImage::from_fn(w, h, |_, _| std::array::from_fn(|_| rng.random_range(0.0..255.0))).unwrap()
}

/// Mirror `i` back into `[0, n)` one bounce at a time (edge sample repeated).
pub fn mirror(mut i: i64, n: i64) -> usize {
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Normalized 1-D Gaussian on `[-r, r]` with `r = min(ceil(3 sigma), max(w, h))`.
pub fn gaussian_taps(sigma: f64, w: usize, h: usize) -> (i64, Vec<f64>) {
    let r = ((3.0 * sigma).ceil() as i64).min(w.max(h) as i64).max(1);
    let raw: Vec<f64> = (-r..=r)
        .map(|i| (-(i as f64).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    (r, raw.into_iter().map(|v| v / total).collect())
}

/// Direct 2-D convolution with the outer-product kernel and mirrored borders.
pub fn brute_force_convolve(data: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let (r, taps) = gaussian_taps(sigma, w, h);
    let mut out = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let weight = taps[(dy + r) as usize] * taps[(dx + r) as usize];
                    let sx = mirror(x + dx, w as i64);
                    let sy = mirror(y + dy, h as i64);
                    acc += weight * data[sy * w + sx];
                }
            }
            out[y as usize * w + x as usize] = acc;
        }
    }
    out
}

/// Sum of the full 2-D outer-product kernel.
pub fn kernel_double_sum(sigma: f64, w: usize, h: usize) -> f64 {
    let (_, taps) = gaussian_taps(sigma, w, h);
    let mut total = 0.0;
    for a in &taps {
        for b in &taps {
            total += a * b;
        }
    }
    total
}

fn channels(img: &RgbImage) -> [Vec<f64>; 3] {
    [img.r().data().to_vec(), img.g().data().to_vec(), img.b().data().to_vec()]
}

/// `sum_n (1/3) (ln(I + 1) - ln(conv_n(I) + 1))` per sample.
pub fn scalar_msr(data: &[f64], w: usize, h: usize, sigmas: [f64; 3]) -> Vec<f64> {
    let blurred: Vec<Vec<f64>> = sigmas
        .iter()
        .map(|&s| brute_force_convolve(data, w, h, s))
        .collect();
    (0..w * h)
        .map(|k| {
            let mut f = 0.0;
            for b in &blurred {
                f += (1.0 / 3.0) * ((data[k] + 1.0).ln() - (b[k] + 1.0).ln());
            }
            f
        })
        .collect()
}

/// MSRMCR before clamping, one pixel at a time.
pub fn scalar_msrmcr(img: &RgbImage, sigmas: [f64; 3], c: f64, gain: f64, offset: f64) -> [Vec<f64>; 3] {
    let (w, h) = (img.width(), img.height());
    let ch = channels(img);
    let msr: Vec<Vec<f64>> = ch.iter().map(|d| scalar_msr(d, w, h, sigmas)).collect();
    std::array::from_fn(|i| {
        (0..w * h)
            .map(|k| {
                let total = ch[0][k] + ch[1][k] + ch[2][k];
                let mapped = msr[i][k] * 28.44 + 128.0;
                let restoration = if total == 0.0 {
                    0.0
                } else {
                    (1.0 + c * ch[i][k] / total).log2()
                };
                gain * (restoration * mapped / 255.0 + offset)
            })
            .collect()
    })
}

/// MSRCR before clamping, one pixel at a time.
pub fn scalar_msrcr(
    img: &RgbImage,
    sigmas: [f64; 3],
    gain: f64,
    alpha: f64,
    beta: f64,
    offset: f64,
) -> [Vec<f64>; 3] {
    let (w, h) = (img.width(), img.height());
    let ch = channels(img);
    let msr: Vec<Vec<f64>> = ch.iter().map(|d| scalar_msr(d, w, h, sigmas)).collect();
    std::array::from_fn(|i| {
        (0..w * h)
            .map(|k| {
                let total = ch[0][k] + ch[1][k] + ch[2][k];
                let restoration = beta * ((alpha * ch[i][k] + 1.0).ln() - (total + 1.0).ln());
                gain * (restoration * msr[i][k] + offset)
            })
            .collect()
    })
}

/// 3x3 Sobel magnitude evaluated with explicit stencils and clamped indices.
pub fn sobel_stencil(data: &[f64], w: usize, h: usize) -> Vec<f64> {
    const KX: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
    const KY: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let (mut gx, mut gy) = (0.0, 0.0);
            for (j, dy) in (-1..=1).enumerate() {
                for (i, dx) in (-1..=1).enumerate() {
                    let v = data[mirror(y + dy, h as i64) * w + mirror(x + dx, w as i64)];
                    gx += KX[j][i] * v;
                    gy += KY[j][i] * v;
                }
            }
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

/// Entropy in bits of values rounded half-up to 0..=255.
pub fn entropy_bits(data: &[f64]) -> f64 {
    let mut counts = std::collections::BTreeMap::new();
    for &v in data {
        *counts.entry((v.clamp(0.0, 255.0) + 0.5).floor() as i64).or_insert(0usize) += 1;
    }
    let n = data.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

/// 2x2 block Haar coefficients `(ll, lh, hl, hh)` of an even-sized image.
pub fn haar_blocks(data: &[f64], w: usize, h: usize) -> Vec<[f64; 4]> {
    let mut out = Vec::new();
    for by in (0..h).step_by(2) {
        for bx in (0..w).step_by(2) {
            let a = data[by * w + bx];
            let b = data[by * w + bx + 1];
            let c = data[(by + 1) * w + bx];
            let d = data[(by + 1) * w + bx + 1];
            let s = std::f64::consts::FRAC_1_SQRT_2 * std::f64::consts::FRAC_1_SQRT_2;
            out.push([
                s * (a + b + c + d),
                s * (a + b - c - d),
                s * (a - b + c - d),
                s * (a - b - c + d),
            ]);
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
