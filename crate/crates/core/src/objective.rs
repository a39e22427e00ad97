//! Fitness criterion for an enhanced image: a double-log of the total Sobel
//! edge intensity, times the edgel density, times the gray-level entropy.

use serde::{Deserialize, Serialize};

use crate::image_io::{quantize_u8, to_grayscale, GrayImage, Plane, RgbImage};

/// Lower bound on the edge-intensity sum so `ln(ln(E))` stays defined.
pub const EDGE_SUM_FLOOR: f64 = std::f64::consts::E + 1e-9;

/// How the edgel threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum EdgeThreshold {
    /// Mean of the Sobel magnitude plane of the image being scored.
    #[default]
    MeanMagnitude,
    Absolute(f64),
}

impl EdgeThreshold {
    pub fn resolve(&self, sobel: &Plane) -> f64 {
        match *self {
            EdgeThreshold::MeanMagnitude => sobel.mean(),
            EdgeThreshold::Absolute(t) => t,
        }
    }
}

/// Breakdown of one fitness evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub fitness: f64,
    pub edge_intensity_sum: f64,
    pub edgel_count: usize,
    pub entropy_bits: f64,
    pub pixel_count: usize,
    pub edge_threshold: f64,
}

#[inline]
fn reflect_index(i: isize, n: usize) -> usize {
    // Sobel only reaches one sample past the border.
    if i < 0 {
        0
    } else if i as usize >= n {
        n - 1
    } else {
        i as usize
    }
}

/// Gradient magnitude from the 3x3 Sobel pair with reflected borders.
pub fn sobel_magnitude(gray: &GrayImage) -> Plane {
    let (w, h) = (gray.width(), gray.height());
    let p = gray.plane();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let ys = [
            reflect_index(y as isize - 1, h),
            y,
            reflect_index(y as isize + 1, h),
        ];
        let rows = ys.map(|yy| p.row(yy));
        for x in 0..w {
            let xl = reflect_index(x as isize - 1, w);
            let xr = reflect_index(x as isize + 1, w);
            let gx = (rows[0][xr] + 2.0 * rows[1][xr] + rows[2][xr])
                - (rows[0][xl] + 2.0 * rows[1][xl] + rows[2][xl]);
            let gy = (rows[2][xl] + 2.0 * rows[2][x] + rows[2][xr])
                - (rows[0][xl] + 2.0 * rows[0][x] + rows[0][xr]);
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    Plane::from_vec_unchecked(w, h, out)
}

/// Number of samples strictly above `threshold`.
pub fn count_edgels(sobel: &Plane, threshold: f64) -> usize {
    sobel.data().iter().filter(|&&v| v > threshold).count()
}

/// 256-bin histogram of the image quantized to 8 bits.
pub fn histogram_u8(plane: &Plane) -> [usize; 256] {
    let mut hist = [0usize; 256];
    for &v in plane.data() {
        hist[quantize_u8(v) as usize] += 1;
    }
    hist
}

/// Shannon entropy in bits of the 8-bit gray-level histogram.
pub fn entropy(gray: &GrayImage) -> f64 {
    let hist = histogram_u8(gray.plane());
    let total = gray.data().len() as f64;
    hist.iter()
        .filter(|&&n| n > 0)
        .map(|&n| {
            let p = n as f64 / total;
            -p * p.log2()
        })
        .fold(0.0, |acc, e| acc + e)
}

/// Combines the three measured quantities into the fitness value.
pub fn combine(edge_intensity_sum: f64, edgel_count: usize, pixel_count: usize, entropy_bits: f64) -> f64 {
    let edge_term = edge_intensity_sum.max(EDGE_SUM_FLOOR).ln().ln();
    edge_term * (edgel_count as f64 / pixel_count as f64) * entropy_bits
}

/// Scores an enhanced color image.
pub fn fitness(enhanced: &RgbImage, threshold: EdgeThreshold) -> FitnessReport {
    fitness_gray(&to_grayscale(enhanced), threshold)
}

/// Scores an already converted gray image.
pub fn fitness_gray(gray: &GrayImage, threshold: EdgeThreshold) -> FitnessReport {
    let sobel = sobel_magnitude(gray);
    let edge_threshold = threshold.resolve(&sobel);
    let edge_intensity_sum: f64 = sobel.data().iter().sum();
    let edgel_count = count_edgels(&sobel, edge_threshold);
    let entropy_bits = entropy(gray);
    let pixel_count = sobel.len();
    FitnessReport {
        fitness: combine(edge_intensity_sum, edgel_count, pixel_count, entropy_bits),
        edge_intensity_sum,
        edgel_count,
        entropy_bits,
        pixel_count,
        edge_threshold,
    }
}
