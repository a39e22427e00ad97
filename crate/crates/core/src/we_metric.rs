//! Approximate and detailed wavelet energy from a single-level orthonormal
//! Haar decomposition of the gray image.
//!
//! Energies are means over the (padded) pixel count, so by orthonormality
//! `AWE + DWE` is the mean squared intensity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_io::{to_grayscale, GrayImage, Plane, RgbImage};

/// The four half-resolution subbands.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarSubbands {
    /// Low-pass in both directions.
    pub ll: Plane,
    /// Vertical difference (responds to horizontal edges).
    pub lh: Plane,
    /// Horizontal difference (responds to vertical edges).
    pub hl: Plane,
    pub hh: Plane,
}

impl HaarSubbands {
    /// Number of input samples the decomposition covers (after padding).
    pub fn padded_len(&self) -> usize {
        4 * self.ll.len()
    }
}

fn padded(gray: &GrayImage) -> Plane {
    let (w, h) = (gray.width(), gray.height());
    if w % 2 == 0 && h % 2 == 0 {
        return gray.plane().clone();
    }
    let (pw, ph) = (w + w % 2, h + h % 2);
    let mut data = Vec::with_capacity(pw * ph);
    for y in 0..ph {
        let row = gray.plane().row(y.min(h - 1));
        data.extend((0..pw).map(|x| row[x.min(w - 1)]));
    }
    Plane::from_vec_unchecked(pw, ph, data)
}

/// Single-level 2-D Haar analysis. Odd dimensions are padded by repeating
/// the last row/column.
pub fn dwt2_haar(gray: &GrayImage) -> HaarSubbands {
    let p = padded(gray);
    let (hw, hh) = (p.width() / 2, p.height() / 2);
    let mut bands: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(hw * hh));
    for by in 0..hh {
        let (top, bottom) = (p.row(2 * by), p.row(2 * by + 1));
        for bx in 0..hw {
            let (a, b) = (top[2 * bx], top[2 * bx + 1]);
            let (c, d) = (bottom[2 * bx], bottom[2 * bx + 1]);
            bands[0].push((a + b + c + d) * 0.5);
            bands[1].push((a + b - c - d) * 0.5);
            bands[2].push((a - b + c - d) * 0.5);
            bands[3].push((a - b - c + d) * 0.5);
        }
    }
    let [ll, lh, hl, hh_band] = bands.map(|v| Plane::from_vec_unchecked(hw, hh, v));
    HaarSubbands {
        ll,
        lh,
        hl,
        hh: hh_band,
    }
}

/// Exact inverse of [`dwt2_haar`], returning the padded image.
pub fn idwt2_haar(bands: &HaarSubbands) -> GrayImage {
    let (hw, hh) = (bands.ll.width(), bands.ll.height());
    let (w, h) = (2 * hw, 2 * hh);
    let mut data = vec![0.0; w * h];
    for by in 0..hh {
        for bx in 0..hw {
            let i = by * hw + bx;
            let (ll, lh, hl, hhv) = (
                bands.ll.data()[i],
                bands.lh.data()[i],
                bands.hl.data()[i],
                bands.hh.data()[i],
            );
            data[2 * by * w + 2 * bx] = (ll + lh + hl + hhv) * 0.5;
            data[2 * by * w + 2 * bx + 1] = (ll + lh - hl - hhv) * 0.5;
            data[(2 * by + 1) * w + 2 * bx] = (ll - lh + hl - hhv) * 0.5;
            data[(2 * by + 1) * w + 2 * bx + 1] = (ll - lh - hl + hhv) * 0.5;
        }
    }
    GrayImage::from_plane(Plane::from_vec_unchecked(w, h, data))
}

fn sum_sq(p: &Plane) -> f64 {
    p.data().iter().map(|v| v * v).sum()
}

/// Mean energy of the approximation subband.
pub fn approximate_we(gray: &GrayImage) -> f64 {
    let bands = dwt2_haar(gray);
    sum_sq(&bands.ll) / bands.padded_len() as f64
}

/// Mean energy of the three detail subbands.
pub fn detailed_we(gray: &GrayImage) -> f64 {
    let bands = dwt2_haar(gray);
    (sum_sq(&bands.lh) + sum_sq(&bands.hl) + sum_sq(&bands.hh)) / bands.padded_len() as f64
}

/// Wavelet energies of an original/enhanced pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WEComparison {
    pub awe_original: f64,
    pub awe_enhanced: f64,
    pub dwe_original: f64,
    pub dwe_enhanced: f64,
    /// `awe_enhanced / awe_original`; `0 / 0` is 1 and `x / 0` is infinite.
    #[serde(with = "lenient_f64")]
    pub awe_ratio: f64,
    #[serde(with = "lenient_f64")]
    pub dwe_ratio: f64,
}

fn energy_ratio(enhanced: f64, original: f64) -> f64 {
    if original == 0.0 {
        if enhanced == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        enhanced / original
    }
}

/// Compares two same-sized images on their grayscale conversions.
pub fn we_report(original: &RgbImage, enhanced: &RgbImage) -> Result<WEComparison> {
    if (original.width(), original.height()) != (enhanced.width(), enhanced.height()) {
        return Err(Error::argument(format!(
            "image sizes differ: {}x{} vs {}x{}",
            original.width(),
            original.height(),
            enhanced.width(),
            enhanced.height()
        )));
    }
    let (go, ge) = (to_grayscale(original), to_grayscale(enhanced));
    let (awe_original, awe_enhanced) = (approximate_we(&go), approximate_we(&ge));
    let (dwe_original, dwe_enhanced) = (detailed_we(&go), detailed_we(&ge));
    Ok(WEComparison {
        awe_original,
        awe_enhanced,
        dwe_original,
        dwe_enhanced,
        awe_ratio: energy_ratio(awe_enhanced, awe_original),
        dwe_ratio: energy_ratio(dwe_enhanced, dwe_original),
    })
}

/// JSON has no infinity; an infinite ratio is written as the string "inf".
mod lenient_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad ratio '{t}'"))),
        }
    }
}
