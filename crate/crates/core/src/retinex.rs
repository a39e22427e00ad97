//! Gaussian surround, single/multi-scale retinex and the two color
//! restoration variants (MSRCR and MSRMCR).
//!
//! Every log argument is offset by one so black pixels stay finite. Natural
//! log is used for the retinex and MSRCR terms, base-2 log for the modified
//! color restoration. Outputs of [`msrcr`] and [`msrmcr`] are clamped to
//! `[0, 255]`; the `*_unclamped` variants expose the values just before the
//! clamp.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_io::{Plane, RgbImage};

/// Multiplier applied by [`msr_range_map`].
pub const RANGE_MAP_SCALE: f64 = 28.44;
/// Offset applied by [`msr_range_map`].
pub const RANGE_MAP_OFFSET: f64 = 128.0;

/// Truncated, normalized 1-D Gaussian. The 2-D surround is the outer product
/// of this factor with itself.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSurround {
    sigma: f64,
    radius: usize,
    taps: Vec<f64>,
}

impl GaussianSurround {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// `2 * radius + 1` samples, index `radius` is the center.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }
}

/// Builds the surround for an image of the given size. The radius is
/// `ceil(3 sigma)` capped at the larger image dimension.
pub fn gaussian_surround(sigma: f64, img_w: usize, img_h: usize) -> Result<GaussianSurround> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::argument(format!("surround sigma must be positive, got {sigma}")));
    }
    let cap = img_w.max(img_h).max(1);
    let radius = ((3.0 * sigma).ceil() as usize).clamp(1, cap);

    let two_var = 2.0 * sigma * sigma;
    let half: Vec<f64> = (0..=radius)
        .map(|i| (-((i * i) as f64) / two_var).exp())
        .collect();
    let mut taps: Vec<f64> = half.iter().rev().chain(&half[1..]).copied().collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    Ok(GaussianSurround {
        sigma,
        radius,
        taps,
    })
}

/// Half-sample symmetric reflection of `i` into `[0, n)`, repeated as often
/// as needed.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// 1-D kernel with the boundary reflection folded in: output sample `k`
/// is `sum_j rows[k].1[j - rows[k].0] * input[j]`.
struct FoldedKernel {
    rows: Vec<(usize, Vec<f64>)>,
}

impl FoldedKernel {
    fn new(surround: &GaussianSurround, n: usize) -> Self {
        let r = surround.radius as isize;
        let rows = (0..n)
            .map(|k| {
                let mut dense = vec![0.0; n];
                for (offset, &t) in (-r..=r).zip(&surround.taps) {
                    dense[reflect(k as isize + offset, n)] += t;
                }
                let lo = dense.iter().position(|&w| w != 0.0).unwrap_or(0);
                let hi = dense.iter().rposition(|&w| w != 0.0).unwrap_or(0);
                (lo, dense[lo..=hi].to_vec())
            })
            .collect();
        Self { rows }
    }

    /// Filters along the slow axis of a `width x height` row-major buffer.
    fn apply_columns(&self, src: &[f64], width: usize) -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        for (dst, (lo, weights)) in out.chunks_exact_mut(width).zip(&self.rows) {
            for (j, &w) in weights.iter().enumerate() {
                let row = &src[(lo + j) * width..(lo + j + 1) * width];
                for (o, &s) in dst.iter_mut().zip(row) {
                    *o += w * s;
                }
            }
        }
        out
    }
}

fn transpose(src: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        for x in 0..width {
            out[x * height + y] = src[y * width + x];
        }
    }
    out
}

/// Separable convolution with the surround (rows, then columns) using
/// reflected boundaries.
pub fn surround_convolve(plane: &Plane, surround: &GaussianSurround) -> Plane {
    let (w, h) = (plane.width(), plane.height());
    let horizontal = FoldedKernel::new(surround, w);
    let vertical = FoldedKernel::new(surround, h);

    let along_rows = horizontal.apply_columns(&transpose(plane.data(), w, h), h);
    let rows_done = transpose(&along_rows, h, w);
    Plane::from_vec_unchecked(w, h, vertical.apply_columns(&rows_done, w))
}

fn check_non_negative(plane: &Plane) -> Result<()> {
    match plane.data().iter().position(|&v| v < 0.0) {
        Some(i) => Err(Error::argument(format!(
            "retinex input must be non-negative, sample {i} is {}",
            plane.data()[i]
        ))),
        None => Ok(()),
    }
}

/// Single-scale retinex: `ln(I + 1) - ln(F * I + 1)`.
pub fn ssr(plane: &Plane, sigma: f64) -> Result<Plane> {
    check_non_negative(plane)?;
    let surround = gaussian_surround(sigma, plane.width(), plane.height())?;
    let blurred = surround_convolve(plane, &surround);
    Ok(plane.zip_map(&blurred, |i, c| i.ln_1p() - c.ln_1p()))
}

/// Per-scale weights of the multiscale sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleWeights {
    w: [f64; 3],
}

impl ScaleWeights {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Result<Self> {
        let w = [w1, w2, w3];
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::argument(format!("scale weights must be non-negative, got {w:?}")));
        }
        if (w1 + w2 + w3 - 1.0).abs() > 1e-12 {
            return Err(Error::argument(format!("scale weights must sum to 1, got {w:?}")));
        }
        Ok(Self { w })
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.w
    }
}

impl Default for ScaleWeights {
    fn default() -> Self {
        Self { w: [1.0 / 3.0; 3] }
    }
}

/// Weighted sum of single-scale retinex outputs. Scales that coincide share
/// one convolution; scales with zero weight are skipped.
pub fn msr(plane: &Plane, sigmas: [f64; 3], weights: &ScaleWeights) -> Result<Plane> {
    check_non_negative(plane)?;
    let mut groups: Vec<(f64, f64)> = Vec::with_capacity(3);
    for (&sigma, &w) in sigmas.iter().zip(&weights.w) {
        match groups.iter_mut().find(|(s, _)| *s == sigma) {
            Some(g) => g.1 += w,
            None => groups.push((sigma, w)),
        }
    }

    let log_input = plane.map(f64::ln_1p);
    let mut acc: Option<Vec<f64>> = None;
    for (sigma, w) in groups {
        let surround = gaussian_surround(sigma, plane.width(), plane.height())?;
        if w == 0.0 {
            continue;
        }
        let blurred = surround_convolve(plane, &surround);
        let terms = log_input
            .data()
            .iter()
            .zip(blurred.data())
            .map(|(&li, &c)| w * (li - c.ln_1p()));
        match acc.as_mut() {
            None => acc = Some(terms.collect()),
            Some(a) => a.iter_mut().zip(terms).for_each(|(a, t)| *a += t),
        }
    }
    let data = acc.unwrap_or_else(|| vec![0.0; plane.len()]);
    Ok(Plane::from_vec_unchecked(plane.width(), plane.height(), data))
}

fn check_sigmas(s: [f64; 3]) -> Result<()> {
    if s.iter().all(|v| v.is_finite()) && 0.0 < s[0] && s[0] < s[1] && s[1] < s[2] {
        Ok(())
    } else {
        Err(Error::argument(format!(
            "surround scales must satisfy 0 < sigma1 < sigma2 < sigma3, got {s:?}"
        )))
    }
}

/// Parameters of the classic color restoration variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsrcrParams {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub gain: f64,
    pub alpha: f64,
    pub beta: f64,
    pub offset: f64,
}

impl MsrcrParams {
    pub fn sigmas(&self) -> [f64; 3] {
        [self.sigma1, self.sigma2, self.sigma3]
    }

    pub fn validate(&self) -> Result<()> {
        check_sigmas(self.sigmas())?;
        if ![self.gain, self.alpha, self.beta, self.offset].iter().all(|v| v.is_finite()) {
            return Err(Error::argument("MSRCR parameters must be finite"));
        }
        if self.alpha < 0.0 {
            return Err(Error::argument(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        Ok(())
    }
}

impl Default for MsrcrParams {
    fn default() -> Self {
        Self {
            sigma1: 15.0,
            sigma2: 120.0,
            sigma3: 250.0,
            gain: 192.0,
            alpha: 125.0,
            beta: 46.0,
            offset: -30.0,
        }
    }
}

/// Parameters of the modified color restoration variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsrmcrParams {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub c_strength: f64,
    pub gain: f64,
    pub offset: f64,
}

impl MsrmcrParams {
    pub fn sigmas(&self) -> [f64; 3] {
        [self.sigma1, self.sigma2, self.sigma3]
    }

    pub fn validate(&self) -> Result<()> {
        check_sigmas(self.sigmas())?;
        if !(self.c_strength.is_finite() && self.c_strength > 0.0) {
            return Err(Error::argument(format!(
                "restoration strength C must be positive, got {}",
                self.c_strength
            )));
        }
        if !(self.gain.is_finite() && self.offset.is_finite()) {
            return Err(Error::argument("MSRMCR gain and offset must be finite"));
        }
        Ok(())
    }
}

impl Default for MsrmcrParams {
    fn default() -> Self {
        Self {
            sigma1: 15.0,
            sigma2: 120.0,
            sigma3: 250.0,
            c_strength: 100.0,
            gain: 2.25,
            offset: -30.0,
        }
    }
}

/// Which color restoration is applied on top of the multiscale retinex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Msrcr,
    Msrmcr,
}

impl Variant {
    /// Parameter names in vector order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Variant::Msrcr => &["sigma1", "sigma2", "sigma3", "G", "alpha", "beta", "b"],
            Variant::Msrmcr => &["sigma1", "sigma2", "sigma3", "C", "G", "b"],
        }
    }

    pub fn dimensions(self) -> usize {
        self.param_names().len()
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Msrcr => "msrcr",
            Variant::Msrmcr => "msrmcr",
        }
    }
}

/// Enhancement parameters of either variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum RetinexParams {
    Msrcr(MsrcrParams),
    Msrmcr(MsrmcrParams),
}

impl RetinexParams {
    pub fn defaults(variant: Variant) -> Self {
        match variant {
            Variant::Msrcr => RetinexParams::Msrcr(MsrcrParams::default()),
            Variant::Msrmcr => RetinexParams::Msrmcr(MsrmcrParams::default()),
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            RetinexParams::Msrcr(_) => Variant::Msrcr,
            RetinexParams::Msrmcr(_) => Variant::Msrmcr,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RetinexParams::Msrcr(p) => p.validate(),
            RetinexParams::Msrmcr(p) => p.validate(),
        }
    }

    /// Flattens to the order given by [`Variant::param_names`].
    pub fn to_vector(&self) -> Vec<f64> {
        match *self {
            RetinexParams::Msrcr(p) => {
                vec![p.sigma1, p.sigma2, p.sigma3, p.gain, p.alpha, p.beta, p.offset]
            }
            RetinexParams::Msrmcr(p) => {
                vec![p.sigma1, p.sigma2, p.sigma3, p.c_strength, p.gain, p.offset]
            }
        }
    }

    pub fn from_vector(variant: Variant, v: &[f64]) -> Result<Self> {
        if v.len() != variant.dimensions() {
            return Err(Error::argument(format!(
                "{} takes {} parameters, got {}",
                variant.name(),
                variant.dimensions(),
                v.len()
            )));
        }
        let params = match variant {
            Variant::Msrcr => RetinexParams::Msrcr(MsrcrParams {
                sigma1: v[0],
                sigma2: v[1],
                sigma3: v[2],
                gain: v[3],
                alpha: v[4],
                beta: v[5],
                offset: v[6],
            }),
            Variant::Msrmcr => RetinexParams::Msrmcr(MsrmcrParams {
                sigma1: v[0],
                sigma2: v[1],
                sigma3: v[2],
                c_strength: v[3],
                gain: v[4],
                offset: v[5],
            }),
        };
        params.validate()?;
        Ok(params)
    }

    /// Replaces one parameter by name (as listed in [`Variant::param_names`],
    /// case-insensitive; `gain`/`offset`/`c` are accepted as aliases).
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let variant = self.variant();
        let idx = param_index(variant, name).ok_or_else(|| {
            Error::argument(format!(
                "unknown {} parameter '{name}', expected one of {:?}",
                variant.name(),
                variant.param_names()
            ))
        })?;
        let mut v = self.to_vector();
        v[idx] = value;
        Self::from_vector(variant, &v)
    }
}

/// Index of a parameter name within the variant's vector.
pub fn param_index(variant: Variant, name: &str) -> Option<usize> {
    let canonical = match name.to_ascii_lowercase().as_str() {
        "gain" | "g" => "g".to_string(),
        "offset" | "b" => "b".to_string(),
        "c" | "c_strength" => "c".to_string(),
        other => other.to_string(),
    };
    variant
        .param_names()
        .iter()
        .position(|n| n.to_ascii_lowercase() == canonical)
}

fn channel_sum(img: &RgbImage) -> Plane {
    img.r().zip_map(img.g(), |a, b| a + b).zip_map(img.b(), |s, c| s + c)
}

/// MSRCR before the final clamp:
/// `G * (beta * (ln(alpha I_i + 1) - ln(sum_j I_j + 1)) * MSR_i + b)`.
pub fn msrcr_unclamped(img: &RgbImage, p: &MsrcrParams, weights: &ScaleWeights) -> Result<RgbImage> {
    p.validate()?;
    let sum = channel_sum(img);
    let log_sum = sum.map(f64::ln_1p);
    let mut out = Vec::with_capacity(3);
    for plane in img.planes() {
        let retinex = msr(plane, p.sigmas(), weights)?;
        let data = plane
            .data()
            .iter()
            .zip(log_sum.data())
            .zip(retinex.data())
            .map(|((&i, &ls), &f)| {
                let restoration = p.beta * ((p.alpha * i).ln_1p() - ls);
                p.gain * (restoration * f + p.offset)
            })
            .collect();
        out.push(Plane::from_vec_unchecked(img.width(), img.height(), data));
    }
    let [r, g, b]: [Plane; 3] = out.try_into().expect("three channels");
    Ok(RgbImage::from_planes_unchecked([r, g, b]))
}

/// Multiscale retinex with color restoration, clamped to `[0, 255]`.
pub fn msrcr(img: &RgbImage, p: &MsrcrParams, weights: &ScaleWeights) -> Result<RgbImage> {
    Ok(msrcr_unclamped(img, p, weights)?.clamped())
}

/// Maps multiscale retinex output from roughly `±4.5` onto `[0, 255]`.
pub fn msr_range_map(plane: &Plane) -> Plane {
    plane.map(|v| v * RANGE_MAP_SCALE + RANGE_MAP_OFFSET)
}

/// `log2(1 + C * I_i / sum_j I_j)` per channel; black pixels restore to 0.
pub fn modified_color_restoration(img: &RgbImage, c_strength: f64) -> Result<RgbImage> {
    if !(c_strength.is_finite() && c_strength > 0.0) {
        return Err(Error::argument(format!(
            "restoration strength C must be positive, got {c_strength}"
        )));
    }
    for plane in img.planes() {
        check_non_negative(plane)?;
    }
    let sum = channel_sum(img);
    let restore = |plane: &Plane| {
        plane.zip_map(&sum, |i, s| {
            if s == 0.0 {
                0.0
            } else {
                (1.0 + c_strength * (i / s)).log2()
            }
        })
    };
    Ok(RgbImage::from_planes_unchecked([
        restore(img.r()),
        restore(img.g()),
        restore(img.b()),
    ]))
}

/// `restoration * mapped / 255`, sample-wise.
pub fn apply_restoration(restoration: &Plane, mapped: &Plane) -> Plane {
    restoration.zip_map(mapped, |r, m| r * m / 255.0)
}

/// MSRMCR before the final clamp: `G * (I'_i * F'_i / 255 + b)` where `F'`
/// is the range-mapped multiscale retinex and `I'` the modified restoration.
pub fn msrmcr_unclamped(img: &RgbImage, p: &MsrmcrParams, weights: &ScaleWeights) -> Result<RgbImage> {
    p.validate()?;
    let restoration = modified_color_restoration(img, p.c_strength)?;
    let mut out = Vec::with_capacity(3);
    for (plane, rest) in img.planes().iter().zip(restoration.planes()) {
        let mapped = msr_range_map(&msr(plane, p.sigmas(), weights)?);
        let scaled = apply_restoration(rest, &mapped);
        out.push(scaled.map(|v| p.gain * (v + p.offset)));
    }
    let [r, g, b]: [Plane; 3] = out.try_into().expect("three channels");
    Ok(RgbImage::from_planes_unchecked([r, g, b]))
}

/// Multiscale retinex with modified color restoration, clamped to `[0, 255]`.
pub fn msrmcr(img: &RgbImage, p: &MsrmcrParams, weights: &ScaleWeights) -> Result<RgbImage> {
    Ok(msrmcr_unclamped(img, p, weights)?.clamped())
}

/// Runs whichever variant `params` selects.
pub fn enhance(img: &RgbImage, params: &RetinexParams, weights: &ScaleWeights) -> Result<RgbImage> {
    match params {
        RetinexParams::Msrcr(p) => msrcr(img, p, weights),
        RetinexParams::Msrmcr(p) => msrmcr(img, p, weights),
    }
}
