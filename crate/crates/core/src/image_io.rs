//! In-memory image planes and PNG/TIFF input/output.
//!
//! All enhancement works on `f64` planes stored row-major with a nominal
//! range of `[0, 255]`. Values outside that range are allowed in memory so
//! that unclamped intermediate results can be inspected; they are clamped
//! only when an image is written to disk.

use std::io::{BufWriter, Write};
use std::path::Path;

use image::{ImageFormat, ImageReader};

use crate::error::{Error, Result};

/// A single row-major plane of finite real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    /// Builds a plane, checking shape and finiteness.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::argument(format!(
                "plane dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::argument(format!(
                "plane of {width}x{height} needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::argument(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub(crate) fn from_vec_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    /// A plane where every sample equals `value`.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a plane by evaluating `f(x, y)` at every sample.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane::from_vec_unchecked(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Sample-wise `f(a, b)` of two planes with the same shape.
    pub(crate) fn zip_map(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        debug_assert_eq!((self.width, self.height), (other.width, other.height));
        Plane::from_vec_unchecked(
            self.width,
            self.height,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// A color image held as three real planes (R, G, B).
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    planes: [Plane; 3],
}

impl RgbImage {
    /// Combines three planes of identical shape.
    pub fn from_planes(r: Plane, g: Plane, b: Plane) -> Result<Self> {
        let dims = (r.width, r.height);
        if (g.width, g.height) != dims || (b.width, b.height) != dims {
            return Err(Error::argument(format!(
                "channel shapes differ: r {}x{}, g {}x{}, b {}x{}",
                r.width, r.height, g.width, g.height, b.width, b.height
            )));
        }
        Ok(Self { planes: [r, g, b] })
    }

    pub(crate) fn from_planes_unchecked(planes: [Plane; 3]) -> Self {
        Self { planes }
    }

    /// Builds an image from interleaved `[r, g, b, r, g, b, ...]` samples.
    pub fn from_interleaved(width: usize, height: usize, samples: &[f64]) -> Result<Self> {
        if samples.len() != width * height * 3 {
            return Err(Error::argument(format!(
                "{width}x{height} RGB image needs {} samples, got {}",
                width * height * 3,
                samples.len()
            )));
        }
        let channel = |c: usize| samples.iter().skip(c).step_by(3).copied().collect::<Vec<_>>();
        Self::from_planes(
            Plane::new(width, height, channel(0))?,
            Plane::new(width, height, channel(1))?,
            Plane::new(width, height, channel(2))?,
        )
    }

    /// Builds an image by evaluating `f(x, y) -> [r, g, b]` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                samples.extend_from_slice(&f(x, y));
            }
        }
        Self::from_interleaved(width, height, &samples)
    }

    /// Uniform image with the given color.
    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        Self::from_planes(
            Plane::filled(width, height, rgb[0])?,
            Plane::filled(width, height, rgb[1])?,
            Plane::filled(width, height, rgb[2])?,
        )
    }

    pub fn width(&self) -> usize {
        self.planes[0].width
    }

    pub fn height(&self) -> usize {
        self.planes[0].height
    }

    pub fn pixel_count(&self) -> usize {
        self.width() * self.height()
    }

    pub fn r(&self) -> &Plane {
        &self.planes[0]
    }

    pub fn g(&self) -> &Plane {
        &self.planes[1]
    }

    pub fn b(&self) -> &Plane {
        &self.planes[2]
    }

    pub fn planes(&self) -> &[Plane; 3] {
        &self.planes
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        [self.planes[0].get(x, y), self.planes[1].get(x, y), self.planes[2].get(x, y)]
    }

    /// Applies `f` to every sample of every channel.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> RgbImage {
        RgbImage::from_planes_unchecked([
            self.planes[0].map(&f),
            self.planes[1].map(&f),
            self.planes[2].map(&f),
        ])
    }

    /// Same image with every sample clamped to `[0, 255]`.
    pub fn clamped(&self) -> RgbImage {
        self.map(clamp_u8_range)
    }
}

/// A single-channel luminance image.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    plane: Plane,
}

impl GrayImage {
    pub fn from_plane(plane: Plane) -> Self {
        Self { plane }
    }

    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        Plane::new(width, height, data).map(Self::from_plane)
    }

    pub fn from_fn(width: usize, height: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Plane::from_fn(width, height, f).map(Self::from_plane)
    }

    pub fn width(&self) -> usize {
        self.plane.width
    }

    pub fn height(&self) -> usize {
        self.plane.height
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn data(&self) -> &[f64] {
        &self.plane.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.plane.get(x, y)
    }
}

#[inline]
pub(crate) fn clamp_u8_range(v: f64) -> f64 {
    v.clamp(0.0, 255.0)
}

/// Clamps to `[0, 255]` and rounds half up.
#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    (clamp_u8_range(v) + 0.5).floor() as u8
}

fn format_for_path(path: &Path) -> Result<ImageFormat> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => Ok(ImageFormat::Png),
        Some("tif") | Some("tiff") => Ok(ImageFormat::Tiff),
        _ => Err(Error::Format {
            path: path.to_path_buf(),
            message: "only .png, .tif and .tiff are supported".into(),
        }),
    }
}

/// Reads an 8-bit PNG or TIFF file. Gray images are replicated into all
/// three channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Tiff) => {}
        other => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("unsupported format {other:?}"),
            })
        }
    }
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let samples: Vec<f64> = rgb.as_raw().iter().map(|&v| f64::from(v)).collect();
    RgbImage::from_interleaved(w, h, &samples)
}

/// Encodes `img` as 8-bit RGB (clamped, rounded half up) in the format
/// implied by the file extension. The file appears atomically.
pub fn save_image(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = format_for_path(path)?;
    let (w, h) = (img.width(), img.height());
    let mut raw = Vec::with_capacity(w * h * 3);
    for i in 0..w * h {
        for plane in img.planes() {
            raw.push(quantize_u8(plane.data[i]));
        }
    }
    let buffer = image::RgbImage::from_raw(w as u32, h as u32, raw)
        .expect("buffer length matches dimensions");

    write_atomically(path, |file| {
        let mut out = BufWriter::new(file);
        buffer
            .write_to(&mut out, format)
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        out.flush()
    })
}

/// Writes through a temporary file in the destination directory and renames
/// it into place on success.
pub(crate) fn write_atomically(
    path: &Path,
    write: impl FnOnce(&mut std::fs::File) -> std::io::Result<()>,
) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    write(tmp.as_file_mut()).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Bilinear resampling with pixel-center alignment, applied per plane.
pub fn resize_bilinear(img: &RgbImage, new_w: usize, new_h: usize) -> Result<RgbImage> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::argument(format!(
            "resize target must be positive, got {new_w}x{new_h}"
        )));
    }
    if new_w == img.width() && new_h == img.height() {
        return Ok(img.clone());
    }
    let xs = sample_positions(img.width(), new_w);
    let ys = sample_positions(img.height(), new_h);
    let resize_plane = |p: &Plane| {
        let mut out = Vec::with_capacity(new_w * new_h);
        for &(y0, y1, fy) in &ys {
            let (r0, r1) = (p.row(y0), p.row(y1));
            for &(x0, x1, fx) in &xs {
                let top = r0[x0] + (r0[x1] - r0[x0]) * fx;
                let bottom = r1[x0] + (r1[x1] - r1[x0]) * fx;
                out.push(top + (bottom - top) * fy);
            }
        }
        Plane::from_vec_unchecked(new_w, new_h, out)
    };
    Ok(RgbImage::from_planes_unchecked([
        resize_plane(img.r()),
        resize_plane(img.g()),
        resize_plane(img.b()),
    ]))
}

/// For each destination index: the two source neighbours and the weight of
/// the second one.
fn sample_positions(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

/// BT.601 luma. The result is kept inside the pixel's channel range so gray
/// pixels map to themselves exactly.
pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    let [r, g, b] = img.planes();
    let data = r
        .data
        .iter()
        .zip(&g.data)
        .zip(&b.data)
        .map(|((&r, &g), &b)| {
            let lo = r.min(g).min(b);
            let hi = r.max(g).max(b);
            (0.299 * r + 0.587 * g + 0.114 * b).clamp(lo, hi)
        })
        .collect();
    GrayImage::from_plane(Plane::from_vec_unchecked(img.width(), img.height(), data))
}
