//! Grayscale rasters: decoding, luminance conversion, bilinear resizing and
//! seeded additive white Gaussian noise.

use std::path::Path;

use image::{DynamicImage, ImageError, ImageReader};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Default preprocessing side length.
pub const DEFAULT_SIDE: usize = 64;

/// Single-channel intensity raster, row-major, values in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f32>,
}

impl GrayImage {
    /// Builds an image from row-major pixels.
    ///
    /// Fails if the buffer length disagrees with the extent or any value is
    /// outside `[0, 255]` (NaN included).
    pub fn new(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=255.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "intensity {v} outside [0, 255]"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Evaluates `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f32,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.pixels[y * self.width + x]
    }

    /// Writes the image as 8-bit grayscale; the format follows the file
    /// extension (`.pgm`, `.png`, ...).
    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8)
            .collect();
        let buf = image::GrayImage::from_raw(self.width as u32, self.height as u32, bytes)
            .expect("buffer length matches extent");
        buf.save(path).map_err(|e| match e {
            ImageError::IoError(io) => Error::Io(io),
            ImageError::Unsupported(_) => Error::UnsupportedFormat(path.to_path_buf()),
            other => Error::DecodeError {
                path: path.to_path_buf(),
                reason: other.to_string(),
            },
        })
    }
}

/// Converts a decoded image to gray intensities. Color inputs use the
/// ITU-R 601 luminance weights; gray inputs keep their values.
pub fn to_gray(img: &DynamicImage) -> GrayImage {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels: Vec<f32> = if img.color().has_color() {
        img.to_rgb32f()
            .pixels()
            .map(|p| {
                let l = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
                (l * 255.0).clamp(0.0, 255.0)
            })
            .collect()
    } else {
        match img {
            DynamicImage::ImageLuma8(g) => g.as_raw().iter().map(|&v| v as f32).collect(),
            DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| p[0] as f32).collect(),
            other => other
                .to_luma32f()
                .as_raw()
                .iter()
                .map(|v| (v * 255.0).clamp(0.0, 255.0))
                .collect(),
        }
    };
    GrayImage {
        width: w,
        height: h,
        pixels,
    }
}

/// Decodes `path`, converts it to gray and resizes it to `side`×`side`.
pub fn load_image(path: &Path, side: usize) -> Result<GrayImage> {
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let reader = ImageReader::open(path)
        .and_then(|r| r.with_guessed_format())
        .map_err(|e| Error::DecodeError {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    if reader.format().is_none() {
        return Err(Error::UnsupportedFormat(path.to_path_buf()));
    }
    let decoded = reader.decode().map_err(|e| match e {
        ImageError::Unsupported(_) => Error::UnsupportedFormat(path.to_path_buf()),
        other => Error::DecodeError {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })?;
    Ok(resize_bilinear(&to_gray(&decoded), side, side))
}

/// Per-axis sampling plan: for every output coordinate the two source
/// indices and the interpolation weight of the second.
fn axis_plan(src: usize, dst: usize) -> Vec<(usize, usize, f32)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let pos = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = pos.floor() as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, (pos - i0 as f64) as f32)
        })
        .collect()
}

#[inline]
fn lerp(a: f32, b: f32, t: f32) -> f32 {
    a + (b - a) * t
}

/// Bilinear resampling with pixel-center alignment and edge clamping.
pub fn resize_bilinear(img: &GrayImage, width: usize, height: usize) -> GrayImage {
    if img.width == width && img.height == height {
        return img.clone();
    }
    let cols = axis_plan(img.width, width);
    let rows = axis_plan(img.height, height);
    let mut pixels = Vec::with_capacity(width * height);
    for &(y0, y1, ty) in &rows {
        let r0 = &img.pixels[y0 * img.width..(y0 + 1) * img.width];
        let r1 = &img.pixels[y1 * img.width..(y1 + 1) * img.width];
        for &(x0, x1, tx) in &cols {
            let top = lerp(r0[x0], r0[x1], tx);
            let bottom = lerp(r1[x0], r1[x1], tx);
            pixels.push(lerp(top, bottom, ty).clamp(0.0, 255.0));
        }
    }
    GrayImage {
        width,
        height,
        pixels,
    }
}

/// The `count` zero-mean Gaussian draws (normalized intensity scale) that
/// [`add_awgn`] adds to an image of `count` pixels, in row-major order.
pub fn awgn_samples(count: usize, variance: f64, seed: u64) -> Result<Vec<f64>> {
    if variance.is_nan() || variance < 0.0 {
        return Err(Error::NegativeVariance(variance));
    }
    if variance == 0.0 {
        return Ok(vec![0.0; count]);
    }
    let normal =
        Normal::new(0.0, variance.sqrt()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| normal.sample(&mut rng)).collect())
}

/// Adds zero-mean Gaussian noise of `variance` on the `[0, 1]` intensity
/// scale, clamps, and returns to the `[0, 255]` scale.
pub fn add_awgn(img: &GrayImage, variance: f64, seed: u64) -> Result<GrayImage> {
    let noise = awgn_samples(img.pixels.len(), variance, seed)?;
    let pixels = img
        .pixels
        .iter()
        .zip(&noise)
        .map(|(&v, &n)| {
            // v/255 + n clamped to [0,1], expressed directly on the 0..255 scale
            (v as f64 + 255.0 * n).clamp(0.0, 255.0) as f32
        })
        .collect();
    Ok(GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    })
}
