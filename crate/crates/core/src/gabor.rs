//! Complex Gabor kernels, a two-scale × two-orientation bank, and
//! Gabor-channel descriptors.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::LghpParams;
use crate::error::{Error, Result};
use crate::histogram::{build_descriptor, DescriptorVector};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GaborOrientation {
    Deg0,
    Deg90,
}

impl GaborOrientation {
    pub fn degrees(self) -> u32 {
        match self {
            GaborOrientation::Deg0 => 0,
            GaborOrientation::Deg90 => 90,
        }
    }

    pub fn from_degrees(deg: u32) -> Option<Self> {
        match deg {
            0 => Some(GaborOrientation::Deg0),
            90 => Some(GaborOrientation::Deg90),
            _ => None,
        }
    }

    /// Rotates kernel coordinates `(s, t)` into the filter frame.
    fn rotate(self, s: f64, t: f64) -> (f64, f64) {
        match self {
            GaborOrientation::Deg0 => (s, t),
            GaborOrientation::Deg90 => (t, -s),
        }
    }
}

/// Parameters of one Gabor filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborSpec {
    /// Cycles per pixel.
    pub frequency: f64,
    pub sigma_s: f64,
    pub sigma_t: f64,
    pub orientation: GaborOrientation,
}

/// Default scales as `(frequency, sigma)`; sigma is shared by both axes.
pub const DEFAULT_SCALES: [(f64, f64); 2] = [(0.25, 2.0), (0.125, 4.0)];

/// Bank over `scales × {0°, 90°}`, scale-major.
pub fn bank_from_scales(scales: &[(f64, f64, f64)]) -> Vec<GaborSpec> {
    scales
        .iter()
        .flat_map(|&(frequency, sigma_s, sigma_t)| {
            [GaborOrientation::Deg0, GaborOrientation::Deg90].map(|orientation| GaborSpec {
                frequency,
                sigma_s,
                sigma_t,
                orientation,
            })
        })
        .collect()
}

pub fn default_bank() -> Vec<GaborSpec> {
    let scales: Vec<_> = DEFAULT_SCALES.iter().map(|&(f, s)| (f, s, s)).collect();
    bank_from_scales(&scales)
}

/// Sampled kernel on an odd square support centred at `(half, half)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborKernel {
    pub spec: GaborSpec,
    pub half: usize,
    /// Row-major over `t` (rows) then `s` (columns).
    pub taps: Vec<Complex64>,
}

impl GaborKernel {
    pub fn side(&self) -> usize {
        2 * self.half + 1
    }

    /// Tap at offset `(s, t)` from the centre.
    pub fn tap(&self, s: isize, t: isize) -> Complex64 {
        let h = self.half as isize;
        self.taps[((t + h) * (2 * h + 1) + (s + h)) as usize]
    }

    pub fn peak_gain(&self) -> f64 {
        1.0 / (2.0 * PI * self.spec.sigma_s * self.spec.sigma_t)
    }

    /// Separable factors `(along s, along t)` with the gain left out.
    fn factors(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let GaborSpec {
            frequency: f,
            sigma_s,
            sigma_t,
            orientation,
        } = self.spec;
        let h = self.half as isize;
        let carrier = |u: f64, sigma: f64| {
            Complex64::from_polar((-0.5 * u * u / (sigma * sigma)).exp(), 2.0 * PI * f * u)
        };
        let envelope =
            |u: f64, sigma: f64| Complex64::new((-0.5 * u * u / (sigma * sigma)).exp(), 0.0);
        let offsets = || (-h..=h).map(|u| u as f64);
        match orientation {
            GaborOrientation::Deg0 => (
                offsets().map(|u| carrier(u, sigma_s)).collect(),
                offsets().map(|u| envelope(u, sigma_t)).collect(),
            ),
            GaborOrientation::Deg90 => (
                offsets().map(|u| envelope(u, sigma_t)).collect(),
                offsets().map(|u| carrier(u, sigma_s)).collect(),
            ),
        }
    }
}

pub fn gabor_kernel(spec: GaborSpec) -> Result<GaborKernel> {
    let GaborSpec {
        frequency: f,
        sigma_s,
        sigma_t,
        orientation,
    } = spec;
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !(positive(f) && positive(sigma_s) && positive(sigma_t)) {
        return Err(Error::InvalidParameter(format!(
            "gabor parameters must be positive: f={f}, sigma_s={sigma_s}, sigma_t={sigma_t}"
        )));
    }
    let half = (3.0 * sigma_s.max(sigma_t)).ceil() as usize;
    let gain = 1.0 / (2.0 * PI * sigma_s * sigma_t);
    let h = half as isize;
    let mut taps = Vec::with_capacity((2 * half + 1).pow(2));
    for t in -h..=h {
        for s in -h..=h {
            let (sr, tr) = orientation.rotate(s as f64, t as f64);
            let exponent = Complex64::new(
                -0.5 * (sr * sr / (sigma_s * sigma_s) + tr * tr / (sigma_t * sigma_t)),
                2.0 * PI * f * sr,
            );
            taps.push(gain * exponent.exp());
        }
    }
    Ok(GaborKernel { spec, half, taps })
}

pub fn build_bank(specs: &[GaborSpec]) -> Result<Vec<GaborKernel>> {
    specs.iter().map(|&s| gabor_kernel(s)).collect()
}

/// Complex response `sum_{s,t} k(s,t) * I(x - s, y - t)` with replicated
/// edges, evaluated as two 1-D passes.
pub fn convolve_complex(img: &GrayImage, kernel: &GaborKernel) -> Vec<Complex64> {
    let (w, h) = (img.width(), img.height());
    let px = img.pixels();
    let half = kernel.half as isize;
    let (along_s, along_t) = kernel.factors();
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let mut rows = vec![Complex64::default(); w * h];
    for y in 0..h {
        let src = &px[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = Complex64::default();
            for (k, coef) in along_s.iter().enumerate() {
                let s = k as isize - half;
                acc += coef * src[clamp(x as isize - s, w)] as f64;
            }
            rows[y * w + x] = acc;
        }
    }
    let gain = kernel.peak_gain();
    let mut out = vec![Complex64::default(); w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = Complex64::default();
            for (k, coef) in along_t.iter().enumerate() {
                let t = k as isize - half;
                acc += coef * rows[clamp(y as isize - t, h) * w + x];
            }
            out[y * w + x] = gain * acc;
        }
    }
    out
}

/// Magnitude of each kernel's response, rescaled per channel to `[0, 255]`.
/// A response of uniform magnitude maps to all zeros.
pub fn gabor_responses(img: &GrayImage, bank: &[GaborKernel]) -> Result<Vec<GrayImage>> {
    if bank.is_empty() {
        return Err(Error::InvalidParameter("gabor bank is empty".into()));
    }
    bank.iter()
        .map(|k| {
            let mag: Vec<f64> = convolve_complex(img, k).iter().map(|c| c.norm()).collect();
            let (lo, hi) = mag
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            let span = hi - lo;
            let pixels = mag
                .iter()
                .map(|&v| {
                    if span > 0.0 {
                        ((v - lo) / span * 255.0).clamp(0.0, 255.0) as f32
                    } else {
                        0.0
                    }
                })
                .collect();
            GrayImage::new(img.width(), img.height(), pixels)
        })
        .collect()
}

/// Plain descriptors of every response image, concatenated channel-first.
pub fn build_gabor_descriptor(
    img: &GrayImage,
    params: &LghpParams,
    bank: &[GaborKernel],
) -> Result<DescriptorVector> {
    let responses = gabor_responses(img, bank)?;
    let mut counts = Vec::new();
    let mut config = None;
    for response in &responses {
        let d = build_descriptor(response, params)?;
        counts.extend_from_slice(&d.counts);
        config.get_or_insert(d.config);
    }
    let mut config = config.expect("bank is non-empty");
    config.gabor = bank.iter().map(|k| k.spec).collect();
    Ok(DescriptorVector { counts, config })
}
