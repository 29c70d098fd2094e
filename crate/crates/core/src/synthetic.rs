//! Seeded synthetic face-like corpus for smoke tests and benchmarks.
//!
//! Every class owns a fixed layout (oval head, two eyes, a mouth, placed
//! with per-class jitter) plus a per-class oriented texture. Each rendering
//! of a class applies its own gain, offset, linear illumination ramp and
//! pixel noise.

use std::f32::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::image::GrayImage;

#[derive(Debug, Clone)]
struct ClassModel {
    head: (f32, f32, f32, f32),
    eyes: [(f32, f32, f32); 2],
    mouth: (f32, f32, f32, f32),
    waves: Vec<(f32, f32, f32, f32)>,
    base: f32,
}

impl ClassModel {
    fn sample(rng: &mut ChaCha8Rng, side: f32) -> Self {
        let mut j = |lo: f32, hi: f32| rng.random_range(lo..hi);
        let head = (
            side * j(0.45, 0.55),
            side * j(0.47, 0.55),
            side * j(0.28, 0.38),
            side * j(0.36, 0.45),
        );
        let eye_y = side * j(0.35, 0.45);
        let eye_dx = side * j(0.11, 0.17);
        let eye_r = side * j(0.04, 0.07);
        let eyes = [
            (head.0 - eye_dx, eye_y, eye_r),
            (head.0 + eye_dx, eye_y + side * j(-0.02, 0.02), eye_r),
        ];
        let mouth = (
            head.0 + side * j(-0.03, 0.03),
            side * j(0.66, 0.74),
            side * j(0.09, 0.16),
            side * j(0.025, 0.045),
        );
        let waves = (0..3)
            .map(|_| (j(0.0, PI), j(0.15, 0.6), j(0.0, 2.0 * PI), j(6.0, 18.0)))
            .collect();
        Self {
            head,
            eyes,
            mouth,
            waves,
            base: j(120.0, 170.0),
        }
    }

    fn intensity(&self, x: f32, y: f32) -> f32 {
        let (hx, hy, hrx, hry) = self.head;
        let in_head = ((x - hx) / hrx).powi(2) + ((y - hy) / hry).powi(2);
        let mut v = if in_head <= 1.0 {
            self.base
        } else {
            self.base * 0.45
        };
        for &(ex, ey, r) in &self.eyes {
            let d2 = (x - ex).powi(2) + (y - ey).powi(2);
            v -= 70.0 * (-d2 / (2.0 * r * r)).exp();
        }
        let (mx, my, mrx, mry) = self.mouth;
        let dm = ((x - mx) / mrx).powi(2) + ((y - my) / mry).powi(2);
        v -= 50.0 * (-dm).exp();
        for &(theta, freq, phase, amp) in &self.waves {
            v += amp * (freq * (x * theta.cos() + y * theta.sin()) + phase).sin();
        }
        v
    }
}

/// `classes × per_class` labeled `side`×`side` images, class-major.
pub fn face_like_corpus(
    classes: usize,
    per_class: usize,
    side: usize,
    seed: u64,
) -> Vec<(u32, GrayImage)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let models: Vec<ClassModel> = (0..classes)
        .map(|_| ClassModel::sample(&mut rng, side as f32))
        .collect();
    let noise = Normal::new(0.0f32, 3.0).unwrap();
    let mut out = Vec::with_capacity(classes * per_class);
    for (label, model) in models.iter().enumerate() {
        for _ in 0..per_class {
            let gain = rng.random_range(0.7..1.2f32);
            let offset = rng.random_range(-20.0..20.0f32);
            let ramp_dir = rng.random_range(0.0..2.0 * PI);
            let ramp = rng.random_range(0.0..40.0f32) / side as f32;
            let (cx, cy) = (side as f32 / 2.0, side as f32 / 2.0);
            let img = GrayImage::from_fn(side, side, |x, y| {
                let (fx, fy) = (x as f32, y as f32);
                let light = ramp * ((fx - cx) * ramp_dir.cos() + (fy - cy) * ramp_dir.sin());
                let v = gain * model.intensity(fx, fy) + offset + light + noise.sample(&mut rng);
                v.clamp(0.0, 255.0)
            })
            .expect("clamped intensities");
            out.push((label as u32, img));
        }
    }
    out
}

/// Uniform random image with integer intensities in `0..=max`.
pub fn random_image(width: usize, height: usize, max: u32, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(width, height, |_, _| rng.random_range(0..=max) as f32)
        .expect("values within range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape_and_determinism() {
        let a = face_like_corpus(3, 2, 32, 1);
        assert_eq!(a.len(), 6);
        assert_eq!(
            a.iter().map(|(l, _)| *l).collect::<Vec<_>>(),
            vec![0, 0, 1, 1, 2, 2]
        );
        let b = face_like_corpus(3, 2, 32, 1);
        assert!(a.iter().zip(&b).all(|(x, y)| x == y));
        assert_ne!(a[0].1, a[1].1);
    }
}
