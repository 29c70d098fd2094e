//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the optimized paths it is compared against.
#![allow(dead_code)]

use std::collections::BTreeMap;

use lghp::image::GrayImage;
use lghp::index::{DatasetIndex, IndexEntry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PAIRS_DEG: [(i32, i32); 6] = [(0, 45), (0, 90), (0, 135), (45, 90), (45, 135), (90, 135)];

fn unit(deg: i32) -> (i64, i64) {
    match deg {
        0 => (1, 0),
        45 => (1, -1),
        90 => (0, -1),
        135 => (-1, -1),
        _ => unreachable!(),
    }
}

/// Directional derivative read straight from the image.
pub fn gradient(img: &GrayImage, deg: i32, d: i64, x: i64, y: i64) -> f32 {
    let (ux, uy) = unit(deg);
    img.get(x as usize, y as usize) - img.get((x + d * ux) as usize, (y + d * uy) as usize)
}

/// Nine-point comparison code, centre first, then east and counterclockwise.
pub fn pattern_code(
    img: &GrayImage,
    (a, b): (i32, i32),
    d: usize,
    x: usize,
    y: usize,
) -> Option<u16> {
    let (w, h) = (img.width(), img.height());
    if x < 2 * d || y < 2 * d || x + 2 * d >= w || y + 2 * d >= h {
        return None;
    }
    let points = [
        (0, 0),
        (1, 0),
        (1, -1),
        (0, -1),
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
    ];
    let d = d as i64;
    let mut code = 0u16;
    for (dx, dy) in points {
        let (px, py) = (x as i64 + d * dx, y as i64 + d * dy);
        let bit = gradient(img, a, d, px, py) > gradient(img, b, d, px, py);
        code = (code << 1) | bit as u16;
    }
    Some(code)
}

pub fn lbp_code(img: &GrayImage, x: usize, y: usize) -> Option<u16> {
    if x == 0 || y == 0 || x + 1 >= img.width() || y + 1 >= img.height() {
        return None;
    }
    let c = img.get(x, y);
    let ring = [
        (1, 0),
        (1, -1),
        (0, -1),
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
    ];
    let mut code = 0u16;
    for (dx, dy) in ring {
        let v = img.get((x as i64 + dx) as usize, (y as i64 + dy) as usize);
        code = (code << 1) | (v >= c) as u16;
    }
    Some(code)
}

/// Pixel-centre bilinear sampling, one output pixel at a time.
pub fn bilinear(src: &[f64], sw: usize, sh: usize, dw: usize, dh: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for y in 0..dh {
        for x in 0..dw {
            let fx = ((x as f64 + 0.5) * sw as f64 / dw as f64 - 0.5)
                .max(0.0)
                .min((sw - 1) as f64);
            let fy = ((y as f64 + 0.5) * sh as f64 / dh as f64 - 0.5)
                .max(0.0)
                .min((sh - 1) as f64);
            let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
            let (x1, y1) = ((x0 + 1).min(sw - 1), (y0 + 1).min(sh - 1));
            let (ax, ay) = (fx - x0 as f64, fy - y0 as f64);
            let p = |xx: usize, yy: usize| src[yy * sw + xx];
            let v = p(x0, y0) * (1.0 - ax) * (1.0 - ay)
                + p(x1, y0) * ax * (1.0 - ay)
                + p(x0, y1) * (1.0 - ax) * ay
                + p(x1, y1) * ax * ay;
            out.push(v);
        }
    }
    out
}

/// Gabor tap from the closed form with a general rotation.
pub fn gabor_tap(f: f64, ss: f64, st: f64, orientation_deg: f64, s: f64, t: f64) -> (f64, f64) {
    let th = orientation_deg.to_radians();
    let sr = s * th.cos() + t * th.sin();
    let tr = -s * th.sin() + t * th.cos();
    let g = 1.0 / (2.0 * std::f64::consts::PI * ss * st);
    let env = (-0.5 * (sr * sr / (ss * ss) + tr * tr / (st * st))).exp();
    let phase = 2.0 * std::f64::consts::PI * f * sr;
    (g * env * phase.cos(), g * env * phase.sin())
}

/// Direct double-loop complex convolution with replicated edges.
pub fn convolve(img: &GrayImage, taps: &[(f64, f64)], half: usize) -> Vec<(f64, f64)> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let side = 2 * half as i64 + 1;
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for t in -(half as i64)..=half as i64 {
                for s in -(half as i64)..=half as i64 {
                    let (kr, ki) = taps[((t + half as i64) * side + s + half as i64) as usize];
                    let sx = (x - s).clamp(0, w - 1) as usize;
                    let sy = (y - t).clamp(0, h - 1) as usize;
                    let v = img.get(sx, sy) as f64;
                    re += kr * v;
                    im += ki * v;
                }
            }
            out.push((re, im));
        }
    }
    out
}

pub fn l1(a: &[u32], b: &[u32]) -> u64 {
    let mut total = 0i128;
    for i in 0..a.len() {
        total += (a[i] as i128 - b[i] as i128).abs();
    }
    total as u64
}

/// Ids of all other entries sorted by (distance, id).
pub fn ranking(index: &DatasetIndex, q: &IndexEntry) -> Vec<u32> {
    let mut v: Vec<(u64, u32)> = index
        .entries()
        .iter()
        .filter(|e| e.image_id != q.image_id)
        .map(|e| (l1(&q.counts, &e.counts), e.image_id))
        .collect();
    v.sort();
    v.into_iter().map(|(_, id)| id).collect()
}

fn label_of(index: &DatasetIndex, id: u32) -> u32 {
    index
        .entries()
        .iter()
        .find(|e| e.image_id == id)
        .unwrap()
        .label
}

/// Same-class images at rank <= n, excluding the query.
fn delta_sum(index: &DatasetIndex, q: &IndexEntry, n: usize) -> f64 {
    let ranked = ranking(index, q);
    let mut s = 0.0;
    for (pos, id) in ranked.iter().enumerate() {
        let rank = pos + 1;
        if label_of(index, *id) == q.label && rank <= n {
            s += 1.0;
        }
    }
    s
}

pub fn precision(index: &DatasetIndex, q: &IndexEntry, n: usize) -> f64 {
    delta_sum(index, q, n) / n as f64
}

pub fn class_size(index: &DatasetIndex, label: u32) -> usize {
    index.entries().iter().filter(|e| e.label == label).count()
}

pub fn recall(index: &DatasetIndex, q: &IndexEntry, n: usize) -> f64 {
    delta_sum(index, q, n) / class_size(index, q.label) as f64
}

fn class_then_dataset(index: &DatasetIndex, per: impl Fn(&IndexEntry) -> f64) -> f64 {
    let mut classes: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for q in index.entries() {
        classes.entry(q.label).or_default().push(per(q));
    }
    let means: Vec<f64> = classes
        .values()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
        .collect();
    means.iter().sum::<f64>() / means.len() as f64
}

pub fn apr(index: &DatasetIndex, n: usize) -> f64 {
    class_then_dataset(index, |q| precision(index, q, n))
}

pub fn arr(index: &DatasetIndex, n: usize) -> f64 {
    class_then_dataset(index, |q| recall(index, q, n))
}

/// Rank 1 is the probe itself; the rank-2 image decides.
pub fn loo(index: &DatasetIndex) -> f64 {
    let mut hits = 0;
    for q in index.entries() {
        let others = ranking(index, q);
        if let Some(&second) = others.first() {
            if label_of(index, second) == q.label {
                hits += 1;
            }
        }
    }
    100.0 * hits as f64 / index.len() as f64
}

pub fn split(probe: &[&IndexEntry], gallery: &[&IndexEntry]) -> f64 {
    let mut hits = 0;
    for p in probe {
        let best = gallery
            .iter()
            .min_by_key(|g| (l1(&p.counts, &g.counts), g.image_id))
            .unwrap();
        if best.label == p.label {
            hits += 1;
        }
    }
    100.0 * hits as f64 / probe.len() as f64
}

/// Per-fold rates with the probe drawn by a partial Fisher-Yates shuffle
/// on the (seed, fold) ChaCha8 stream.
pub fn cross_validate(index: &DatasetIndex, fraction: f64, folds: usize, seed: u64) -> Vec<f64> {
    let total = index.len();
    let k = (fraction * total as f64).round() as usize;
    (0..folds)
        .map(|fold| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(fold as u64);
            let mut order: Vec<usize> = (0..total).collect();
            for i in 0..k {
                let j = rng.random_range(i..total);
                order.swap(i, j);
            }
            let chosen = &order[..k];
            let entries = index.entries();
            let probe: Vec<&IndexEntry> = chosen.iter().map(|&i| &entries[i]).collect();
            let gallery: Vec<&IndexEntry> = (0..total)
                .filter(|i| !chosen.contains(i))
                .map(|i| &entries[i])
                .collect();
            split(&probe, &gallery)
        })
        .collect()
}

pub fn random_image(w: usize, h: usize, max: u32, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(w, h, |_, _| rng.random_range(0..=max) as f32).unwrap()
}
