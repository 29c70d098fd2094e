//! Directional gradients and the 9-bit pairwise-derivative micropatterns.
//!
//! For a reference pixel `P0` and distance `D`, the gradient in direction
//! `a` is `I(P0) - I(P0 + D*u(a))` with unit steps (x right, y down)
//!
//! ```text
//!   u(0)   = (+1,  0)     u(45)  = (+1, -1)
//!   u(90)  = ( 0, -1)     u(135) = (-1, -1)
//! ```
//!
//! A micropattern for the direction pair `(a, b)` compares the two gradient
//! fields at `P0` and at its eight ring neighbours at Chebyshev distance `D`:
//!
//! ```text
//!   P4  P3  P2
//!   P5  P0  P1        bit 8      : G_a(P0) > G_b(P0)
//!   P6  P7  P8        bit 8 - k  : G_a(Pk) > G_b(Pk),  k = 1..8
//! ```
//!
//! Codes exist only where every sampled pixel is inside the image, so maps
//! carry a margin of `2*D` pixels that is never encoded.

use std::fmt;

use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Deg0,
        Direction::Deg45,
        Direction::Deg90,
        Direction::Deg135,
    ];

    pub fn degrees(self) -> u32 {
        match self {
            Direction::Deg0 => 0,
            Direction::Deg45 => 45,
            Direction::Deg90 => 90,
            Direction::Deg135 => 135,
        }
    }

    pub fn from_degrees(deg: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.degrees() == deg)
    }

    /// Unit step `(dx, dy)` in image coordinates.
    pub fn step(self) -> (isize, isize) {
        match self {
            Direction::Deg0 => (1, 0),
            Direction::Deg45 => (1, -1),
            Direction::Deg90 => (0, -1),
            Direction::Deg135 => (-1, -1),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Ring neighbours `P1..P8` as unit steps, east first, counterclockwise.
pub const RING: [(isize, isize); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Ordered pair of derivative directions with `alpha < beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DirectionPair {
    alpha: Direction,
    beta: Direction,
}

impl DirectionPair {
    /// The six pairs in concatenation order.
    pub const CANONICAL: [DirectionPair; 6] = [
        DirectionPair::raw(Direction::Deg0, Direction::Deg45),
        DirectionPair::raw(Direction::Deg0, Direction::Deg90),
        DirectionPair::raw(Direction::Deg0, Direction::Deg135),
        DirectionPair::raw(Direction::Deg45, Direction::Deg90),
        DirectionPair::raw(Direction::Deg45, Direction::Deg135),
        DirectionPair::raw(Direction::Deg90, Direction::Deg135),
    ];

    const fn raw(alpha: Direction, beta: Direction) -> Self {
        Self { alpha, beta }
    }

    pub fn new(alpha: Direction, beta: Direction) -> Result<Self> {
        if alpha < beta {
            Ok(Self { alpha, beta })
        } else {
            Err(Error::InvalidParameter(format!(
                "direction pair ({}, {}) is not ordered",
                alpha.degrees(),
                beta.degrees()
            )))
        }
    }

    pub fn alpha(self) -> Direction {
        self.alpha
    }

    pub fn beta(self) -> Direction {
        self.beta
    }
}

impl fmt::Display for DirectionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.alpha.degrees(), self.beta.degrees())
    }
}

/// First-order directional derivative at one distance.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub direction: Direction,
    pub distance: usize,
    pub width: usize,
    pub height: usize,
    /// Row-major; entries inside the margin are 0 and meaningless.
    pub values: Vec<f32>,
}

impl GradientField {
    pub fn valid_margin(&self) -> usize {
        self.distance
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f32> {
        let m = self.distance;
        (x >= m && y >= m && x + m < self.width && y + m < self.height)
            .then(|| self.values[y * self.width + x])
    }
}

/// Raster of micropattern codes for one direction pair (or the LBP
/// baseline, which has no pair) at one distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCodeMap {
    pub pair: Option<DirectionPair>,
    pub distance: usize,
    pub width: usize,
    pub height: usize,
    pub margin: usize,
    /// Row-major; entries inside the margin are 0.
    pub codes: Vec<u16>,
}

impl PatternCodeMap {
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        let m = self.margin;
        x >= m && y >= m && x + m < self.width && y + m < self.height
    }

    pub fn code(&self, x: usize, y: usize) -> Option<u16> {
        self.is_valid(x, y).then(|| self.codes[y * self.width + x])
    }

    /// Iterates `(x, y, code)` over the valid region in row-major order.
    pub fn valid_codes(&self) -> impl Iterator<Item = (usize, usize, u16)> + '_ {
        let m = self.margin;
        let (w, h) = (self.width, self.height);
        (m..h.saturating_sub(m))
            .flat_map(move |y| (m..w.saturating_sub(m)).map(move |x| (x, y)))
            .map(move |(x, y)| (x, y, self.codes[y * w + x]))
    }

    pub fn valid_pixel_count(&self) -> usize {
        let m = 2 * self.margin;
        self.width.saturating_sub(m) * self.height.saturating_sub(m)
    }
}

fn check_gradient_distance(img: &GrayImage, distance: usize) -> Result<()> {
    let limit = (img.width().min(img.height()).saturating_sub(1)) / 2;
    if distance == 0 {
        return Err(Error::InvalidParameter(
            "distance must be at least 1".into(),
        ));
    }
    if distance > limit {
        return Err(Error::DistanceTooLarge {
            distance,
            width: img.width(),
            height: img.height(),
        });
    }
    Ok(())
}

fn check_pattern_distance(img: &GrayImage, distance: usize) -> Result<()> {
    check_gradient_distance(img, distance)?;
    if 4 * distance >= img.width() || 4 * distance >= img.height() {
        return Err(Error::DistanceTooLarge {
            distance,
            width: img.width(),
            height: img.height(),
        });
    }
    Ok(())
}

fn gradient_unchecked(img: &GrayImage, direction: Direction, distance: usize) -> GradientField {
    let (w, h) = (img.width(), img.height());
    let px = img.pixels();
    let (dx, dy) = direction.step();
    let shift = (dy * distance as isize) * w as isize + dx * distance as isize;
    let mut values = vec![0.0f32; w * h];
    for y in distance..h - distance {
        let row = y * w;
        for x in distance..w - distance {
            let i = row + x;
            values[i] = px[i] - px[(i as isize + shift) as usize];
        }
    }
    GradientField {
        direction,
        distance,
        width: w,
        height: h,
        values,
    }
}

/// Directional derivative of `img` in `direction` at `distance`.
pub fn compute_gradient(
    img: &GrayImage,
    direction: Direction,
    distance: usize,
) -> Result<GradientField> {
    check_gradient_distance(img, distance)?;
    Ok(gradient_unchecked(img, direction, distance))
}

fn encode_pair(ga: &GradientField, gb: &GradientField, pair: DirectionPair) -> PatternCodeMap {
    let (w, h, d) = (ga.width, ga.height, ga.distance);
    // comparison bits over the valid gradient region
    let mut bits = vec![0u16; w * h];
    for y in d..h - d {
        let row = y * w;
        for x in d..w - d {
            let i = row + x;
            bits[i] = (ga.values[i] > gb.values[i]) as u16;
        }
    }
    let offsets: [isize; 8] = RING.map(|(dx, dy)| dy * d as isize * w as isize + dx * d as isize);
    let margin = 2 * d;
    let mut codes = vec![0u16; w * h];
    for y in margin..h - margin {
        let row = y * w;
        for x in margin..w - margin {
            let i = row + x;
            let mut code = bits[i] << 8;
            for (k, off) in offsets.iter().enumerate() {
                code |= bits[(i as isize + off) as usize] << (7 - k);
            }
            codes[i] = code;
        }
    }
    PatternCodeMap {
        pair: Some(pair),
        distance: d,
        width: w,
        height: h,
        margin,
        codes,
    }
}

/// Micropattern code map for one direction pair at one distance.
pub fn compute_pattern_map(
    img: &GrayImage,
    pair: DirectionPair,
    distance: usize,
) -> Result<PatternCodeMap> {
    check_pattern_distance(img, distance)?;
    let ga = gradient_unchecked(img, pair.alpha, distance);
    let gb = gradient_unchecked(img, pair.beta, distance);
    Ok(encode_pair(&ga, &gb, pair))
}

/// All `6 * radius_limit` maps, ordered by distance then canonical pair.
pub fn compute_lghp_maps(img: &GrayImage, radius_limit: usize) -> Result<Vec<PatternCodeMap>> {
    if radius_limit == 0 {
        return Err(Error::InvalidParameter(
            "radius limit must be at least 1".into(),
        ));
    }
    let mut maps = Vec::with_capacity(6 * radius_limit);
    for d in 1..=radius_limit {
        check_pattern_distance(img, d)?;
        let grads = Direction::ALL.map(|dir| gradient_unchecked(img, dir, d));
        for pair in DirectionPair::CANONICAL {
            maps.push(encode_pair(
                &grads[pair.alpha.index()],
                &grads[pair.beta.index()],
                pair,
            ));
        }
    }
    Ok(maps)
}

/// Renders codes linearly from `[0, 511]` to `[0, 255]`; margins are black.
pub fn render_feature_image(map: &PatternCodeMap) -> GrayImage {
    let mut pixels = vec![0.0f32; map.width * map.height];
    for (x, y, code) in map.valid_codes() {
        pixels[y * map.width + x] = code as f32 * 255.0 / 511.0;
    }
    GrayImage::new(map.width, map.height, pixels).expect("rescaled codes stay in range")
}

/// Radius-1, 8-neighbour LBP: bit `8 - k` is set when neighbour `Pk` is at
/// least as bright as the centre. Bit 8 is always 0.
pub fn compute_lbp_baseline(img: &GrayImage) -> Result<PatternCodeMap> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::DistanceTooLarge {
            distance: 1,
            width: w,
            height: h,
        });
    }
    let px = img.pixels();
    let offsets: [isize; 8] = RING.map(|(dx, dy)| dy * w as isize + dx);
    let mut codes = vec![0u16; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let center = px[i];
            let mut code = 0u16;
            for (k, off) in offsets.iter().enumerate() {
                code |= ((px[(i as isize + off) as usize] >= center) as u16) << (7 - k);
            }
            codes[i] = code;
        }
    }
    Ok(PatternCodeMap {
        pair: None,
        distance: 1,
        width: w,
        height: h,
        margin: 1,
        codes,
    })
}
