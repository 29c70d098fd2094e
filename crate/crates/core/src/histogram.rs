//! Spatial histograms of code maps and descriptor assembly.
//!
//! Descriptor layout, outermost first: Gabor channel, distance, direction
//! pair, spatial cell (row-major), bin.

use crate::config::{Binning, DescriptorConfig, DescriptorKind, LghpParams};
use crate::descriptor::{compute_lbp_baseline, compute_lghp_maps, PatternCodeMap};
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Number of circularly uniform 9-bit codes.
pub const U2_UNIFORM_CODES: usize = 74;

const fn circular_transitions(code: u16) -> u32 {
    let rotated = ((code << 1) | (code >> 8)) & 0x1ff;
    (code ^ rotated).count_ones()
}

const U2_TABLE: [u8; 512] = {
    let mut table = [U2_UNIFORM_CODES as u8; 512];
    let mut next = 0u8;
    let mut code = 0;
    while code < 512 {
        if circular_transitions(code as u16) <= 2 {
            table[code] = next;
            next += 1;
        }
        code += 1;
    }
    table
};

/// Uniform-2 bin of a 9-bit code.
pub fn u2_bin(code: u32) -> Result<usize> {
    if code >= 512 {
        return Err(Error::CodeOutOfRange(code));
    }
    Ok(U2_TABLE[code as usize] as usize)
}

#[inline]
fn bin_of(binning: Binning, code: u16) -> usize {
    match binning {
        Binning::Full512 => code as usize,
        Binning::Paper256 => (code & 0xff) as usize,
        Binning::U2 => U2_TABLE[code as usize] as usize,
    }
}

/// Concatenated descriptor counts plus the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorVector {
    pub counts: Vec<u32>,
    pub config: DescriptorConfig,
}

impl DescriptorVector {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Histograms of `map` over a `grid`×`grid` partition, cell-major. Cells
/// are `extent / grid` wide; the remainder joins the last cell.
pub fn histogram_map(map: &PatternCodeMap, binning: Binning, grid: usize) -> Result<Vec<u32>> {
    if grid == 0 || grid > map.width || grid > map.height {
        return Err(Error::InvalidParameter(format!(
            "grid {grid} does not fit a {}x{} map",
            map.width, map.height
        )));
    }
    let bins = binning.bins();
    let mut hist = vec![0u32; grid * grid * bins];
    accumulate(map, binning, grid, &mut hist)?;
    Ok(hist)
}

fn accumulate(map: &PatternCodeMap, binning: Binning, grid: usize, out: &mut [u32]) -> Result<()> {
    let bins = binning.bins();
    let (cw, ch) = (map.width / grid, map.height / grid);
    let m = map.margin;
    let col_cell: Vec<usize> = (0..map.width).map(|x| (x / cw).min(grid - 1)).collect();
    for y in m..map.height.saturating_sub(m) {
        let row_base = (y / ch).min(grid - 1) * grid;
        let codes = &map.codes[y * map.width..(y + 1) * map.width];
        for x in m..map.width.saturating_sub(m) {
            out[(row_base + col_cell[x]) * bins + bin_of(binning, codes[x])] += 1;
        }
    }
    for cy in 0..grid {
        for cx in 0..grid {
            let cell = (cy * grid + cx) * bins;
            if out[cell..cell + bins].iter().all(|&c| c == 0) {
                return Err(Error::EmptyCell { cx, cy });
            }
        }
    }
    Ok(())
}

fn check_extent(img: &GrayImage, params: &LghpParams) -> Result<()> {
    if img.width() != params.side || img.height() != params.side {
        return Err(Error::InvalidParameter(format!(
            "expected a {0}x{0} image, got {1}x{2}",
            params.side,
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

fn assemble(maps: &[PatternCodeMap], config: DescriptorConfig) -> Result<DescriptorVector> {
    let p = &config.params;
    let block = p.grid * p.grid * p.binning.bins();
    let mut counts = vec![0u32; maps.len() * block];
    for (map, out) in maps.iter().zip(counts.chunks_exact_mut(block)) {
        accumulate(map, p.binning, p.grid, out)?;
    }
    Ok(DescriptorVector { counts, config })
}

/// LGHP descriptor of a `side`×`side` image.
pub fn build_descriptor(img: &GrayImage, params: &LghpParams) -> Result<DescriptorVector> {
    params.validate()?;
    check_extent(img, params)?;
    let maps = compute_lghp_maps(img, params.radius_limit)?;
    assemble(&maps, DescriptorConfig::lghp(*params))
}

/// Baseline LBP descriptor; `radius_limit` is ignored.
pub fn build_lbp_descriptor(img: &GrayImage, params: &LghpParams) -> Result<DescriptorVector> {
    let config = DescriptorConfig {
        kind: DescriptorKind::Lbp,
        params: *params,
        gabor: Vec::new(),
    };
    config.validate()?;
    check_extent(img, params)?;
    let map = compute_lbp_baseline(img)?;
    assemble(std::slice::from_ref(&map), config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::DirectionPair;

    fn zero_map(side: usize, d: usize) -> PatternCodeMap {
        PatternCodeMap {
            pair: Some(DirectionPair::CANONICAL[0]),
            distance: d,
            width: side,
            height: side,
            margin: 2 * d,
            codes: vec![0; side * side],
        }
    }

    #[test]
    fn u2_examples() {
        assert_eq!(u2_bin(0).unwrap(), 0);
        assert_eq!(u2_bin(0b1_0101_0101).unwrap(), 74);
        assert_eq!(u2_bin(511).unwrap(), 73);
        assert_eq!(u2_bin(1).unwrap(), 1);
        assert!(matches!(u2_bin(512), Err(Error::CodeOutOfRange(512))));
    }

    #[test]
    fn zero_map_histograms() {
        let map = zero_map(64, 1);
        let h = histogram_map(&map, Binning::Full512, 1).unwrap();
        assert_eq!(h.len(), 512);
        // valid region is (64 - 4D)^2: a 2D margin on every side
        assert_eq!(h[0], 60 * 60);
        assert!(h[1..].iter().all(|&c| c == 0));
        let h = histogram_map(&map, Binning::Paper256, 1).unwrap();
        assert_eq!(h[0], 3600);
        assert_eq!(h.len(), 256);
    }

    #[test]
    fn remainder_goes_to_last_cell() {
        let map = PatternCodeMap {
            margin: 0,
            ..zero_map(5, 1)
        };
        let h = histogram_map(&map, Binning::Full512, 2).unwrap();
        let cell = |i: usize| h[i * 512];
        assert_eq!([cell(0), cell(1), cell(2), cell(3)], [4, 6, 6, 9]);
    }

    #[test]
    fn empty_cell_is_an_error() {
        // an 8-pixel margin swallows the first 8-pixel cell of a 4x4 grid
        let map = zero_map(32, 4);
        assert!(matches!(
            histogram_map(&map, Binning::Full512, 4),
            Err(Error::EmptyCell { cx: 0, cy: 0 })
        ));
    }

    #[test]
    fn descriptor_lengths_and_constant_mass() {
        let img = GrayImage::filled(64, 64, 40.0).unwrap();
        let p = LghpParams::default();
        assert_eq!(build_descriptor(&img, &p).unwrap().len(), 9216);
        let p256 = LghpParams {
            binning: Binning::Paper256,
            ..p
        };
        assert_eq!(build_descriptor(&img, &p256).unwrap().len(), 4608);

        let r1 = LghpParams {
            radius_limit: 1,
            ..p
        };
        let d = build_descriptor(&img, &r1).unwrap();
        let nonzero: Vec<(usize, u32)> = d
            .counts
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, c)| c != 0)
            .collect();
        assert_eq!(nonzero, (0..6).map(|k| (k * 512, 3600)).collect::<Vec<_>>());
    }

    #[test]
    fn wrong_extent_rejected() {
        let img = GrayImage::filled(32, 32, 0.0).unwrap();
        assert!(build_descriptor(&img, &LghpParams::default()).is_err());
    }

    #[test]
    fn lbp_descriptor_shape() {
        let img = GrayImage::filled(64, 64, 9.0).unwrap();
        let d = build_lbp_descriptor(&img, &LghpParams::default()).unwrap();
        assert_eq!(d.len(), 512);
        assert_eq!(d.counts[255], 62 * 62);
        assert_eq!(d.config.kind, DescriptorKind::Lbp);
    }
}
