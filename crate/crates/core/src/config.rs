//! Extraction settings shared by every descriptor in an index.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gabor::{build_bank, build_gabor_descriptor, GaborSpec};
use crate::histogram::{build_descriptor, build_lbp_descriptor, DescriptorVector};
use crate::image::{GrayImage, DEFAULT_SIDE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Binning {
    /// Raw 9-bit code, 512 bins.
    #[default]
    Full512,
    /// Eight neighbour bits only, 256 bins.
    Paper256,
    /// 74 circularly uniform codes plus one catch-all bin.
    U2,
}

impl Binning {
    pub fn bins(self) -> usize {
        match self {
            Binning::Full512 => 512,
            Binning::Paper256 => 256,
            Binning::U2 => 75,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Binning::Full512 => "full-512",
            Binning::Paper256 => "paper-256",
            Binning::U2 => "u2",
        }
    }
}

impl fmt::Display for Binning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Binning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full-512" => Ok(Binning::Full512),
            "paper-256" => Ok(Binning::Paper256),
            "u2" => Ok(Binning::U2),
            other => Err(Error::InvalidParameter(format!(
                "unknown binning '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DescriptorKind {
    #[default]
    Lghp,
    Lbp,
}

impl DescriptorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DescriptorKind::Lghp => "lghp",
            DescriptorKind::Lbp => "lbp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LghpParams {
    /// Largest ring distance; maps are built for `D = 1..=radius_limit`.
    pub radius_limit: usize,
    pub side: usize,
    pub binning: Binning,
    /// Spatial cells per axis.
    pub grid: usize,
}

impl Default for LghpParams {
    fn default() -> Self {
        Self {
            radius_limit: 3,
            side: DEFAULT_SIDE,
            binning: Binning::Full512,
            grid: 1,
        }
    }
}

impl LghpParams {
    /// Checks that every spatial cell keeps valid pixels after the `margin`.
    pub(crate) fn validate_margin(&self, margin: usize) -> Result<()> {
        if self.radius_limit == 0 {
            return Err(Error::InvalidParameter(
                "radius limit must be at least 1".into(),
            ));
        }
        if self.grid == 0 {
            return Err(Error::InvalidParameter("grid must be at least 1".into()));
        }
        if margin >= self.side / self.grid || 2 * margin >= self.side {
            return Err(Error::InvalidParameter(format!(
                "margin {margin} leaves no valid pixels in a {}-pixel cell",
                self.side / self.grid
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_margin(2 * self.radius_limit)
    }
}

/// Everything needed to reproduce a descriptor from a preprocessed image.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorConfig {
    pub kind: DescriptorKind,
    pub params: LghpParams,
    /// Empty when Gabor prefiltering is off.
    pub gabor: Vec<GaborSpec>,
}

impl DescriptorConfig {
    pub fn lghp(params: LghpParams) -> Self {
        Self {
            kind: DescriptorKind::Lghp,
            params,
            gabor: Vec::new(),
        }
    }

    pub fn channels(&self) -> usize {
        self.gabor.len().max(1)
    }

    pub fn maps_per_channel(&self) -> usize {
        match self.kind {
            DescriptorKind::Lghp => 6 * self.params.radius_limit,
            DescriptorKind::Lbp => 1,
        }
    }

    pub fn descriptor_len(&self) -> usize {
        self.channels()
            * self.maps_per_channel()
            * self.params.grid
            * self.params.grid
            * self.params.binning.bins()
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DescriptorKind::Lghp => self.params.validate(),
            DescriptorKind::Lbp => self.params.validate_margin(1),
        }
    }

    /// Extracts the configured descriptor from an image of `side`×`side`.
    pub fn extract(&self, img: &GrayImage) -> Result<DescriptorVector> {
        if self.gabor.is_empty() {
            return match self.kind {
                DescriptorKind::Lghp => build_descriptor(img, &self.params),
                DescriptorKind::Lbp => build_lbp_descriptor(img, &self.params),
            };
        }
        let bank = build_bank(&self.gabor)?;
        match self.kind {
            DescriptorKind::Lghp => build_gabor_descriptor(img, &self.params, &bank),
            DescriptorKind::Lbp => {
                let mut counts = Vec::with_capacity(self.descriptor_len());
                for response in crate::gabor::gabor_responses(img, &bank)? {
                    counts.extend(build_lbp_descriptor(&response, &self.params)?.counts);
                }
                Ok(DescriptorVector {
                    counts,
                    config: self.clone(),
                })
            }
        }
    }
}
