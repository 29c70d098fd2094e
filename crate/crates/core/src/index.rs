//! In-memory collection of labeled descriptors sharing one configuration.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::config::DescriptorConfig;
use crate::dataset::DatasetManifest;
use crate::error::{Error, Result};
use crate::histogram::DescriptorVector;
use crate::image::{load_image, GrayImage};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub image_id: u32,
    pub label: u32,
    pub path: String,
    pub counts: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetIndex {
    config: DescriptorConfig,
    entries: Vec<IndexEntry>,
}

impl DatasetIndex {
    /// Checks that image ids are unique and every descriptor has the
    /// configured length.
    pub fn new(config: DescriptorConfig, entries: Vec<IndexEntry>) -> Result<Self> {
        let len = config.descriptor_len();
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if e.counts.len() != len {
                return Err(Error::ConfigMismatch(format!(
                    "entry {} has {} counts, expected {len}",
                    e.image_id,
                    e.counts.len()
                )));
            }
            if !seen.insert(e.image_id) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate image id {}",
                    e.image_id
                )));
            }
        }
        Ok(Self { config, entries })
    }

    /// Index over `(label, descriptor)` pairs with ids assigned in order.
    pub fn from_descriptors(
        config: DescriptorConfig,
        items: impl IntoIterator<Item = (u32, DescriptorVector)>,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, (label, d)) in items.into_iter().enumerate() {
            if d.config != config {
                return Err(Error::ConfigMismatch(format!(
                    "descriptor {i} was extracted with a different configuration"
                )));
            }
            entries.push(IndexEntry {
                image_id: i as u32,
                label,
                path: String::new(),
                counts: d.counts,
            });
        }
        Self::new(config, entries)
    }

    pub fn config(&self) -> &DescriptorConfig {
        &self.config
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, image_id: u32) -> Option<&IndexEntry> {
        self.entries.iter().find(|e| e.image_id == image_id)
    }

    /// Sub-index holding the given ids, in the given order.
    pub fn subset(&self, ids: &[u32]) -> Result<Self> {
        let entries = ids
            .iter()
            .map(|&id| self.get(id).cloned().ok_or(Error::QueryNotInIndex(id)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.config.clone(), entries)
    }

    pub fn descriptor(&self, entry: &IndexEntry) -> DescriptorVector {
        DescriptorVector {
            counts: entry.counts.clone(),
            config: self.config.clone(),
        }
    }
}

/// Extracts descriptors for labeled images in parallel; ids follow input order.
pub fn index_images(
    config: &DescriptorConfig,
    images: &[(u32, GrayImage)],
) -> Result<DatasetIndex> {
    config.validate()?;
    let descriptors = images
        .par_iter()
        .map(|(label, img)| config.extract(img).map(|d| (*label, d)))
        .collect::<Result<Vec<_>>>()?;
    DatasetIndex::from_descriptors(config.clone(), descriptors)
}

/// Loads, preprocesses and describes every manifest entry in parallel.
pub fn build_index(manifest: &DatasetManifest, config: &DescriptorConfig) -> Result<DatasetIndex> {
    config.validate()?;
    let side = config.params.side;
    let entries = manifest
        .entries
        .par_iter()
        .map(|e| {
            let img = load_image(&e.path, side)?;
            let d = config.extract(&img)?;
            Ok(IndexEntry {
                image_id: e.image_id,
                label: e.label,
                path: e.path.to_string_lossy().into_owned(),
                counts: d.counts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DatasetIndex::new(config.clone(), entries)
}
