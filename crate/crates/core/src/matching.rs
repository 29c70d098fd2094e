//! L1 distance, full ranking and 1-NN classification.

use crate::error::{Error, Result};
use crate::histogram::DescriptorVector;
use crate::index::{DatasetIndex, IndexEntry};

/// Exact L1 distance between two count vectors of equal length.
pub fn l1_counts(a: &[u32], b: &[u32]) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as u64).sum()
}

pub fn l1_distance(x: &DescriptorVector, y: &DescriptorVector) -> Result<u64> {
    if x.config != y.config {
        return Err(Error::ConfigMismatch(
            "descriptors were extracted with different configurations".into(),
        ));
    }
    if x.len() != y.len() {
        return Err(Error::ConfigMismatch(format!(
            "descriptor lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(l1_counts(&x.counts, &y.counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankedEntry {
    pub image_id: u32,
    pub label: u32,
    pub distance: u64,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankedList {
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry at a 1-based rank.
    pub fn at_rank(&self, rank: usize) -> Option<&RankedEntry> {
        rank.checked_sub(1).and_then(|i| self.entries.get(i))
    }
}

/// Ranks `entries` by ascending distance to `query`, ties by ascending
/// image id. `self_id` is dropped unless `include_self`, in which case it
/// leads its tie group so that it always takes rank 1.
pub(crate) fn rank_entries<'a>(
    query: &[u32],
    entries: impl IntoIterator<Item = &'a IndexEntry>,
    include_self: bool,
    self_id: Option<u32>,
) -> RankedList {
    let mut scored: Vec<(u64, bool, u32, u32)> = entries
        .into_iter()
        .filter(|e| include_self || Some(e.image_id) != self_id)
        .map(|e| {
            let not_self = Some(e.image_id) != self_id;
            (l1_counts(query, &e.counts), not_self, e.image_id, e.label)
        })
        .collect();
    scored.sort_unstable();
    RankedList {
        entries: scored
            .into_iter()
            .enumerate()
            .map(|(i, (distance, _, image_id, label))| RankedEntry {
                image_id,
                label,
                distance,
                rank: i + 1,
            })
            .collect(),
    }
}

fn check_query(query: &DescriptorVector, index: &DatasetIndex) -> Result<()> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    if &query.config != index.config() || query.len() != index.config().descriptor_len() {
        return Err(Error::ConfigMismatch(
            "query descriptor does not match the index configuration".into(),
        ));
    }
    Ok(())
}

pub fn rank_all(
    query: &DescriptorVector,
    index: &DatasetIndex,
    include_self: bool,
    self_id: Option<u32>,
) -> Result<RankedList> {
    check_query(query, index)?;
    Ok(rank_entries(
        &query.counts,
        index.entries(),
        include_self,
        self_id,
    ))
}

/// Label of the gallery entry nearest to `counts` (lowest id on ties).
pub(crate) fn nearest_label<'a>(
    counts: &[u32],
    gallery: impl IntoIterator<Item = &'a IndexEntry>,
) -> Option<u32> {
    gallery
        .into_iter()
        .map(|e| (l1_counts(counts, &e.counts), e.image_id, e.label))
        .min()
        .map(|(_, _, label)| label)
}

pub fn nn_classify(query: &DescriptorVector, gallery: &DatasetIndex) -> Result<u32> {
    check_query(query, gallery)?;
    nearest_label(&query.counts, gallery.entries()).ok_or(Error::EmptyIndex)
}
