//! Retrieval and recognition protocol.
//!
//! Retrieval metrics rank every other image of the index against a query
//! (the query itself never counts). Precision at `n` divides the same-class
//! hits among the top `n` by `n`, recall divides them by the class size.
//! Both are averaged per class first and then over classes, so every class
//! weighs the same regardless of its size.
//!
//! Leave-one-out recognition ranks each image against the full index with
//! itself at rank 1 and scores the rank-2 entry. Split recognition scores
//! the nearest gallery entry of each probe.

use std::collections::BTreeMap;
use std::io::Write;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::DescriptorConfig;
use crate::dataset::DatasetManifest;
use crate::error::{Error, Result};
use crate::image::{add_awgn, load_image, GrayImage};
use crate::index::{DatasetIndex, IndexEntry};
use crate::matching::{nearest_label, rank_entries, RankedList};

pub const DEFAULT_MAX_N: usize = 8;
pub const DEFAULT_PROBE_FRACTIONS: [f64; 5] = [0.2, 0.3, 0.4, 0.5, 0.6];
pub const DEFAULT_FOLDS: usize = 10;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(())
}

fn find(index: &DatasetIndex, query_id: u32) -> Result<&IndexEntry> {
    index.get(query_id).ok_or(Error::QueryNotInIndex(query_id))
}

fn retrieval_ranking(index: &DatasetIndex, query: &IndexEntry) -> RankedList {
    rank_entries(&query.counts, index.entries(), false, Some(query.image_id))
}

fn hits_within(ranked: &RankedList, label: u32, n: usize) -> usize {
    ranked
        .entries
        .iter()
        .take(n)
        .filter(|e| e.label == label)
        .count()
}

fn class_sizes(index: &DatasetIndex) -> BTreeMap<u32, usize> {
    let mut sizes = BTreeMap::new();
    for e in index.entries() {
        *sizes.entry(e.label).or_insert(0) += 1;
    }
    sizes
}

pub fn precision_at(index: &DatasetIndex, query_id: u32, n: usize) -> Result<f64> {
    check_n(n)?;
    let q = find(index, query_id)?;
    let hits = hits_within(&retrieval_ranking(index, q), q.label, n);
    Ok(hits as f64 / n as f64)
}

pub fn recall_at(index: &DatasetIndex, query_id: u32, n: usize) -> Result<f64> {
    check_n(n)?;
    let q = find(index, query_id)?;
    let class_size = index
        .entries()
        .iter()
        .filter(|e| e.label == q.label)
        .count();
    let hits = hits_within(&retrieval_ranking(index, q), q.label, n);
    Ok(hits as f64 / class_size as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievalPoint {
    pub n: usize,
    pub apr: f64,
    pub arr: f64,
}

/// APR and ARR for every `n` in `1..=max_n`, ranking each query once.
pub fn retrieval_sweep(index: &DatasetIndex, max_n: usize) -> Result<Vec<RetrievalPoint>> {
    check_n(max_n)?;
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let sizes = class_sizes(index);
    // hits[q][n-1] = same-class entries among the top n for query q
    let hits: Vec<Vec<usize>> = index
        .entries()
        .par_iter()
        .map(|q| {
            let ranked = retrieval_ranking(index, q);
            let mut acc = 0;
            (0..max_n)
                .map(|i| {
                    if ranked.entries.get(i).is_some_and(|e| e.label == q.label) {
                        acc += 1;
                    }
                    acc
                })
                .collect()
        })
        .collect();

    let points = (1..=max_n)
        .map(|n| {
            let mut precision: BTreeMap<u32, f64> = BTreeMap::new();
            let mut recall: BTreeMap<u32, f64> = BTreeMap::new();
            for (q, h) in index.entries().iter().zip(&hits) {
                let size = sizes[&q.label] as f64;
                let found = h[n - 1] as f64;
                *precision.entry(q.label).or_default() += found / n as f64 / size;
                *recall.entry(q.label).or_default() += found / size / size;
            }
            let classes = sizes.len() as f64;
            RetrievalPoint {
                n,
                apr: precision.values().sum::<f64>() / classes,
                arr: recall.values().sum::<f64>() / classes,
            }
        })
        .collect();
    Ok(points)
}

fn two_level_mean(index: &DatasetIndex, per_query: impl Fn(&IndexEntry) -> f64) -> Result<f64> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let mut per_class: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for q in index.entries() {
        let slot = per_class.entry(q.label).or_default();
        slot.0 += per_query(q);
        slot.1 += 1;
    }
    let class_means: f64 = per_class.values().map(|&(sum, k)| sum / k as f64).sum();
    Ok(class_means / per_class.len() as f64)
}

/// Average precision rate over classes at `n` retrieved images.
pub fn apr(index: &DatasetIndex, n: usize) -> Result<f64> {
    check_n(n)?;
    two_level_mean(index, |q| {
        hits_within(&retrieval_ranking(index, q), q.label, n) as f64 / n as f64
    })
}

/// Average recall rate over classes at `n` retrieved images.
pub fn arr(index: &DatasetIndex, n: usize) -> Result<f64> {
    check_n(n)?;
    let sizes = class_sizes(index);
    two_level_mean(index, |q| {
        hits_within(&retrieval_ranking(index, q), q.label, n) as f64 / sizes[&q.label] as f64
    })
}

/// Leave-one-out recognition rate in percent.
pub fn recognition_loo(index: &DatasetIndex) -> Result<f64> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let hits: usize = index
        .entries()
        .par_iter()
        .filter(|q| {
            let ranked = rank_entries(&q.counts, index.entries(), true, Some(q.image_id));
            ranked.at_rank(2).is_some_and(|e| e.label == q.label)
        })
        .count();
    Ok(100.0 * hits as f64 / index.len() as f64)
}

fn split_rate(probe: &[&IndexEntry], gallery: &[&IndexEntry]) -> f64 {
    let hits = probe
        .par_iter()
        .filter(|p| nearest_label(&p.counts, gallery.iter().copied()) == Some(p.label))
        .count();
    100.0 * hits as f64 / probe.len() as f64
}

/// Rank-1 recognition rate of `probe` against a disjoint `gallery`.
pub fn recognition_split(probe: &DatasetIndex, gallery: &DatasetIndex) -> Result<f64> {
    if probe.config() != gallery.config() {
        return Err(Error::ConfigMismatch(
            "probe and gallery use different configurations".into(),
        ));
    }
    if probe.is_empty() || gallery.is_empty() {
        return Err(Error::DegenerateSplit {
            probe: probe.len(),
            gallery: gallery.len(),
        });
    }
    if let Some(shared) = probe
        .entries()
        .iter()
        .find(|p| gallery.get(p.image_id).is_some())
    {
        return Err(Error::InvalidParameter(format!(
            "image {} is in both probe and gallery",
            shared.image_id
        )));
    }
    let probe: Vec<&IndexEntry> = probe.entries().iter().collect();
    let gallery: Vec<&IndexEntry> = gallery.entries().iter().collect();
    Ok(split_rate(&probe, &gallery))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub probe_fraction: f64,
    pub folds: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.probe_fraction > 0.0 && self.probe_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "probe fraction {} outside (0, 1)",
                self.probe_fraction
            )));
        }
        if self.folds == 0 {
            return Err(Error::InvalidParameter("folds must be at least 1".into()));
        }
        Ok(())
    }

    pub fn probe_size(&self, total: usize) -> usize {
        (self.probe_fraction * total as f64).round() as usize
    }

    /// Generator for one fold: the spec seed selects the key, the fold
    /// index selects the stream.
    pub fn fold_rng(&self, fold: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(fold as u64);
        rng
    }

    /// Positions (into the index entry list) of one fold's probe set, drawn
    /// without replacement by a partial Fisher-Yates shuffle.
    pub fn draw_probe(&self, total: usize, fold: usize) -> Vec<usize> {
        let k = self.probe_size(total);
        let mut rng = self.fold_rng(fold);
        let mut order: Vec<usize> = (0..total).collect();
        for i in 0..k.min(total) {
            let j = rng.random_range(i..total);
            order.swap(i, j);
        }
        order.truncate(k);
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecognitionMode {
    Loo,
    Split,
}

impl RecognitionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RecognitionMode::Loo => "loo",
            RecognitionMode::Split => "split",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionResult {
    pub mode: RecognitionMode,
    pub probe_fraction: Option<f64>,
    /// Percent, one per fold (a single value for leave-one-out).
    pub folds: Vec<f64>,
}

impl RecognitionResult {
    pub fn mean(&self) -> f64 {
        self.folds.iter().sum::<f64>() / self.folds.len() as f64
    }
}

pub fn cross_validate(index: &DatasetIndex, spec: &SplitSpec) -> Result<RecognitionResult> {
    spec.validate()?;
    let total = index.len();
    let probe_size = spec.probe_size(total);
    if probe_size == 0 || probe_size >= total {
        return Err(Error::DegenerateSplit {
            probe: probe_size,
            gallery: total.saturating_sub(probe_size),
        });
    }
    let entries = index.entries();
    let folds = (0..spec.folds)
        .into_par_iter()
        .map(|fold| {
            let mut in_probe = vec![false; total];
            for pos in spec.draw_probe(total, fold) {
                in_probe[pos] = true;
            }
            let (mut probe, mut gallery) = (Vec::new(), Vec::new());
            for (e, &is_probe) in entries.iter().zip(&in_probe) {
                if is_probe {
                    probe.push(e);
                } else {
                    gallery.push(e);
                }
            }
            let gamma = split_rate(&probe, &gallery);
            debug!("fold {fold}: {} probes, gamma {gamma:.2}", probe.len());
            gamma
        })
        .collect();
    Ok(RecognitionResult {
        mode: RecognitionMode::Split,
        probe_fraction: Some(spec.probe_fraction),
        folds,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub retrieval: Vec<RetrievalPoint>,
    pub recognition: Vec<RecognitionResult>,
}

impl EvalReport {
    pub fn write_retrieval_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "n,apr,arr")?;
        for p in &self.retrieval {
            writeln!(w, "{},{},{}", p.n, p.apr, p.arr)?;
        }
        Ok(())
    }

    pub fn write_recognition_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "mode,probe_fraction,fold,gamma")?;
        for r in &self.recognition {
            let fraction = r.probe_fraction.map(|f| f.to_string()).unwrap_or_default();
            for (fold, gamma) in r.folds.iter().enumerate() {
                writeln!(w, "{},{fraction},{fold},{gamma}", r.mode.as_str())?;
            }
        }
        Ok(())
    }
}

/// Noise seed of one image.
pub fn image_noise_seed(seed: u64, image_id: u32) -> u64 {
    seed ^ image_id as u64
}

/// Retrieval sweep over descriptors of noise-corrupted images. Image `i`
/// of `images` gets id `i` and noise seed `seed ^ i`.
pub fn noise_eval_images(
    images: &[(u32, GrayImage)],
    config: &DescriptorConfig,
    variance: f64,
    seed: u64,
    max_n: usize,
) -> Result<EvalReport> {
    config.validate()?;
    let descriptors = images
        .par_iter()
        .enumerate()
        .map(|(i, (label, img))| {
            let noisy = add_awgn(img, variance, image_noise_seed(seed, i as u32))?;
            config.extract(&noisy).map(|d| (*label, d))
        })
        .collect::<Result<Vec<_>>>()?;
    let index = DatasetIndex::from_descriptors(config.clone(), descriptors)?;
    Ok(EvalReport {
        retrieval: retrieval_sweep(&index, max_n)?,
        recognition: Vec::new(),
    })
}

/// [`noise_eval_images`] over the images of a manifest.
pub fn noise_eval(
    manifest: &DatasetManifest,
    config: &DescriptorConfig,
    variance: f64,
    seed: u64,
    max_n: usize,
) -> Result<EvalReport> {
    let images = manifest
        .entries
        .par_iter()
        .map(|e| load_image(&e.path, config.params.side).map(|img| (e.label, img)))
        .collect::<Result<Vec<_>>>()?;
    noise_eval_images(&images, config, variance, seed, max_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Binning, LghpParams};

    fn config() -> DescriptorConfig {
        DescriptorConfig::lghp(LghpParams {
            radius_limit: 1,
            side: 8,
            binning: Binning::U2,
            grid: 1,
        })
    }

    fn entry(id: u32, label: u32, seed: u32) -> IndexEntry {
        IndexEntry {
            image_id: id,
            label,
            path: String::new(),
            counts: (0..config().descriptor_len() as u32)
                .map(|i| (i * 31 + seed * 17) % 13)
                .collect(),
        }
    }

    #[test]
    fn singleton_classes_score_zero() {
        let idx = DatasetIndex::new(config(), (0..4).map(|i| entry(i, i, i)).collect()).unwrap();
        for n in 1..=4 {
            assert_eq!(apr(&idx, n).unwrap(), 0.0);
            assert_eq!(arr(&idx, n).unwrap(), 0.0);
            assert_eq!(precision_at(&idx, 2, n).unwrap(), 0.0);
            assert_eq!(recall_at(&idx, 2, n).unwrap(), 0.0);
        }
        assert_eq!(recognition_loo(&idx).unwrap(), 0.0);
    }

    #[test]
    fn identical_class_members_are_perfect() {
        let idx =
            DatasetIndex::new(config(), (0..6).map(|i| entry(i, i / 3, i / 3)).collect()).unwrap();
        assert_eq!(precision_at(&idx, 0, 2).unwrap(), 1.0);
        assert_eq!(apr(&idx, 2).unwrap(), 1.0);
        assert_eq!(recall_at(&idx, 4, 10).unwrap(), 2.0 / 3.0);
        assert_eq!(recognition_loo(&idx).unwrap(), 100.0);
        assert!(matches!(
            precision_at(&idx, 99, 1),
            Err(Error::QueryNotInIndex(99))
        ));
        assert!(precision_at(&idx, 0, 0).is_err());
    }

    #[test]
    fn split_checks() {
        let idx =
            DatasetIndex::new(config(), (0..4).map(|i| entry(i, i % 2, i % 2)).collect()).unwrap();
        let probe = idx.subset(&[0, 1]).unwrap();
        let gallery = idx.subset(&[2, 3]).unwrap();
        assert_eq!(recognition_split(&probe, &gallery).unwrap(), 100.0);
        assert!(recognition_split(&probe, &idx).is_err());

        let spec = SplitSpec {
            probe_fraction: 0.1,
            folds: 3,
            seed: 1,
        };
        assert!(matches!(
            cross_validate(&idx, &spec),
            Err(Error::DegenerateSplit { .. })
        ));
        assert!(SplitSpec {
            probe_fraction: 1.0,
            ..spec
        }
        .validate()
        .is_err());
        assert!(SplitSpec { folds: 0, ..spec }.validate().is_err());
    }

    #[test]
    fn draws_are_distinct_and_sized() {
        let spec = SplitSpec {
            probe_fraction: 0.4,
            folds: 10,
            seed: 5,
        };
        for fold in 0..10 {
            let mut d = spec.draw_probe(25, fold);
            assert_eq!(d.len(), 10);
            d.sort();
            d.dedup();
            assert_eq!(d.len(), 10);
        }
        assert_ne!(spec.draw_probe(25, 0), spec.draw_probe(25, 1));
    }

    #[test]
    fn csv_layout() {
        let report = EvalReport {
            retrieval: vec![RetrievalPoint {
                n: 1,
                apr: 0.5,
                arr: 0.25,
            }],
            recognition: vec![
                RecognitionResult {
                    mode: RecognitionMode::Loo,
                    probe_fraction: None,
                    folds: vec![100.0],
                },
                RecognitionResult {
                    mode: RecognitionMode::Split,
                    probe_fraction: Some(0.2),
                    folds: vec![50.0, 75.5],
                },
            ],
        };
        let mut a = Vec::new();
        report.write_retrieval_csv(&mut a).unwrap();
        assert_eq!(String::from_utf8(a).unwrap(), "n,apr,arr\n1,0.5,0.25\n");
        let mut b = Vec::new();
        report.write_recognition_csv(&mut b).unwrap();
        assert_eq!(
            String::from_utf8(b).unwrap(),
            "mode,probe_fraction,fold,gamma\nloo,,0,100\nsplit,0.2,0,50\nsplit,0.2,1,75.5\n"
        );
    }
}
