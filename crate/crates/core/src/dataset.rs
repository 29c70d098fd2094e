//! Class-labeled corpora laid out as `root/<class_name>/<image_file>`.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "pgm", "ppm", "pnm", "bmp"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image_id: u32,
    pub path: PathBuf,
    pub label: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    /// Directory name of each label, indexed by label.
    pub class_names: Vec<String>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn is_image_file(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
            .unwrap_or(false)
}

fn sorted_children(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

/// Enumerates a dataset root. Each immediate subdirectory is one identity
/// class; labels are assigned densely in sorted order over the non-empty
/// classes, and entries are sorted by path.
pub fn scan_dataset(root: &Path) -> Result<DatasetManifest> {
    if !root.is_dir() {
        return Err(Error::NotADirectory(root.to_path_buf()));
    }
    let mut entries = Vec::new();
    let mut class_names = Vec::new();
    for class_dir in sorted_children(root)?.into_iter().filter(|p| p.is_dir()) {
        let images: Vec<PathBuf> = sorted_children(&class_dir)?
            .into_iter()
            .filter(|p| is_image_file(p))
            .collect();
        if images.is_empty() {
            warn!("skipping empty class directory {}", class_dir.display());
            continue;
        }
        let label = class_names.len() as u32;
        class_names.push(
            class_dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
        );
        for path in images {
            entries.push(ManifestEntry {
                image_id: entries.len() as u32,
                path,
                label,
            });
        }
    }
    if entries.is_empty() {
        return Err(Error::EmptyDataset(root.to_path_buf()));
    }
    Ok(DatasetManifest {
        entries,
        class_names,
    })
}
