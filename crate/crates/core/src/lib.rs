//! Local gradient hexa pattern (LGHP) face descriptors, L1 nearest-neighbour
//! matching and the retrieval/recognition benchmark protocol.
//!
//! Typical flow: [`dataset::scan_dataset`] a class-per-directory corpus,
//! [`index::build_index`] it under a [`config::DescriptorConfig`], then
//! evaluate with [`eval`] or persist with [`store`].

pub mod config;
pub mod dataset;
pub mod descriptor;
pub mod error;
pub mod eval;
pub mod gabor;
pub mod histogram;
pub mod image;
pub mod index;
pub mod matching;
pub mod store;
pub mod synthetic;

pub use config::{Binning, DescriptorConfig, DescriptorKind, LghpParams};
pub use error::{Error, Result};
pub use histogram::DescriptorVector;
pub use image::GrayImage;
pub use index::DatasetIndex;
