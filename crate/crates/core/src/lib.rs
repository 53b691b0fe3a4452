//! Dataset-relative textural heterogeneity for 3D grayscale volumes.
//!
//! The pipeline partitions each volume of interest into equal cubic
//! subvolumes, reduces every subcube to a scalar statistical attribute, and
//! measures the Shannon entropy of the attribute distribution: the empirical
//! PMF for discrete attributes, a Gaussian KDE for continuous ones (after
//! dataset-wide standardization). Ranking the per-image entropies by
//! quantile probability yields a heterogeneity coefficient that is
//! comparable across images of one dataset.
//!
//! The crate also carries the supporting toolkit: raw-volume I/O with JSON
//! manifests, a GLCM texture baseline, nonparametric validation statistics,
//! and seeded phantom volumes for end-to-end testing.

pub mod attributes;
pub mod entropy;
pub mod error;
pub mod glcm;
pub mod partition;
pub mod phantom;
pub mod ranking;
pub mod stats;
mod util;
pub mod volume;

pub use attributes::{AttributeClass, AttributeKind, AttributeTable, StandardizationStats};
pub use entropy::{EntropyMethod, EntropyRecord, KdeConfig};
pub use error::{Error, Result};
pub use glcm::{GlcmFeatures, GlcmMatrix};
pub use partition::SubcubeGrid;
pub use phantom::{PhantomKind, PhantomSpec};
pub use ranking::{HeterogeneityCoefficient, RankConfig, RankOutcome, SkipRecord};
pub use stats::{ContingencyTable2x2, LabeledValues, MwuMode, MwuModeRequest, MwuResult};
pub use volume::{
    BitDepth, Circle, Dims, Endianness, HighDensityFilter, Manifest, Voi, Volume,
};
