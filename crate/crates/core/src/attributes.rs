//! Per-subcube statistical attributes and dataset-wide standardization.
//!
//! Each subcube collapses to one scalar per attribute. Minimum, maximum, and
//! median stay on the grayscale grid and are treated as discrete; the five
//! moment-based attributes are continuous and get standardized across the
//! whole dataset for a fixed (attribute, divisions) pair before any density
//! estimation.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{subcube_voxels, SubcubeGrid};
use crate::util::{kahan_sum, KahanSum};
use crate::volume::Volume;

/// Whether an attribute takes values on the grayscale grid or in a
/// continuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeClass {
    Discrete,
    Continuous,
}

/// The eight subcube attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Minimum,
    Maximum,
    Median,
    Mean,
    StdDev,
    CoeffVar,
    Skewness,
    Kurtosis,
}

impl AttributeKind {
    pub const ALL: [AttributeKind; 8] = [
        AttributeKind::Minimum,
        AttributeKind::Maximum,
        AttributeKind::Median,
        AttributeKind::Mean,
        AttributeKind::StdDev,
        AttributeKind::CoeffVar,
        AttributeKind::Skewness,
        AttributeKind::Kurtosis,
    ];

    /// Minimum, maximum, and median are discrete; the rest are continuous.
    pub fn class(self) -> AttributeClass {
        match self {
            AttributeKind::Minimum | AttributeKind::Maximum | AttributeKind::Median => {
                AttributeClass::Discrete
            }
            _ => AttributeClass::Continuous,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AttributeKind::Minimum => "minimum",
            AttributeKind::Maximum => "maximum",
            AttributeKind::Median => "median",
            AttributeKind::Mean => "mean",
            AttributeKind::StdDev => "std_dev",
            AttributeKind::CoeffVar => "coeff_var",
            AttributeKind::Skewness => "skewness",
            AttributeKind::Kurtosis => "kurtosis",
        }
    }
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttributeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttributeKind::ALL
            .into_iter()
            .find(|kind| kind.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown attribute '{s}'")))
    }
}

/// Per-subcube attribute values for one (sample, attribute, divisions)
/// triple, in grid traversal order.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeTable {
    pub sample_id: String,
    pub kind: AttributeKind,
    pub divisions: u32,
    pub values: Vec<f64>,
    /// Dataset-standardized z-scores, filled by [`standardize`].
    pub standardized: Option<Vec<f64>>,
}

/// Pooled mean and population standard deviation used to standardize one
/// (attribute, divisions) pair across a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardizationStats {
    pub attribute: AttributeKind,
    pub divisions: u32,
    pub mean: f64,
    pub std_dev: f64,
    pub count: usize,
}

fn degenerate(kind: AttributeKind, reason: &str) -> Error {
    Error::DegenerateAttribute {
        attribute: kind.name().to_string(),
        reason: reason.to_string(),
    }
}

/// Central moment of order `p` about `mean`, with divisor N.
fn central_moment(values: &[u16], mean: f64, p: u32) -> f64 {
    let sum = kahan_sum(values.iter().map(|&v| (v as f64 - mean).powi(p as i32)));
    sum / values.len() as f64
}

fn mean_of(values: &[u16]) -> f64 {
    kahan_sum(values.iter().map(|&v| v as f64)) / values.len() as f64
}

/// Computes one attribute over a subcube's voxel values.
///
/// Conventions: the median of an even count is the lower middle element
/// (always a value present in the data); variance-based moments use the
/// population divisor N; kurtosis is excess kurtosis. Coefficient of
/// variation is undefined on zero-mean data, skewness and kurtosis on
/// constant data.
pub fn compute_attribute(voxels: &[u16], kind: AttributeKind) -> Result<f64> {
    if voxels.is_empty() {
        return Err(Error::EmptyInput);
    }
    match kind {
        AttributeKind::Minimum => Ok(*voxels.iter().min().unwrap() as f64),
        AttributeKind::Maximum => Ok(*voxels.iter().max().unwrap() as f64),
        AttributeKind::Median => {
            let mut sorted = voxels.to_vec();
            sorted.sort_unstable();
            Ok(sorted[(sorted.len() - 1) / 2] as f64)
        }
        AttributeKind::Mean => Ok(mean_of(voxels)),
        AttributeKind::StdDev => {
            let mean = mean_of(voxels);
            Ok(central_moment(voxels, mean, 2).sqrt())
        }
        AttributeKind::CoeffVar => {
            let mean = mean_of(voxels);
            if mean == 0.0 {
                return Err(degenerate(kind, "zero mean"));
            }
            Ok(central_moment(voxels, mean, 2).sqrt() / mean)
        }
        AttributeKind::Skewness => {
            let mean = mean_of(voxels);
            let m2 = central_moment(voxels, mean, 2);
            if m2 == 0.0 {
                return Err(degenerate(kind, "zero variance"));
            }
            Ok(central_moment(voxels, mean, 3) / m2.powf(1.5))
        }
        AttributeKind::Kurtosis => {
            let mean = mean_of(voxels);
            let m2 = central_moment(voxels, mean, 2);
            if m2 == 0.0 {
                return Err(degenerate(kind, "zero variance"));
            }
            Ok(central_moment(voxels, mean, 4) / (m2 * m2) - 3.0)
        }
    }
}

/// Evaluates one attribute over every subcube of the grid, in traversal
/// order. A degenerate subcube (constant voxels under skewness, kurtosis, or
/// coefficient of variation) fails the whole table; callers skip the sample
/// for that attribute rather than inject sentinel values.
pub fn compute_attribute_table(
    sample_id: &str,
    volume: &Volume,
    grid: &SubcubeGrid,
    kind: AttributeKind,
    divisions: u32,
) -> Result<AttributeTable> {
    let mut values = Vec::with_capacity(grid.total_subcubes());
    for index in grid.indices() {
        let voxels = subcube_voxels(volume, grid, index)?;
        values.push(compute_attribute(&voxels, kind)?);
    }
    Ok(AttributeTable {
        sample_id: sample_id.to_string(),
        kind,
        divisions,
        values,
        standardized: None,
    })
}

/// Standardizes every table in place with the mean and population standard
/// deviation pooled over *all* subcube values of *all* tables.
///
/// All tables must share one (attribute, divisions) pair. Accumulation is
/// compensated, so the result does not depend on table order.
pub fn standardize(tables: &mut [AttributeTable]) -> Result<StandardizationStats> {
    let first = tables.first().ok_or(Error::EmptyInput)?;
    let (kind, divisions) = (first.kind, first.divisions);
    for table in tables.iter() {
        if table.kind != kind || table.divisions != divisions {
            return Err(Error::HeterogeneousBatch(format!(
                "table '{}' is ({}, d={}), expected ({}, d={})",
                table.sample_id, table.kind, table.divisions, kind, divisions
            )));
        }
    }

    let count: usize = tables.iter().map(|t| t.values.len()).sum();
    if count == 0 {
        return Err(Error::EmptyInput);
    }
    let mut sum = KahanSum::default();
    for table in tables.iter() {
        for &v in &table.values {
            sum.add(v);
        }
    }
    let mean = sum.total() / count as f64;

    let mut squared = KahanSum::default();
    for table in tables.iter() {
        for &v in &table.values {
            squared.add((v - mean) * (v - mean));
        }
    }
    let std_dev = (squared.total() / count as f64).sqrt();
    if count < 2 || std_dev == 0.0 {
        return Err(Error::ConstantDataset);
    }

    for table in tables.iter_mut() {
        table.standardized = Some(table.values.iter().map(|&v| (v - mean) / std_dev).collect());
    }
    Ok(StandardizationStats {
        attribute: kind,
        divisions,
        mean,
        std_dev,
        count,
    })
}

#[derive(Serialize)]
struct AttributeCsvRow<'a> {
    sample_id: &'a str,
    attribute: &'a str,
    d: u32,
    subcube_index: usize,
    raw_value: f64,
    z_value: Option<f64>,
}

/// Persists attribute tables as CSV with columns
/// `sample_id, attribute, d, subcube_index, raw_value, z_value`.
pub fn write_attribute_csv<W: Write>(tables: &[AttributeTable], writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    for table in tables {
        for (subcube_index, &raw_value) in table.values.iter().enumerate() {
            csv.serialize(AttributeCsvRow {
                sample_id: &table.sample_id,
                attribute: table.kind.name(),
                d: table.divisions,
                subcube_index,
                raw_value,
                z_value: table.standardized.as_ref().map(|z| z[subcube_index]),
            })?;
        }
    }
    csv.flush()?;
    Ok(())
}
