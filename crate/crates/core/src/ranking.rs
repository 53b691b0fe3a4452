//! End-to-end pipeline: load, crop, filter, partition, attributes,
//! standardization, entropy, and quantile ranking.
//!
//! Entropy values are only comparable within one dataset, so the pipeline
//! runs as map / barrier / map: per-sample stages are independent, while
//! standardization and quantile assignment see every surviving sample.
//! Failing samples are reported, never silently dropped, and pooled
//! accumulation always runs in sample_id order so results do not depend on
//! input order or thread scheduling.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::attributes::{
    compute_attribute_table, standardize, AttributeClass, AttributeKind, AttributeTable,
    StandardizationStats,
};
use crate::entropy::{image_entropy, EntropyRecord, KdeConfig};
use crate::error::{Error, Result};
use crate::partition::plan_subcubes;
use crate::util::average_ranks;
use crate::volume::{crop_voi, load_volume, HighDensityFilter, Manifest, Volume};

/// Dataset-relative heterogeneity coefficient for one image: the quantile
/// probability of its entropy among all images of the same (attribute,
/// divisions) batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterogeneityCoefficient {
    pub sample_id: String,
    pub attribute: AttributeKind,
    pub divisions: u32,
    pub entropy_bits: f64,
    /// 1-based ascending rank; ties get their average rank.
    pub rank: f64,
    /// `rank / N`, in (0, 1]; strictly larger entropy means a strictly
    /// larger quantile probability.
    pub quantile_prob: f64,
}

/// Why a sample produced no coefficient. `attribute` is `None` when the
/// whole sample was unusable (load failure, filter exclusion) and set when
/// only one attribute was skipped (e.g. degenerate subcubes).
#[derive(Debug, Clone, PartialEq)]
pub struct SkipRecord {
    pub sample_id: String,
    pub attribute: Option<AttributeKind>,
    pub excluded: bool,
    pub reason: String,
}

/// Pipeline settings for one run.
#[derive(Debug, Clone)]
pub struct RankConfig {
    pub divisions: u32,
    pub attributes: Vec<AttributeKind>,
    pub kde: KdeConfig,
    /// `None` disables the high-density exclusion stage.
    pub filter: Option<HighDensityFilter>,
    /// Keep the per-subcube attribute tables in the outcome (they can be
    /// large; off by default).
    pub keep_tables: bool,
}

impl RankConfig {
    pub fn new(divisions: u32, attributes: Vec<AttributeKind>) -> Self {
        RankConfig {
            divisions,
            attributes,
            kde: KdeConfig::default(),
            filter: Some(HighDensityFilter::default()),
            keep_tables: false,
        }
    }
}

/// Everything a run produces: coefficients for ranked samples, skip records
/// for everything else, and the pooled standardization statistics.
#[derive(Debug, Clone)]
pub struct RankOutcome {
    pub coefficients: Vec<HeterogeneityCoefficient>,
    pub skipped: Vec<SkipRecord>,
    pub standardization: Vec<StandardizationStats>,
    /// Present only when [`RankConfig::keep_tables`] was set.
    pub tables: Vec<AttributeTable>,
}

/// Converts one homogeneous batch of entropy records into quantile
/// probabilities: ascending average ranks divided by the batch size.
pub fn quantile_probabilities(
    records: &[EntropyRecord],
) -> Result<Vec<HeterogeneityCoefficient>> {
    let first = records.first().ok_or(Error::EmptyInput)?;
    for record in records {
        if record.attribute != first.attribute || record.divisions != first.divisions {
            return Err(Error::HeterogeneousBatch(format!(
                "record '{}' is ({}, d={}), expected ({}, d={})",
                record.sample_id,
                record.attribute,
                record.divisions,
                first.attribute,
                first.divisions
            )));
        }
        if !record.entropy_bits.is_finite() {
            return Err(Error::NonFiniteValue);
        }
    }
    let entropies: Vec<f64> = records.iter().map(|r| r.entropy_bits).collect();
    let ranks = average_ranks(&entropies);
    let n = records.len() as f64;
    Ok(records
        .iter()
        .zip(ranks)
        .map(|(record, rank)| HeterogeneityCoefficient {
            sample_id: record.sample_id.clone(),
            attribute: record.attribute,
            divisions: record.divisions,
            entropy_bits: record.entropy_bits,
            rank,
            quantile_prob: rank / n,
        })
        .collect())
}

struct PreparedSample {
    sample_id: String,
    volume: Volume,
}

fn prepare_sample(
    manifest: &Manifest,
    filter: Option<&HighDensityFilter>,
) -> std::result::Result<PreparedSample, SkipRecord> {
    let skip = |excluded: bool, reason: String| SkipRecord {
        sample_id: manifest.sample_id.clone(),
        attribute: None,
        excluded,
        reason,
    };
    let volume = load_volume(manifest).map_err(|e| skip(false, e.to_string()))?;
    let voi = manifest.resolve_voi().map_err(|e| skip(false, e.to_string()))?;
    let cropped = crop_voi(&volume, &voi).map_err(|e| skip(false, e.to_string()))?;
    if let Some(filter) = filter {
        let fraction = crate::volume::high_density_fraction(&cropped, filter.threshold)
            .map_err(|e| skip(false, e.to_string()))?;
        if fraction > filter.max_fraction {
            return Err(skip(
                true,
                format!(
                    "high-density fraction {fraction} above {} at threshold {}",
                    filter.max_fraction, filter.threshold
                ),
            ));
        }
    }
    Ok(PreparedSample {
        sample_id: manifest.sample_id.clone(),
        volume: cropped,
    })
}

/// Runs the whole pipeline over a dataset for every requested attribute at
/// one division count.
///
/// Per-sample problems become [`SkipRecord`]s; the call fails only when no
/// sample at all could be ranked. Output ordering is by attribute (in the
/// requested order) and then sample_id, independent of input order.
pub fn rank_dataset(manifests: &[Manifest], config: &RankConfig) -> Result<RankOutcome> {
    if config.attributes.is_empty() {
        return Err(Error::InvalidConfig("no attributes requested".into()));
    }
    if config.divisions < 2 {
        return Err(Error::InvalidConfig(format!(
            "divisions {} below the minimum of 2",
            config.divisions
        )));
    }
    config.kde.validate()?;

    let mut skipped: Vec<SkipRecord> = Vec::new();

    // Load, crop, and filter each sample.
    let mut prepared: Vec<PreparedSample> = Vec::new();
    let loaded: Vec<_> = manifests
        .par_iter()
        .map(|m| prepare_sample(m, config.filter.as_ref()))
        .collect();
    for outcome in loaded {
        match outcome {
            Ok(sample) => prepared.push(sample),
            Err(skip) => skipped.push(skip),
        }
    }
    // The standardization barrier accumulates in this order.
    prepared.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));

    let mut coefficients = Vec::new();
    let mut standardization = Vec::new();
    let mut kept_tables = Vec::new();
    for &kind in &config.attributes {
        let (mut tables, mut kind_skips) = attribute_tables(&prepared, kind, config);
        skipped.append(&mut kind_skips);
        if tables.is_empty() {
            continue;
        }

        if kind.class() == AttributeClass::Continuous {
            match standardize(&mut tables) {
                Ok(stats) => standardization.push(stats),
                Err(e) => {
                    let reason = e.to_string();
                    skipped.extend(tables.iter().map(|t| SkipRecord {
                        sample_id: t.sample_id.clone(),
                        attribute: Some(kind),
                        excluded: false,
                        reason: reason.clone(),
                    }));
                    continue;
                }
            }
        }

        let mut records = Vec::new();
        let computed: Vec<_> = tables
            .par_iter()
            .map(|table| image_entropy(table, &config.kde))
            .collect();
        for (table, outcome) in tables.iter().zip(computed) {
            match outcome {
                Ok(record) => records.push(record),
                Err(e) => skipped.push(SkipRecord {
                    sample_id: table.sample_id.clone(),
                    attribute: Some(kind),
                    excluded: false,
                    reason: e.to_string(),
                }),
            }
        }
        if config.keep_tables {
            kept_tables.extend(tables);
        }
        if records.is_empty() {
            continue;
        }
        coefficients.extend(quantile_probabilities(&records)?);
    }

    skipped.sort_by(|a, b| {
        (a.sample_id.as_str(), a.attribute.map(|k| k.name()))
            .cmp(&(b.sample_id.as_str(), b.attribute.map(|k| k.name())))
    });
    if coefficients.is_empty() {
        return Err(Error::NoSurvivors {
            skipped: skipped.len(),
        });
    }
    Ok(RankOutcome {
        coefficients,
        skipped,
        standardization,
        tables: kept_tables,
    })
}

fn attribute_tables(
    prepared: &[PreparedSample],
    kind: AttributeKind,
    config: &RankConfig,
) -> (Vec<AttributeTable>, Vec<SkipRecord>) {
    let outcomes: Vec<_> = prepared
        .par_iter()
        .map(|sample| {
            plan_subcubes(sample.volume.dims(), config.divisions).and_then(|grid| {
                compute_attribute_table(
                    &sample.sample_id,
                    &sample.volume,
                    &grid,
                    kind,
                    config.divisions,
                )
            })
        })
        .collect();

    let mut tables = Vec::new();
    let mut skips = Vec::new();
    for (sample, outcome) in prepared.iter().zip(outcomes) {
        match outcome {
            Ok(table) => tables.push(table),
            Err(e) => skips.push(SkipRecord {
                sample_id: sample.sample_id.clone(),
                attribute: Some(kind),
                excluded: false,
                reason: e.to_string(),
            }),
        }
    }
    (tables, skips)
}

#[derive(Serialize)]
struct RankCsvRow<'a> {
    sample_id: &'a str,
    attribute: &'a str,
    d: u32,
    entropy_bits: Option<f64>,
    rank: Option<f64>,
    quantile_prob: Option<f64>,
    excluded_flag: bool,
    skip_reason: &'a str,
}

/// Persists a run as CSV with columns `sample_id, attribute, d,
/// entropy_bits, rank, quantile_prob, excluded_flag, skip_reason`. Skipped
/// samples appear with empty numeric columns.
pub fn write_rank_csv<W: Write>(outcome: &RankOutcome, divisions: u32, writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    for c in &outcome.coefficients {
        csv.serialize(RankCsvRow {
            sample_id: &c.sample_id,
            attribute: c.attribute.name(),
            d: c.divisions,
            entropy_bits: Some(c.entropy_bits),
            rank: Some(c.rank),
            quantile_prob: Some(c.quantile_prob),
            excluded_flag: false,
            skip_reason: "",
        })?;
    }
    for s in &outcome.skipped {
        csv.serialize(RankCsvRow {
            sample_id: &s.sample_id,
            attribute: s.attribute.map(|k| k.name()).unwrap_or(""),
            d: divisions,
            entropy_bits: None,
            rank: None,
            quantile_prob: None,
            excluded_flag: s.excluded,
            skip_reason: &s.reason,
        })?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::EntropyMethod;

    fn record(sample_id: &str, entropy: f64) -> EntropyRecord {
        EntropyRecord {
            sample_id: sample_id.into(),
            attribute: AttributeKind::StdDev,
            divisions: 5,
            entropy_bits: entropy,
            method: EntropyMethod::Kde,
        }
    }

    #[test]
    fn quantiles_ascend_with_entropy() {
        let records = vec![record("a", 1.0), record("b", 2.0), record("c", 3.0)];
        let coefficients = quantile_probabilities(&records).unwrap();
        let probs: Vec<f64> = coefficients.iter().map(|c| c.quantile_prob).collect();
        assert_eq!(probs, vec![1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(coefficients[2].rank, 3.0);
    }

    #[test]
    fn quantiles_average_ties() {
        let records = vec![record("a", 2.0), record("b", 2.0)];
        let coefficients = quantile_probabilities(&records).unwrap();
        for c in &coefficients {
            assert_eq!(c.rank, 1.5);
            assert_eq!(c.quantile_prob, 0.75);
        }
    }

    #[test]
    fn single_record_gets_full_quantile() {
        let coefficients = quantile_probabilities(&[record("only", 0.5)]).unwrap();
        assert_eq!(coefficients[0].quantile_prob, 1.0);
    }

    #[test]
    fn mixed_batches_are_rejected() {
        let mut records = vec![record("a", 1.0), record("b", 2.0)];
        records[1].divisions = 2;
        assert!(matches!(
            quantile_probabilities(&records),
            Err(Error::HeterogeneousBatch(_))
        ));

        let mut records = vec![record("a", 1.0), record("b", 2.0)];
        records[1].attribute = AttributeKind::Mean;
        assert!(matches!(
            quantile_probabilities(&records),
            Err(Error::HeterogeneousBatch(_))
        ));
    }

    #[test]
    fn quantiles_invariant_under_monotone_transform() {
        let records = vec![
            record("a", 0.25),
            record("b", 1.5),
            record("c", 1.5),
            record("d", 4.0),
        ];
        let transformed: Vec<EntropyRecord> = records
            .iter()
            .map(|r| EntropyRecord {
                entropy_bits: (r.entropy_bits * 3.0).exp(),
                ..r.clone()
            })
            .collect();
        let base = quantile_probabilities(&records).unwrap();
        let mapped = quantile_probabilities(&transformed).unwrap();
        for (a, b) in base.iter().zip(&mapped) {
            assert_eq!(a.quantile_prob, b.quantile_prob);
            assert_eq!(a.rank, b.rank);
        }
    }

    #[test]
    fn empty_batch_is_rejected() {
        assert!(matches!(quantile_probabilities(&[]), Err(Error::EmptyInput)));
    }
}
