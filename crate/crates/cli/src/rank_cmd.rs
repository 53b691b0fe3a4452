//! The `rank` subcommand: run the full pipeline over a manifest list.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::Args;
use serde::Deserialize;
use serde_json::json;

use voxent_core::attributes::write_attribute_csv;
use voxent_core::entropy::{write_entropy_csv, EntropyRecord};
use voxent_core::ranking::{rank_dataset, write_rank_csv, RankConfig, RankOutcome};
use voxent_core::{
    AttributeClass, AttributeKind, EntropyMethod, HighDensityFilter, KdeConfig, Manifest,
};

use crate::{with_thread_pool, CliError, CliResult};

pub fn parse_attribute(s: &str) -> Result<AttributeKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Args)]
pub struct RankArgs {
    /// Text file with one manifest path per line (# starts a comment);
    /// relative paths resolve against the list file.
    #[arg(long, value_name = "FILE")]
    manifest_list: Option<PathBuf>,

    /// TOML config file; command-line flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Number of divisions along x and y (2 to 10).
    #[arg(short = 'd', long)]
    divisions: Option<u32>,

    /// Attribute to rank by; repeat for several.
    #[arg(long = "attribute", value_parser = parse_attribute)]
    attributes: Vec<AttributeKind>,

    /// Gaussian kernel bandwidth for continuous attributes.
    #[arg(long)]
    bandwidth: Option<f64>,

    /// Initial quadrature node count (odd, at least 3).
    #[arg(long)]
    grid_points: Option<usize>,

    /// Integration padding in bandwidths beyond the data range.
    #[arg(long)]
    grid_pad: Option<f64>,

    /// Convergence tolerance in bits for the quadrature refinement.
    #[arg(long)]
    tol: Option<f64>,

    /// Grayscale threshold of the high-density exclusion rule.
    #[arg(long)]
    hd_threshold: Option<u16>,

    /// Exclude an image when more than this fraction of voxels exceeds the
    /// threshold.
    #[arg(long)]
    hd_fraction: Option<f64>,

    /// Disable the high-density exclusion stage.
    #[arg(long)]
    no_hd_filter: bool,

    /// Worker threads (0 = one per core).
    #[arg(long)]
    jobs: Option<usize>,

    /// Directory for rank.csv, entropy.csv, skips.csv, and summary.json.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Also write the per-subcube attribute tables to attributes.csv.
    #[arg(long)]
    dump_attributes: bool,
}

/// TOML mirror of the command-line options.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    manifest_list: Option<PathBuf>,
    divisions: Option<u32>,
    attributes: Option<Vec<String>>,
    out_dir: Option<PathBuf>,
    jobs: Option<usize>,
    dump_attributes: Option<bool>,
    kde: Option<FileKde>,
    high_density_filter: Option<FileFilter>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileKde {
    bandwidth: Option<f64>,
    grid_pad: Option<f64>,
    grid_points: Option<usize>,
    convergence_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileFilter {
    enabled: Option<bool>,
    threshold: Option<u16>,
    max_fraction: Option<f64>,
}

struct ResolvedRun {
    manifest_list: PathBuf,
    out_dir: PathBuf,
    jobs: usize,
    dump_attributes: bool,
    config: RankConfig,
}

fn resolve(args: &RankArgs) -> CliResult<ResolvedRun> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };

    let manifest_list = args
        .manifest_list
        .clone()
        .or(file.manifest_list)
        .ok_or_else(|| CliError::usage("no manifest list given (--manifest-list or config)"))?;
    let out_dir = args
        .out_dir
        .clone()
        .or(file.out_dir)
        .unwrap_or_else(|| PathBuf::from("."));

    let divisions = args.divisions.or(file.divisions).unwrap_or(5);
    if !(2..=10).contains(&divisions) {
        return Err(CliError::usage(format!(
            "divisions {divisions} outside the supported range [2, 10]"
        )));
    }

    let mut attributes = args.attributes.clone();
    if attributes.is_empty() {
        if let Some(names) = &file.attributes {
            for name in names {
                attributes.push(parse_attribute(name).map_err(CliError::Usage)?);
            }
        }
    }
    if attributes.is_empty() {
        attributes.push(AttributeKind::StdDev);
    }
    let mut seen = Vec::new();
    attributes.retain(|kind| {
        let fresh = !seen.contains(kind);
        seen.push(*kind);
        fresh
    });

    let file_kde = file.kde.unwrap_or_default();
    let defaults = KdeConfig::default();
    let kde = KdeConfig {
        bandwidth: args.bandwidth.or(file_kde.bandwidth).unwrap_or(defaults.bandwidth),
        grid_pad: args.grid_pad.or(file_kde.grid_pad).unwrap_or(defaults.grid_pad),
        grid_points: args
            .grid_points
            .or(file_kde.grid_points)
            .unwrap_or(defaults.grid_points),
        convergence_tol: args
            .tol
            .or(file_kde.convergence_tol)
            .unwrap_or(defaults.convergence_tol),
    };

    let file_filter = file.high_density_filter.unwrap_or_default();
    let filter_enabled = !args.no_hd_filter && file_filter.enabled.unwrap_or(true);
    let filter_defaults = HighDensityFilter::default();
    let filter = filter_enabled.then_some(HighDensityFilter {
        threshold: args
            .hd_threshold
            .or(file_filter.threshold)
            .unwrap_or(filter_defaults.threshold),
        max_fraction: args
            .hd_fraction
            .or(file_filter.max_fraction)
            .unwrap_or(filter_defaults.max_fraction),
    });

    Ok(ResolvedRun {
        manifest_list,
        out_dir,
        jobs: args.jobs.or(file.jobs).unwrap_or(0),
        dump_attributes: args.dump_attributes || file.dump_attributes.unwrap_or(false),
        config: RankConfig {
            divisions,
            attributes,
            kde,
            filter,
            keep_tables: args.dump_attributes || file.dump_attributes.unwrap_or(false),
        },
    })
}

/// Reads a manifest-list file: one path per line, blank lines and `#`
/// comments skipped, relative paths resolved against the list's directory.
pub fn read_manifest_list(path: &Path) -> anyhow::Result<Vec<Manifest>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("manifest list {}", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut manifests = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let manifest_path = if Path::new(line).is_relative() {
            base.join(line)
        } else {
            PathBuf::from(line)
        };
        let manifest = Manifest::load(&manifest_path)
            .with_context(|| format!("manifest {}", manifest_path.display()))?;
        manifests.push(manifest);
    }
    Ok(manifests)
}

fn entropy_records(outcome: &RankOutcome) -> Vec<EntropyRecord> {
    outcome
        .coefficients
        .iter()
        .map(|c| EntropyRecord {
            sample_id: c.sample_id.clone(),
            attribute: c.attribute,
            divisions: c.divisions,
            entropy_bits: c.entropy_bits,
            method: match c.attribute.class() {
                AttributeClass::Discrete => EntropyMethod::Pmf,
                AttributeClass::Continuous => EntropyMethod::Kde,
            },
        })
        .collect()
}

fn write_skip_csv(outcome: &RankOutcome, divisions: u32, path: &Path) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["sample_id", "attribute", "d", "excluded_flag", "skip_reason"])?;
    for skip in &outcome.skipped {
        writer.write_record([
            skip.sample_id.as_str(),
            skip.attribute.map(|k| k.name()).unwrap_or(""),
            &divisions.to_string(),
            if skip.excluded { "true" } else { "false" },
            skip.reason.as_str(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn run(args: RankArgs) -> CliResult<()> {
    let run = resolve(&args)?;
    let started = Instant::now();
    let manifests = read_manifest_list(&run.manifest_list).map_err(CliError::Runtime)?;
    if manifests.is_empty() {
        return Err(CliError::usage(format!(
            "manifest list {} names no manifests",
            run.manifest_list.display()
        )));
    }
    let load_seconds = started.elapsed().as_secs_f64();

    let pipeline_started = Instant::now();
    let outcome = with_thread_pool(run.jobs, || rank_dataset(&manifests, &run.config))??;
    let pipeline_seconds = pipeline_started.elapsed().as_secs_f64();

    fs::create_dir_all(&run.out_dir)
        .with_context(|| format!("output directory {}", run.out_dir.display()))
        .map_err(CliError::Runtime)?;

    let rank_path = run.out_dir.join("rank.csv");
    let mut rank_file = fs::File::create(&rank_path)
        .map_err(|e| CliError::Runtime(e.into()))?;
    write_rank_csv(&outcome, run.config.divisions, &mut rank_file)?;

    let entropy_path = run.out_dir.join("entropy.csv");
    let mut entropy_file = fs::File::create(&entropy_path)
        .map_err(|e| CliError::Runtime(e.into()))?;
    write_entropy_csv(&entropy_records(&outcome), &mut entropy_file)?;

    let skip_path = run.out_dir.join("skips.csv");
    write_skip_csv(&outcome, run.config.divisions, &skip_path).map_err(CliError::Runtime)?;

    if run.dump_attributes {
        let attr_path = run.out_dir.join("attributes.csv");
        let mut attr_file = fs::File::create(&attr_path)
            .map_err(|e| CliError::Runtime(e.into()))?;
        write_attribute_csv(&outcome.tables, &mut attr_file)?;
    }

    let ranked_samples: std::collections::BTreeSet<&str> = outcome
        .coefficients
        .iter()
        .map(|c| c.sample_id.as_str())
        .collect();
    let summary = json!({
        "command": "rank",
        "inputs": {
            "manifest_list": run.manifest_list.display().to_string(),
            "manifest_count": manifests.len(),
        },
        "parameters": {
            "divisions": run.config.divisions,
            "attributes": run.config.attributes.iter().map(|k| k.name()).collect::<Vec<_>>(),
            "kde": {
                "bandwidth": run.config.kde.bandwidth,
                "grid_pad": run.config.kde.grid_pad,
                "grid_points": run.config.kde.grid_points,
                "convergence_tol": run.config.kde.convergence_tol,
            },
            "high_density_filter": run.config.filter.map(|f| json!({
                "threshold": f.threshold,
                "max_fraction": f.max_fraction,
            })),
            "jobs": run.jobs,
        },
        "results": {
            "coefficients": outcome.coefficients.len(),
            "ranked_samples": ranked_samples.len(),
            "skip_records": outcome.skipped.len(),
            "standardization": outcome.standardization,
        },
        "timings": {
            "load_seconds": load_seconds,
            "pipeline_seconds": pipeline_seconds,
            "total_seconds": started.elapsed().as_secs_f64(),
        },
    });
    fs::write(
        run.out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("serializable summary") + "\n",
    )
    .map_err(|e| CliError::Runtime(e.into()))?;

    println!(
        "ranked {} sample(s) across {} attribute(s); {} skip record(s); outputs in {}",
        ranked_samples.len(),
        run.config.attributes.len(),
        outcome.skipped.len(),
        run.out_dir.display()
    );
    Ok(())
}
