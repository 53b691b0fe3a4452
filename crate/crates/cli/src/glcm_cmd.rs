//! The `glcm` subcommand: baseline texture features per volume.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;

use voxent_core::glcm::volume_glcm_features;
use voxent_core::volume::{crop_voi, load_volume};
use voxent_core::Manifest;

use crate::rank_cmd::read_manifest_list;
use crate::{with_thread_pool, CliError, CliResult};

#[derive(Args)]
pub struct GlcmArgs {
    /// Single manifest to process.
    #[arg(long, value_name = "FILE", conflicts_with = "manifest_list")]
    manifest: Option<PathBuf>,

    /// Text file with one manifest path per line.
    #[arg(long, value_name = "FILE")]
    manifest_list: Option<PathBuf>,

    /// Grey levels after quantization.
    #[arg(long, default_value_t = 256)]
    levels: usize,

    /// Equally spaced slices per orthogonal view.
    #[arg(long, default_value_t = 100)]
    slices: usize,

    /// Output CSV path (stdout if omitted).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

pub fn run(args: GlcmArgs) -> CliResult<()> {
    let manifests: Vec<Manifest> = match (&args.manifest, &args.manifest_list) {
        (Some(path), None) => vec![Manifest::load(path)?],
        (None, Some(list)) => read_manifest_list(list).map_err(CliError::Runtime)?,
        _ => {
            return Err(CliError::usage(
                "give exactly one of --manifest or --manifest-list",
            ))
        }
    };
    if manifests.is_empty() {
        return Err(CliError::usage("no manifests to process"));
    }

    let levels = args.levels;
    let slices = args.slices;
    let mut results = with_thread_pool(args.jobs, || {
        manifests
            .par_iter()
            .map(|manifest| {
                let features = load_volume(manifest)
                    .and_then(|volume| {
                        let voi = manifest.resolve_voi()?;
                        crop_voi(&volume, &voi)
                    })
                    .and_then(|cropped| volume_glcm_features(&cropped, levels, slices));
                (manifest.sample_id.clone(), features)
            })
            .collect::<Vec<_>>()
    })?;
    results.sort_by(|a, b| a.0.cmp(&b.0));

    let mut rows = String::from("sample_id,energy,dissimilarity,homogeneity\n");
    let mut succeeded = 0;
    for (sample_id, outcome) in results {
        match outcome {
            Ok(f) => {
                rows.push_str(&format!(
                    "{sample_id},{},{},{}\n",
                    f.energy, f.dissimilarity, f.homogeneity
                ));
                succeeded += 1;
            }
            Err(e) => eprintln!("warning: {sample_id}: {e}"),
        }
    }
    if succeeded == 0 {
        return Err(CliError::Runtime(anyhow::anyhow!(
            "no volume produced GLCM features"
        )));
    }
    match &args.output {
        Some(path) => fs::write(path, rows).map_err(|e| CliError::Runtime(e.into()))?,
        None => {
            std::io::stdout()
                .write_all(rows.as_bytes())
                .map_err(|e| CliError::Runtime(e.into()))?;
        }
    }
    Ok(())
}
