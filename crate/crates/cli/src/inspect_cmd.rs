//! The `inspect` subcommand: summarize one volume.

use std::path::PathBuf;

use clap::Args;

use voxent_core::attributes::{compute_attribute, AttributeKind};
use voxent_core::volume::{crop_voi, high_density_fraction, load_volume};
use voxent_core::Manifest;

use crate::{CliError, CliResult};

#[derive(Args)]
pub struct InspectArgs {
    /// Manifest of the volume to inspect.
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,

    /// High-density threshold to report the voxel fraction against.
    #[arg(long, default_value_t = 60_000)]
    hd_threshold: u16,

    /// Fraction above which the image would be excluded.
    #[arg(long, default_value_t = 0.001)]
    hd_fraction: f64,
}

pub fn run(args: InspectArgs) -> CliResult<()> {
    let manifest = Manifest::load(&args.manifest).map_err(|e| {
        CliError::Runtime(anyhow::anyhow!("{}: {e}", args.manifest.display()))
    })?;
    let volume = load_volume(&manifest)?;
    let voi = manifest.resolve_voi()?;
    let cropped = crop_voi(&volume, &voi)?;

    println!("sample_id:       {}", manifest.sample_id);
    println!("file:            {}", manifest.file.display());
    println!(
        "dims:            {} x {} x {} voxels",
        volume.dims().x,
        volume.dims().y,
        volume.dims().z
    );
    println!("bit_depth:       {}", volume.bit_depth().bits());
    println!("voxel_size_um:   {}", volume.voxel_size_um());
    println!(
        "voi:             origin ({}, {}, {}), extent ({}, {}, {})",
        voi.origin[0], voi.origin[1], voi.origin[2], voi.extent[0], voi.extent[1], voi.extent[2]
    );

    let min = compute_attribute(cropped.voxels(), AttributeKind::Minimum)?;
    let max = compute_attribute(cropped.voxels(), AttributeKind::Maximum)?;
    let mean = compute_attribute(cropped.voxels(), AttributeKind::Mean)?;
    println!("voi_min:         {min}");
    println!("voi_max:         {max}");
    println!("voi_mean:        {mean}");

    if args.hd_threshold > volume.bit_depth().max_value() {
        println!(
            "high_density:    not applicable (threshold {} exceeds the {}-bit range)",
            args.hd_threshold,
            volume.bit_depth().bits()
        );
    } else {
        let fraction = high_density_fraction(&cropped, args.hd_threshold)?;
        let flagged = fraction > args.hd_fraction;
        println!(
            "high_density:    fraction {fraction} above threshold {} -> {}",
            args.hd_threshold,
            if flagged { "EXCLUDED" } else { "retained" }
        );
    }
    Ok(())
}
