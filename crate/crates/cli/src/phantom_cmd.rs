//! The `phantom` subcommand: write synthetic raw volume + manifest pairs.

use std::path::PathBuf;

use clap::{Args, ValueEnum};

use voxent_core::phantom::{generate, PhantomKind, PhantomSpec};
use voxent_core::volume::{write_volume, Endianness, Manifest, Voi};
use voxent_core::{BitDepth, Dims};

use crate::{CliError, CliResult, UsageErr};

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    UniformNoise,
    Layered,
    Blobs,
}

#[derive(Args)]
pub struct PhantomArgs {
    /// Phantom family.
    #[arg(long, value_enum)]
    kind: KindArg,

    /// Volume dimensions as X,Y,Z.
    #[arg(long, value_name = "X,Y,Z", default_value = "64,64,64", value_parser = parse_dims)]
    dims: Dims,

    /// 8 or 16.
    #[arg(long, default_value_t = 16)]
    bit_depth: u8,

    /// PRNG seed; equal seeds reproduce volumes bit for bit.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Voxel edge length recorded in the manifest, micrometres.
    #[arg(long, default_value_t = 25.0)]
    voxel_size: f64,

    /// Sample id; also names the output files.
    #[arg(long)]
    sample_id: String,

    /// Output directory for <id>.raw and <id>.json.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,

    /// uniform-noise: grayscale mean.
    #[arg(long, default_value_t = 30_000.0)]
    mean: f64,

    /// uniform-noise: grayscale standard deviation.
    #[arg(long, default_value_t = 2_000.0)]
    std: f64,

    /// layered: comma-separated base levels, one per slab.
    #[arg(long, value_name = "L1,L2,...", value_delimiter = ',')]
    levels: Vec<u16>,

    /// layered and blobs: extra Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise_std: f64,

    /// blobs: background grayscale.
    #[arg(long, default_value_t = 30_000)]
    background: u16,

    /// blobs: number of spherical inclusions.
    #[arg(long, default_value_t = 20)]
    blob_count: usize,

    /// blobs: inclusion radius in voxels.
    #[arg(long, default_value_t = 6.0)]
    blob_radius: f64,

    /// blobs: inclusion grayscale.
    #[arg(long, default_value_t = 50_000)]
    blob_intensity: u16,
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("'{s}' is not of the form X,Y,Z"));
    }
    let mut values = [0usize; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|e| format!("'{part}': {e}"))?;
    }
    Ok(Dims::new(values[0], values[1], values[2]))
}

pub fn run(args: PhantomArgs) -> CliResult<()> {
    let bit_depth = BitDepth::from_bits(args.bit_depth).usage_err()?;
    let kind = match args.kind {
        KindArg::UniformNoise => PhantomKind::UniformNoise {
            mean: args.mean,
            std_dev: args.std,
        },
        KindArg::Layered => {
            if args.levels.is_empty() {
                return Err(CliError::usage("--levels is required for layered phantoms"));
            }
            PhantomKind::Layered {
                levels: args.levels.clone(),
                noise_std: args.noise_std,
            }
        }
        KindArg::Blobs => PhantomKind::Blobs {
            background: args.background,
            count: args.blob_count,
            radius: args.blob_radius,
            intensity: args.blob_intensity,
            noise_std: args.noise_std,
        },
    };
    let spec = PhantomSpec {
        kind,
        dims: args.dims,
        bit_depth,
        seed: args.seed,
        voxel_size_um: args.voxel_size,
    };
    let volume = generate(&spec).usage_err()?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::Runtime(e.into()))?;
    let raw_path = args.out_dir.join(format!("{}.raw", args.sample_id));
    write_volume(&volume, &raw_path, Endianness::Little)?;
    let manifest = Manifest {
        sample_id: args.sample_id.clone(),
        file: PathBuf::from(format!("{}.raw", args.sample_id)),
        bit_depth: args.bit_depth,
        dims: args.dims,
        voxel_size_um: args.voxel_size,
        endianness: Endianness::Little,
        voi: Some(Voi::full(args.dims)?),
        circle: None,
    };
    let manifest_path = args.out_dir.join(format!("{}.json", args.sample_id));
    manifest.save(&manifest_path)?;
    println!(
        "wrote {} and {}",
        raw_path.display(),
        manifest_path.display()
    );
    Ok(())
}
