//! Seeded synthetic volumes with known heterogeneity orderings.
//!
//! Real micro-CT data cannot ship with the code, so end-to-end tests run on
//! phantoms: spatially uniform Gaussian noise, stacked layers, and spherical
//! inclusions. Generation is bit-reproducible: every random quantity comes
//! from a ChaCha8 stream keyed by `seed_from_u64`, normal deviates use
//! Box-Muller (`sqrt(-2 ln u1) * cos(2 pi u2)`, one deviate per pair of
//! uniforms), and voxels are filled x-fastest, z-slowest.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::volume::{BitDepth, Dims, Volume};

/// What a phantom is made of.
#[derive(Debug, Clone, PartialEq)]
pub enum PhantomKind {
    /// I.i.d. Gaussian noise, rounded and clamped to the grayscale range.
    UniformNoise { mean: f64, std_dev: f64 },
    /// Equal-thickness slabs stacked along z, one base level per slab,
    /// plus i.i.d. Gaussian noise.
    Layered { levels: Vec<u16>, noise_std: f64 },
    /// Constant background with spherical inclusions at seeded random
    /// centers, plus optional i.i.d. Gaussian noise.
    Blobs {
        background: u16,
        count: usize,
        radius: f64,
        intensity: u16,
        noise_std: f64,
    },
}

/// Full description of one synthetic volume; equal specs generate
/// bit-identical volumes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    pub dims: Dims,
    pub bit_depth: BitDepth,
    pub seed: u64,
    pub voxel_size_um: f64,
}

/// One standard normal deviate from two uniform draws.
fn next_normal(rng: &mut ChaCha8Rng) -> f64 {
    // u1 in (0, 1] so the log is finite; u2 in [0, 1).
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn round_clamped(value: f64, max: u16) -> u16 {
    value.round().clamp(0.0, max as f64) as u16
}

/// Generates the volume described by `spec`.
pub fn generate(spec: &PhantomSpec) -> Result<Volume> {
    match &spec.kind {
        PhantomKind::UniformNoise { .. } => gen_uniform_noise(spec),
        PhantomKind::Layered { .. } => gen_layered(spec),
        PhantomKind::Blobs { .. } => gen_blobs(spec),
    }
}

/// Spatially uniform Gaussian noise.
pub fn gen_uniform_noise(spec: &PhantomSpec) -> Result<Volume> {
    let PhantomKind::UniformNoise { mean, std_dev } = spec.kind else {
        return Err(Error::InvalidSpec("expected a uniform_noise spec".into()));
    };
    if std_dev.is_nan() || std_dev < 0.0 {
        return Err(Error::InvalidSpec(format!("noise std {std_dev}")));
    }
    let max = spec.bit_depth.max_value();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let voxels: Vec<u16> = (0..spec.dims.voxel_count())
        .map(|_| {
            if std_dev == 0.0 {
                round_clamped(mean, max)
            } else {
                round_clamped(mean + std_dev * next_normal(&mut rng), max)
            }
        })
        .collect();
    Volume::new(voxels, spec.dims, spec.bit_depth, spec.voxel_size_um)
}

/// Z-stacked slabs of equal thickness with per-slab base levels.
pub fn gen_layered(spec: &PhantomSpec) -> Result<Volume> {
    let PhantomKind::Layered { levels, noise_std } = &spec.kind else {
        return Err(Error::InvalidSpec("expected a layered spec".into()));
    };
    if levels.len() < 2 {
        return Err(Error::InvalidSpec(format!(
            "{} layers, need at least 2",
            levels.len()
        )));
    }
    if levels.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::InvalidSpec("all layer levels are equal".into()));
    }
    let max = spec.bit_depth.max_value();
    if let Some(&bad) = levels.iter().find(|&&l| l > max) {
        return Err(Error::InvalidSpec(format!(
            "layer level {bad} above the {}-bit maximum {max}",
            spec.bit_depth.bits()
        )));
    }
    if noise_std.is_nan() || *noise_std < 0.0 {
        return Err(Error::InvalidSpec(format!("noise std {noise_std}")));
    }

    let dims = spec.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut voxels = Vec::with_capacity(dims.voxel_count());
    for z in 0..dims.z {
        let layer = z * levels.len() / dims.z;
        let base = levels[layer] as f64;
        for _ in 0..dims.x * dims.y {
            let value = if *noise_std == 0.0 {
                levels[layer]
            } else {
                round_clamped(base + noise_std * next_normal(&mut rng), max)
            };
            voxels.push(value);
        }
    }
    Volume::new(voxels, dims, spec.bit_depth, spec.voxel_size_um)
}

/// Constant background with seeded spherical inclusions.
pub fn gen_blobs(spec: &PhantomSpec) -> Result<Volume> {
    let PhantomKind::Blobs {
        background,
        count,
        radius,
        intensity,
        noise_std,
    } = spec.kind
    else {
        return Err(Error::InvalidSpec("expected a blobs spec".into()));
    };
    let dims = spec.dims;
    let max = spec.bit_depth.max_value();
    if background > max || intensity > max {
        return Err(Error::InvalidSpec(format!(
            "background {background} or intensity {intensity} above the maximum {max}"
        )));
    }
    let min_dim = dims.x.min(dims.y).min(dims.z) as f64;
    if count > 0 && !(radius.is_finite() && radius > 0.0 && radius < min_dim / 2.0) {
        return Err(Error::InvalidSpec(format!(
            "blob radius {radius} must lie in (0, {})",
            min_dim / 2.0
        )));
    }
    if noise_std.is_nan() || noise_std < 0.0 {
        return Err(Error::InvalidSpec(format!("noise std {noise_std}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut voxels = vec![background; dims.voxel_count()];

    // Centers first, three u64 draws per blob (x, y, z); the noise pass
    // continues the same stream.
    let r2 = radius * radius;
    for _ in 0..count {
        let cx = (rng.next_u64() % dims.x as u64) as usize;
        let cy = (rng.next_u64() % dims.y as u64) as usize;
        let cz = (rng.next_u64() % dims.z as u64) as usize;
        let reach = radius.ceil() as usize;
        let (x0, x1) = (cx.saturating_sub(reach), (cx + reach).min(dims.x - 1));
        let (y0, y1) = (cy.saturating_sub(reach), (cy + reach).min(dims.y - 1));
        let (z0, z1) = (cz.saturating_sub(reach), (cz + reach).min(dims.z - 1));
        for z in z0..=z1 {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let dx = x as f64 - cx as f64;
                    let dy = y as f64 - cy as f64;
                    let dz = z as f64 - cz as f64;
                    if dx * dx + dy * dy + dz * dz <= r2 {
                        voxels[(z * dims.y + y) * dims.x + x] = intensity;
                    }
                }
            }
        }
    }

    if noise_std > 0.0 {
        for v in voxels.iter_mut() {
            *v = round_clamped(*v as f64 + noise_std * next_normal(&mut rng), max);
        }
    }
    Volume::new(voxels, dims, spec.bit_depth, spec.voxel_size_um)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::{compute_attribute, compute_attribute_table, standardize, AttributeKind};
    use crate::entropy::{kde_entropy, KdeConfig};
    use crate::partition::plan_subcubes;
    use crate::volume::high_density_fraction;

    fn noise_spec(mean: f64, std_dev: f64, seed: u64) -> PhantomSpec {
        PhantomSpec {
            kind: PhantomKind::UniformNoise { mean, std_dev },
            dims: Dims::new(64, 64, 64),
            bit_depth: BitDepth::Sixteen,
            seed,
            voxel_size_um: 25.0,
        }
    }

    #[test]
    fn zero_std_noise_is_constant() {
        let volume = gen_uniform_noise(&noise_spec(128.0, 0.0, 3)).unwrap();
        assert!(volume.voxels().iter().all(|&v| v == 128));
    }

    #[test]
    fn same_seed_same_volume() {
        let a = gen_uniform_noise(&noise_spec(30_000.0, 2_000.0, 42)).unwrap();
        let b = gen_uniform_noise(&noise_spec(30_000.0, 2_000.0, 42)).unwrap();
        assert_eq!(a, b);
        let c = gen_uniform_noise(&noise_spec(30_000.0, 2_000.0, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_sample_mean_tracks_spec() {
        let volume = gen_uniform_noise(&noise_spec(128.0, 10.0, 7)).unwrap();
        let mean = compute_attribute(volume.voxels(), AttributeKind::Mean).unwrap();
        assert!((mean - 128.0).abs() < 1.0, "sample mean {mean}");
    }

    #[test]
    fn layered_without_noise_has_exact_subcube_means() {
        let spec = PhantomSpec {
            kind: PhantomKind::Layered {
                levels: vec![50, 200],
                noise_std: 0.0,
            },
            dims: Dims::new(8, 8, 8),
            bit_depth: BitDepth::Eight,
            seed: 0,
            voxel_size_um: 25.0,
        };
        let volume = gen_layered(&spec).unwrap();
        let grid = plan_subcubes(volume.dims(), 2).unwrap();
        let table =
            compute_attribute_table("l", &volume, &grid, AttributeKind::Mean, 2).unwrap();
        let mut distinct = table.values.clone();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        assert_eq!(distinct, vec![50.0, 200.0]);
    }

    #[test]
    fn straddling_subcubes_have_large_std() {
        // d = 3 over 12 voxels gives segment 4; the layer boundary at z = 6
        // falls inside the middle subcube row.
        let spec = PhantomSpec {
            kind: PhantomKind::Layered {
                levels: vec![50, 200],
                noise_std: 0.0,
            },
            dims: Dims::new(12, 12, 12),
            bit_depth: BitDepth::Eight,
            seed: 0,
            voxel_size_um: 25.0,
        };
        let volume = gen_layered(&spec).unwrap();
        let grid = plan_subcubes(volume.dims(), 3).unwrap();
        let table =
            compute_attribute_table("l", &volume, &grid, AttributeKind::StdDev, 3).unwrap();
        let max_std = table.values.iter().cloned().fold(0.0, f64::max);
        let min_std = table.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(min_std, 0.0, "within-layer subcubes are constant");
        assert!(max_std > 70.0, "straddling subcubes span both levels: {max_std}");
    }

    #[test]
    fn layered_validation() {
        let mut spec = PhantomSpec {
            kind: PhantomKind::Layered {
                levels: vec![50],
                noise_std: 0.0,
            },
            dims: Dims::new(8, 8, 8),
            bit_depth: BitDepth::Eight,
            seed: 0,
            voxel_size_um: 25.0,
        };
        assert!(matches!(gen_layered(&spec), Err(Error::InvalidSpec(_))));
        spec.kind = PhantomKind::Layered {
            levels: vec![50, 300],
            noise_std: 0.0,
        };
        assert!(matches!(gen_layered(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn more_layers_mean_more_entropy() {
        // Equal inter-layer contrast, more layers: the subcube-mean
        // distribution gains modes and span, so its KDE entropy grows.
        let cfg = KdeConfig::default();
        for seed in 0..10 {
            let base = PhantomSpec {
                kind: PhantomKind::Layered {
                    levels: vec![27_000, 33_000],
                    noise_std: 1_500.0,
                },
                dims: Dims::new(40, 40, 40),
                bit_depth: BitDepth::Sixteen,
                seed,
                voxel_size_um: 25.0,
            };
            let two = gen_layered(&base).unwrap();
            let four = gen_layered(&PhantomSpec {
                kind: PhantomKind::Layered {
                    levels: vec![21_000, 27_000, 33_000, 39_000],
                    noise_std: 1_500.0,
                },
                seed: seed + 100,
                ..base.clone()
            })
            .unwrap();

            let grid = plan_subcubes(two.dims(), 5).unwrap();
            let mut tables = vec![
                compute_attribute_table("two", &two, &grid, AttributeKind::Mean, 5).unwrap(),
                compute_attribute_table("four", &four, &grid, AttributeKind::Mean, 5).unwrap(),
            ];
            standardize(&mut tables).unwrap();
            let h_two = kde_entropy(tables[0].standardized.as_ref().unwrap(), &cfg).unwrap();
            let h_four = kde_entropy(tables[1].standardized.as_ref().unwrap(), &cfg).unwrap();
            assert!(
                h_four > h_two,
                "seed {seed}: four-level {h_four} <= two-level {h_two}"
            );
        }
    }

    #[test]
    fn zero_blobs_is_background() {
        let spec = PhantomSpec {
            kind: PhantomKind::Blobs {
                background: 30_000,
                count: 0,
                radius: 5.0,
                intensity: 65_535,
                noise_std: 0.0,
            },
            dims: Dims::new(16, 16, 16),
            bit_depth: BitDepth::Sixteen,
            seed: 5,
            voxel_size_um: 25.0,
        };
        let volume = gen_blobs(&spec).unwrap();
        assert!(volume.voxels().iter().all(|&v| v == 30_000));
    }

    #[test]
    fn single_large_blob_triggers_the_filter() {
        let spec = PhantomSpec {
            kind: PhantomKind::Blobs {
                background: 20_000,
                count: 1,
                radius: 8.0,
                intensity: 65_535,
                noise_std: 0.0,
            },
            dims: Dims::new(64, 64, 64),
            bit_depth: BitDepth::Sixteen,
            seed: 11,
            voxel_size_um: 25.0,
        };
        let volume = gen_blobs(&spec).unwrap();
        let fraction = high_density_fraction(&volume, 60_000).unwrap();
        assert!(fraction > 0.001, "fraction {fraction}");
    }

    #[test]
    fn blobs_outrank_plain_background_under_std_dev() {
        use crate::entropy::image_entropy;
        use crate::ranking::quantile_probabilities;

        let cfg = KdeConfig::default();
        for seed in 0..10 {
            let dims = Dims::new(40, 40, 40);
            let base = PhantomSpec {
                kind: PhantomKind::Blobs {
                    background: 30_000,
                    count: 20,
                    radius: 5.0,
                    intensity: 45_000,
                    noise_std: 1_000.0,
                },
                dims,
                bit_depth: BitDepth::Sixteen,
                seed: 2 * seed,
                voxel_size_um: 25.0,
            };
            let with_blobs = gen_blobs(&base).unwrap();
            let plain = gen_blobs(&PhantomSpec {
                kind: PhantomKind::Blobs {
                    background: 30_000,
                    count: 0,
                    radius: 5.0,
                    intensity: 45_000,
                    noise_std: 1_000.0,
                },
                seed: 2 * seed + 1,
                ..base.clone()
            })
            .unwrap();

            let grid = plan_subcubes(dims, 5).unwrap();
            let mut tables = vec![
                compute_attribute_table("blobs", &with_blobs, &grid, AttributeKind::StdDev, 5)
                    .unwrap(),
                compute_attribute_table("plain", &plain, &grid, AttributeKind::StdDev, 5)
                    .unwrap(),
            ];
            standardize(&mut tables).unwrap();
            let records: Vec<_> = tables
                .iter()
                .map(|t| image_entropy(t, &cfg).unwrap())
                .collect();
            let coefficients = quantile_probabilities(&records).unwrap();
            let q = |id: &str| {
                coefficients
                    .iter()
                    .find(|c| c.sample_id == id)
                    .unwrap()
                    .quantile_prob
            };
            assert!(
                q("blobs") > q("plain"),
                "seed {seed}: blobs {} vs plain {}",
                q("blobs"),
                q("plain")
            );
        }
    }

    #[test]
    fn blob_radius_must_fit() {
        let spec = PhantomSpec {
            kind: PhantomKind::Blobs {
                background: 100,
                count: 1,
                radius: 40.0,
                intensity: 200,
                noise_std: 0.0,
            },
            dims: Dims::new(16, 16, 16),
            bit_depth: BitDepth::Sixteen,
            seed: 0,
            voxel_size_um: 25.0,
        };
        assert!(matches!(gen_blobs(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn generate_dispatches_by_kind() {
        let spec = noise_spec(100.0, 0.0, 1);
        assert_eq!(generate(&spec).unwrap(), gen_uniform_noise(&spec).unwrap());
        assert!(matches!(
            gen_layered(&spec),
            Err(Error::InvalidSpec(_))
        ));
    }
}
