//! Fixture builders shared by the benchmarks.

use voxent_core::phantom::{generate, PhantomKind, PhantomSpec};
use voxent_core::{BitDepth, Dims, Volume};

/// 16-bit noise volume of the given side length.
pub fn noise_volume(side: usize, seed: u64) -> Volume {
    generate(&PhantomSpec {
        kind: PhantomKind::UniformNoise {
            mean: 30_000.0,
            std_dev: 4_000.0,
        },
        dims: Dims::new(side, side, side),
        bit_depth: BitDepth::Sixteen,
        seed,
        voxel_size_um: 25.0,
    })
    .expect("valid spec")
}

/// Layered volume exercising multi-modal attribute distributions.
pub fn layered_volume(side: usize, seed: u64) -> Volume {
    generate(&PhantomSpec {
        kind: PhantomKind::Layered {
            levels: vec![24_000, 30_000, 36_000],
            noise_std: 1_500.0,
        },
        dims: Dims::new(side, side, side),
        bit_depth: BitDepth::Sixteen,
        seed,
        voxel_size_um: 25.0,
    })
    .expect("valid spec")
}

/// Deterministic pseudo-standardized values in roughly [-3, 3].
pub fn standardized_values(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
    (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 6.0
        })
        .collect()
}
