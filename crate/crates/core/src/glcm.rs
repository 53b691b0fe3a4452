//! Grey-level co-occurrence matrices and the baseline texture features.
//!
//! GLCM is a 2D technique; 3D volumes are handled by sampling equally
//! spaced slices from the three orthogonal views and averaging the
//! per-slice, per-angle features.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::volume::{BitDepth, Volume};

/// One 2D grayscale slice cut from a volume.
#[derive(Debug, Clone, PartialEq)]
pub struct GraySlice {
    pub data: Vec<u16>,
    pub width: usize,
    pub height: usize,
    pub bit_depth: BitDepth,
}

/// Orthogonal slicing orientations of a volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceView {
    /// Fixed z; columns are x, rows are y.
    Xy,
    /// Fixed y; columns are x, rows are z.
    Xz,
    /// Fixed x; columns are y, rows are z.
    Yz,
}

impl SliceView {
    pub const ALL: [SliceView; 3] = [SliceView::Xy, SliceView::Xz, SliceView::Yz];

    /// Number of slices available along this view's fixed axis.
    pub fn axis_len(self, volume: &Volume) -> usize {
        let dims = volume.dims();
        match self {
            SliceView::Xy => dims.z,
            SliceView::Xz => dims.y,
            SliceView::Yz => dims.x,
        }
    }
}

/// Copies one slice out of the volume.
pub fn extract_slice(volume: &Volume, view: SliceView, index: usize) -> Result<GraySlice> {
    let dims = volume.dims();
    let len = view.axis_len(volume);
    if index >= len {
        return Err(Error::IndexOutOfRange {
            index: [index, 0, 0],
            counts: [len, 1, 1],
        });
    }
    let (width, height) = match view {
        SliceView::Xy => (dims.x, dims.y),
        SliceView::Xz => (dims.x, dims.z),
        SliceView::Yz => (dims.y, dims.z),
    };
    let mut data = Vec::with_capacity(width * height);
    match view {
        SliceView::Xy => {
            for y in 0..height {
                data.extend_from_slice(volume.row(y, index));
            }
        }
        SliceView::Xz => {
            for z in 0..height {
                data.extend_from_slice(volume.row(index, z));
            }
        }
        SliceView::Yz => {
            for z in 0..height {
                for y in 0..width {
                    data.push(volume.get(index, y, z));
                }
            }
        }
    }
    Ok(GraySlice {
        data,
        width,
        height,
        bit_depth: volume.bit_depth(),
    })
}

/// Slice quantized to `levels` grey bins.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedSlice {
    pub data: Vec<u16>,
    pub width: usize,
    pub height: usize,
    pub levels: usize,
}

impl QuantizedSlice {
    #[inline]
    fn at(&self, col: usize, row: usize) -> usize {
        self.data[row * self.width + col] as usize
    }
}

/// Uniformly bins the grayscale range `[0, 2^bit_depth)` into `levels`
/// equal-width bins: bin = `floor(value * levels / 2^bit_depth)`.
pub fn quantize(slice: &GraySlice, levels: usize) -> Result<QuantizedSlice> {
    if !(2..=65_536).contains(&levels) {
        return Err(Error::InvalidConfig(format!(
            "quantization levels {levels} out of range [2, 65536]"
        )));
    }
    let range = 1u64 << slice.bit_depth.bits();
    let data = slice
        .data
        .iter()
        .map(|&v| ((v as u64 * levels as u64) / range) as u16)
        .collect();
    Ok(QuantizedSlice {
        data,
        width: slice.width,
        height: slice.height,
        levels,
    })
}

/// In-plane co-occurrence offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlcmAngle {
    /// Horizontal neighbours: (col, row) with (col + distance, row).
    Deg0,
    /// Vertical neighbours: (col, row) with (col, row + distance).
    Deg90,
}

/// Normalized pair-probability matrix for one slice and offset.
#[derive(Debug, Clone, PartialEq)]
pub struct GlcmMatrix {
    probs: Vec<f64>,
    levels: usize,
}

impl GlcmMatrix {
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.levels + j]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let levels = self.levels;
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(idx, &p)| (idx / levels, idx % levels, p))
    }
}

/// Counts co-occurring grey-level pairs at the given offset. Symmetric mode
/// adds the transposed pairs before normalizing to probabilities.
pub fn glcm(
    slice: &QuantizedSlice,
    distance: usize,
    angle: GlcmAngle,
    symmetric: bool,
) -> Result<GlcmMatrix> {
    if distance == 0 {
        return Err(Error::InvalidConfig("distance must be positive".into()));
    }
    let (cols, rows) = match angle {
        GlcmAngle::Deg0 => (slice.width.saturating_sub(distance), slice.height),
        GlcmAngle::Deg90 => (slice.width, slice.height.saturating_sub(distance)),
    };
    if cols == 0 || rows == 0 {
        return Err(Error::DegenerateSlice {
            width: slice.width,
            height: slice.height,
            distance,
        });
    }
    let levels = slice.levels;
    let mut counts = vec![0u64; levels * levels];
    for row in 0..rows {
        for col in 0..cols {
            let a = slice.at(col, row);
            let b = match angle {
                GlcmAngle::Deg0 => slice.at(col + distance, row),
                GlcmAngle::Deg90 => slice.at(col, row + distance),
            };
            counts[a * levels + b] += 1;
            if symmetric {
                counts[b * levels + a] += 1;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(GlcmMatrix { probs, levels })
}

/// The three baseline texture features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlcmFeatures {
    /// `sum p(i,j)^2`; 1 for a single dominant pair, 1/L^2 when uniform.
    pub energy: f64,
    /// `sum |i-j| p(i,j)`; 0 when all mass sits on the diagonal.
    pub dissimilarity: f64,
    /// `sum p(i,j) / (1 + |i-j|)`; 1 when all mass sits on the diagonal.
    pub homogeneity: f64,
}

/// Evaluates the three feature sums over a matrix.
pub fn glcm_features(matrix: &GlcmMatrix) -> GlcmFeatures {
    let mut energy = 0.0;
    let mut dissimilarity = 0.0;
    let mut homogeneity = 0.0;
    for (i, j, p) in matrix.entries() {
        let delta = (i as f64 - j as f64).abs();
        energy += p * p;
        dissimilarity += delta * p;
        homogeneity += p / (1.0 + delta);
    }
    GlcmFeatures {
        energy,
        dissimilarity,
        homogeneity,
    }
}

/// Indices of `requested` equally spaced slices over an axis of length
/// `len`; every slice when the axis is shorter than the request.
pub fn slice_indices(len: usize, requested: usize) -> Vec<usize> {
    let n = requested.min(len);
    if n <= 1 {
        return vec![0];
    }
    if n == len {
        return (0..len).collect();
    }
    (0..n)
        .map(|i| ((i * (len - 1)) as f64 / (n - 1) as f64).round() as usize)
        .collect()
}

/// Volume protocol: for each of the three orthogonal views, take up to
/// `slices_per_view` equally spaced slices, build symmetric GLCMs at
/// distance 1 for 0 and 90 degrees, and average every per-slice, per-angle
/// feature uniformly.
pub fn volume_glcm_features(
    volume: &Volume,
    levels: usize,
    slices_per_view: usize,
) -> Result<GlcmFeatures> {
    if slices_per_view == 0 {
        return Err(Error::InvalidConfig("slices_per_view must be positive".into()));
    }
    let mut tasks = Vec::new();
    for view in SliceView::ALL {
        for index in slice_indices(view.axis_len(volume), slices_per_view) {
            tasks.push((view, index));
        }
    }
    let per_slice: Vec<Result<[GlcmFeatures; 2]>> = tasks
        .par_iter()
        .map(|&(view, index)| {
            let slice = extract_slice(volume, view, index)?;
            let quantized = quantize(&slice, levels)?;
            let horizontal = glcm_features(&glcm(&quantized, 1, GlcmAngle::Deg0, true)?);
            let vertical = glcm_features(&glcm(&quantized, 1, GlcmAngle::Deg90, true)?);
            Ok([horizontal, vertical])
        })
        .collect();

    let mut energy = 0.0;
    let mut dissimilarity = 0.0;
    let mut homogeneity = 0.0;
    let mut count = 0usize;
    for outcome in per_slice {
        for features in outcome? {
            energy += features.energy;
            dissimilarity += features.dissimilarity;
            homogeneity += features.homogeneity;
            count += 1;
        }
    }
    let n = count as f64;
    Ok(GlcmFeatures {
        energy: energy / n,
        dissimilarity: dissimilarity / n,
        homogeneity: homogeneity / n,
    })
}
