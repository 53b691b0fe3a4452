//! Raw 3D grayscale volumes, manifests, and the volume of interest.
//!
//! A volume is a dense block of unsigned grayscale voxels stored x-fastest,
//! z-slowest. Raw files are headerless; every property needed to interpret
//! them (dimensions, bit depth, endianness, VOI) lives in a JSON manifest
//! next to the data.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Voxel bit depth. 8-bit values occupy one byte per voxel, 16-bit two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn from_bits(bits: u8) -> Result<Self> {
        match bits {
            8 => Ok(BitDepth::Eight),
            16 => Ok(BitDepth::Sixteen),
            other => Err(Error::UnsupportedFormat(format!(
                "bit depth {other} (expected 8 or 16)"
            ))),
        }
    }

    pub fn bits(self) -> u8 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    pub fn bytes_per_voxel(self) -> usize {
        match self {
            BitDepth::Eight => 1,
            BitDepth::Sixteen => 2,
        }
    }

    /// Largest representable grayscale value (`2^bits - 1`).
    pub fn max_value(self) -> u16 {
        match self {
            BitDepth::Eight => u8::MAX as u16,
            BitDepth::Sixteen => u16::MAX,
        }
    }
}

/// Byte order of 16-bit raw files. Ignored for 8-bit data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endianness {
    #[default]
    Little,
    Big,
}

/// Volume dimensions in voxels, serialized as `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 3]", into = "[usize; 3]")]
pub struct Dims {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Dims {
    pub fn new(x: usize, y: usize, z: usize) -> Self {
        Dims { x, y, z }
    }

    pub fn voxel_count(&self) -> usize {
        self.x * self.y * self.z
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[usize; 3]> for Dims {
    fn from(d: [usize; 3]) -> Self {
        Dims::new(d[0], d[1], d[2])
    }
}

impl From<Dims> for [usize; 3] {
    fn from(d: Dims) -> Self {
        d.as_array()
    }
}

/// Cuboid volume of interest with a square horizontal cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Voi {
    /// Voxel indices of the low corner, `[x0, y0, z0]`.
    pub origin: [usize; 3],
    /// Voxel counts per axis, `[ex, ey, ez]` with `ex == ey`.
    pub extent: [usize; 3],
}

impl Voi {
    /// Builds a VOI, enforcing the square cross-section and non-empty extent.
    pub fn new(origin: [usize; 3], extent: [usize; 3]) -> Result<Self> {
        if extent[0] != extent[1] {
            return Err(Error::DegenerateVoi(format!(
                "cross-section {}x{} is not square",
                extent[0], extent[1]
            )));
        }
        if extent.contains(&0) {
            return Err(Error::DegenerateVoi(format!("empty extent {extent:?}")));
        }
        Ok(Voi { origin, extent })
    }

    /// Identity VOI covering a whole volume. Errors if the cross-section is
    /// not square.
    pub fn full(dims: Dims) -> Result<Self> {
        Voi::new([0, 0, 0], dims.as_array())
    }

    pub fn fits_within(&self, dims: Dims) -> bool {
        let d = dims.as_array();
        (0..3).all(|a| self.origin[a] + self.extent[a] <= d[a])
    }

    /// Shifts the VOI so it lies inside `dims`, shrinking the square side
    /// (and the z extent) only when it cannot fit at full size.
    pub fn clamp_to(&self, dims: Dims) -> Result<Self> {
        let d = dims.as_array();
        let side = self.extent[0].min(d[0]).min(d[1]);
        let ez = self.extent[2].min(d[2]);
        if side == 0 || ez == 0 {
            return Err(Error::DegenerateVoi(format!(
                "extent {:?} cannot fit inside dims {d:?}",
                self.extent
            )));
        }
        let extent = [side, side, ez];
        let mut origin = self.origin;
        for a in 0..3 {
            origin[a] = origin[a].min(d[a] - extent[a]);
        }
        Voi::new(origin, extent)
    }
}

/// Horizontal bounding circle of a cylindrical sample, in voxel units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center_x: usize,
    pub center_y: usize,
    pub radius: f64,
}

/// One JSON manifest per raw volume file; keys are snake_case.
///
/// `file` may be relative, in which case it resolves against the manifest's
/// own directory (see [`Manifest::load`]).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub sample_id: String,
    pub file: PathBuf,
    pub bit_depth: u8,
    pub dims: Dims,
    pub voxel_size_um: f64,
    #[serde(default)]
    pub endianness: Endianness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voi: Option<Voi>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle: Option<Circle>,
}

impl Manifest {
    /// Reads a manifest from disk, resolving a relative `file` path against
    /// the manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.file.is_relative() {
            if let Some(dir) = path.parent() {
                manifest.file = dir.join(&manifest.file);
            }
        }
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text)?;
        Ok(())
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidManifest {
            sample_id: self.sample_id.clone(),
            reason: reason.into(),
        }
    }

    /// The VOI this manifest asks for: the explicit `voi` field if present,
    /// otherwise the square inscribed in `circle` over the full z range,
    /// otherwise the whole volume. Circle- and full-volume-derived VOIs are
    /// clamped to the volume dimensions.
    pub fn resolve_voi(&self) -> Result<Voi> {
        if let Some(voi) = self.voi {
            return Voi::new(voi.origin, voi.extent);
        }
        if let Some(c) = self.circle {
            let voi =
                inscribed_square_voi((c.center_x, c.center_y), c.radius, (0, self.dims.z))?;
            return voi.clamp_to(self.dims);
        }
        Voi::full(self.dims).map_err(|_| {
            self.invalid(format!(
                "no voi or circle given and dims {:?} are not square in x/y",
                self.dims.as_array()
            ))
        })
    }
}

/// Dense 3D grayscale volume. Voxels are stored x-fastest, z-slowest:
/// `(x, y, z)` lives at index `(z * dim_y + y) * dim_x + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    voxels: Vec<u16>,
    dims: Dims,
    bit_depth: BitDepth,
    voxel_size_um: f64,
}

impl Volume {
    /// Wraps raw voxel data. Values must fit the bit depth and the buffer
    /// length must match the dimensions.
    pub fn new(voxels: Vec<u16>, dims: Dims, bit_depth: BitDepth, voxel_size_um: f64) -> Result<Self> {
        if dims.x == 0 || dims.y == 0 || dims.z == 0 {
            return Err(Error::UnsupportedFormat(format!(
                "empty dimensions {:?}",
                dims.as_array()
            )));
        }
        if voxels.len() != dims.voxel_count() {
            return Err(Error::UnsupportedFormat(format!(
                "{} voxels for dims {:?}",
                voxels.len(),
                dims.as_array()
            )));
        }
        if !(voxel_size_um.is_finite() && voxel_size_um > 0.0) {
            return Err(Error::UnsupportedFormat(format!(
                "voxel size {voxel_size_um} um"
            )));
        }
        let max = bit_depth.max_value();
        if voxels.iter().any(|&v| v > max) {
            return Err(Error::UnsupportedFormat(format!(
                "voxel value above {max} in {}-bit volume",
                bit_depth.bits()
            )));
        }
        Ok(Volume {
            voxels,
            dims,
            bit_depth,
            voxel_size_um,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bit_depth(&self) -> BitDepth {
        self.bit_depth
    }

    pub fn voxel_size_um(&self) -> f64 {
        self.voxel_size_um
    }

    pub fn voxels(&self) -> &[u16] {
        &self.voxels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> u16 {
        debug_assert!(x < self.dims.x && y < self.dims.y && z < self.dims.z);
        self.voxels[(z * self.dims.y + y) * self.dims.x + x]
    }

    /// One contiguous x-run at fixed (y, z).
    #[inline]
    pub fn row(&self, y: usize, z: usize) -> &[u16] {
        let start = (z * self.dims.y + y) * self.dims.x;
        &self.voxels[start..start + self.dims.x]
    }
}

/// Reads a raw volume described by a manifest.
///
/// The file must be exactly `dim_x * dim_y * dim_z * bytes_per_voxel` bytes;
/// voxel `(x, y, z)` is read from byte offset
/// `((z * dim_y + y) * dim_x + x) * bytes_per_voxel` with the manifest's
/// endianness.
pub fn load_volume(manifest: &Manifest) -> Result<Volume> {
    let bit_depth = BitDepth::from_bits(manifest.bit_depth)?;
    let dims = manifest.dims;
    if dims.x == 0 || dims.y == 0 || dims.z == 0 {
        return Err(Error::InvalidManifest {
            sample_id: manifest.sample_id.clone(),
            reason: format!("empty dimensions {:?}", dims.as_array()),
        });
    }
    if !(manifest.voxel_size_um.is_finite() && manifest.voxel_size_um > 0.0) {
        return Err(Error::InvalidManifest {
            sample_id: manifest.sample_id.clone(),
            reason: format!("voxel size {} um", manifest.voxel_size_um),
        });
    }

    let bytes = fs::read(&manifest.file)?;
    let expected = dims.voxel_count() * bit_depth.bytes_per_voxel();
    if bytes.len() != expected {
        return Err(Error::ManifestMismatch {
            sample_id: manifest.sample_id.clone(),
            reason: format!(
                "file {} is {} bytes, dims {:?} at {} bits require {expected}",
                manifest.file.display(),
                bytes.len(),
                dims.as_array(),
                bit_depth.bits()
            ),
        });
    }

    let voxels = match bit_depth {
        BitDepth::Eight => bytes.iter().map(|&b| b as u16).collect(),
        BitDepth::Sixteen => bytes
            .chunks_exact(2)
            .map(|pair| match manifest.endianness {
                Endianness::Little => u16::from_le_bytes([pair[0], pair[1]]),
                Endianness::Big => u16::from_be_bytes([pair[0], pair[1]]),
            })
            .collect(),
    };

    Volume::new(voxels, dims, bit_depth, manifest.voxel_size_um)
}

/// Writes a volume as a headerless raw file, x-fastest, z-slowest.
pub fn write_volume(volume: &Volume, path: &Path, endianness: Endianness) -> Result<()> {
    let mut bytes =
        Vec::with_capacity(volume.voxels.len() * volume.bit_depth.bytes_per_voxel());
    match volume.bit_depth {
        BitDepth::Eight => bytes.extend(volume.voxels.iter().map(|&v| v as u8)),
        BitDepth::Sixteen => {
            for &v in &volume.voxels {
                match endianness {
                    Endianness::Little => bytes.extend_from_slice(&v.to_le_bytes()),
                    Endianness::Big => bytes.extend_from_slice(&v.to_be_bytes()),
                }
            }
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Largest axis-aligned square inscribed in a circle of `radius` voxels,
/// extended over `[z0, z1)`.
///
/// The side is `floor(radius * sqrt(2))`; the origin is the circle center
/// minus half the side, clamped at zero. Fitting the result to concrete
/// volume dimensions is the caller's job (see [`Voi::clamp_to`]).
pub fn inscribed_square_voi(
    center: (usize, usize),
    radius: f64,
    z_range: (usize, usize),
) -> Result<Voi> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::DegenerateVoi(format!("radius {radius}")));
    }
    let (z0, z1) = z_range;
    if z1 <= z0 {
        return Err(Error::DegenerateVoi(format!("empty z range [{z0}, {z1})")));
    }
    let side = (radius * std::f64::consts::SQRT_2).floor();
    if side < 1.0 {
        return Err(Error::DegenerateVoi(format!(
            "inscribed square side {side} below one voxel"
        )));
    }
    let side = side as usize;
    let half = side / 2;
    let origin = [
        center.0.saturating_sub(half),
        center.1.saturating_sub(half),
        z0,
    ];
    Voi::new(origin, [side, side, z1 - z0])
}

/// Extracts the VOI as a standalone volume. Bit depth and voxel size carry
/// over; voxel `(x, y, z)` of the result equals source `(x+x0, y+y0, z+z0)`.
pub fn crop_voi(volume: &Volume, voi: &Voi) -> Result<Volume> {
    let dims = volume.dims();
    if !voi.fits_within(dims) {
        return Err(Error::VoiOutOfBounds {
            origin: voi.origin,
            extent: voi.extent,
            dims: dims.as_array(),
        });
    }
    let [x0, y0, z0] = voi.origin;
    let [ex, ey, ez] = voi.extent;
    let mut voxels = Vec::with_capacity(ex * ey * ez);
    for z in 0..ez {
        for y in 0..ey {
            let row = volume.row(y0 + y, z0 + z);
            voxels.extend_from_slice(&row[x0..x0 + ex]);
        }
    }
    Volume::new(
        voxels,
        Dims::new(ex, ey, ez),
        volume.bit_depth(),
        volume.voxel_size_um(),
    )
}

/// Fraction of voxels with grayscale strictly above `threshold`.
pub fn high_density_fraction(volume: &Volume, threshold: u16) -> Result<f64> {
    if threshold > volume.bit_depth().max_value() {
        return Err(Error::InvalidThreshold {
            threshold,
            bit_depth: volume.bit_depth().bits(),
        });
    }
    let above = volume.voxels().iter().filter(|&&v| v > threshold).count();
    Ok(above as f64 / volume.voxels().len() as f64)
}

/// Exclusion rule for bright artifacts: an image is dropped when *more than*
/// `max_fraction` of its voxels exceed `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighDensityFilter {
    pub threshold: u16,
    pub max_fraction: f64,
}

impl Default for HighDensityFilter {
    fn default() -> Self {
        HighDensityFilter {
            threshold: 60_000,
            max_fraction: 0.001,
        }
    }
}

impl HighDensityFilter {
    /// True when the volume crosses the exclusion rule (strict inequality).
    pub fn is_excluded(&self, volume: &Volume) -> Result<bool> {
        Ok(high_density_fraction(volume, self.threshold)? > self.max_fraction)
    }
}
