//! Deterministic partition of a VOI-cropped volume into equal cubic blocks.
//!
//! The x and y axes are cut into `d` segments; the resulting segment size
//! dictates how many whole subcubes fit along z. Tiling is anchored at the
//! origin, so leftover voxels sit at the high end of each axis and are
//! excluded from every subcube.

use crate::error::{Error, Result};
use crate::volume::{Dims, Volume};

/// Partition plan for one volume at a fixed number of divisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubcubeGrid {
    /// Side length of every subcube, in voxels.
    pub segment: usize,
    /// Subcube counts per axis: `d` along x and y, `floor(dim_z / segment)`
    /// along z.
    pub counts: [usize; 3],
    /// Unused voxels at the high end of each axis.
    pub leftover: [usize; 3],
}

impl SubcubeGrid {
    pub fn total_subcubes(&self) -> usize {
        self.counts[0] * self.counts[1] * self.counts[2]
    }

    pub fn voxels_per_subcube(&self) -> usize {
        self.segment * self.segment * self.segment
    }

    /// Linear index of subcube `(i, j, k)`, i fastest, k slowest. This is
    /// the traversal order used for attribute tables.
    pub fn linear_index(&self, index: [usize; 3]) -> usize {
        (index[2] * self.counts[1] + index[1]) * self.counts[0] + index[0]
    }

    /// All subcube indices in traversal order.
    pub fn indices(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let [cx, cy, cz] = self.counts;
        (0..cz).flat_map(move |k| {
            (0..cy).flat_map(move |j| (0..cx).map(move |i| [i, j, k]))
        })
    }
}

/// Plans the partition of `dims` into `d` divisions along x and y.
///
/// The segment size is `floor(dim_x / d)`; it must be at least one voxel and
/// at least one whole subcube must fit along z.
pub fn plan_subcubes(dims: Dims, divisions: u32) -> Result<SubcubeGrid> {
    if dims.x != dims.y {
        return Err(Error::DegenerateVoi(format!(
            "cross-section {}x{} is not square",
            dims.x, dims.y
        )));
    }
    if divisions < 2 {
        return Err(Error::InvalidConfig(format!(
            "divisions {divisions} below the minimum of 2"
        )));
    }
    let d = divisions as usize;
    let segment = dims.x / d;
    if segment == 0 {
        return Err(Error::TooManyDivisions {
            divisions,
            dims: dims.as_array(),
        });
    }
    let n_z = dims.z / segment;
    if n_z == 0 {
        return Err(Error::TooManyDivisions {
            divisions,
            dims: dims.as_array(),
        });
    }
    Ok(SubcubeGrid {
        segment,
        counts: [d, d, n_z],
        leftover: [
            dims.x - d * segment,
            dims.y - d * segment,
            dims.z - n_z * segment,
        ],
    })
}

/// Copies out the voxel values of subcube `(i, j, k)`: the block with origin
/// `(i*s, j*s, k*s)` and side `s`, traversed x-fastest, z-slowest.
pub fn subcube_voxels(volume: &Volume, grid: &SubcubeGrid, index: [usize; 3]) -> Result<Vec<u16>> {
    if index[0] >= grid.counts[0] || index[1] >= grid.counts[1] || index[2] >= grid.counts[2] {
        return Err(Error::IndexOutOfRange {
            index,
            counts: grid.counts,
        });
    }
    let s = grid.segment;
    let (x0, y0, z0) = (index[0] * s, index[1] * s, index[2] * s);
    let mut values = Vec::with_capacity(grid.voxels_per_subcube());
    for z in z0..z0 + s {
        for y in y0..y0 + s {
            let row = volume.row(y, z);
            values.extend_from_slice(&row[x0..x0 + s]);
        }
    }
    Ok(values)
}
