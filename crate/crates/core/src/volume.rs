//! Binary masks on regular grids.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::Vec3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VolumeError {
    #[error("grid dimensions must all be at least 1, got {0:?}")]
    BadDims([usize; 3]),
    #[error("grid spacing must be finite and positive, got {0:?}")]
    BadSpacing([f64; 3]),
    #[error("grid origin must be finite, got {0:?}")]
    BadOrigin([f64; 3]),
    #[error("voxel data has {actual} entries, grid needs {expected}")]
    DataLength { expected: usize, actual: usize },
    #[error("grids differ")]
    GridMismatch,
}

/// Geometry of a voxel grid. `origin` is the centre of voxel (0, 0, 0);
/// voxel (i, j, k) is centred at `origin + (i, j, k) * spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl GridSpec {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self, VolumeError> {
        let g = Self { dims, spacing, origin };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), VolumeError> {
        if self.dims.contains(&0) {
            return Err(VolumeError::BadDims(self.dims));
        }
        if self.spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(VolumeError::BadSpacing(self.spacing));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(VolumeError::BadOrigin(self.origin));
        }
        Ok(())
    }

    pub fn voxel_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// Linear index, x fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let i = index % self.dims[0];
        let rest = index / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
            self.origin[2] + k as f64 * self.spacing[2],
        )
    }

    /// Continuous voxel coordinate of a world point along `axis`.
    #[inline]
    pub fn to_voxel(&self, axis: usize, world: f64) -> f64 {
        (world - self.origin[axis]) / self.spacing[axis]
    }
}

/// A foreground/background mask over a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryVolume {
    grid: GridSpec,
    data: Vec<bool>,
}

impl BinaryVolume {
    pub fn new(grid: GridSpec, data: Vec<bool>) -> Result<Self, VolumeError> {
        grid.validate()?;
        if data.len() != grid.voxel_count() {
            return Err(VolumeError::DataLength {
                expected: grid.voxel_count(),
                actual: data.len(),
            });
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: GridSpec) -> Result<Self, VolumeError> {
        grid.validate()?;
        Ok(Self {
            grid,
            data: vec![false; grid.voxel_count()],
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dims(&self) -> [usize; 3] {
        self.grid.dims
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [bool] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.data[self.grid.index(i, j, k)]
    }

    /// Like [`get`](Self::get) but out-of-grid coordinates read as background.
    #[inline]
    pub fn get_padded(&self, i: isize, j: isize, k: isize) -> bool {
        let d = self.grid.dims;
        if i < 0 || j < 0 || k < 0 || i as usize >= d[0] || j as usize >= d[1] || k as usize >= d[2] {
            return false;
        }
        self.get(i as usize, j as usize, k as usize)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: bool) {
        let idx = self.grid.index(i, j, k);
        self.data[idx] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Mean world position of the foreground voxel centres.
    pub fn centroid(&self) -> Option<Vec3> {
        let mut sum = Vec3::ZERO;
        let mut n = 0usize;
        for (idx, _) in self.data.iter().enumerate().filter(|(_, &b)| b) {
            let [i, j, k] = self.grid.coords(idx);
            sum += self.grid.center(i, j, k);
            n += 1;
        }
        (n > 0).then(|| sum / n as f64)
    }

    /// Foreground volume in mm³.
    pub fn foreground_volume(&self) -> f64 {
        self.count() as f64 * self.grid.voxel_volume()
    }
}

const FACE_NEIGHBORS: [[isize; 3]; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];

/// Whether the foreground voxel at (i, j, k) has a background 6-neighbour,
/// counting out-of-grid as background.
pub fn is_boundary_voxel(volume: &BinaryVolume, i: usize, j: usize, k: usize) -> bool {
    volume.get(i, j, k)
        && FACE_NEIGHBORS.iter().any(|d| {
            !volume.get_padded(i as isize + d[0], j as isize + d[1], k as isize + d[2])
        })
}

/// World-space centres of foreground voxels with at least one background
/// 6-neighbour, in x-fastest grid order.
pub fn boundary_voxels(volume: &BinaryVolume) -> Vec<Vec3> {
    let [nx, ny, nz] = volume.dims();
    let mut out = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if is_boundary_voxel(volume, i, j, k) {
                    out.push(volume.grid().center(i, j, k));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n: usize) -> GridSpec {
        GridSpec::new([n, n, n], [1.0; 3], [0.0; 3]).unwrap()
    }

    #[test]
    fn rejects_bad_geometry() {
        assert_eq!(GridSpec::new([0, 1, 1], [1.0; 3], [0.0; 3]), Err(VolumeError::BadDims([0, 1, 1])));
        assert!(matches!(GridSpec::new([1, 1, 1], [1.0, 0.0, 1.0], [0.0; 3]), Err(VolumeError::BadSpacing(_))));
        assert!(matches!(
            BinaryVolume::new(unit_grid(2), vec![true; 7]),
            Err(VolumeError::DataLength { expected: 8, actual: 7 })
        ));
    }

    #[test]
    fn index_round_trips() {
        let g = GridSpec::new([3, 4, 5], [1.0; 3], [0.0; 3]).unwrap();
        for idx in 0..g.voxel_count() {
            let [i, j, k] = g.coords(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
        assert_eq!(g.index(1, 0, 0), 1);
        assert_eq!(g.index(0, 1, 0), 3);
        assert_eq!(g.index(0, 0, 1), 12);
    }

    #[test]
    fn single_voxel_boundary() {
        let mut v = BinaryVolume::zeros(unit_grid(5)).unwrap();
        v.set(2, 3, 1, true);
        assert_eq!(boundary_voxels(&v), vec![Vec3::new(2.0, 3.0, 1.0)]);
    }

    #[test]
    fn solid_block_boundary_excludes_center() {
        let mut v = BinaryVolume::zeros(unit_grid(5)).unwrap();
        for k in 1..4 {
            for j in 1..4 {
                for i in 1..4 {
                    v.set(i, j, k, true);
                }
            }
        }
        let b = boundary_voxels(&v);
        assert_eq!(b.len(), 26);
        assert!(!b.contains(&Vec3::new(2.0, 2.0, 2.0)));
    }

    #[test]
    fn empty_volume_has_no_boundary() {
        assert!(boundary_voxels(&BinaryVolume::zeros(unit_grid(3)).unwrap()).is_empty());
    }

    #[test]
    fn full_grid_boundary_is_the_grid_shell() {
        let g = GridSpec::new([4, 3, 5], [1.0; 3], [0.0; 3]).unwrap();
        let v = BinaryVolume::new(g, vec![true; g.voxel_count()]).unwrap();
        let b = boundary_voxels(&v);
        let shell = (0..g.voxel_count())
            .filter(|&idx| {
                let c = g.coords(idx);
                (0..3).any(|a| c[a] == 0 || c[a] == g.dims[a] - 1)
            })
            .count();
        assert_eq!(b.len(), shell);
        assert_eq!(b.len(), 4 * 3 * 5 - 2 * 3);
    }

    #[test]
    fn centroid_in_world_space() {
        let g = GridSpec::new([4, 4, 4], [2.0, 1.0, 0.5], [10.0, 0.0, -1.0]).unwrap();
        let mut v = BinaryVolume::zeros(g).unwrap();
        v.set(1, 2, 2, true);
        v.set(3, 2, 2, true);
        assert_eq!(v.centroid(), Some(Vec3::new(14.0, 2.0, 0.0)));
        assert_eq!(BinaryVolume::zeros(g).unwrap().centroid(), None);
    }
}
