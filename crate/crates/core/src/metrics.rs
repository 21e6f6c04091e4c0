//! Overlap and surface-distance metrics between binary masks, and the
//! combined evaluation of a fitted surface against a reference mask.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{ceil, sqrt};
use crate::mesh::{surface_gl, MeshError, TriMesh};
use crate::volume::{is_boundary_voxel, BinaryVolume, GridSpec};
use crate::voxelize::{voxelize, VoxelizeError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("masks are defined on different grids")]
    GridMismatch,
    #[error("Hausdorff distance needs two non-empty masks")]
    EmptyMask,
    #[error("percentile must lie in (0, 100], got {0}")]
    BadPercentile(f64),
    #[error(transparent)]
    Voxelize(#[from] VoxelizeError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Dice similarity coefficient `2|A ∩ B| / (|A| + |B|)`. Two empty masks
/// are identical and score 1.
pub fn dsc(a: &BinaryVolume, b: &BinaryVolume) -> Result<f64, MetricsError> {
    if a.grid() != b.grid() {
        return Err(MetricsError::GridMismatch);
    }
    let (mut na, mut nb, mut both) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        na += x as usize;
        nb += y as usize;
        both += (x && y) as usize;
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (na + nb) as f64)
}

/// Which statistic of the boundary distances to report.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum HausdorffMode {
    /// Classic symmetric Hausdorff distance.
    #[default]
    Max,
    /// Nearest-rank percentile (e.g. 95) of the pooled directed distances
    /// from both boundaries.
    Percentile(f64),
}

/// Symmetric Hausdorff distance in mm between the 6-connected boundaries
/// of two masks.
pub fn hausdorff(a: &BinaryVolume, b: &BinaryVolume) -> Result<f64, MetricsError> {
    hausdorff_with(a, b, HausdorffMode::Max)
}

pub fn hausdorff_with(a: &BinaryVolume, b: &BinaryVolume, mode: HausdorffMode) -> Result<f64, MetricsError> {
    if a.grid() != b.grid() {
        return Err(MetricsError::GridMismatch);
    }
    if let HausdorffMode::Percentile(q) = mode {
        if !(q > 0.0 && q <= 100.0) {
            return Err(MetricsError::BadPercentile(q));
        }
    }
    let pa = boundary_indices(a);
    let pb = boundary_indices(b);
    if pa.is_empty() || pb.is_empty() {
        return Err(MetricsError::EmptyMask);
    }
    let spacing = a.grid().spacing;
    let index_b = NearestIndex::new(&pb, a.dims(), spacing);
    let index_a = NearestIndex::new(&pa, a.dims(), spacing);
    let ab = pa.iter().map(|p| index_b.nearest(*p));
    let ba = pb.iter().map(|p| index_a.nearest(*p));
    Ok(match mode {
        HausdorffMode::Max => ab.chain(ba).fold(0.0, f64::max),
        HausdorffMode::Percentile(q) => {
            let mut all: Vec<f64> = ab.chain(ba).collect();
            all.sort_by(f64::total_cmp);
            let rank = ceil(q / 100.0 * all.len() as f64) as usize;
            all[rank.clamp(1, all.len()) - 1]
        }
    })
}

type Index3 = [i64; 3];

fn boundary_indices(volume: &BinaryVolume) -> Vec<Index3> {
    let [nx, ny, nz] = volume.dims();
    let mut out = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if is_boundary_voxel(volume, i, j, k) {
                    out.push([i as i64, j as i64, k as i64]);
                }
            }
        }
    }
    out
}

/// Distance in mm between two voxel centres given by grid indices.
#[inline]
pub(crate) fn voxel_distance(p: Index3, q: Index3, spacing: [f64; 3]) -> f64 {
    let dx = (p[0] - q[0]) as f64 * spacing[0];
    let dy = (p[1] - q[1]) as f64 * spacing[1];
    let dz = (p[2] - q[2]) as f64 * spacing[2];
    sqrt(dx * dx + dy * dy + dz * dz)
}

/// Voxels per cell edge in the nearest-neighbour bucket grid.
const CELL: i64 = 4;

/// Exact nearest-neighbour queries over voxel indices, bucketed into
/// cubic cells and searched in growing Chebyshev shells of cells.
struct NearestIndex<'a> {
    points: &'a [Index3],
    cells: [i64; 3],
    /// CSR layout: points of cell `c` are `order[start[c]..start[c + 1]]`.
    start: Vec<usize>,
    order: Vec<usize>,
    spacing: [f64; 3],
    min_spacing: f64,
}

impl<'a> NearestIndex<'a> {
    fn new(points: &'a [Index3], dims: [usize; 3], spacing: [f64; 3]) -> Self {
        let cells = dims.map(|d| (d as i64 + CELL - 1) / CELL);
        let cell_count = (cells[0] * cells[1] * cells[2]) as usize;
        let cell_of = |p: &Index3| {
            let c = p.map(|v| v / CELL);
            ((c[2] * cells[1] + c[1]) * cells[0] + c[0]) as usize
        };
        let mut start = vec![0usize; cell_count + 1];
        for p in points {
            start[cell_of(p) + 1] += 1;
        }
        for c in 0..cell_count {
            start[c + 1] += start[c];
        }
        let mut fill = start.clone();
        let mut order = vec![0usize; points.len()];
        for (n, p) in points.iter().enumerate() {
            let c = cell_of(p);
            order[fill[c]] = n;
            fill[c] += 1;
        }
        let min_spacing = spacing.iter().copied().fold(f64::INFINITY, f64::min);
        Self { points, cells, start, order, spacing, min_spacing }
    }

    fn scan_cell(&self, c: Index3, query: Index3, best: &mut f64) {
        let id = ((c[2] * self.cells[1] + c[1]) * self.cells[0] + c[0]) as usize;
        for &n in &self.order[self.start[id]..self.start[id + 1]] {
            let d = voxel_distance(query, self.points[n], self.spacing);
            if d < *best {
                *best = d;
            }
        }
    }

    fn nearest(&self, query: Index3) -> f64 {
        let home = query.map(|v| v / CELL);
        let max_ring = self.cells.iter().copied().max().unwrap_or(0);
        let mut best = f64::INFINITY;
        for ring in 0..=max_ring {
            // Any point in a cell `ring` shells away differs from the query
            // by at least (ring - 1) * CELL + 1 voxels along some axis.
            if ring > 0 {
                let bound = ((ring - 1) * CELL + 1) as f64 * self.min_spacing;
                if bound > best {
                    break;
                }
            }
            let lo = home.map(|h| h - ring);
            let hi = home.map(|h| h + ring);
            for cz in lo[2].max(0)..=hi[2].min(self.cells[2] - 1) {
                for cy in lo[1].max(0)..=hi[1].min(self.cells[1] - 1) {
                    let on_shell_yz = cz == lo[2] || cz == hi[2] || cy == lo[1] || cy == hi[1];
                    if on_shell_yz {
                        for cx in lo[0].max(0)..=hi[0].min(self.cells[0] - 1) {
                            self.scan_cell([cx, cy, cz], query, &mut best);
                        }
                    } else {
                        for cx in [lo[0], hi[0]] {
                            if cx >= 0 && cx < self.cells[0] {
                                self.scan_cell([cx, cy, cz], query, &mut best);
                            }
                        }
                    }
                }
            }
        }
        best
    }
}

/// Quality of a surface against a reference segmentation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvaluationReport {
    pub dsc: f64,
    /// Hausdorff distance, mm.
    pub hd: f64,
    /// Surface geometric Laplacian, mm.
    pub gl: f64,
    pub grid: GridSpec,
}

/// Voxelizes `surface` on `grid` and compares it with `reference`, which
/// must be defined on the same grid.
pub fn evaluate(surface: &TriMesh, reference: &BinaryVolume, grid: &GridSpec) -> Result<EvaluationReport, MetricsError> {
    evaluate_with(surface, reference, grid, HausdorffMode::Max)
}

pub fn evaluate_with(
    surface: &TriMesh,
    reference: &BinaryVolume,
    grid: &GridSpec,
    mode: HausdorffMode,
) -> Result<EvaluationReport, MetricsError> {
    if reference.grid() != grid {
        return Err(MetricsError::GridMismatch);
    }
    if reference.is_empty() {
        return Err(MetricsError::EmptyMask);
    }
    let fitted = voxelize(surface, grid)?;
    Ok(EvaluationReport {
        dsc: dsc(&fitted, reference)?,
        hd: hausdorff_with(&fitted, reference, mode)?,
        gl: surface_gl(surface)?,
        grid: *grid,
    })
}
