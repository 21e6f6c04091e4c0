//! Rasterisation of closed triangle meshes onto voxel grids, plus the
//! winding-number inside test used to check it.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::{atan2, ceil, floor, round, Vec3};
use crate::mesh::{faces_are_closed, TriMesh};
use crate::volume::{BinaryVolume, GridSpec, VolumeError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VoxelizeError {
    #[error("mesh is not closed; inside/outside is undefined")]
    NotClosed,
    #[error(transparent)]
    Volume(#[from] VolumeError),
}

/// Fraction of the voxel spacing by which a degenerate ray is shifted in
/// y and z on each retry.
pub const JITTER_FRACTION: f64 = 1e-4;
/// Retries before a row falls back to winding numbers.
pub const MAX_JITTERS: usize = 3;

/// Sets each voxel whose centre lies inside the closed surface.
///
/// Inside is decided by ray parity along +x for every (y, z) row of voxel
/// centres. A ray that passes exactly through a projected triangle edge or
/// vertex is shifted by `JITTER_FRACTION * spacing` in y and z and cast
/// again; after `MAX_JITTERS` failures the row is classified with
/// [`point_in_mesh`].
///
/// Crossings are closed intervals, so a centre on a face hit by the ray
/// is inside. A centre on a row that needed jittering follows the shifted
/// ray and can differ from [`point_in_mesh`], which always counts points
/// on the surface as inside.
pub fn voxelize(mesh: &TriMesh, grid: &GridSpec) -> Result<BinaryVolume, VoxelizeError> {
    grid.validate()?;
    if !faces_are_closed(mesh.faces()) {
        return Err(VoxelizeError::NotClosed);
    }
    Ok(voxelize_closed(mesh, grid))
}

#[derive(Clone, Copy)]
struct Projected {
    verts: [Vec3; 3],
    lo: [f64; 2],
    hi: [f64; 2],
}

enum RowHit {
    Miss,
    Hit(f64),
    Degenerate,
}

/// Signed double area of (a, b) seen from the ray through p, in the yz plane.
#[inline]
fn edge_fn(a: Vec3, b: Vec3, py: f64, pz: f64) -> f64 {
    (a.y - py) * (b.z - pz) - (a.z - pz) * (b.y - py)
}

#[inline]
fn cast(t: &Projected, py: f64, pz: f64) -> RowHit {
    let [a, b, c] = t.verts;
    // Each weight belongs to the vertex opposite its edge. edge_fn is
    // exactly antisymmetric, so a shared edge gets consistent signs in
    // both of its triangles.
    let wa = edge_fn(b, c, py, pz);
    let wb = edge_fn(c, a, py, pz);
    let wc = edge_fn(a, b, py, pz);
    let pos = wa > 0.0 && wb > 0.0 && wc > 0.0;
    let neg = wa < 0.0 && wb < 0.0 && wc < 0.0;
    if pos || neg {
        let sum = wa + wb + wc;
        return RowHit::Hit((wa * a.x + wb * b.x + wc * c.x) / sum);
    }
    let zeros = (wa == 0.0) as u8 + (wb == 0.0) as u8 + (wc == 0.0) as u8;
    if zeros == 3 {
        // Triangle seen edge-on: it cannot change parity on its own.
        return RowHit::Miss;
    }
    if zeros > 0 {
        let nonneg = wa >= 0.0 && wb >= 0.0 && wc >= 0.0;
        let nonpos = wa <= 0.0 && wb <= 0.0 && wc <= 0.0;
        if nonneg || nonpos {
            return RowHit::Degenerate;
        }
    }
    RowHit::Miss
}

pub(crate) fn voxelize_closed(mesh: &TriMesh, grid: &GridSpec) -> BinaryVolume {
    let mut out = BinaryVolume::zeros(*grid).expect("grid validated");
    let [nx, ny, nz] = grid.dims;
    let verts = mesh.vertices();

    // Bucket triangles by the rows their yz bounding box covers. The box is
    // widened by the maximum jitter so retries see the same candidates.
    let slack = [
        grid.spacing[1] * JITTER_FRACTION * (MAX_JITTERS as f64 + 1.0),
        grid.spacing[2] * JITTER_FRACTION * (MAX_JITTERS as f64 + 1.0),
    ];
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); ny * nz];
    let mut tris: Vec<Projected> = Vec::with_capacity(mesh.face_count());
    for f in mesh.faces() {
        let v = f.map(|i| verts[i]);
        let lo = [v[0].y.min(v[1].y).min(v[2].y), v[0].z.min(v[1].z).min(v[2].z)];
        let hi = [v[0].y.max(v[1].y).max(v[2].y), v[0].z.max(v[1].z).max(v[2].z)];
        let j0 = ceil(grid.to_voxel(1, lo[0] - slack[0])).max(0.0);
        let j1 = floor(grid.to_voxel(1, hi[0])).min(ny as f64 - 1.0);
        let k0 = ceil(grid.to_voxel(2, lo[1] - slack[1])).max(0.0);
        let k1 = floor(grid.to_voxel(2, hi[1])).min(nz as f64 - 1.0);
        if j0 > j1 || k0 > k1 {
            continue;
        }
        let id = tris.len() as u32;
        tris.push(Projected { verts: v, lo, hi });
        for k in k0 as usize..=k1 as usize {
            for j in j0 as usize..=j1 as usize {
                rows[j + ny * k].push(id);
            }
        }
    }

    let mut hits: Vec<f64> = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            let candidates = &rows[j + ny * k];
            if candidates.is_empty() {
                continue;
            }
            let center = grid.center(0, j, k);
            let mut resolved = false;
            for attempt in 0..=MAX_JITTERS {
                let shift = attempt as f64 * JITTER_FRACTION;
                let py = center.y + shift * grid.spacing[1];
                let pz = center.z + shift * grid.spacing[2];
                hits.clear();
                let mut degenerate = false;
                for &id in candidates {
                    let t = &tris[id as usize];
                    if py < t.lo[0] || py > t.hi[0] || pz < t.lo[1] || pz > t.hi[1] {
                        continue;
                    }
                    match cast(t, py, pz) {
                        RowHit::Miss => {}
                        RowHit::Hit(x) => hits.push(x),
                        RowHit::Degenerate => {
                            degenerate = true;
                            break;
                        }
                    }
                }
                if degenerate || hits.len() % 2 == 1 {
                    continue;
                }
                hits.sort_unstable_by(f64::total_cmp);
                fill_row(&mut out, grid, j, k, &hits);
                resolved = true;
                break;
            }
            if !resolved {
                log::debug!("voxelize: row (y={j}, z={k}) fell back to winding numbers");
                for i in 0..nx {
                    if point_in_mesh(mesh, grid.center(i, j, k)) {
                        out.set(i, j, k, true);
                    }
                }
            }
        }
    }
    out
}

/// Marks the voxel centres of row (j, k) lying in `[hits[2m], hits[2m+1]]`.
fn fill_row(out: &mut BinaryVolume, grid: &GridSpec, j: usize, k: usize, hits: &[f64]) {
    let last = grid.dims[0] as f64 - 1.0;
    for pair in hits.chunks_exact(2) {
        // One voxel of margin on both sides; the exact test below decides.
        let i0 = (floor(grid.to_voxel(0, pair[0]))).max(0.0);
        let i1 = (ceil(grid.to_voxel(0, pair[1]))).min(last);
        if i0 > i1 {
            continue;
        }
        for i in i0 as usize..=i1 as usize {
            let x = grid.center(i, j, k).x;
            if x >= pair[0] && x <= pair[1] {
                out.set(i, j, k, true);
            }
        }
    }
}

/// Generalised winding number of the surface around `p`.
pub fn winding_number(mesh: &TriMesh, p: Vec3) -> f64 {
    let verts = mesh.vertices();
    let total: f64 = mesh
        .faces()
        .iter()
        .map(|f| {
            let a = verts[f[0]] - p;
            let b = verts[f[1]] - p;
            let c = verts[f[2]] - p;
            let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
            let det = a.dot(b.cross(c));
            let denom = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
            2.0 * atan2(det, denom)
        })
        .sum();
    total / (4.0 * PI)
}

fn on_triangle(a: Vec3, b: Vec3, c: Vec3, p: Vec3) -> bool {
    let e1 = b - a;
    let e2 = c - a;
    let n = e1.cross(e2);
    let n2 = n.norm_squared();
    let scale = e1.norm_squared().max(e2.norm_squared()).max((c - b).norm_squared());
    if n2 == 0.0 || scale == 0.0 {
        return false;
    }
    let d = p - a;
    // Distance to the plane, relative to the triangle size.
    let dist = d.dot(n);
    if dist * dist > 1e-24 * n2 * scale {
        return false;
    }
    let tol = -1e-12 * n2;
    let u = d.cross(e2).dot(n);
    let v = e1.cross(d).dot(n);
    u >= tol && v >= tol && (n2 - u - v) >= tol
}

/// Whether `p` is inside the closed surface: the winding number rounds to a
/// nonzero integer. Points on the surface count as inside.
pub fn point_in_mesh(mesh: &TriMesh, p: Vec3) -> bool {
    let verts = mesh.vertices();
    if mesh
        .faces()
        .iter()
        .any(|f| on_triangle(verts[f[0]], verts[f[1]], verts[f[2]], p))
    {
        return true;
    }
    round(winding_number(mesh, p)) != 0.0
}
