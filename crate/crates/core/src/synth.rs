//! Synthetic corresponded templates and ground-truth targets.
//!
//! Templates are icospheres stretched into an ellipsoid and pushed along
//! the ellipsoid normals by a random band-limited spherical-harmonic field.
//! All templates share vertex order and faces, so they are corresponded by
//! construction.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{acos, atan2, ceil, cos, floor, sin, sqrt, Vec3};
use crate::mesh::TriMesh;
use crate::shape_model::{FitParams, PoseParams, ShapeModel, ShapeModelError};
use crate::volume::{BinaryVolume, GridSpec, VolumeError};
use crate::voxelize::{voxelize, VoxelizeError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    BadConfig(&'static str),
    #[error("template {template} self-intersects (faces {faces:?}); lower the deformation amplitude")]
    SelfIntersection { template: usize, faces: (usize, usize) },
    #[error(transparent)]
    Model(#[from] ShapeModelError),
    #[error(transparent)]
    Voxelize(#[from] VoxelizeError),
    #[error(transparent)]
    Volume(#[from] VolumeError),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SynthConfig {
    /// Ellipsoid semi-axes in mm.
    pub semi_axes: [f64; 3],
    /// Icosphere subdivision level; level 3 gives 642 vertices.
    pub subdivisions: u32,
    pub template_count: usize,
    /// RMS radial displacement in mm.
    pub amplitude: f64,
    /// Highest spherical-harmonic degree of the deformation field.
    pub band_limit: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            semi_axes: [18.0, 12.0, 10.0],
            subdivisions: 3,
            template_count: 16,
            amplitude: 1.5,
            band_limit: 3,
            seed: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.semi_axes.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(SynthError::BadConfig("semi-axes must be positive"));
        }
        if self.template_count < 2 {
            return Err(SynthError::BadConfig("at least 2 templates are needed"));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(SynthError::BadConfig("amplitude must be non-negative"));
        }
        if self.subdivisions > 6 {
            return Err(SynthError::BadConfig("subdivision level above 6 is unsupported"));
        }
        Ok(())
    }
}

/// Unit icosphere with `level` rounds of 4-way subdivision; outward winding.
pub fn icosphere(level: u32) -> TriMesh {
    let t = (1.0 + sqrt(5.0)) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalized())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = |a: usize, b: usize| {
                *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalized());
                    verts.len() - 1
                })
            };
            let ab = mid(f[0], f[1]);
            let bc = mid(f[1], f[2]);
            let ca = mid(f[2], f[0]);
            next.push([f[0], ab, ca]);
            next.push([f[1], bc, ab]);
            next.push([f[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    TriMesh::new(verts, faces).expect("icosphere is valid")
}

/// Associated Legendre function `P_l^m(x)` without the Condon-Shortley phase.
fn legendre(l: usize, m: usize, x: f64) -> f64 {
    let mut pmm = 1.0;
    let s = sqrt((1.0 - x * x).max(0.0));
    for i in 0..m {
        pmm *= (2 * i + 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pm2 = pmm;
    for ll in (m + 2)..=l {
        let p = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pm2) / (ll - m) as f64;
        pm2 = pm1;
        pm1 = p;
    }
    pm1
}

/// Orthonormal real spherical harmonic `Y_l^m` at polar angle `theta`
/// (from +z) and azimuth `phi`.
pub fn real_spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    let mut ratio = 1.0;
    for k in (l - am + 1)..=(l + am) {
        ratio /= k as f64;
    }
    let norm = sqrt((2 * l + 1) as f64 / (4.0 * PI) * ratio);
    let p = legendre(l, am, cos(theta));
    match m {
        0 => norm * p,
        m if m > 0 => core::f64::consts::SQRT_2 * norm * cos(am as f64 * phi) * p,
        _ => core::f64::consts::SQRT_2 * norm * sin(am as f64 * phi) * p,
    }
}

fn spherical_angles(u: Vec3) -> (f64, f64) {
    (acos(u.z.clamp(-1.0, 1.0)), atan2(u.y, u.x))
}

/// Per-degree coefficient weights and the factor that gives an expected
/// RMS field of 1.
fn field_weights(band_limit: usize) -> (Vec<f64>, f64) {
    let w: Vec<f64> = (0..=band_limit).map(|l| 1.0 / (l + 1) as f64).collect();
    let var: f64 = w.iter().enumerate().map(|(l, wl)| (2 * l + 1) as f64 * wl * wl / 3.0).sum();
    (w, 1.0 / sqrt(var))
}

/// Generates `template_count` corresponded, closed template meshes.
pub fn make_templates(config: &SynthConfig) -> Result<Vec<TriMesh>, SynthError> {
    config.validate()?;
    let sphere = icosphere(config.subdivisions);
    let [a, b, c] = config.semi_axes;
    let base: Vec<(Vec3, Vec3)> = sphere
        .vertices()
        .iter()
        .map(|&u| {
            let p = Vec3::new(a * u.x, b * u.y, c * u.z);
            let n = Vec3::new(p.x / (a * a), p.y / (b * b), p.z / (c * c)).normalized();
            (p, n)
        })
        .collect();
    // Harmonics only depend on the sphere directions; evaluate them once.
    let mut basis: Vec<(usize, Vec<f64>)> = Vec::new();
    for l in 0..=config.band_limit {
        for m in -(l as i64)..=(l as i64) {
            let values = sphere
                .vertices()
                .iter()
                .map(|&u| {
                    let (theta, phi) = spherical_angles(u);
                    real_spherical_harmonic(l, m, theta, phi)
                })
                .collect();
            basis.push((l, values));
        }
    }
    let (weights, norm) = field_weights(config.band_limit);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut templates = Vec::with_capacity(config.template_count);
    for index in 0..config.template_count {
        let coeffs: Vec<f64> = basis
            .iter()
            .map(|(l, _)| rng.random_range(-1.0..=1.0) * weights[*l])
            .collect();
        let verts: Vec<Vec3> = base
            .iter()
            .enumerate()
            .map(|(v, &(p, n))| {
                let field: f64 = coeffs.iter().zip(&basis).map(|(c, (_, y))| c * y[v]).sum();
                p + n * (config.amplitude * norm * field)
            })
            .collect();
        let mesh = TriMesh::new(verts, sphere.faces().to_vec()).expect("faces shared with icosphere");
        if let Some(faces) = find_self_intersection(&mesh) {
            return Err(SynthError::SelfIntersection { template: index, faces });
        }
        templates.push(mesh);
    }
    Ok(templates)
}

/// Segment p->q against triangle (a, b, c); returns the hit parameter.
fn segment_hits_triangle(p: Vec3, q: Vec3, a: Vec3, b: Vec3, c: Vec3) -> Option<f64> {
    let dir = q - p;
    let e1 = b - a;
    let e2 = c - a;
    let h = dir.cross(e2);
    let det = e1.dot(h);
    if det.abs() < 1e-14 * e1.norm() * e2.norm() * dir.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let s = p - a;
    let u = s.dot(h) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qv = s.cross(e1);
    let v = dir.dot(qv) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(qv) * inv;
    (0.0..=1.0).contains(&t).then_some(t)
}

/// First pair of non-adjacent faces that intersect, if any. Faces sharing
/// an edge are skipped; faces sharing a vertex only count if they meet away
/// from it.
pub fn find_self_intersection(mesh: &TriMesh) -> Option<(usize, usize)> {
    let verts = mesh.vertices();
    let faces = mesh.faces();
    let boxes: Vec<(Vec3, Vec3)> = faces
        .iter()
        .map(|f| {
            let [a, b, c] = f.map(|i| verts[i]);
            (a.min(b).min(c), a.max(b).max(c))
        })
        .collect();
    let mut order: Vec<usize> = (0..faces.len()).collect();
    order.sort_by(|&x, &y| boxes[x].0.x.total_cmp(&boxes[y].0.x).then(x.cmp(&y)));
    for (n, &fi) in order.iter().enumerate() {
        for &fj in &order[n + 1..] {
            if boxes[fj].0.x > boxes[fi].1.x {
                break;
            }
            let (lo_i, hi_i) = boxes[fi];
            let (lo_j, hi_j) = boxes[fj];
            if lo_j.y > hi_i.y || lo_i.y > hi_j.y || lo_j.z > hi_i.z || lo_i.z > hi_j.z {
                continue;
            }
            let shared: Vec<usize> = faces[fi].iter().copied().filter(|v| faces[fj].contains(v)).collect();
            if shared.len() >= 2 {
                continue;
            }
            if triangles_intersect(verts, faces[fi], faces[fj], shared.first().copied()) {
                return Some((fi.min(fj), fi.max(fj)));
            }
        }
    }
    None
}

fn triangles_intersect(verts: &[Vec3], f: [usize; 3], g: [usize; 3], shared: Option<usize>) -> bool {
    let test = |edges: [usize; 3], tri: [usize; 3]| {
        let [a, b, c] = tri.map(|i| verts[i]);
        (0..3).any(|k| {
            let (s, e) = (edges[k], edges[(k + 1) % 3]);
            match segment_hits_triangle(verts[s], verts[e], a, b, c) {
                None => false,
                Some(t) => match shared {
                    None => true,
                    // Touching at the common vertex is not an intersection.
                    Some(v) => {
                        let hit = verts[s] + (verts[e] - verts[s]) * t;
                        (hit - verts[v]).norm() > 1e-9 * (verts[e] - verts[s]).norm()
                    }
                },
            }
        })
    };
    test(f, g) || test(g, f)
}

/// Ranges for drawing random ground-truth parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TargetSampling {
    /// Shape weights are drawn in `+-shape_sd * sqrt(lambda)`.
    pub shape_sd: f64,
    /// Per-axis translation bound, mm.
    pub translation: f64,
    /// Per-axis rotation bound, radians.
    pub rotation: f64,
    pub scale: [f64; 2],
}

impl Default for TargetSampling {
    fn default() -> Self {
        Self {
            shape_sd: 1.5,
            translation: 3.0,
            rotation: 0.1,
            scale: [0.95, 1.05],
        }
    }
}

/// Draws ground-truth fit parameters for `model`.
pub fn sample_target_params(model: &ShapeModel, sampling: &TargetSampling, seed: u64) -> FitParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape_weights = model
        .eigenvalues()
        .iter()
        .map(|l| rng.random_range(-1.0..=1.0) * sampling.shape_sd * sqrt(*l))
        .collect();
    let mut sym = |r: f64| if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
    let translation = Vec3::new(
        sym(sampling.translation),
        sym(sampling.translation),
        sym(sampling.translation),
    );
    let rotation = [sym(sampling.rotation), sym(sampling.rotation), sym(sampling.rotation)];
    let scale = if sampling.scale[1] > sampling.scale[0] {
        rng.random_range(sampling.scale[0]..=sampling.scale[1])
    } else {
        sampling.scale[0]
    };
    FitParams {
        shape_weights,
        pose: PoseParams {
            translation,
            rotation,
            scale,
        },
    }
}

/// A grid of the given isotropic spacing covering `mesh` plus `margin` mm on
/// every side, with its origin on a multiple of the spacing.
pub fn grid_around(mesh: &TriMesh, spacing: f64, margin: f64) -> Result<GridSpec, VolumeError> {
    let (lo, hi) = mesh.bounding_box().unwrap_or((Vec3::ZERO, Vec3::ZERO));
    let mut dims = [1usize; 3];
    let mut origin = [0.0; 3];
    for a in 0..3 {
        origin[a] = floor((lo[a] - margin) / spacing) * spacing;
        dims[a] = (ceil((hi[a] + margin - origin[a]) / spacing) as usize + 1).max(1);
    }
    GridSpec::new(dims, [spacing; 3], origin)
}

/// Below this many foreground voxels a target is considered too coarse.
pub const MIN_TARGET_VOXELS: usize = 100;

/// Voxelizes the model instance for `weights` and `pose` on `grid`, and
/// returns it with the generating parameters.
pub fn make_target(
    model: &ShapeModel,
    weights: &[f64],
    pose: PoseParams,
    grid: &GridSpec,
) -> Result<(BinaryVolume, FitParams), SynthError> {
    let params = FitParams {
        shape_weights: weights.to_vec(),
        pose,
    };
    let mesh = model.instantiate(&params)?;
    let mask = voxelize(&mesh, grid)?;
    let count = mask.count();
    if count < MIN_TARGET_VOXELS {
        log::warn!(
            "synthetic target has only {count} foreground voxels (< {MIN_TARGET_VOXELS}); the grid is too coarse for this shape"
        );
    }
    Ok((mask, params))
}
