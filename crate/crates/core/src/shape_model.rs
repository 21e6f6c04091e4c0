//! Point-distribution shape model.
//!
//! Each template surface is flattened into a shape vector
//! `(x1, y1, z1, ..., xn, yn, zn)`. The model stores the mean shape and the
//! leading principal modes of the template covariance
//! `S = 1/N * sum (a_i - mean)(a_i - mean)^T`, and new shapes are
//! `mean + P b`. A seven-parameter pose (translation, Z-Y-X Euler rotation,
//! isotropic scale about the mean centroid) places a shape in world space.
//!
//! The covariance is never formed: its nonzero spectrum is taken from the
//! N x N Gram matrix of the centred templates and mapped back.

use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::symmetric_eigen;
use crate::math::{sqrt, Mat3, Vec3};
use crate::mesh::{validate_faces, MeshError, TriMesh};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShapeModelError {
    #[error("at least 2 templates are needed, got {0}")]
    TooFewTemplates(usize),
    #[error("template {template} has {actual} vertices, expected {expected}")]
    VertexCountMismatch {
        template: usize,
        expected: usize,
        actual: usize,
    },
    #[error("template {template} has different face connectivity from template 0")]
    FaceMismatch { template: usize },
    #[error("variance fraction must lie in (0, 1], got {0}")]
    VarianceFraction(f64),
    #[error("expected {expected} shape weights, got {actual}")]
    WrongWeightCount { expected: usize, actual: usize },
    #[error("pose scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("shape vector length {0} is not a multiple of 3")]
    BadShapeLength(usize),
    #[error("shape vector has non-finite entries")]
    NonFinite,
    #[error("invalid model: {0}")]
    InvalidModel(&'static str),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Interleaved point coordinates of one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeVector {
    coords: Vec<f64>,
}

impl ShapeVector {
    pub fn from_coords(coords: Vec<f64>) -> Result<Self, ShapeModelError> {
        if !coords.len().is_multiple_of(3) {
            return Err(ShapeModelError::BadShapeLength(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(ShapeModelError::NonFinite);
        }
        Ok(Self { coords })
    }

    pub fn from_points(points: &[Vec3]) -> Self {
        Self {
            coords: points.iter().flat_map(|p| p.to_array()).collect(),
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn point_count(&self) -> usize {
        self.coords.len() / 3
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> Vec3 {
        Vec3::new(self.coords[3 * i], self.coords[3 * i + 1], self.coords[3 * i + 2])
    }

    pub fn points(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.coords.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2]))
    }

    pub fn centroid(&self) -> Vec3 {
        let n = self.point_count();
        if n == 0 {
            return Vec3::ZERO;
        }
        self.points().fold(Vec3::ZERO, |a, p| a + p) / n as f64
    }

    /// Attaches connectivity to the points.
    pub fn to_mesh(&self, faces: &[[usize; 3]]) -> Result<TriMesh, MeshError> {
        TriMesh::new(self.points().collect(), faces.to_vec())
    }
}

/// Flattens mesh vertices, in order, into a shape vector.
pub fn assemble_shape_vector(mesh: &TriMesh) -> ShapeVector {
    ShapeVector::from_points(mesh.vertices())
}

/// Similarity transform applied about the model's mean centroid:
/// `p -> R * s * (p - c) + c + translation`, with `R = Rz * Ry * Rx`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoseParams {
    /// Millimetres.
    pub translation: Vec3,
    /// Radians about x, y, z; applied intrinsically in Z-Y-X order.
    pub rotation: [f64; 3],
    pub scale: f64,
}

impl PoseParams {
    pub const IDENTITY: PoseParams = PoseParams {
        translation: Vec3::ZERO,
        rotation: [0.0; 3],
        scale: 1.0,
    };

    pub fn rotation_matrix(&self) -> Mat3 {
        let [rx, ry, rz] = self.rotation;
        Mat3::rot_z(rz).mul_mat(&Mat3::rot_y(ry)).mul_mat(&Mat3::rot_x(rx))
    }

    pub fn validate(&self) -> Result<(), ShapeModelError> {
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(ShapeModelError::NonPositiveScale(self.scale));
        }
        if !self.translation.is_finite() || self.rotation.iter().any(|r| !r.is_finite()) {
            return Err(ShapeModelError::NonFinite);
        }
        Ok(())
    }
}

impl Default for PoseParams {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Number of pose parameters appended to the shape weights in a search
/// vector.
pub const POSE_DIMS: usize = 7;

/// Shape weights plus pose: the `t + 7` search space of the fitter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitParams {
    pub shape_weights: Vec<f64>,
    pub pose: PoseParams,
}

impl FitParams {
    pub fn identity(modes: usize) -> Self {
        Self {
            shape_weights: vec![0.0; modes],
            pose: PoseParams::IDENTITY,
        }
    }

    /// Layout: `[b_1..b_t, tx, ty, tz, rx, ry, rz, s]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let p = &self.pose;
        let mut v = self.shape_weights.clone();
        v.extend_from_slice(&[
            p.translation.x,
            p.translation.y,
            p.translation.z,
            p.rotation[0],
            p.rotation[1],
            p.rotation[2],
            p.scale,
        ]);
        v
    }

    pub fn from_vector(x: &[f64]) -> Self {
        assert!(x.len() >= POSE_DIMS, "search vector shorter than the pose");
        let t = x.len() - POSE_DIMS;
        let p = &x[t..];
        Self {
            shape_weights: x[..t].to_vec(),
            pose: PoseParams {
                translation: Vec3::new(p[0], p[1], p[2]),
                rotation: [p[3], p[4], p[5]],
                scale: p[6],
            },
        }
    }
}

/// Applies `pose` about `center` to every point of `shape`.
pub fn apply_pose(
    shape: &ShapeVector,
    pose: &PoseParams,
    faces: &[[usize; 3]],
    center: Vec3,
) -> Result<TriMesh, ShapeModelError> {
    pose.validate()?;
    validate_faces(faces, shape.point_count())?;
    Ok(TriMesh::with_trusted_faces(pose_points(shape, pose, center), faces.to_vec())?)
}

fn pose_points(shape: &ShapeVector, pose: &PoseParams, center: Vec3) -> Vec<Vec3> {
    let r = pose.rotation_matrix();
    let shift = center + pose.translation;
    shape
        .points()
        .map(|p| r.mul_vec((p - center) * pose.scale) + shift)
        .collect()
}

/// Mean shape plus orthonormal modes of variation.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeModel {
    mean: ShapeVector,
    modes: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    faces: Vec<[usize; 3]>,
    total_variance: f64,
    center: Vec3,
}

impl ShapeModel {
    /// Builds the model from corresponded templates, keeping the smallest
    /// number of modes whose eigenvalues reach `variance_fraction` of the
    /// total variance.
    pub fn build(templates: &[TriMesh], variance_fraction: f64) -> Result<Self, ShapeModelError> {
        if !(variance_fraction > 0.0 && variance_fraction <= 1.0) {
            return Err(ShapeModelError::VarianceFraction(variance_fraction));
        }
        if templates.len() < 2 {
            return Err(ShapeModelError::TooFewTemplates(templates.len()));
        }
        let first = &templates[0];
        for (i, t) in templates.iter().enumerate().skip(1) {
            if t.vertex_count() != first.vertex_count() {
                return Err(ShapeModelError::VertexCountMismatch {
                    template: i,
                    expected: first.vertex_count(),
                    actual: t.vertex_count(),
                });
            }
            if t.faces() != first.faces() {
                return Err(ShapeModelError::FaceMismatch { template: i });
            }
        }

        let shapes: Vec<ShapeVector> = templates.iter().map(assemble_shape_vector).collect();
        let count = shapes.len();
        let dim = shapes[0].len();
        let mut mean = vec![0.0; dim];
        for s in &shapes {
            for (m, &c) in mean.iter_mut().zip(s.coords()) {
                *m += c;
            }
        }
        for m in &mut mean {
            *m /= count as f64;
        }
        let centered: Vec<Vec<f64>> = shapes
            .iter()
            .map(|s| s.coords().iter().zip(&mean).map(|(c, m)| c - m).collect())
            .collect();

        let mut gram = vec![0.0; count * count];
        for i in 0..count {
            for j in i..count {
                let g = dot(&centered[i], &centered[j]) / count as f64;
                gram[i * count + j] = g;
                gram[j * count + i] = g;
            }
        }
        let total_variance: f64 = (0..count).map(|i| gram[i * count + i]).sum();
        let eig = symmetric_eigen(&gram, count);

        let cutoff = total_variance * 1e-12;
        let mut eigenvalues = Vec::new();
        let mut modes: Vec<Vec<f64>> = Vec::new();
        for (lambda, u) in eig.values.iter().zip(&eig.vectors) {
            if !(*lambda > cutoff) {
                break;
            }
            let mut v = vec![0.0; dim];
            for (w, d) in u.iter().zip(&centered) {
                for (vk, dk) in v.iter_mut().zip(d) {
                    *vk += w * dk;
                }
            }
            // Re-orthogonalise against earlier modes to absorb round-off.
            for prev in &modes {
                let proj = dot(&v, prev);
                for (vk, pk) in v.iter_mut().zip(prev) {
                    *vk -= proj * pk;
                }
            }
            let norm = sqrt(dot(&v, &v));
            if norm == 0.0 {
                break;
            }
            for vk in &mut v {
                *vk /= norm;
            }
            fix_sign(&mut v);
            eigenvalues.push(*lambda);
            modes.push(v);
        }

        let keep = modes_for_fraction(&eigenvalues, total_variance, variance_fraction);
        eigenvalues.truncate(keep);
        modes.truncate(keep);

        let mean = ShapeVector::from_coords(mean)?;
        let center = mean.centroid();
        Ok(Self {
            mean,
            modes,
            eigenvalues,
            faces: first.faces().to_vec(),
            total_variance,
            center,
        })
    }

    /// Reassembles a model from stored parts, checking its invariants.
    pub fn from_parts(
        mean: Vec<f64>,
        modes: Vec<Vec<f64>>,
        eigenvalues: Vec<f64>,
        faces: Vec<[usize; 3]>,
        total_variance: f64,
    ) -> Result<Self, ShapeModelError> {
        let mean = ShapeVector::from_coords(mean)?;
        validate_faces(&faces, mean.point_count())?;
        if modes.len() != eigenvalues.len() {
            return Err(ShapeModelError::InvalidModel("mode and eigenvalue counts differ"));
        }
        if modes.iter().any(|m| m.len() != mean.len()) {
            return Err(ShapeModelError::InvalidModel("mode length differs from mean length"));
        }
        if eigenvalues.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(ShapeModelError::InvalidModel("eigenvalues must be positive"));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(ShapeModelError::InvalidModel("eigenvalues must be sorted descending"));
        }
        if !(total_variance >= 0.0) || !total_variance.is_finite() {
            return Err(ShapeModelError::InvalidModel("total variance must be finite and non-negative"));
        }
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate().skip(i) {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot(a, b) - expect).abs() > 1e-10 {
                    return Err(ShapeModelError::InvalidModel("modes are not orthonormal"));
                }
            }
        }
        let center = mean.centroid();
        Ok(Self {
            mean,
            modes,
            eigenvalues,
            faces,
            total_variance,
            center,
        })
    }

    pub fn mean(&self) -> &ShapeVector {
        &self.mean
    }

    /// Mode `j` as a unit vector of length `3n`.
    pub fn modes(&self) -> &[Vec<f64>] {
        &self.modes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    /// Number of points per shape.
    pub fn point_count(&self) -> usize {
        self.mean.point_count()
    }

    /// Number of retained modes.
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Centroid of the mean shape; the pose pivot.
    pub fn center(&self) -> Vec3 {
        self.center
    }

    /// `mean + P b`.
    pub fn reconstruct(&self, weights: &[f64]) -> Result<ShapeVector, ShapeModelError> {
        if weights.len() != self.modes.len() {
            return Err(ShapeModelError::WrongWeightCount {
                expected: self.modes.len(),
                actual: weights.len(),
            });
        }
        let mut coords = self.mean.coords.clone();
        for (b, mode) in weights.iter().zip(&self.modes) {
            if *b == 0.0 {
                continue;
            }
            for (c, m) in coords.iter_mut().zip(mode) {
                *c += b * m;
            }
        }
        ShapeVector::from_coords(coords)
    }

    /// Shape weights `P^T (a - mean)` of a shape.
    pub fn project(&self, shape: &ShapeVector) -> Result<Vec<f64>, ShapeModelError> {
        if shape.len() != self.mean.len() {
            return Err(ShapeModelError::BadShapeLength(shape.len()));
        }
        let d: Vec<f64> = shape.coords.iter().zip(&self.mean.coords).map(|(a, m)| a - m).collect();
        Ok(self.modes.iter().map(|m| dot(m, &d)).collect())
    }

    /// The posed surface for `params`.
    pub fn instantiate(&self, params: &FitParams) -> Result<TriMesh, ShapeModelError> {
        params.pose.validate()?;
        let shape = self.reconstruct(&params.shape_weights)?;
        Ok(TriMesh::with_trusted_faces(
            pose_points(&shape, &params.pose, self.center),
            self.faces.clone(),
        )?)
    }

    pub fn mean_mesh(&self) -> TriMesh {
        TriMesh::with_trusted_faces(self.mean.points().collect(), self.faces.clone())
            .expect("mean shape is finite")
    }
}

/// Smallest mode count whose cumulative eigenvalue share reaches `fraction`.
fn modes_for_fraction(eigenvalues: &[f64], total: f64, fraction: f64) -> usize {
    if total <= 0.0 {
        return 0;
    }
    let target = fraction * total * (1.0 - 1e-12);
    let mut cumulative = 0.0;
    for (k, l) in eigenvalues.iter().enumerate() {
        cumulative += l;
        if cumulative >= target {
            return k + 1;
        }
    }
    eigenvalues.len()
}

/// Makes the largest-magnitude entry positive (first one on ties).
fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::fixtures::octahedron;
    use core::f64::consts::FRAC_PI_2;

    fn two_point_mesh(coords: [f64; 6]) -> TriMesh {
        // Faces are irrelevant to the model; a 3-vertex mesh keeps it valid.
        TriMesh::new(
            vec![
                Vec3::new(coords[0], coords[1], coords[2]),
                Vec3::new(coords[3], coords[4], coords[5]),
                Vec3::new(9.0, 9.0, 9.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn shape_vector_is_interleaved() {
        let m = TriMesh::new(
            vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.0), Vec3::ZERO],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let s = assemble_shape_vector(&m);
        assert_eq!(&s.coords()[..6], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(s.to_mesh(m.faces()).unwrap(), m);
        let empty = assemble_shape_vector(&TriMesh::empty());
        assert_eq!((empty.len(), empty.point_count()), (0, 0));
    }

    #[test]
    fn two_template_model() {
        let a = two_point_mesh([0.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        let b = two_point_mesh([0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let model = ShapeModel::build(&[a, b], 1.0).unwrap();
        assert_eq!(&model.mean().coords()[..6], &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(model.mode_count(), 1);
        assert!((model.eigenvalues()[0] - 1.0).abs() < 1e-15);
        let mode = &model.modes()[0];
        assert_eq!(&mode[..6], &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((model.total_variance() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_templates_have_no_modes() {
        let o = octahedron();
        let model = ShapeModel::build(&[o.clone(), o.clone(), o.clone()], 0.98).unwrap();
        assert_eq!(model.mode_count(), 0);
        assert_eq!(model.total_variance(), 0.0);
        assert_eq!(model.instantiate(&FitParams::identity(0)).unwrap(), o);
    }

    #[test]
    fn build_errors() {
        let o = octahedron();
        assert_eq!(ShapeModel::build(core::slice::from_ref(&o), 0.9), Err(ShapeModelError::TooFewTemplates(1)));
        assert_eq!(
            ShapeModel::build(&[o.clone(), o.clone()], 0.0),
            Err(ShapeModelError::VarianceFraction(0.0))
        );
        assert!(ShapeModel::build(&[o.clone(), o.clone()], 1.5).is_err());
        let other = two_point_mesh([0.0; 6]);
        assert!(matches!(
            ShapeModel::build(&[o.clone(), other], 0.9),
            Err(ShapeModelError::VertexCountMismatch { template: 1, .. })
        ));
        let mut faces = o.faces().to_vec();
        faces.swap(0, 1);
        let shuffled = TriMesh::new(o.vertices().to_vec(), faces).unwrap();
        assert_eq!(ShapeModel::build(&[o, shuffled], 0.9), Err(ShapeModelError::FaceMismatch { template: 1 }));
    }

    fn simple_model() -> ShapeModel {
        let o = octahedron();
        let templates: Vec<TriMesh> = (0..4)
            .map(|i| {
                let s = 1.0 + 0.1 * i as f64;
                let v = o
                    .vertices()
                    .iter()
                    .map(|p| Vec3::new(p.x * s, p.y, p.z + 0.05 * (i * i) as f64))
                    .collect();
                TriMesh::new(v, o.faces().to_vec()).unwrap()
            })
            .collect();
        ShapeModel::build(&templates, 1.0).unwrap()
    }

    #[test]
    fn reconstruct_at_zero_is_mean() {
        let m = simple_model();
        assert_eq!(m.reconstruct(&vec![0.0; m.mode_count()]).unwrap(), *m.mean());
        assert!(matches!(m.reconstruct(&[]), Err(ShapeModelError::WrongWeightCount { .. })));
    }

    #[test]
    fn reconstruct_along_one_mode() {
        let m = simple_model();
        let mut b = vec![0.0; m.mode_count()];
        let s = sqrt(m.eigenvalues()[0]);
        b[0] = s;
        let r = m.reconstruct(&b).unwrap();
        for (k, c) in r.coords().iter().enumerate() {
            assert!((c - (m.mean().coords()[k] + s * m.modes()[0][k])).abs() < 1e-14);
        }
    }

    #[test]
    fn pose_identity_scale_and_rotation() {
        let shape = ShapeVector::from_points(&[Vec3::new(2.0, 1.0, 1.0), Vec3::new(1.0, 1.0, 1.0), Vec3::ZERO]);
        let c = Vec3::new(1.0, 1.0, 1.0);
        let faces = [[0, 1, 2]];
        let same = apply_pose(&shape, &PoseParams::IDENTITY, &faces, c).unwrap();
        assert_eq!(same.vertices()[0], Vec3::new(2.0, 1.0, 1.0));

        let scaled = PoseParams { scale: 2.0, ..PoseParams::IDENTITY };
        assert_eq!(apply_pose(&shape, &scaled, &faces, c).unwrap().vertices()[0], Vec3::new(3.0, 1.0, 1.0));

        let turned = PoseParams { rotation: [0.0, 0.0, FRAC_PI_2], ..PoseParams::IDENTITY };
        let p = apply_pose(&shape, &turned, &faces, c).unwrap().vertices()[0];
        assert!((p - Vec3::new(1.0, 2.0, 1.0)).norm() < 1e-12);

        let moved = PoseParams { translation: Vec3::new(0.5, -1.0, 3.0), ..PoseParams::IDENTITY };
        let out = apply_pose(&shape, &moved, &faces, c).unwrap();
        for (a, b) in out.vertices().iter().zip(shape.points()) {
            assert_eq!(*a, b + Vec3::new(0.5, -1.0, 3.0));
        }

        let bad = PoseParams { scale: 0.0, ..PoseParams::IDENTITY };
        assert_eq!(apply_pose(&shape, &bad, &faces, c), Err(ShapeModelError::NonPositiveScale(0.0)));
    }

    #[test]
    fn instantiate_keeps_connectivity() {
        let m = simple_model();
        let mean = m.instantiate(&FitParams::identity(m.mode_count())).unwrap();
        assert_eq!(mean, m.mean_mesh());
        let params = FitParams {
            shape_weights: vec![0.3; m.mode_count()],
            pose: PoseParams {
                translation: Vec3::new(1.0, 2.0, 3.0),
                rotation: [0.1, -0.2, 0.3],
                scale: 1.1,
            },
        };
        let mesh = m.instantiate(&params).unwrap();
        assert_eq!(mesh.vertex_count(), m.point_count());
        assert_eq!(mesh.faces(), m.faces());
    }

    #[test]
    fn fit_params_vector_layout() {
        let p = FitParams {
            shape_weights: vec![1.0, 2.0],
            pose: PoseParams {
                translation: Vec3::new(3.0, 4.0, 5.0),
                rotation: [6.0, 7.0, 8.0],
                scale: 9.0,
            },
        };
        let v = p.to_vector();
        assert_eq!(v, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        assert_eq!(FitParams::from_vector(&v), p);
    }

    #[test]
    fn from_parts_checks_invariants() {
        let m = simple_model();
        let ok = ShapeModel::from_parts(
            m.mean().coords().to_vec(),
            m.modes().to_vec(),
            m.eigenvalues().to_vec(),
            m.faces().to_vec(),
            m.total_variance(),
        )
        .unwrap();
        assert_eq!(ok, m);
        let mut modes = m.modes().to_vec();
        modes[0][0] += 0.1;
        assert!(ShapeModel::from_parts(
            m.mean().coords().to_vec(),
            modes,
            m.eigenvalues().to_vec(),
            m.faces().to_vec(),
            m.total_variance(),
        )
        .is_err());
    }

    #[test]
    fn largest_entry_is_positive() {
        let mut v = [0.1, -0.9, 0.3];
        fix_sign(&mut v);
        assert_eq!(v, [-0.1, 0.9, -0.3]);
    }
}
