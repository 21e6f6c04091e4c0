//! Triangle meshes, edge topology and the geometric Laplacian roughness
//! measure.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::Vec3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("face {face} references vertex {index}, but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex index")]
    DegenerateFace { face: usize },
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteVertex { vertex: usize },
    #[error("vertex {vertex} has no neighbours")]
    IsolatedVertex { vertex: usize },
    #[error("vertex {vertex} coincides with its neighbour {neighbor}")]
    CoincidentNeighbor { vertex: usize, neighbor: usize },
    #[error("vertex {vertex} does not exist")]
    NoSuchVertex { vertex: usize },
}

/// A triangulated surface. Vertex order is significant: it carries the
/// point correspondence between shapes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
}

/// Checks face indices against a vertex count.
pub fn validate_faces(faces: &[[usize; 3]], vertex_count: usize) -> Result<(), MeshError> {
    for (fi, f) in faces.iter().enumerate() {
        for &index in f {
            if index >= vertex_count {
                return Err(MeshError::IndexOutOfRange {
                    face: fi,
                    index,
                    vertex_count,
                });
            }
        }
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            return Err(MeshError::DegenerateFace { face: fi });
        }
    }
    Ok(())
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if let Some(vertex) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(MeshError::NonFiniteVertex { vertex });
        }
        validate_faces(&faces, vertices.len())?;
        Ok(Self { vertices, faces })
    }

    /// Builds a mesh whose faces are already known to be valid for
    /// `vertices.len()` vertices. Only finiteness is rechecked.
    pub(crate) fn with_trusted_faces(
        vertices: Vec<Vec3>,
        faces: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        if let Some(vertex) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(MeshError::NonFiniteVertex { vertex });
        }
        debug_assert!(validate_faces(&faces, vertices.len()).is_ok());
        Ok(Self { vertices, faces })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.faces.is_empty()
    }

    pub fn into_parts(self) -> (Vec<Vec3>, Vec<[usize; 3]>) {
        (self.vertices, self.faces)
    }

    pub fn translated(&self, offset: Vec3) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|&v| v + offset).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Scales all coordinates about the origin.
    pub fn scaled(&self, factor: f64) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|&v| v * factor).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Mean of the vertex positions (zero for an empty mesh).
    pub fn centroid(&self) -> Vec3 {
        if self.vertices.is_empty() {
            return Vec3::ZERO;
        }
        let sum = self.vertices.iter().fold(Vec3::ZERO, |acc, &v| acc + v);
        sum / self.vertices.len() as f64
    }

    /// Axis-aligned bounds, `None` for a mesh without vertices.
    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(
            self.vertices
                .iter()
                .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))),
        )
    }

    /// Signed enclosed volume by the divergence theorem. Positive for a
    /// closed surface whose faces are wound counter-clockwise seen from
    /// outside.
    pub fn enclosed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i]);
                a.dot(b.cross(c))
            })
            .sum::<f64>()
            / 6.0
    }

    /// Sum of triangle areas.
    pub fn surface_area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i]);
                0.5 * (b - a).cross(c - a).norm()
            })
            .sum()
    }
}

/// Edge and connectivity summary of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeshTopologyReport {
    /// Every undirected edge borders exactly two faces.
    pub is_closed: bool,
    /// No edge borders more than two faces and every shared edge is
    /// traversed in opposite directions by its two faces.
    pub is_edge_manifold: bool,
    pub euler_characteristic: i64,
    pub connected_components: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub face_count: usize,
}

struct EdgeUse {
    lo: usize,
    hi: usize,
    forward: bool,
}

/// Undirected edges with their face counts, sorted by (lo, hi). The bool
/// tracks whether each edge has consistent opposite orientations.
fn edge_table(faces: &[[usize; 3]]) -> Vec<(usize, usize, usize, bool)> {
    let mut uses: Vec<EdgeUse> = Vec::with_capacity(faces.len() * 3);
    for f in faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            uses.push(EdgeUse {
                lo: a.min(b),
                hi: a.max(b),
                forward: a < b,
            });
        }
    }
    uses.sort_unstable_by_key(|e| (e.lo, e.hi));
    let mut out = Vec::new();
    let mut i = 0;
    while i < uses.len() {
        let mut j = i;
        let mut fwd = 0usize;
        while j < uses.len() && uses[j].lo == uses[i].lo && uses[j].hi == uses[i].hi {
            if uses[j].forward {
                fwd += 1;
            }
            j += 1;
        }
        let count = j - i;
        let oriented = count == 1 || (count == 2 && fwd == 1);
        out.push((uses[i].lo, uses[i].hi, count, oriented));
        i = j;
    }
    out
}

/// Whether every edge of `faces` is shared by exactly two faces.
pub fn faces_are_closed(faces: &[[usize; 3]]) -> bool {
    edge_table(faces).iter().all(|e| e.2 == 2)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

pub fn topology_report(mesh: &TriMesh) -> MeshTopologyReport {
    let edges = edge_table(&mesh.faces);
    let v = mesh.vertex_count();
    let mut parent: Vec<usize> = (0..v).collect();
    for &(a, b, _, _) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let connected_components = (0..v).filter(|&i| find(&mut parent, i) == i).count();
    MeshTopologyReport {
        is_closed: edges.iter().all(|e| e.2 == 2),
        is_edge_manifold: edges.iter().all(|e| e.2 <= 2 && e.3),
        euler_characteristic: v as i64 - edges.len() as i64 + mesh.face_count() as i64,
        connected_components,
        vertex_count: v,
        edge_count: edges.len(),
        face_count: mesh.face_count(),
    }
}

/// Vertex 1-rings: the vertices sharing an edge with each vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    neighbors: Vec<Vec<usize>>,
}

impl Adjacency {
    pub fn from_mesh(mesh: &TriMesh) -> Self {
        Self::from_faces(mesh.vertex_count(), mesh.faces())
    }

    pub fn from_faces(vertex_count: usize, faces: &[[usize; 3]]) -> Self {
        let edges = faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]);
        Self::from_edges(vertex_count, edges)
    }

    /// Builds the adjacency of an arbitrary undirected graph.
    pub fn from_edges(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); vertex_count];
        for (a, b) in edges {
            if a != b {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for n in &mut neighbors {
            n.sort_unstable();
            n.dedup();
        }
        Self { neighbors }
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Geometric Laplacian at `v`: the offset of `v` from the inverse-distance
/// weighted average of its neighbours.
pub fn vertex_gl_with(positions: &[Vec3], adjacency: &Adjacency, v: usize) -> Result<Vec3, MeshError> {
    if v >= positions.len() || v >= adjacency.len() {
        return Err(MeshError::NoSuchVertex { vertex: v });
    }
    let p = positions[v];
    let ring = adjacency.neighbors(v);
    if ring.is_empty() {
        return Err(MeshError::IsolatedVertex { vertex: v });
    }
    let mut weighted = Vec3::ZERO;
    let mut total = 0.0;
    for &n in ring {
        let q = positions[n];
        let dist = (q - p).norm();
        if dist == 0.0 {
            return Err(MeshError::CoincidentNeighbor { vertex: v, neighbor: n });
        }
        let w = 1.0 / dist;
        weighted += q * w;
        total += w;
    }
    Ok(p - weighted / total)
}

pub fn vertex_gl(mesh: &TriMesh, v: usize) -> Result<Vec3, MeshError> {
    if v >= mesh.vertex_count() {
        return Err(MeshError::NoSuchVertex { vertex: v });
    }
    let edges = mesh
        .faces
        .iter()
        .filter(|f| f.contains(&v))
        .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]);
    let adjacency = Adjacency::from_edges(mesh.vertex_count(), edges);
    vertex_gl_with(&mesh.vertices, &adjacency, v)
}

/// Sum of per-vertex GL norms over a graph.
pub fn surface_gl_with(positions: &[Vec3], adjacency: &Adjacency) -> Result<f64, MeshError> {
    (0..positions.len()).try_fold(0.0, |acc, v| Ok(acc + vertex_gl_with(positions, adjacency, v)?.norm()))
}

/// Whole-surface roughness: the sum over all vertices of `|GL(v)|`. Not
/// normalised by vertex count, so values are only comparable between
/// meshes of similar resolution.
pub fn surface_gl(mesh: &TriMesh) -> Result<f64, MeshError> {
    surface_gl_with(&mesh.vertices, &Adjacency::from_mesh(mesh))
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_invalid_faces() {
        let v = vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        assert_eq!(
            TriMesh::new(v.clone(), vec![[0, 1, 5]]),
            Err(MeshError::IndexOutOfRange { face: 0, index: 5, vertex_count: 3 })
        );
        assert_eq!(TriMesh::new(v.clone(), vec![[0, 1, 1]]), Err(MeshError::DegenerateFace { face: 0 }));
        let mut bad = v;
        bad[1].y = f64::NAN;
        assert_eq!(TriMesh::new(bad, vec![]), Err(MeshError::NonFiniteVertex { vertex: 1 }));
    }

    #[test]
    fn single_triangle_topology() {
        let m = TriMesh::new(
            vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let r = topology_report(&m);
        assert!(!r.is_closed);
        assert!(r.is_edge_manifold);
        assert_eq!(r.euler_characteristic, 1);
        assert_eq!(r.connected_components, 1);
    }

    #[test]
    fn octahedron_topology() {
        let r = topology_report(&octahedron());
        assert!(r.is_closed && r.is_edge_manifold);
        assert_eq!((r.vertex_count, r.edge_count, r.face_count), (6, 12, 8));
        assert_eq!(r.euler_characteristic, 2);
        assert_eq!(r.connected_components, 1);
    }

    #[test]
    fn two_octahedra_are_additive() {
        let a = octahedron();
        let b = a.translated(Vec3::new(5.0, 0.0, 0.0));
        let mut v = a.vertices().to_vec();
        v.extend_from_slice(b.vertices());
        let mut f = a.faces().to_vec();
        f.extend(b.faces().iter().map(|t| t.map(|i| i + 6)));
        let r = topology_report(&TriMesh::new(v, f).unwrap());
        assert_eq!(r.connected_components, 2);
        assert_eq!(r.euler_characteristic, 4);
        assert!(r.is_closed);
    }

    #[test]
    fn flipped_face_is_not_edge_manifold() {
        let mut f = octahedron().faces().to_vec();
        f[0] = [0, 4, 2];
        let r = topology_report(&TriMesh::new(octahedron().vertices().to_vec(), f).unwrap());
        assert!(r.is_closed);
        assert!(!r.is_edge_manifold);
    }

    #[test]
    fn cube_volume_and_orientation() {
        let c = cube(0.0, 2.0);
        assert!((c.enclosed_volume() - 8.0).abs() < 1e-12);
        assert!((c.surface_area() - 24.0).abs() < 1e-12);
        let r = topology_report(&c);
        assert!(r.is_closed && r.is_edge_manifold);
        assert_eq!(r.euler_characteristic, 2);
    }

    fn star(center: Vec3) -> (Vec<Vec3>, Adjacency) {
        let p = vec![
            center,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
        ];
        let adj = Adjacency::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]);
        (p, adj)
    }

    #[test]
    fn gl_at_weighted_average_is_zero() {
        let (p, adj) = star(Vec3::ZERO);
        assert_eq!(vertex_gl_with(&p, &adj, 0).unwrap(), Vec3::ZERO);
    }

    #[test]
    fn gl_raised_apex() {
        // All four distances are sqrt(2): the weighted average is the origin.
        let (p, adj) = star(Vec3::new(0.0, 0.0, 1.0));
        let gl = vertex_gl_with(&p, &adj, 0).unwrap();
        assert!((gl - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn gl_single_neighbor_is_difference() {
        let p = vec![Vec3::new(0.3, -2.0, 1.5), Vec3::new(4.0, 1.0, -1.0)];
        let adj = Adjacency::from_edges(2, [(0, 1)]);
        assert_eq!(vertex_gl_with(&p, &adj, 0).unwrap(), p[0] - p[1]);
    }

    #[test]
    fn surface_gl_of_two_vertex_graph() {
        let p = vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)];
        let adj = Adjacency::from_edges(2, [(0, 1)]);
        assert_eq!(surface_gl_with(&p, &adj).unwrap(), 2.0);
    }

    #[test]
    fn gl_errors_name_the_vertex() {
        let p = vec![Vec3::ZERO, Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)];
        let adj = Adjacency::from_edges(3, [(0, 1)]);
        assert_eq!(
            vertex_gl_with(&p, &adj, 0),
            Err(MeshError::CoincidentNeighbor { vertex: 0, neighbor: 1 })
        );
        assert_eq!(vertex_gl_with(&p, &adj, 2), Err(MeshError::IsolatedVertex { vertex: 2 }));
        assert_eq!(surface_gl_with(&p, &adj), Err(MeshError::CoincidentNeighbor { vertex: 0, neighbor: 1 }));
    }

    #[test]
    fn vertex_gl_matches_adjacency_route() {
        let m = octahedron().translated(Vec3::new(0.0, 0.0, 0.25));
        let adj = Adjacency::from_mesh(&m);
        for v in 0..m.vertex_count() {
            assert_eq!(vertex_gl(&m, v).unwrap(), vertex_gl_with(m.vertices(), &adj, v).unwrap());
        }
        // Regular octahedron centred at the origin: each GL points radially.
        let gl = surface_gl(&octahedron()).unwrap();
        assert!((gl - 6.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn gl_is_nonnegative_and_translation_invariant(
            jitter in proptest::collection::vec(-0.3f64..0.3, 18),
            offset in proptest::array::uniform3(-100.0f64..100.0),
        ) {
            let base = octahedron();
            let v: Vec<Vec3> = base
                .vertices()
                .iter()
                .enumerate()
                .map(|(i, &p)| p + Vec3::new(jitter[3 * i], jitter[3 * i + 1], jitter[3 * i + 2]))
                .collect();
            let m = TriMesh::new(v, base.faces().to_vec()).unwrap();
            let gl = surface_gl(&m).unwrap();
            prop_assert!(gl >= 0.0);
            let moved = surface_gl(&m.translated(Vec3::from_array(offset))).unwrap();
            prop_assert!((gl - moved).abs() <= 1e-9 * (1.0 + gl));
        }
    }
}
