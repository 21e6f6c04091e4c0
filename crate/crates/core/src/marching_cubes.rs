//! Marching cubes for binary masks.
//!
//! Cubes join the centres of 2x2x2 voxel blocks. The foreground field is 1
//! inside the mask and 0 outside, so the 0.5 isosurface crosses every cut
//! cube edge at its midpoint.
//!
//! # Case table convention
//!
//! Cube corner `c` (0..8) sits at offset `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`
//! and bit `c` of the case index is set when that corner is foreground. The
//! 256-entry table is derived once from the face rules rather than typed
//! in:
//!
//! * On every cube face the corners are walked counter-clockwise about the
//!   outward face normal. A cut edge walked from foreground to background is
//!   an *exit*, the reverse an *entry*; each surface segment on the face runs
//!   from an entry to the following exit.
//! * On an ambiguous face (two diagonal foreground corners) the foreground
//!   corners are separated. This is the same rule on both sides of the
//!   face, so neighbouring cubes always agree and the surface is watertight.
//!   It amounts to 6-connected foreground.
//! * Segments chain into closed loops, each loop is one polygon. Polygons
//!   are fanned from a vertex whose diagonals stay off the cube faces; if no
//!   such vertex exists an extra centre vertex is added.
//!
//! Triangles are wound counter-clockwise seen from the background side, so
//! normals point out of the foreground. The grid is implicitly padded with
//! one layer of background so surfaces of border-touching masks close.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::math::Vec3;
use crate::mesh::TriMesh;
use crate::volume::BinaryVolume;

/// Cube edges as (corner, axis); the other corner is `corner | (1 << axis)`.
const EDGES: [(u8, u8); 12] = [
    (0, 0),
    (2, 0),
    (4, 0),
    (6, 0),
    (0, 1),
    (1, 1),
    (4, 1),
    (5, 1),
    (0, 2),
    (1, 2),
    (2, 2),
    (3, 2),
];

fn corner_bit(corner: u8, axis: u8) -> u8 {
    (corner >> axis) & 1
}

fn edge_between(a: u8, b: u8) -> usize {
    let diff = a ^ b;
    let axis = diff.trailing_zeros() as u8;
    let low = a.min(b);
    EDGES
        .iter()
        .position(|&(c, ax)| c == low && ax == axis)
        .expect("corners are cube-adjacent")
}

/// The two cube faces an edge lies on, as (axis, side).
fn edge_faces(edge: usize) -> [(u8, u8); 2] {
    let (c, ax) = EDGES[edge];
    let u = (ax + 1) % 3;
    let v = (ax + 2) % 3;
    [(u, corner_bit(c, u)), (v, corner_bit(c, v))]
}

fn edges_share_face(a: usize, b: usize) -> bool {
    let fa = edge_faces(a);
    edge_faces(b).iter().any(|f| fa.contains(f))
}

/// Corners of face (axis, side), counter-clockwise about the outward normal.
fn face_corners(axis: u8, side: u8) -> [u8; 4] {
    let u = (axis + 1) % 3;
    let v = (axis + 2) % 3;
    let base = side << axis;
    let ring = [base, base | (1 << u), base | (1 << u) | (1 << v), base | (1 << v)];
    if side == 1 {
        ring
    } else {
        [ring[0], ring[3], ring[2], ring[1]]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Polygon {
    /// Triangles over cube edge ids.
    Fan(Vec<[usize; 3]>),
    /// Loop of cube edge ids, triangulated around an added centre vertex.
    Centered(Vec<usize>),
}

/// Per-case polygons for all 256 corner configurations.
pub struct CaseTable {
    cases: Vec<Vec<Polygon>>,
}

impl CaseTable {
    pub fn new() -> Self {
        Self {
            cases: (0..=255u8).map(case_polygons).collect(),
        }
    }

    /// Triangles of a case expressed as cube edge ids; `None` if the case
    /// needs a centre vertex.
    pub fn triangles(&self, case: u8) -> Option<Vec<[usize; 3]>> {
        let mut out = Vec::new();
        for p in &self.cases[case as usize] {
            match p {
                Polygon::Fan(t) => out.extend_from_slice(t),
                Polygon::Centered(_) => return None,
            }
        }
        Some(out)
    }

    /// Surface loops of a case as cube edge ids, in winding order.
    pub fn loops(&self, case: u8) -> Vec<Vec<usize>> {
        self.cases[case as usize]
            .iter()
            .map(|p| match p {
                Polygon::Centered(l) => l.clone(),
                Polygon::Fan(tris) => {
                    // Fan triangles share tris[0][0]; recover the loop.
                    let mut l = alloc::vec![tris[0][0], tris[0][1]];
                    l.extend(tris.iter().map(|t| t[2]));
                    l
                }
            })
            .collect()
    }
}

impl Default for CaseTable {
    fn default() -> Self {
        Self::new()
    }
}

fn case_polygons(case: u8) -> Vec<Polygon> {
    let inside = |c: u8| case & (1 << c) != 0;
    // next[e] = the edge following e along the surface loop.
    let mut next: [Option<usize>; 12] = [None; 12];
    for axis in 0..3u8 {
        for side in 0..2u8 {
            let ring = face_corners(axis, side);
            // (position along walk, edge, is_entry)
            let mut cuts: Vec<(usize, bool)> = Vec::new();
            for k in 0..4 {
                let (a, b) = (ring[k], ring[(k + 1) % 4]);
                if inside(a) != inside(b) {
                    cuts.push((edge_between(a, b), inside(b)));
                }
            }
            for (n, &(edge, is_entry)) in cuts.iter().enumerate() {
                if is_entry {
                    let (exit, _) = cuts[(n + 1) % cuts.len()];
                    next[edge] = Some(exit);
                }
            }
        }
    }
    let mut seen = [false; 12];
    let mut polygons = Vec::new();
    for start in 0..12 {
        if seen[start] || next[start].is_none() {
            continue;
        }
        let mut ring = Vec::new();
        let mut e = start;
        while !seen[e] {
            seen[e] = true;
            ring.push(e);
            e = next[e].expect("surface loops are closed");
        }
        polygons.push(triangulate(ring));
    }
    polygons
}

fn triangulate(ring: Vec<usize>) -> Polygon {
    let n = ring.len();
    if n == 3 {
        return Polygon::Fan(alloc::vec![[ring[0], ring[1], ring[2]]]);
    }
    for apex in 0..n {
        let ok = (2..n - 1).all(|off| !edges_share_face(ring[apex], ring[(apex + off) % n]));
        if ok {
            let tris = (1..n - 1)
                .map(|off| [ring[apex], ring[(apex + off) % n], ring[(apex + off + 1) % n]])
                .collect();
            return Polygon::Fan(tris);
        }
    }
    Polygon::Centered(ring)
}

/// Extracts the boundary surface of the foreground as a triangle mesh in
/// world coordinates. An all-background volume gives an empty mesh.
pub fn marching_cubes(volume: &BinaryVolume) -> TriMesh {
    marching_cubes_with(volume, &CaseTable::new())
}

pub fn marching_cubes_with(volume: &BinaryVolume, table: &CaseTable) -> TriMesh {
    let grid = *volume.grid();
    let [nx, ny, nz] = grid.dims.map(|d| d as isize);
    let padded = [nx + 2, ny + 2, nz + 2];
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut edge_vertex: BTreeMap<(isize, u8), usize> = BTreeMap::new();

    let position = |p: [isize; 3], axis: u8| {
        let mut c = [p[0] as f64, p[1] as f64, p[2] as f64];
        c[axis as usize] += 0.5;
        Vec3::new(
            grid.origin[0] + c[0] * grid.spacing[0],
            grid.origin[1] + c[1] * grid.spacing[1],
            grid.origin[2] + c[2] * grid.spacing[2],
        )
    };

    for k in -1..nz {
        for j in -1..ny {
            for i in -1..nx {
                let mut case = 0u8;
                for c in 0..8u8 {
                    let (di, dj, dk) = (
                        corner_bit(c, 0) as isize,
                        corner_bit(c, 1) as isize,
                        corner_bit(c, 2) as isize,
                    );
                    if volume.get_padded(i + di, j + dj, k + dk) {
                        case |= 1 << c;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                let mut vertex_of = |edge: usize, vertices: &mut Vec<Vec3>| -> usize {
                    let (c, axis) = EDGES[edge];
                    let p = [
                        i + corner_bit(c, 0) as isize,
                        j + corner_bit(c, 1) as isize,
                        k + corner_bit(c, 2) as isize,
                    ];
                    let key = (p[0] + 1) + padded[0] * ((p[1] + 1) + padded[1] * (p[2] + 1));
                    *edge_vertex.entry((key, axis)).or_insert_with(|| {
                        vertices.push(position(p, axis));
                        vertices.len() - 1
                    })
                };
                for polygon in &table.cases[case as usize] {
                    match polygon {
                        Polygon::Fan(tris) => {
                            for t in tris {
                                faces.push(t.map(|e| vertex_of(e, &mut vertices)));
                            }
                        }
                        Polygon::Centered(ring) => {
                            let ids: Vec<usize> = ring.iter().map(|&e| vertex_of(e, &mut vertices)).collect();
                            let center = ids.iter().fold(Vec3::ZERO, |acc, &v| acc + vertices[v])
                                / ids.len() as f64;
                            vertices.push(center);
                            let cid = vertices.len() - 1;
                            for n in 0..ids.len() {
                                faces.push([cid, ids[n], ids[(n + 1) % ids.len()]]);
                            }
                        }
                    }
                }
            }
        }
    }
    TriMesh::with_trusted_faces(vertices, faces).expect("grid positions are finite")
}
