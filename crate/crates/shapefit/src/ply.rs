//! ASCII PLY 1.0 triangle meshes.
//!
//! The reader takes the `vertex` element's `x`, `y`, `z` properties and the
//! `face` element's index list; other properties and elements are skipped.
//! Faces must be triangles.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use shapefit_core::{TriMesh, Vec3};

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct PlyError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, PlyError> {
    Err(PlyError { line, message: message.into() })
}

#[derive(Debug)]
enum Property {
    Scalar(String),
    List(String),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

const SCALAR_TYPES: &[&str] = &[
    "char", "uchar", "short", "ushort", "int", "uint", "float", "double", "int8", "uint8", "int16", "uint16", "int32",
    "uint32", "float32", "float64",
];

fn parse_header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<Vec<Element>, PlyError> {
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        Some((n, _)) => return err(n, "missing 'ply' magic"),
        None => return err(1, "empty file"),
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut format_seen = false;
    for (n, line) in lines.by_ref() {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", "1.0"] => format_seen = true,
            ["format", other, ..] => return err(n, format!("unsupported format '{other}', only ascii 1.0 is read")),
            ["element", name, count] => {
                let count = count.parse().or_else(|_| err(n, format!("bad element count '{count}'")))?;
                elements.push(Element { name: name.to_string(), count, properties: Vec::new() });
            }
            ["property", "list", count_ty, index_ty, name] => {
                if !SCALAR_TYPES.contains(count_ty) || !SCALAR_TYPES.contains(index_ty) {
                    return err(n, "unknown list property type");
                }
                let Some(e) = elements.last_mut() else { return err(n, "property before any element") };
                e.properties.push(Property::List(name.to_string()));
            }
            ["property", ty, name] => {
                if !SCALAR_TYPES.contains(ty) {
                    return err(n, format!("unknown property type '{ty}'"));
                }
                let Some(e) = elements.last_mut() else { return err(n, "property before any element") };
                e.properties.push(Property::Scalar(name.to_string()));
            }
            ["end_header"] => {
                if !format_seen {
                    return err(n, "header has no format line");
                }
                return Ok(elements);
            }
            _ => return err(n, format!("unrecognised header line '{line}'")),
        }
    }
    err(0, "missing end_header")
}

/// Parses PLY text into a mesh.
pub fn parse_ply(text: &str) -> Result<TriMesh, PlyError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let elements = parse_header(&mut lines)?;
    let mut body = lines.filter(|(_, l)| !l.trim().is_empty());

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut last_line = 0;
    for element in &elements {
        let xyz = ["x", "y", "z"].map(|axis| {
            element.properties.iter().position(|p| matches!(p, Property::Scalar(n) if n == axis))
        });
        let index_list = element
            .properties
            .iter()
            .position(|p| matches!(p, Property::List(n) if n == "vertex_indices" || n == "vertex_index"));
        if element.name == "vertex" && xyz.iter().any(Option::is_none) {
            return err(last_line, "vertex element lacks x, y or z");
        }
        if element.name == "face" && index_list.is_none() {
            return err(last_line, "face element lacks vertex_indices");
        }
        for _ in 0..element.count {
            let Some((n, line)) = body.next() else {
                return err(last_line, format!("file ends inside element '{}'", element.name));
            };
            last_line = n;
            let values = parse_row(n, line, &element.properties)?;
            match element.name.as_str() {
                "vertex" => {
                    let c = xyz.map(|i| values[i.expect("checked")][0]);
                    vertices.push(Vec3::new(c[0], c[1], c[2]));
                }
                "face" => {
                    let idx = &values[index_list.expect("checked")];
                    if idx.len() != 3 {
                        return err(n, format!("face has {} vertices, only triangles are supported", idx.len()));
                    }
                    let mut tri = [0usize; 3];
                    for (t, v) in tri.iter_mut().zip(idx) {
                        if *v < 0.0 || v.fract() != 0.0 {
                            return err(n, format!("bad vertex index {v}"));
                        }
                        *t = *v as usize;
                    }
                    faces.push(tri);
                }
                _ => {}
            }
        }
    }
    if let Some((n, _)) = body.next() {
        return err(n, "unexpected data after the last element");
    }
    TriMesh::new(vertices, faces).or_else(|e| err(last_line, e.to_string()))
}

/// Values of one element row; scalars are one-element lists.
fn parse_row(n: usize, line: &str, properties: &[Property]) -> Result<Vec<Vec<f64>>, PlyError> {
    let mut tokens = line.split_whitespace();
    let number = |tokens: &mut std::str::SplitWhitespace| -> Result<f64, PlyError> {
        let Some(t) = tokens.next() else { return err(n, "row has too few values") };
        t.parse::<f64>().or_else(|_| err(n, format!("'{t}' is not a number")))
    };
    let mut out = Vec::with_capacity(properties.len());
    for p in properties {
        match p {
            Property::Scalar(_) => out.push(vec![number(&mut tokens)?]),
            Property::List(_) => {
                let count = number(&mut tokens)?;
                if count < 0.0 || count.fract() != 0.0 {
                    return err(n, format!("bad list length {count}"));
                }
                let list = (0..count as usize).map(|_| number(&mut tokens)).collect::<Result<_, _>>()?;
                out.push(list);
            }
        }
    }
    if tokens.next().is_some() {
        return err(n, "row has too many values");
    }
    Ok(out)
}

/// Renders `mesh` as ASCII PLY. Coordinates use the shortest decimal form
/// that reads back to the same `f64`.
pub fn to_ply_string(mesh: &TriMesh) -> String {
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "element vertex {}", mesh.vertex_count());
    s.push_str("property float x\nproperty float y\nproperty float z\n");
    let _ = writeln!(s, "element face {}", mesh.face_count());
    s.push_str("property list uchar int vertex_indices\nend_header\n");
    for v in mesh.vertices() {
        let _ = writeln!(s, "{} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}

pub fn read_ply(path: &Path) -> Result<TriMesh, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ply(&text).map_err(|e| Error::parse(path, e))
}

pub fn write_ply(mesh: &TriMesh, path: &Path) -> Result<(), Error> {
    fs::write(path, to_ply_string(mesh)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TETRA: &str = "ply
format ascii 1.0
comment unit tetrahedron
element vertex 4
property float x
property float y
property float z
property uchar red
element face 4
property list uchar int vertex_indices
end_header
0 0 0 255
1 0 0 255
0 1 0 255
0 0 1 255
3 0 2 1
3 0 1 3
3 0 3 2
3 1 2 3
";

    #[test]
    fn reads_and_skips_extra_properties() {
        let m = parse_ply(TETRA).unwrap();
        assert_eq!(m.vertex_count(), 4);
        assert_eq!(m.faces()[0], [0, 2, 1]);
        assert!((m.enclosed_volume() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn round_trip_is_exact() {
        let m = TriMesh::new(
            vec![Vec3::new(0.1, 1e-17, -3.25), Vec3::new(1.0 / 3.0, 2.0, 5e300), Vec3::new(-0.0, 7.0, 1.5)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let back = parse_ply(&to_ply_string(&m)).unwrap();
        assert_eq!(back, m);
        assert_eq!(to_ply_string(&back), to_ply_string(&m));
    }

    #[test]
    fn empty_mesh_round_trips() {
        let s = to_ply_string(&TriMesh::empty());
        assert!(parse_ply(&s).unwrap().is_empty());
    }

    #[test]
    fn errors_name_the_line() {
        let bad = TETRA.replace("0 1 0 255", "0 one 0 255");
        let e = parse_ply(&bad).unwrap_err();
        assert_eq!(e.line, 14);
        assert!(e.message.contains("one"));

        let quad = TETRA.replace("3 1 2 3", "4 1 2 3 0");
        assert!(parse_ply(&quad).unwrap_err().message.contains("triangles"));

        let truncated: String = TETRA.lines().take(16).map(|l| format!("{l}\n")).collect();
        assert!(parse_ply(&truncated).unwrap_err().message.contains("ends inside"));

        assert!(parse_ply("ply\nformat binary_little_endian 1.0\nend_header\n").is_err());
        assert!(parse_ply("solid x\n").is_err());
        let out_of_range = TETRA.replace("3 1 2 3", "3 1 2 9");
        assert!(parse_ply(&out_of_range).is_err());
    }
}
