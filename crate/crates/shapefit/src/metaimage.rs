//! MetaImage (`.mhd` header + `.raw` data) binary masks.
//!
//! Only uncompressed `MET_UCHAR` 3-D images are supported. Any nonzero
//! byte is foreground. Data is stored x-fastest, then y, then z.

use std::fs;
use std::path::{Path, PathBuf};

use shapefit_core::{BinaryVolume, GridSpec};

use crate::error::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct MetaHeader {
    pub grid: GridSpec,
    pub data_file: String,
}

fn parse_list<const N: usize>(key: &str, value: &str) -> Result<[f64; N], String> {
    let parts: Vec<f64> = value
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| format!("{key}: '{t}' is not a number")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|p: Vec<f64>| format!("{key}: expected {N} values, found {}", p.len()))
}

/// Parses a MetaImage header. Unknown keys are ignored.
pub fn parse_header(text: &str) -> Result<MetaHeader, String> {
    let mut dims = None;
    let mut spacing = [1.0; 3];
    let mut origin = [0.0; 3];
    let mut data_file = None;
    let mut element_type = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected 'Key = Value'", n + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "ObjectType" if value != "Image" => return Err(format!("ObjectType '{value}' is not Image")),
            "NDims" if value != "3" => return Err(format!("NDims = {value}; only 3-D images are supported")),
            "DimSize" => {
                let d = parse_list::<3>(key, value)?;
                if d.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
                    return Err(format!("DimSize '{value}' must be positive integers"));
                }
                dims = Some(d.map(|v| v as usize));
            }
            "ElementSpacing" | "ElementSize" => spacing = parse_list::<3>(key, value)?,
            "Offset" | "Origin" | "Position" => origin = parse_list::<3>(key, value)?,
            "ElementType" => element_type = Some(value.to_string()),
            "ElementNumberOfChannels" if value != "1" => return Err("multi-channel images are not supported".into()),
            "CompressedData" if value.eq_ignore_ascii_case("true") => {
                return Err("compressed data is not supported".into())
            }
            "ElementDataFile" => data_file = Some(value.to_string()),
            _ => {}
        }
    }
    match element_type.as_deref() {
        Some("MET_UCHAR") => {}
        Some(other) => return Err(format!("ElementType {other} is not supported; expected MET_UCHAR")),
        None => return Err("missing ElementType".into()),
    }
    let dims = dims.ok_or("missing DimSize")?;
    let data_file = data_file.ok_or("missing ElementDataFile")?;
    if data_file == "LOCAL" || data_file.starts_with("LIST") || data_file.contains('%') {
        return Err(format!("ElementDataFile '{data_file}' is not supported; expected a single raw file"));
    }
    let grid = GridSpec::new(dims, spacing, origin).map_err(|e| e.to_string())?;
    Ok(MetaHeader { grid, data_file })
}

pub fn header_string(grid: &GridSpec, data_file: &str) -> String {
    let [nx, ny, nz] = grid.dims;
    let [sx, sy, sz] = grid.spacing;
    let [ox, oy, oz] = grid.origin;
    format!(
        "ObjectType = Image\nNDims = 3\nBinaryData = True\nBinaryDataByteOrderMSB = False\nCompressedData = False\n\
         Offset = {ox} {oy} {oz}\nElementSpacing = {sx} {sy} {sz}\nDimSize = {nx} {ny} {nz}\n\
         ElementType = MET_UCHAR\nElementDataFile = {data_file}\n"
    )
}

/// Reads a mask from a `.mhd` header and the raw file it names, which is
/// resolved relative to the header's directory.
pub fn read_mhd(path: &Path) -> Result<BinaryVolume, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = parse_header(&text).map_err(|m| Error::parse(path, m))?;
    let raw_path = path.parent().unwrap_or(Path::new("")).join(&header.data_file);
    let bytes = fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    let expected = header.grid.voxel_count();
    if bytes.len() != expected {
        return Err(Error::parse(
            &raw_path,
            format!("holds {} bytes but the header declares {expected} voxels", bytes.len()),
        ));
    }
    let data = bytes.iter().map(|&b| b != 0).collect();
    BinaryVolume::new(header.grid, data).map_err(|e| Error::parse(path, e))
}

/// Writes `volume` as `<path>` plus a `.raw` file with the same stem next
/// to it. Returns the raw file's path.
pub fn write_mhd(volume: &BinaryVolume, path: &Path) -> Result<PathBuf, Error> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Usage(format!("{}: not a usable file name", path.display())))?;
    let raw_name = format!("{stem}.raw");
    let raw_path = path.with_file_name(&raw_name);
    let bytes: Vec<u8> = volume.data().iter().map(|&b| b as u8).collect();
    fs::write(&raw_path, bytes).map_err(|e| Error::io(&raw_path, e))?;
    fs::write(path, header_string(volume.grid(), &raw_name)).map_err(|e| Error::io(path, e))?;
    Ok(raw_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::new([3, 4, 5], [0.5, 1.0, 2.0], [-1.25, 0.0, 10.0]).unwrap();
        let mut v = BinaryVolume::zeros(grid).unwrap();
        v.set(0, 0, 0, true);
        v.set(2, 3, 4, true);
        v.set(1, 2, 3, true);
        let path = dir.path().join("mask.mhd");
        let raw = write_mhd(&v, &path).unwrap();
        assert_eq!(raw.file_name().unwrap(), "mask.raw");
        let back = read_mhd(&path).unwrap();
        assert_eq!(back, v);
        let bytes = fs::read(&raw).unwrap();
        assert_eq!(bytes[grid.index(2, 3, 4)], 1);
        assert_eq!(bytes.len(), 60);
    }

    #[test]
    fn nonzero_bytes_are_foreground() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::new([2, 1, 1], [1.0; 3], [0.0; 3]).unwrap();
        fs::write(dir.path().join("a.raw"), [0u8, 200]).unwrap();
        fs::write(dir.path().join("a.mhd"), header_string(&grid, "a.raw")).unwrap();
        let v = read_mhd(&dir.path().join("a.mhd")).unwrap();
        assert_eq!(v.data(), &[false, true]);
    }

    #[test]
    fn size_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::new([2, 2, 2], [1.0; 3], [0.0; 3]).unwrap();
        fs::write(dir.path().join("a.raw"), [0u8; 7]).unwrap();
        fs::write(dir.path().join("a.mhd"), header_string(&grid, "a.raw")).unwrap();
        let e = read_mhd(&dir.path().join("a.mhd")).unwrap_err().to_string();
        assert!(e.contains("7 bytes"), "{e}");
    }

    #[test]
    fn header_checks() {
        let ok = "ObjectType = Image\nNDims = 3\nDimSize = 2 3 4\nElementType = MET_UCHAR\nElementDataFile = x.raw\n";
        let h = parse_header(ok).unwrap();
        assert_eq!(h.grid.dims, [2, 3, 4]);
        assert_eq!(h.grid.spacing, [1.0; 3]);
        assert!(parse_header(&ok.replace("MET_UCHAR", "MET_FLOAT")).is_err());
        assert!(parse_header(&ok.replace("NDims = 3", "NDims = 2")).is_err());
        assert!(parse_header(&ok.replace("2 3 4", "2 3")).is_err());
        assert!(parse_header(&ok.replace("x.raw", "LOCAL")).is_err());
        assert!(parse_header(&format!("{ok}CompressedData = True\n")).is_err());
    }
}
