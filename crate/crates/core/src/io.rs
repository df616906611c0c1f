//! Field dumps: a JSON header plus raw little-endian `f64` node values.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Symmetry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpHeader {
    pub dim: usize,
    pub resolution: usize,
    pub extent: f64,
    pub symmetry: Symmetry,
    pub value_count: usize,
}

impl DumpHeader {
    pub fn for_field(f: &GridFunction) -> Self {
        let g = f.grid();
        Self {
            dim: g.dim(),
            resolution: g.resolution(),
            extent: g.extent(),
            symmetry: f.symmetry(),
            value_count: g.node_count(),
        }
    }

    /// The grid described by the header, checked against `value_count`.
    pub fn grid(&self) -> Result<Grid> {
        let grid = Grid::new(self.dim, self.resolution, self.extent)?;
        if grid.node_count() != self.value_count {
            return Err(Error::parse(format!(
                "value_count {} does not match a {}D grid of resolution {} ({} nodes)",
                self.value_count,
                self.dim,
                self.resolution,
                grid.node_count()
            )));
        }
        Ok(grid)
    }
}

pub fn parse_header(text: &str) -> Result<DumpHeader> {
    let mut de = serde_json::Deserializer::from_str(text);
    let header: DumpHeader = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| Error::parse(format!("field header: {e}")))?;
    de.end().map_err(|e| Error::parse(format!("field header: {e}")))?;
    header.grid()?;
    Ok(header)
}

pub fn encode_values(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_values(bytes: &[u8], expected: usize) -> Result<Vec<f64>> {
    if bytes.len() != expected.saturating_mul(8) {
        return Err(Error::parse(format!(
            "binary payload has {} bytes, expected {}",
            bytes.len(),
            expected.saturating_mul(8)
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// Rebuilds a field from header text and payload bytes.
pub fn decode_field(header: &str, bytes: &[u8]) -> Result<GridFunction> {
    let header = parse_header(header)?;
    let grid = header.grid()?;
    let values = decode_values(bytes, header.value_count)?;
    GridFunction::from_values(grid, values)
}

/// Header path for a dump stem: `<stem>.json`.
pub fn header_path(stem: &Path) -> PathBuf {
    stem.with_extension("json")
}

/// Payload path for a dump stem: `<stem>.bin`.
pub fn payload_path(stem: &Path) -> PathBuf {
    stem.with_extension("bin")
}

pub fn write_field(f: &GridFunction, stem: &Path) -> Result<()> {
    let header = serde_json::to_string_pretty(&DumpHeader::for_field(f))
        .map_err(|e| Error::parse(e.to_string()))?;
    fs::write(header_path(stem), header + "\n")?;
    fs::write(payload_path(stem), encode_values(f.values()))?;
    Ok(())
}

/// Reads a dump given its stem or either of its two file paths.
pub fn read_field(path: &Path) -> Result<GridFunction> {
    let header = fs::read_to_string(header_path(path))?;
    let bytes = fs::read(payload_path(path))?;
    decode_field(&header, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::regular32;
    use crate::grid::make_grid;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = make_grid(3, 17, 0.7).unwrap();
        let u = regular32(3, 1.3, &[0.6, 0.8]).unwrap().sample(&g).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("u");
        write_field(&u, &stem).unwrap();
        let back = read_field(&stem.with_extension("bin")).unwrap();
        assert_eq!(back.grid(), u.grid());
        assert!(back.values().iter().zip(u.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn header_mismatch_rejected() {
        let h = r#"{"dim":2,"resolution":17,"extent":1.0,"symmetry":"even","value_count":10}"#;
        assert!(parse_header(h).is_err());
        let h = r#"{"dim":2,"resolution":17,"extent":1.0,"symmetry":"even","value_count":153}"#;
        let header = parse_header(h).unwrap();
        assert!(decode_values(&[0u8; 7], header.value_count).is_err());
        assert!(parse_header(r#"{"dim":2}"#).is_err());
    }

    #[test]
    fn non_finite_payload_rejected() {
        let h = r#"{"dim":2,"resolution":17,"extent":1.0,"symmetry":"even","value_count":153}"#;
        let mut values = vec![0.0; 153];
        values[5] = f64::NAN;
        assert!(decode_field(h, &encode_values(&values)).is_err());
    }
}
