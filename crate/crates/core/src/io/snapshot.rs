//! Binary snapshots: one UTF-8 JSON header line followed by little-endian
//! `f64` payload, fields concatenated in header order.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub schema: u32,
    pub kind: String,
    pub n: usize,
    pub box_len: f64,
    pub fields: Vec<String>,
    pub time: f64,
    pub meta: BTreeMap<String, f64>,
    pub byte_order: String,
}

impl SnapshotHeader {
    pub fn new(kind: &str, n: usize, box_len: f64, fields: &[&str], time: f64) -> Self {
        SnapshotHeader {
            schema: SCHEMA_VERSION,
            kind: kind.to_string(),
            n,
            box_len,
            fields: fields.iter().map(|s| s.to_string()).collect(),
            time,
            meta: BTreeMap::new(),
            byte_order: "little".to_string(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: f64) -> Self {
        self.meta.insert(key.to_string(), value);
        self
    }

    fn samples_per_field(&self) -> usize {
        self.n * self.n * self.n
    }
}

/// A header plus one sample array per named field.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub data: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn new(header: SnapshotHeader, data: Vec<Vec<f64>>) -> Result<Self> {
        if data.len() != header.fields.len() {
            return Err(Error::Precondition(format!(
                "snapshot header names {} fields, got {}",
                header.fields.len(),
                data.len()
            )));
        }
        let len = header.samples_per_field();
        if let Some(bad) = data.iter().position(|d| d.len() != len) {
            return Err(Error::Precondition(format!(
                "snapshot field `{}` has {} samples, expected {len}",
                header.fields[bad],
                data[bad].len()
            )));
        }
        Ok(Snapshot { header, data })
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.header
            .fields
            .iter()
            .position(|f| f == name)
            .map(|i| self.data[i].as_slice())
    }

    /// Field by name, or a corruption error naming what is missing.
    pub fn require(&self, name: &str) -> Result<&[f64]> {
        self.field(name)
            .ok_or_else(|| Error::Corrupt(format!("snapshot of kind `{}` has no field `{name}`", self.header.kind)))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec(&self.header)?;
        out.push(b'\n');
        out.reserve(self.data.len() * self.header.samples_per_field() * 8);
        for field in &self.data {
            for v in field {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Corrupt("missing header line".into()))?;
        let header: SnapshotHeader =
            serde_json::from_slice(&bytes[..nl]).map_err(|e| Error::Corrupt(format!("unreadable header: {e}")))?;
        if header.schema != SCHEMA_VERSION {
            return Err(Error::Corrupt(format!("unsupported schema version {}", header.schema)));
        }
        if header.byte_order != "little" {
            return Err(Error::Corrupt(format!("unsupported byte order `{}`", header.byte_order)));
        }
        let payload = &bytes[nl + 1..];
        let per_field = header.samples_per_field();
        let expected = header.fields.len() * per_field * 8;
        if payload.len() != expected {
            return Err(Error::Corrupt(format!(
                "payload has {} bytes, header implies {expected}",
                payload.len()
            )));
        }
        let data = payload
            .chunks_exact(per_field * 8)
            .map(|chunk| {
                chunk
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of eight bytes")))
                    .collect()
            })
            .collect();
        Ok(Snapshot { header, data })
    }
}

pub fn write_snapshot(snapshot: &Snapshot, path: &Path) -> Result<()> {
    let bytes = snapshot.to_bytes()?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    Snapshot::from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let h = SnapshotHeader::new("test", 16, 2.5, &["a", "b"], 0.125).with_meta("eps", 0.1);
        let a: Vec<f64> = (0..4096).map(|i| (i as f64).sin() * 1e-300).collect();
        let b: Vec<f64> = (0..4096).map(|i| 1.0 / (i as f64 + 0.3)).collect();
        Snapshot::new(h, vec![a, b]).unwrap()
    }

    #[test]
    fn bytes_round_trip_bitwise() {
        let s = sample();
        let back = Snapshot::from_bytes(&s.to_bytes().unwrap()).unwrap();
        assert_eq!(back.header, s.header);
        for (x, y) in back.data.iter().flatten().zip(s.data.iter().flatten()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn truncation_is_reported_as_corruption() {
        let bytes = sample().to_bytes().unwrap();
        let cut = &bytes[..bytes.len() - 3];
        assert!(matches!(Snapshot::from_bytes(cut), Err(Error::Corrupt(_))));
        assert!(matches!(Snapshot::from_bytes(b"garbage"), Err(Error::Corrupt(_))));
    }
}
