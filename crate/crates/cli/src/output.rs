use std::path::Path;

use serde::Serialize;

use crate::Failure;

/// A named output file and its bytes.
pub struct OutFile {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

pub fn json<S: Serialize>(value: &S) -> Result<String, Failure> {
    serde_json::to_string(value).map_err(|e| Failure::Compute(e.to_string()))
}

pub fn json_file<S: Serialize>(name: &'static str, value: &S) -> Result<OutFile, Failure> {
    let mut bytes = json(value)?.into_bytes();
    bytes.push(b'\n');
    Ok(OutFile { name, bytes })
}

pub fn jsonl_file<S: Serialize>(name: &'static str, rows: &[S]) -> Result<OutFile, Failure> {
    let mut bytes = Vec::new();
    for row in rows {
        bytes.extend_from_slice(json(row)?.as_bytes());
        bytes.push(b'\n');
    }
    Ok(OutFile { name, bytes })
}

pub fn csv_file<S: Serialize>(name: &'static str, rows: &[S]) -> Result<OutFile, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Failure::Compute(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Compute(e.to_string()))?;
    Ok(OutFile { name, bytes })
}

pub fn write_all(dir: &Path, files: &[OutFile]) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    for f in files {
        let path = dir.join(f.name);
        std::fs::write(&path, &f.bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
