//! Raw little-endian tensor payloads described by JSON manifests.
//!
//! Every tensor is listed with its name, payload file, shape, dtype and byte
//! offset. `float32` stores one value per element, `complex64` stores
//! interleaved `(re, im)` float32 pairs.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, FormatError, Result};

pub const FLOAT32: &str = "float32";
pub const COMPLEX64: &str = "complex64";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub file: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    pub offset: u64,
}

impl TensorEntry {
    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }

    fn element_bytes(&self) -> Result<u64> {
        match self.dtype.as_str() {
            FLOAT32 => Ok(4),
            COMPLEX64 => Ok(8),
            other => Err(FormatError::UnknownDtype {
                name: self.name.clone(),
                dtype: other.to_string(),
            }
            .into()),
        }
    }

    pub fn byte_len(&self) -> Result<u64> {
        Ok(self.element_bytes()? * self.element_count() as u64)
    }
}

pub fn find<'a>(entries: &'a [TensorEntry], name: &str) -> Result<&'a TensorEntry> {
    entries
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| FormatError::MissingTensor(name.to_string()).into())
}

/// Accumulates tensors into one payload file.
#[derive(Debug)]
pub struct PayloadWriter {
    file: String,
    bytes: Vec<u8>,
    entries: Vec<TensorEntry>,
}

impl PayloadWriter {
    pub fn new(file: impl Into<String>) -> Self {
        Self {
            file: file.into(),
            bytes: Vec::new(),
            entries: Vec::new(),
        }
    }

    fn entry(&mut self, name: &str, shape: &[usize], dtype: &str) {
        self.entries.push(TensorEntry {
            name: name.to_string(),
            file: self.file.clone(),
            shape: shape.to_vec(),
            dtype: dtype.to_string(),
            offset: self.bytes.len() as u64,
        });
    }

    pub fn push_f32(&mut self, name: &str, shape: &[usize], data: &[f32]) {
        assert_eq!(shape.iter().product::<usize>(), data.len(), "shape/data mismatch for {name}");
        self.entry(name, shape, FLOAT32);
        for v in data {
            self.bytes.extend_from_slice(&v.to_le_bytes());
        }
    }

    pub fn push_c64(&mut self, name: &str, shape: &[usize], data: &[Complex64]) {
        assert_eq!(shape.iter().product::<usize>(), data.len(), "shape/data mismatch for {name}");
        self.entry(name, shape, COMPLEX64);
        for z in data {
            self.bytes.extend_from_slice(&(z.re as f32).to_le_bytes());
            self.bytes.extend_from_slice(&(z.im as f32).to_le_bytes());
        }
    }

    /// Writes the payload into `dir` and returns the manifest entries.
    pub fn finish(self, dir: &Path) -> Result<Vec<TensorEntry>> {
        let path = dir.join(&self.file);
        fs::write(&path, &self.bytes).map_err(Error::io(&path))?;
        Ok(self.entries)
    }
}

/// Reads tensors out of the payload files of one directory, loading each
/// file once.
#[derive(Debug)]
pub struct PayloadReader {
    dir: PathBuf,
    files: HashMap<String, Vec<u8>>,
}

impl PayloadReader {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            files: HashMap::new(),
        }
    }

    fn slice(&mut self, entry: &TensorEntry, dtype: &str) -> Result<&[u8]> {
        let byte_len = entry.byte_len()?;
        if entry.dtype != dtype {
            return Err(FormatError::Invalid(format!(
                "tensor `{}` has dtype {}, expected {dtype}",
                entry.name, entry.dtype
            ))
            .into());
        }
        if !self.files.contains_key(&entry.file) {
            let path = self.dir.join(&entry.file);
            let bytes = fs::read(&path).map_err(Error::io(&path))?;
            self.files.insert(entry.file.clone(), bytes);
        }
        let bytes = &self.files[&entry.file];
        let end = entry.offset + byte_len;
        if end > bytes.len() as u64 {
            return Err(FormatError::TruncatedPayload {
                file: entry.file.clone(),
                name: entry.name.clone(),
                needed: end,
                available: bytes.len() as u64,
            }
            .into());
        }
        Ok(&bytes[entry.offset as usize..end as usize])
    }

    pub fn read_f32(&mut self, entry: &TensorEntry) -> Result<Vec<f32>> {
        let bytes = self.slice(entry, FLOAT32)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    }

    pub fn read_c64(&mut self, entry: &TensorEntry) -> Result<Vec<Complex64>> {
        let bytes = self.slice(entry, COMPLEX64)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                Complex64::new(re as f64, im as f64)
            })
            .collect())
    }
}

/// Rounds through float32 the way a `complex64` payload does.
pub fn round_c64(z: Complex64) -> Complex64 {
    Complex64::new(z.re as f32 as f64, z.im as f32 as f64)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON written through a temporary file and renamed into place.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text).map_err(Error::io(&tmp))?;
    fs::rename(&tmp, path).map_err(Error::io(path))?;
    Ok(())
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(Error::io(path))
}
