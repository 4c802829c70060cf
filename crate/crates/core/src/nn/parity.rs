use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FormatError, Result};
use crate::io::{self, PayloadReader, PayloadWriter, TensorEntry};

use super::tensor::Tensor;
use super::unet::UNet;

const MANIFEST: &str = "manifest.json";
const FORMAT: &str = "unet-parity";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format: String,
    tensors: Vec<TensorEntry>,
}

/// Paired network inputs and reference outputs, stored as
/// `{inputs.bin, outputs.bin, manifest.json}` with shapes `(n, 2, H, W)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityVectors {
    pub inputs: Vec<Tensor>,
    pub outputs: Vec<Tensor>,
}

fn stack(tensors: &[Tensor]) -> Result<(Vec<usize>, Vec<f32>)> {
    let first = tensors
        .first()
        .ok_or_else(|| Error::Contract("no parity vectors".into()))?;
    let [c, h, w] = first.shape();
    let mut data = Vec::with_capacity(tensors.len() * c * h * w);
    for t in tensors {
        if t.shape() != [c, h, w] {
            return Err(Error::Contract(format!(
                "parity tensor shape {:?} differs from {:?}",
                t.shape(),
                first.shape()
            )));
        }
        data.extend_from_slice(&t.data);
    }
    Ok((vec![tensors.len(), c, h, w], data))
}

fn unstack(name: &str, shape: &[usize], data: Vec<f32>) -> Result<Vec<Tensor>> {
    let &[n, c, h, w] = shape else {
        return Err(FormatError::Invalid(format!("`{name}` must be 4-dimensional, got {shape:?}")).into());
    };
    if data.iter().any(|v| !v.is_finite()) {
        return Err(FormatError::NonFinite(name.to_string()).into());
    }
    let size = c * h * w;
    (0..n)
        .map(|i| Tensor::new(c, h, w, data[i * size..(i + 1) * size].to_vec()))
        .collect()
}

impl ParityVectors {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        if self.inputs.len() != self.outputs.len() {
            return Err(Error::Contract(format!(
                "{} inputs but {} outputs",
                self.inputs.len(),
                self.outputs.len()
            )));
        }
        io::create_dir(dir)?;
        let mut tensors = Vec::new();
        for (name, file, set) in [("inputs", "inputs.bin", &self.inputs), ("outputs", "outputs.bin", &self.outputs)] {
            let (shape, data) = stack(set)?;
            let mut writer = PayloadWriter::new(file);
            writer.push_f32(name, &shape, &data);
            tensors.extend(writer.finish(dir)?);
        }
        let manifest = Manifest {
            format: FORMAT.into(),
            tensors,
        };
        io::write_json(&dir.join(MANIFEST), &manifest)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        if !path.exists() {
            return Err(FormatError::MissingManifest(dir.to_path_buf()).into());
        }
        let manifest: Manifest = io::read_json(&path)?;
        if manifest.format != FORMAT {
            return Err(FormatError::Invalid(format!(
                "manifest format is `{}`, expected `{FORMAT}`",
                manifest.format
            ))
            .into());
        }
        let mut reader = PayloadReader::new(dir);
        let inputs_entry = io::find(&manifest.tensors, "inputs")?;
        let outputs_entry = io::find(&manifest.tensors, "outputs")?;
        let inputs = unstack("inputs", &inputs_entry.shape, reader.read_f32(inputs_entry)?)?;
        let outputs = unstack("outputs", &outputs_entry.shape, reader.read_f32(outputs_entry)?)?;
        if inputs.len() != outputs.len() {
            return Err(FormatError::Invalid(format!(
                "{} inputs but {} outputs",
                inputs.len(),
                outputs.len()
            ))
            .into());
        }
        Ok(Self { inputs, outputs })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParityReport {
    pub count: usize,
    /// Largest `‖y − y_ref‖₂ / ‖y_ref‖₂` over the vectors.
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
}

/// Runs every stored input through `net` and compares with the stored output.
pub fn check_parity(net: &UNet, vectors: &ParityVectors) -> Result<ParityReport> {
    let mut max_rel_error = 0.0f64;
    let mut sum = 0.0;
    for (input, reference) in vectors.inputs.iter().zip(&vectors.outputs) {
        let out = net.forward(input)?;
        if out.shape() != reference.shape() {
            return Err(Error::Contract(format!(
                "network output {:?} vs reference {:?}",
                out.shape(),
                reference.shape()
            )));
        }
        let (mut diff, mut norm) = (0.0f64, 0.0f64);
        for (&a, &b) in out.data.iter().zip(&reference.data) {
            diff += (a as f64 - b as f64).powi(2);
            norm += (b as f64).powi(2);
        }
        let rel = if norm > 0.0 {
            (diff / norm).sqrt()
        } else {
            diff.sqrt()
        };
        max_rel_error = max_rel_error.max(rel);
        sum += rel;
    }
    let count = vectors.len();
    Ok(ParityReport {
        count,
        max_rel_error,
        mean_rel_error: if count > 0 { sum / count as f64 } else { 0.0 },
    })
}
