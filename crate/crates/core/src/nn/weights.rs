use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, FormatError, Result};
use crate::io::{self, PayloadReader, PayloadWriter, TensorEntry, FLOAT32};

use super::unet::{ArchSpec, LAYERS};

const MANIFEST: &str = "manifest.json";
const PAYLOAD: &str = "weights.bin";
const FORMAT: &str = "unet-weights";
const META: &str = "meta.json";

#[derive(Debug, Clone, PartialEq)]
pub struct WeightTensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format: String,
    tensors: Vec<TensorEntry>,
}

/// Expected `(name, shape)` for every tensor, in bundle order.
fn expected_tensors() -> Vec<(String, Vec<usize>)> {
    LAYERS
        .iter()
        .flat_map(|l| {
            [
                (format!("{}.kernel", l.name), vec![l.out_ch, l.in_ch, l.kernel, l.kernel]),
                (format!("{}.bias", l.name), vec![l.out_ch]),
            ]
        })
        .collect()
}

/// Named float32 tensors for every layer of the reference U-net.
#[derive(Debug, Clone, PartialEq)]
pub struct UNetWeights {
    tensors: BTreeMap<String, WeightTensor>,
}

impl UNetWeights {
    pub fn zeros() -> Self {
        let tensors = expected_tensors()
            .into_iter()
            .map(|(name, shape)| {
                let n = shape.iter().product();
                (name, WeightTensor { shape, data: vec![0.0; n] })
            })
            .collect();
        Self { tensors }
    }

    /// He-normal kernels and small random biases, reproducible per seed.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Self::zeros();
        for l in LAYERS.iter() {
            let fan_in = (l.in_ch * l.kernel * l.kernel) as f32;
            let kernel = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("positive std");
            let bias = Normal::new(0.0f32, 0.05).expect("positive std");
            let k = weights.tensors.get_mut(&format!("{}.kernel", l.name)).expect("known layer");
            k.data.iter_mut().for_each(|v| *v = kernel.sample(&mut rng));
            let b = weights.tensors.get_mut(&format!("{}.bias", l.name)).expect("known layer");
            b.data.iter_mut().for_each(|v| *v = bias.sample(&mut rng));
        }
        weights
    }

    /// Builds a set from arbitrary named tensors, checking names, shapes and
    /// finiteness.
    pub fn from_tensors(tensors: BTreeMap<String, WeightTensor>) -> Result<Self> {
        let weights = Self { tensors };
        weights.validate()?;
        Ok(weights)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = expected_tensors();
        for (name, shape) in &expected {
            let t = self
                .tensors
                .get(name)
                .ok_or_else(|| FormatError::MissingTensor(name.clone()))?;
            if &t.shape != shape {
                return Err(FormatError::ShapeMismatch {
                    name: name.clone(),
                    expected: shape.clone(),
                    found: t.shape.clone(),
                }
                .into());
            }
            if t.data.len() != shape.iter().product::<usize>() {
                return Err(Error::Contract(format!(
                    "tensor `{name}` holds {} values for shape {shape:?}",
                    t.data.len()
                )));
            }
            if !t.data.iter().all(|v| v.is_finite()) {
                return Err(FormatError::NonFinite(name.clone()).into());
            }
        }
        if let Some(extra) = self.tensors.keys().find(|k| !expected.iter().any(|(n, _)| n == *k)) {
            return Err(FormatError::UnexpectedTensor(extra.clone()).into());
        }
        Ok(())
    }

    pub fn tensor(&self, name: &str) -> Result<&WeightTensor> {
        self.tensors
            .get(name)
            .ok_or_else(|| FormatError::MissingTensor(name.to_string()).into())
    }

    pub fn tensor_mut(&mut self, name: &str) -> Result<&mut WeightTensor> {
        self.tensors
            .get_mut(name)
            .ok_or_else(|| FormatError::MissingTensor(name.to_string()).into())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    /// Writes `{manifest.json, weights.bin}` into `dir`, creating it.
    pub fn save(&self, dir: &Path) -> Result<()> {
        self.validate()?;
        io::create_dir(dir)?;
        let mut writer = PayloadWriter::new(PAYLOAD);
        for (name, _) in expected_tensors() {
            let t = &self.tensors[&name];
            writer.push_f32(&name, &t.shape, &t.data);
        }
        let manifest = Manifest {
            format: FORMAT.to_string(),
            tensors: writer.finish(dir)?,
        };
        io::write_json(&dir.join(MANIFEST), &manifest)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(MANIFEST);
        if !manifest_path.exists() {
            return Err(FormatError::MissingManifest(dir.to_path_buf()).into());
        }
        let manifest: Manifest = io::read_json(&manifest_path)?;
        if manifest.format != FORMAT {
            return Err(FormatError::Invalid(format!(
                "manifest format is `{}`, expected `{FORMAT}`",
                manifest.format
            ))
            .into());
        }

        let expected = expected_tensors();
        for entry in &manifest.tensors {
            if !expected.iter().any(|(n, _)| *n == entry.name) {
                return Err(FormatError::UnexpectedTensor(entry.name.clone()).into());
            }
        }

        let mut reader = PayloadReader::new(dir);
        let mut tensors = BTreeMap::new();
        for (name, shape) in expected {
            let entry = io::find(&manifest.tensors, &name)?;
            entry.byte_len()?;
            if entry.dtype != FLOAT32 {
                return Err(FormatError::UnknownDtype {
                    name,
                    dtype: entry.dtype.clone(),
                }
                .into());
            }
            if entry.shape != shape {
                return Err(FormatError::ShapeMismatch {
                    name,
                    expected: shape,
                    found: entry.shape.clone(),
                }
                .into());
            }
            let data = reader.read_f32(entry)?;
            tensors.insert(name, WeightTensor { shape, data });
        }
        Self::from_tensors(tensors)
    }
}

/// Top-level description of a bundle set. Unknown keys written by the
/// trainer are kept verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub architecture: ArchSpec,
    pub snr: String,
    pub provenance: String,
    pub steps: usize,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl BundleMeta {
    pub fn new(snr: impl Into<String>, provenance: impl Into<String>, steps: usize) -> Self {
        Self {
            architecture: ArchSpec::reference(),
            snr: snr.into(),
            provenance: provenance.into(),
            steps,
            extra: serde_json::Map::new(),
        }
    }
}

/// Writes `step1/ … stepN/` plus `meta.json`.
pub fn save_bundle_set(dir: &Path, weights: &[UNetWeights], meta: &BundleMeta) -> Result<()> {
    if meta.steps != weights.len() {
        return Err(Error::Contract(format!(
            "meta records {} steps, {} bundles given",
            meta.steps,
            weights.len()
        )));
    }
    io::create_dir(dir)?;
    for (i, w) in weights.iter().enumerate() {
        w.save(&dir.join(format!("step{}", i + 1)))?;
    }
    io::write_json(&dir.join(META), meta)
}

/// Loads `steps` per-step bundles, checking the recorded architecture.
pub fn load_bundle_set(dir: &Path, steps: usize) -> Result<(BundleMeta, Vec<UNetWeights>)> {
    let meta_path = dir.join(META);
    if !meta_path.exists() {
        return Err(FormatError::MissingManifest(dir.to_path_buf()).into());
    }
    let meta: BundleMeta = io::read_json(&meta_path)?;
    if meta.architecture != ArchSpec::reference() {
        return Err(FormatError::Invalid(format!(
            "bundle architecture {:?} differs from the built-in network",
            meta.architecture
        ))
        .into());
    }
    if meta.steps < steps {
        return Err(FormatError::Invalid(format!(
            "bundle set has {} steps, {steps} needed",
            meta.steps
        ))
        .into());
    }
    let weights = (1..=steps)
        .map(|i| UNetWeights::load(&dir.join(format!("step{i}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((meta, weights))
}
