use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ProblemConfig, Snr};
use crate::error::{Error, FormatError, Result};
use crate::fields::{ContrastImage, MeasurementVector};
use crate::forward::{add_noise, ForwardModel};
use crate::io::{self, round_c64, PayloadReader, PayloadWriter, TensorEntry};

use super::scene::{random_scene, rasterize, SceneParams, SceneSpec};

const MANIFEST: &str = "manifest.json";
const SCENES: &str = "scenes.json";
const FORMAT: &str = "bimlab-dataset";
/// Seed stride separating the splits.
pub const SPLIT_STRIDE: u64 = 1_000_000_000;
/// Training-set size the desk-scale counts are measured against.
pub const FULL_SCALE_TRAIN: usize = 64_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }

    pub fn offset(self) -> u64 {
        match self {
            Split::Train => 0,
            Split::Valid => 1,
            Split::Test => 2,
        }
    }

    /// Scene seed of example `index`: `base + offset·10⁹ + index`.
    pub fn scene_seed(self, base_seed: u64, index: usize) -> u64 {
        base_seed
            .wrapping_add(self.offset() * SPLIT_STRIDE)
            .wrapping_add(index as u64)
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split `{other}` (train, valid, test)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSizes {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl DatasetSizes {
    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Valid => self.valid,
            Split::Test => self.test,
        }
    }

    pub fn scale_factor(&self) -> f64 {
        self.train as f64 / FULL_SCALE_TRAIN as f64
    }
}

impl Default for DatasetSizes {
    fn default() -> Self {
        Self {
            train: 4000,
            valid: 200,
            test: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub split: Split,
    pub config_hash: String,
    pub base_seed: u64,
    pub count: usize,
    pub scale_factor: f64,
    pub config: ProblemConfig,
    pub scene_params: SceneParams,
    pub tensors: Vec<TensorEntry>,
}

/// One split held in memory. Measurements are noiseless; noise is drawn at
/// consumption time so every SNR condition reuses the same data.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub manifest: DatasetManifest,
    pub scenes: Vec<SceneSpec>,
    pub contrasts: Vec<ContrastImage>,
    pub measurements: Vec<MeasurementVector>,
}

/// Noise seed for example `index` under run seed `seed`.
pub fn noise_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(index as u64)
}

impl DatasetBundle {
    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }

    pub fn config(&self) -> &ProblemConfig {
        &self.manifest.config
    }

    /// Stored measurement of example `index` with fresh noise.
    pub fn noisy_measurement(&self, index: usize, snr: Snr, seed: u64) -> MeasurementVector {
        add_noise(&self.measurements[index], snr, noise_seed(seed, index))
    }

    /// Writes the split into `dir`; the manifest goes last and marks completion.
    pub fn save(&self, dir: &Path) -> Result<()> {
        io::create_dir(dir)?;
        let _ = std::fs::remove_file(dir.join(MANIFEST));
        io::write_json(&dir.join(SCENES), &self.scenes)?;

        let config = self.config();
        let n = self.len();
        let contrasts: Vec<_> = self.contrasts.iter().flat_map(|c| c.t.iter().copied()).collect();
        let mut writer = PayloadWriter::new("contrasts.bin");
        writer.push_c64("contrasts", &[n, config.grid_ny, config.grid_nx], &contrasts);
        let mut tensors = writer.finish(dir)?;

        let measurements: Vec<_> = self.measurements.iter().flat_map(|m| m.data.iter().copied()).collect();
        let mut writer = PayloadWriter::new("measurements.bin");
        writer.push_c64("measurements", &[n, config.tx_count, config.rx_count], &measurements);
        tensors.extend(writer.finish(dir)?);

        let manifest = DatasetManifest {
            tensors,
            ..self.manifest.clone()
        };
        io::write_json(&dir.join(MANIFEST), &manifest)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        if !path.exists() {
            return Err(FormatError::MissingManifest(dir.to_path_buf()).into());
        }
        let manifest: DatasetManifest = io::read_json(&path)?;
        if manifest.format != FORMAT {
            return Err(FormatError::Invalid(format!(
                "manifest format is `{}`, expected `{FORMAT}`",
                manifest.format
            ))
            .into());
        }
        manifest.config.validate()?;
        let found = manifest.config.hash();
        if found != manifest.config_hash {
            return Err(FormatError::HashMismatch {
                expected: manifest.config_hash.clone(),
                found,
            }
            .into());
        }
        let config = &manifest.config;
        let n = manifest.count;
        let scenes: Vec<SceneSpec> = io::read_json(&dir.join(SCENES))?;
        if scenes.len() != n {
            return Err(FormatError::Invalid(format!("{} scenes for count {n}", scenes.len())).into());
        }

        let mut reader = PayloadReader::new(dir);
        let expect = |name: &str, shape: Vec<usize>| -> Result<&TensorEntry> {
            let entry = io::find(&manifest.tensors, name)?;
            if entry.shape != shape {
                return Err(FormatError::ShapeMismatch {
                    name: name.to_string(),
                    expected: shape,
                    found: entry.shape.clone(),
                }
                .into());
            }
            Ok(entry)
        };
        let c_entry = expect("contrasts", vec![n, config.grid_ny, config.grid_nx])?;
        let m_entry = expect("measurements", vec![n, config.tx_count, config.rx_count])?;
        let contrasts = reader
            .read_c64(c_entry)?
            .chunks(config.pixel_count().max(1))
            .take(n)
            .map(|c| ContrastImage::new(Array1::from(c.to_vec()), config.grid_nx, config.grid_ny))
            .collect::<Result<Vec<_>>>()?;
        let measurements = reader
            .read_c64(m_entry)?
            .chunks(config.measurement_len().max(1))
            .take(n)
            .map(|m| MeasurementVector::new(Array1::from(m.to_vec()), config.tx_count, config.rx_count))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            manifest,
            scenes,
            contrasts,
            measurements,
        })
    }

    /// Loads and insists the split was generated for `config`.
    pub fn load_for(dir: &Path, config: &ProblemConfig) -> Result<Self> {
        let bundle = Self::load(dir)?;
        let expected = config.hash();
        if bundle.manifest.config_hash != expected {
            return Err(FormatError::HashMismatch {
                expected,
                found: bundle.manifest.config_hash,
            }
            .into());
        }
        Ok(bundle)
    }
}

/// Simulates one split in memory. Values are rounded to the on-disk precision
/// so that the bundle equals what [`DatasetBundle::load`] returns.
pub fn generate_split(
    model: &ForwardModel,
    params: &SceneParams,
    split: Split,
    count: usize,
    base_seed: u64,
    scale_factor: f64,
) -> Result<DatasetBundle> {
    let config = &model.config;
    params.validate(config)?;
    let examples = (0..count)
        .into_par_iter()
        .map(|index| {
            let scene = random_scene(params, config, split.scene_seed(base_seed, index))?;
            let contrast = rasterize(&scene, config);
            let measurement = model.solve(&contrast)?;
            let measurement = MeasurementVector {
                data: measurement.data.mapv(round_c64),
                ..measurement
            };
            let contrast = ContrastImage {
                t: contrast.t.mapv(round_c64),
                ..contrast
            };
            Ok((scene, contrast, measurement))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut bundle = DatasetBundle {
        manifest: DatasetManifest {
            format: FORMAT.into(),
            split,
            config_hash: config.hash(),
            base_seed,
            count,
            scale_factor,
            config: config.clone(),
            scene_params: *params,
            tensors: Vec::new(),
        },
        scenes: Vec::with_capacity(count),
        contrasts: Vec::with_capacity(count),
        measurements: Vec::with_capacity(count),
    };
    for (scene, contrast, measurement) in examples {
        bundle.scenes.push(scene);
        bundle.contrasts.push(contrast);
        bundle.measurements.push(measurement);
    }
    Ok(bundle)
}

/// Generates and writes `train/`, `valid/` and `test/` under `dir`.
/// `progress` is called after each split with its name and manifest path.
pub fn generate_dataset(
    config: &ProblemConfig,
    params: &SceneParams,
    sizes: DatasetSizes,
    base_seed: u64,
    dir: &Path,
    mut progress: impl FnMut(Split, &Path),
) -> Result<()> {
    config.validate()?;
    params.validate(config)?;
    let model = ForwardModel::new(config)?;
    for split in Split::ALL {
        let bundle = generate_split(&model, params, split, sizes.get(split), base_seed, sizes.scale_factor())?;
        let split_dir = dir.join(split.name());
        bundle.save(&split_dir)?;
        progress(split, &split_dir.join(MANIFEST));
    }
    Ok(())
}
