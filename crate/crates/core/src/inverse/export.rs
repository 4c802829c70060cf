//! On-disk form of one reconstruction: a manifest with the diagnostics and a
//! `complex64` payload holding the image after every outer step.

use std::path::Path;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{FormatError, Result};
use crate::fields::ContrastImage;
use crate::io::{self, PayloadReader, PayloadWriter, TensorEntry};

use super::bim::ReconstructionResult;

const FORMAT: &str = "bimlab-reconstruction";
const MANIFEST: &str = "manifest.json";

/// Where a reconstruction came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultOrigin {
    pub method: String,
    pub config_hash: String,
    pub example: usize,
    pub snr: String,
    pub noise_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    pub format: String,
    #[serde(flatten)]
    pub origin: ResultOrigin,
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub steps: usize,
    pub gammas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub misfits: Vec<f64>,
    pub power_seeds: Vec<u64>,
    pub tensors: Vec<TensorEntry>,
}

/// Writes `result` into `dir`, manifest last. Images are stored at float32
/// precision, so a reload returns them rounded.
pub fn save_result(dir: &Path, result: &ReconstructionResult, origin: &ResultOrigin) -> Result<()> {
    io::create_dir(dir)?;
    let _ = std::fs::remove_file(dir.join(MANIFEST));
    let (nx, ny) = (result.final_image.nx, result.final_image.ny);
    let steps = result.per_step.len();
    let images: Vec<_> = result.per_step.iter().flat_map(|t| t.t.iter().copied()).collect();
    let mut writer = PayloadWriter::new("images.bin");
    writer.push_c64("per_step", &[steps, ny, nx], &images);
    let manifest = ResultManifest {
        format: FORMAT.to_string(),
        origin: origin.clone(),
        grid_nx: nx,
        grid_ny: ny,
        steps,
        gammas: result.gammas.clone(),
        sigmas: result.sigmas.clone(),
        misfits: result.misfits.clone(),
        power_seeds: result.power_seeds.clone(),
        tensors: writer.finish(dir)?,
    };
    io::write_json(&dir.join(MANIFEST), &manifest)
}

pub fn load_result(dir: &Path) -> Result<(ResultManifest, ReconstructionResult)> {
    let path = dir.join(MANIFEST);
    if !path.exists() {
        return Err(FormatError::MissingManifest(dir.to_path_buf()).into());
    }
    let manifest: ResultManifest = io::read_json(&path)?;
    if manifest.format != FORMAT {
        return Err(FormatError::Invalid(format!(
            "manifest format is `{}`, expected `{FORMAT}`",
            manifest.format
        ))
        .into());
    }
    let (nx, ny, steps) = (manifest.grid_nx, manifest.grid_ny, manifest.steps);
    if steps == 0 {
        return Err(FormatError::Invalid("reconstruction has no steps".into()).into());
    }
    let entry = io::find(&manifest.tensors, "per_step")?;
    if entry.shape != [steps, ny, nx] {
        return Err(FormatError::ShapeMismatch {
            name: entry.name.clone(),
            expected: vec![steps, ny, nx],
            found: entry.shape.clone(),
        }
        .into());
    }
    for (name, len) in [
        ("gammas", manifest.gammas.len()),
        ("sigmas", manifest.sigmas.len()),
        ("misfits", manifest.misfits.len()),
        ("power_seeds", manifest.power_seeds.len()),
    ] {
        if len != steps {
            return Err(FormatError::Invalid(format!("{name} has {len} entries for {steps} steps")).into());
        }
    }
    let per_step = PayloadReader::new(dir)
        .read_c64(entry)?
        .chunks(nx * ny)
        .map(|c| ContrastImage::new(Array1::from(c.to_vec()), nx, ny))
        .collect::<Result<Vec<_>>>()?;
    let result = ReconstructionResult {
        final_image: per_step[steps - 1].clone(),
        per_step,
        gammas: manifest.gammas.clone(),
        sigmas: manifest.sigmas.clone(),
        misfits: manifest.misfits.clone(),
        power_seeds: manifest.power_seeds.clone(),
    };
    Ok((manifest, result))
}
