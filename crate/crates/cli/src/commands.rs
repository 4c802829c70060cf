//! Dataset generation, single-scene simulation and the parity gate.

use std::path::Path;

use bimlab::dataset::{generate_dataset, rasterize, DatasetSizes, SceneParams, SceneSpec};
use bimlab::io::{self, PayloadWriter, TensorEntry};
use bimlab::nn::{check_parity, load_bundle_set, ParityVectors};
use bimlab::{add_noise, ForwardModel, ProblemConfig, Snr, UNet, UNetWeights};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn load_config(path: Option<&Path>) -> CliResult<ProblemConfig> {
    Ok(match path {
        Some(p) => ProblemConfig::from_json_file(p)?,
        None => ProblemConfig::default(),
    })
}

pub fn generate(
    config: Option<&Path>,
    sizes: DatasetSizes,
    seed: u64,
    r_min: Option<f64>,
    r_max: Option<f64>,
    out: &Path,
) -> CliResult {
    let config = load_config(config)?;
    let defaults = SceneParams::for_config(&config);
    let params = SceneParams {
        r_min: r_min.unwrap_or(defaults.r_min),
        r_max: r_max.unwrap_or(defaults.r_max),
    };
    eprintln!(
        "generating {} / {} / {} examples (seed {seed}, radius {:.3}..{:.3} m)",
        sizes.train, sizes.valid, sizes.test, params.r_min, params.r_max
    );
    generate_dataset(&config, &params, sizes, seed, out, |split, dir| {
        println!("{split}: {}", dir.join("manifest.json").display());
    })?;
    Ok(())
}

#[derive(Serialize)]
struct ForwardManifest<'a> {
    format: &'static str,
    config_hash: String,
    config: &'a ProblemConfig,
    snr: Snr,
    noise_seed: u64,
    scene: &'a SceneSpec,
    tensors: Vec<TensorEntry>,
}

pub fn forward(config: Option<&Path>, scene: &Path, snr: Snr, seed: u64, out: &Path) -> CliResult {
    let config = load_config(config)?;
    let scene: SceneSpec = io::read_json(scene)?;
    let contrast = rasterize(&scene, &config);
    let clean = ForwardModel::new(&config)?.solve(&contrast)?;
    let measured = add_noise(&clean, snr, seed);

    io::create_dir(out)?;
    let mut writer = PayloadWriter::new("fields.bin");
    writer.push_c64("contrast", &[config.grid_ny, config.grid_nx], contrast.t.as_slice().expect("contiguous"));
    writer.push_c64(
        "measurements",
        &[config.tx_count, config.rx_count],
        measured.data.as_slice().expect("contiguous"),
    );
    let manifest = ForwardManifest {
        format: "bimlab-forward",
        config_hash: config.hash(),
        config: &config,
        snr,
        noise_seed: seed,
        scene: &scene,
        tensors: writer.finish(out)?,
    };
    let path = out.join("manifest.json");
    io::write_json(&path, &manifest)?;
    let norm = measured.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    println!("{} measurements, norm {norm:.6e} ({snr})", measured.len());
    println!("{}", path.display());
    Ok(())
}

pub fn parity_check(weights: &Path, vectors: &Path, step: usize, tolerance: f64) -> CliResult {
    if step == 0 {
        return Err(CliError::Usage("--step counts from 1".into()));
    }
    let bundle = if weights.join("meta.json").exists() {
        let (_, mut set) = load_bundle_set(weights, step)?;
        set.swap_remove(step - 1)
    } else {
        UNetWeights::load(weights)?
    };
    let net = UNet::from_weights(&bundle)?;
    let report = check_parity(&net, &ParityVectors::load(vectors)?)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(bimlab::Error::from)?);
    if report.max_rel_error.is_nan() || report.max_rel_error > tolerance {
        return Err(CliError::Parity {
            max: report.max_rel_error,
            tolerance,
        });
    }
    Ok(())
}
