//! Batch reconstruction over a dataset split and offline re-scoring.
//!
//! Layout of a results directory:
//!
//! ```text
//! results.json              run description, deterministic
//! report.json               RunReport, deterministic
//! timings.json              wall-clock times
//! <snr>/ex_00000/           one reconstruction export per example
//! ```

use std::path::{Path, PathBuf};
use std::time::Instant;

use bimlab::dataset::{DatasetBundle, Split};
use bimlab::inverse::{load_result, save_result, ResultOrigin};
use bimlab::io;
use bimlab::nn::load_bundle_set;
use bimlab::report::{step_rne, ConditionReport, ExampleRne, RunReport};
use bimlab::{BornIterative, Error, FormatError, ReconstructionResult, Snr, UNet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::{EvaluateArgs, Method, ReconstructArgs};

#[derive(Debug, Serialize, Deserialize)]
struct RunCondition {
    snr: Snr,
    noise_seed: u64,
    dir: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RunDescription {
    method: String,
    split: Split,
    config_hash: String,
    examples: usize,
    weights_snr: Option<String>,
    conditions: Vec<RunCondition>,
}

#[derive(Debug, Serialize)]
struct ConditionTiming {
    snr: String,
    seconds: f64,
    mean_seconds_per_example: f64,
}

#[derive(Debug, Serialize)]
struct Timings {
    threads: usize,
    total_seconds: f64,
    conditions: Vec<ConditionTiming>,
}

fn example_dir(root: &Path, condition: &str, index: usize) -> PathBuf {
    root.join(condition).join(format!("ex_{index:05}"))
}

fn print_report(report: &RunReport) {
    println!("{} on {} split, config {}", report.method, report.split, &report.config_hash[..12]);
    print!("{}", report.table());
}

/// Rounds to the stored precision first so `evaluate` reproduces the numbers.
fn stored_rne(result: &ReconstructionResult, truth: &bimlab::ContrastImage) -> bimlab::Result<Vec<f64>> {
    let rounded: Vec<_> = result
        .per_step
        .iter()
        .map(|t| bimlab::ContrastImage {
            t: t.t.mapv(io::round_c64),
            ..t.clone()
        })
        .collect();
    step_rne(&rounded, truth)
}

pub fn reconstruct(args: &ReconstructArgs) -> CliResult {
    let bundle = DatasetBundle::load(&args.dataset.join(args.split.name()))?;
    let config = bundle.config().clone();
    let config_hash = bundle.manifest.config_hash.clone();
    let solver = BornIterative::new(&config)?;

    let (nets, weights_snr) = match (args.method, &args.weights) {
        (Method::Tbim, None) => {
            return Err(CliError::Usage("tbim needs --weights with one bundle per outer step".into()));
        }
        (Method::Tbim, Some(dir)) => {
            let (meta, weights) = load_bundle_set(dir, config.n_bim)?;
            let nets = weights.iter().map(UNet::from_weights).collect::<bimlab::Result<Vec<_>>>()?;
            UNet::check_grid(config.grid_ny, config.grid_nx)?;
            (nets, Some(meta.snr))
        }
        (_, Some(_)) => {
            return Err(CliError::Usage(format!("--weights only applies to tbim, not {}", args.method.name())));
        }
        (_, None) => (Vec::new(), None),
    };

    let count = args.examples.map_or(bundle.len(), |k| k.min(bundle.len()));
    if count == 0 {
        return Err(CliError::Usage("no examples to reconstruct".into()));
    }
    let mut snrs: Vec<Snr> = Vec::new();
    for snr in &args.snrs {
        if !snrs.contains(snr) {
            snrs.push(*snr);
        }
    }

    io::create_dir(&args.out)?;
    let started = Instant::now();
    let mut conditions = Vec::new();
    let mut timings = Vec::new();
    for &snr in &snrs {
        let label = snr.label();
        eprintln!("{}: {count} examples at {label}", args.method.name());
        let t0 = Instant::now();
        let examples = (0..count)
            .into_par_iter()
            .map(|index| -> bimlab::Result<ExampleRne> {
                let e_mea = bundle.noisy_measurement(index, snr, args.seed);
                let result = match args.method {
                    Method::Sbim => solver.sbim(&e_mea)?,
                    Method::LandweberBim => solver.landweber(&e_mea)?,
                    Method::Tbim => solver.tbim(&e_mea, &nets)?,
                };
                let origin = ResultOrigin {
                    method: args.method.name().to_string(),
                    config_hash: config_hash.clone(),
                    example: index,
                    snr: label.clone(),
                    noise_seed: args.seed,
                };
                save_result(&example_dir(&args.out, &label, index), &result, &origin)?;
                Ok(ExampleRne {
                    index,
                    rne: stored_rne(&result, &bundle.contrasts[index])?,
                })
            })
            .collect::<bimlab::Result<Vec<_>>>()?;
        let seconds = t0.elapsed().as_secs_f64();
        timings.push(ConditionTiming {
            snr: label.clone(),
            seconds,
            mean_seconds_per_example: seconds / count as f64,
        });
        conditions.push(ConditionReport::new(label, args.seed, examples)?);
    }

    let description = RunDescription {
        method: args.method.name().to_string(),
        split: args.split,
        config_hash: config_hash.clone(),
        examples: count,
        weights_snr,
        conditions: snrs
            .iter()
            .map(|snr| RunCondition {
                snr: *snr,
                noise_seed: args.seed,
                dir: snr.label(),
            })
            .collect(),
    };
    let report = RunReport {
        method: args.method.name().to_string(),
        split: args.split.name().to_string(),
        config_hash,
        steps: config.n_bim,
        conditions,
    };
    io::write_json(&args.out.join("results.json"), &description)?;
    io::write_json(&args.out.join("report.json"), &report)?;
    io::write_json(
        &args.out.join("timings.json"),
        &Timings {
            threads: rayon::current_num_threads(),
            total_seconds: started.elapsed().as_secs_f64(),
            conditions: timings,
        },
    )?;
    print_report(&report);
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult {
    let description: RunDescription = io::read_json(&args.results.join("results.json"))?;
    let bundle = DatasetBundle::load(&args.dataset.join(description.split.name()))?;
    if bundle.manifest.config_hash != description.config_hash {
        return Err(Error::from(FormatError::HashMismatch {
            expected: description.config_hash,
            found: bundle.manifest.config_hash,
        })
        .into());
    }
    if description.examples > bundle.len() {
        return Err(Error::from(FormatError::Invalid(format!(
            "results cover {} examples, the {} split has {}",
            description.examples,
            description.split,
            bundle.len()
        )))
        .into());
    }
    let steps = bundle.config().n_bim;
    let mut conditions = Vec::new();
    for condition in &description.conditions {
        let examples = (0..description.examples)
            .map(|index| -> bimlab::Result<ExampleRne> {
                let dir = example_dir(&args.results, &condition.dir, index);
                let (manifest, result) = load_result(&dir)?;
                if manifest.origin.config_hash != description.config_hash {
                    return Err(FormatError::HashMismatch {
                        expected: description.config_hash.clone(),
                        found: manifest.origin.config_hash,
                    }
                    .into());
                }
                if manifest.steps != steps {
                    return Err(FormatError::Invalid(format!(
                        "{} holds {} steps, configuration has {steps}",
                        dir.display(),
                        manifest.steps
                    ))
                    .into());
                }
                Ok(ExampleRne {
                    index,
                    rne: step_rne(&result.per_step, &bundle.contrasts[index])?,
                })
            })
            .collect::<bimlab::Result<Vec<_>>>()?;
        conditions.push(ConditionReport::new(condition.snr.label(), condition.noise_seed, examples)?);
    }
    let report = RunReport {
        method: description.method,
        split: description.split.name().to_string(),
        config_hash: description.config_hash,
        steps,
        conditions,
    };
    let output = args.output.clone().unwrap_or_else(|| args.results.join("evaluation.json"));
    io::write_json(&output, &report)?;
    print_report(&report);
    println!("{}", output.display());
    Ok(())
}
