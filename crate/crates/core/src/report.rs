//! Reconstruction-quality reports: per-example RNE and per-step MRNE tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::ContrastImage;
use crate::inverse::rne;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRne {
    pub index: usize,
    /// RNE in percent after each outer step.
    pub rne: Vec<f64>,
}

/// All examples of one noise condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub snr: String,
    pub noise_seed: u64,
    pub examples: Vec<ExampleRne>,
    /// Mean RNE per outer step.
    pub mrne: Vec<f64>,
}

impl ConditionReport {
    pub fn new(snr: impl Into<String>, noise_seed: u64, examples: Vec<ExampleRne>) -> Result<Self> {
        let steps = examples.first().map_or(0, |e| e.rne.len());
        if examples.iter().any(|e| e.rne.len() != steps) {
            return Err(Error::Contract("examples report different step counts".into()));
        }
        if examples.iter().flat_map(|e| &e.rne).any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Numerical("RNE values must be finite and nonnegative".into()));
        }
        let n = examples.len().max(1) as f64;
        let mrne = (0..steps)
            .map(|i| examples.iter().map(|e| e.rne[i]).sum::<f64>() / n)
            .collect();
        Ok(Self {
            snr: snr.into(),
            noise_seed,
            examples,
            mrne,
        })
    }
}

/// RNE of every per-step image against the ground truth.
pub fn step_rne(per_step: &[ContrastImage], truth: &ContrastImage) -> Result<Vec<f64>> {
    per_step
        .iter()
        .map(|t| rne(t.t.as_slice().expect("contiguous"), truth.t.as_slice().expect("contiguous")))
        .collect()
}

/// Deterministic summary of a run; wall-clock timings live elsewhere so that
/// identical runs produce identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub split: String,
    pub config_hash: String,
    pub steps: usize,
    pub conditions: Vec<ConditionReport>,
}

impl RunReport {
    /// Aligned text table: one row per condition, one column per step.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<12}", "MRNE (%)");
        for i in 1..=self.steps {
            let _ = write!(out, "{:>10}", format!("i = {i}"));
        }
        out.push('\n');
        for c in &self.conditions {
            let _ = write!(out, "{:<12}", c.snr);
            for m in &c.mrne {
                let _ = write!(out, "{m:>10.2}");
            }
            out.push('\n');
        }
        out
    }
}
