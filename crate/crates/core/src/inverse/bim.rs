use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::fields::{ContrastImage, MeasurementVector};
use crate::forward::{solve_state, ForwardModel, StateSolve};
use crate::linalg::norm2;
use crate::nn::{UNet, UNetWeights};

use super::ista::{tista, Regularizer};
use super::observation::assemble_observation;
use super::power::power_iteration;

/// Base seed for the power-iteration start vectors; step `i` uses
/// `POWER_SEED + i`.
pub const POWER_SEED: u64 = 0x00B1_4A5E;

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub final_image: ContrastImage,
    /// Contrast after each outer step.
    pub per_step: Vec<ContrastImage>,
    pub gammas: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// `‖H_i t_i − e_mea‖₂` after each outer step.
    pub misfits: Vec<f64>,
    pub power_seeds: Vec<u64>,
}

/// Born iterative reconstruction for one configuration. Holds the operators
/// and incident fields so they can be shared across many examples.
#[derive(Debug, Clone)]
pub struct BornIterative {
    model: ForwardModel,
    power_seed: u64,
}

impl BornIterative {
    pub fn new(config: &ProblemConfig) -> Result<Self> {
        Ok(Self::from_model(ForwardModel::new(config)?))
    }

    pub fn from_model(model: ForwardModel) -> Self {
        Self {
            model,
            power_seed: POWER_SEED,
        }
    }

    pub fn with_power_seed(mut self, seed: u64) -> Self {
        self.power_seed = seed;
        self
    }

    pub fn config(&self) -> &ProblemConfig {
        &self.model.config
    }

    pub fn model(&self) -> &ForwardModel {
        &self.model
    }

    /// Outer loop with one regularizer per step:
    ///
    /// 1. `e_tot ← e_inc`, `t ← 0`
    /// 2. for each step: assemble `H_i`, normalize with power iteration,
    ///    run the inner shrinkage loop warm-started from the previous
    ///    contrast, then update the total fields with a fixed-count state
    ///    solve (skipped after the last step, whose fields are unused).
    pub fn run(
        &self,
        e_mea: &MeasurementVector,
        regularizers: &[Regularizer<'_>],
    ) -> Result<ReconstructionResult> {
        let config = &self.model.config;
        if regularizers.len() != config.n_bim {
            return Err(Error::Contract(format!(
                "{} regularizers for {} outer steps",
                regularizers.len(),
                config.n_bim
            )));
        }
        if e_mea.len() != config.measurement_len() {
            return Err(Error::Contract(format!(
                "measurement has {} entries, configuration expects {}",
                e_mea.len(),
                config.measurement_len()
            )));
        }

        let ops = &self.model.ops;
        let mut e_tot = self.model.e_inc.as_total();
        let mut t = ContrastImage::zeros(config.grid_nx, config.grid_ny);
        let mut out = ReconstructionResult {
            final_image: t.clone(),
            per_step: Vec::with_capacity(config.n_bim),
            gammas: Vec::with_capacity(config.n_bim),
            sigmas: Vec::with_capacity(config.n_bim),
            misfits: Vec::with_capacity(config.n_bim),
            power_seeds: Vec::with_capacity(config.n_bim),
        };

        for (i, reg) in (1..=config.n_bim).zip(regularizers) {
            let h = assemble_observation(ops, &e_tot, i)?;
            let seed = self.power_seed.wrapping_add(i as u64);
            let spectral = power_iteration(h.view(), config.n_pow, seed)?;
            t = tista(&h, e_mea, spectral.gamma, *reg, config.n_lwb, &t)?;
            if !t.is_finite() {
                return Err(Error::Numerical(format!("non-finite contrast at outer step {i}")));
            }

            out.misfits.push(norm2((h.apply(&t) - &e_mea.data).view()));
            out.gammas.push(spectral.gamma);
            out.sigmas.push(spectral.sigma);
            out.power_seeds.push(seed);
            out.per_step.push(t.clone());

            if i < config.n_bim {
                e_tot = solve_state(ops, &t, &self.model.e_inc, StateSolve::fixed(config.n_bcg))?;
            }
        }
        out.final_image = t;
        Ok(out)
    }

    /// Sparse variant: soft-thresholding at `sbim_delta` in every step.
    pub fn sbim(&self, e_mea: &MeasurementVector) -> Result<ReconstructionResult> {
        let regs = vec![Regularizer::SoftThreshold(self.config().sbim_delta); self.config().n_bim];
        self.run(e_mea, &regs)
    }

    /// Unregularized Born iterations (plain Landweber inner loop).
    pub fn landweber(&self, e_mea: &MeasurementVector) -> Result<ReconstructionResult> {
        let regs = vec![Regularizer::Identity; self.config().n_bim];
        self.run(e_mea, &regs)
    }

    /// Trained variant: step `i` uses network `i`.
    pub fn tbim(&self, e_mea: &MeasurementVector, nets: &[UNet]) -> Result<ReconstructionResult> {
        let config = self.config();
        if nets.len() != config.n_bim {
            return Err(Error::Contract(format!(
                "{} networks for {} outer steps",
                nets.len(),
                config.n_bim
            )));
        }
        UNet::check_grid(config.grid_ny, config.grid_nx)?;
        let regs: Vec<_> = nets.iter().map(Regularizer::Network).collect();
        self.run(e_mea, &regs)
    }
}

pub fn sbim(config: &ProblemConfig, e_mea: &MeasurementVector) -> Result<ReconstructionResult> {
    BornIterative::new(config)?.sbim(e_mea)
}

pub fn tbim(
    config: &ProblemConfig,
    e_mea: &MeasurementVector,
    weights: &[UNetWeights],
) -> Result<ReconstructionResult> {
    let nets = weights.iter().map(UNet::from_weights).collect::<Result<Vec<_>>>()?;
    BornIterative::new(config)?.tbim(e_mea, &nets)
}
