//! Data and state equations of the contrast-field formulation.
//!
//! State:  `(I + A D(t)) e_tot = e_inc` per transmitter.
//! Data:   `e_sca = G D(e_tot) t`, cascaded transmitter-major.

use ndarray::{Array1, ArrayView1, Zip};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::bicgstab::{bicgstab, LinearOperator};
use crate::config::{ProblemConfig, Snr};
use crate::convolution::DomainConvolution;
use crate::error::{Error, Result};
use crate::fields::{ContrastImage, FieldKind, FieldSet, MeasurementVector};
use crate::greens::{build_greens, incident_fields, GreensOperators};
use crate::linalg::{all_finite, matvec, norm2_sqr, CVector};

/// Iteration budget for the BiCGStab state solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSolve {
    pub max_iters: usize,
    pub tol: f64,
}

impl StateSolve {
    /// Exactly `iterations` steps, no tolerance test. Used inside the
    /// reconstruction loops.
    pub fn fixed(iterations: usize) -> Self {
        Self {
            max_iters: iterations,
            tol: 0.0,
        }
    }

    /// Converged solve used to synthesize measurements.
    pub fn accurate() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-10,
        }
    }
}

/// `x ↦ x + A (t ∘ x)`, with `A` applied through its FFT form.
pub struct StateOperator<'a> {
    a_conv: &'a DomainConvolution,
    t: ArrayView1<'a, Complex64>,
}

impl<'a> StateOperator<'a> {
    pub fn new(ops: &'a GreensOperators, t: ArrayView1<'a, Complex64>) -> Self {
        Self { a_conv: &ops.a_conv, t }
    }
}

impl LinearOperator for StateOperator<'_> {
    fn dim(&self) -> usize {
        self.t.len()
    }

    fn apply(&self, x: ArrayView1<Complex64>) -> CVector {
        let weighted = &self.t * &x;
        let mut y = self.a_conv.apply(weighted.view());
        y += &x;
        y
    }
}

fn check_contrast(ops: &GreensOperators, t: &ContrastImage) -> Result<()> {
    if t.len() != ops.pixel_count() {
        return Err(Error::Contract(format!(
            "contrast has {} pixels, operators have {}",
            t.len(),
            ops.pixel_count()
        )));
    }
    Ok(())
}

/// Total fields for contrast `t`, one BiCGStab solve per transmitter started
/// from the incident field.
pub fn solve_state(
    ops: &GreensOperators,
    t: &ContrastImage,
    e_inc: &FieldSet,
    solve: StateSolve,
) -> Result<FieldSet> {
    check_contrast(ops, t)?;
    e_inc.expect(FieldKind::Incident, ops.pixel_count())?;
    let op = StateOperator::new(ops, t.t.view());
    let per_tx = e_inc
        .per_tx
        .par_iter()
        .enumerate()
        .map(|(tx, inc)| {
            let out = bicgstab(&op, inc.view(), inc.view(), solve.max_iters, solve.tol)?;
            if out.breakdown || !all_finite(out.x.view()) {
                return Err(Error::Numerical(format!(
                    "state solve for transmitter {tx} broke down (relative residual {:.3e})",
                    out.residual
                )));
            }
            if solve.tol > 0.0 && out.residual > solve.tol {
                return Err(Error::Numerical(format!(
                    "state solve for transmitter {tx} stalled at relative residual {:.3e} after {} iterations",
                    out.residual, out.iterations
                )));
            }
            Ok(out.x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldSet {
        per_tx,
        kind: FieldKind::Total,
    })
}

/// `G D(e_tot) t` per transmitter, cascaded.
pub fn scattered_fields(
    ops: &GreensOperators,
    t: &ContrastImage,
    e_tot: &FieldSet,
) -> Result<MeasurementVector> {
    check_contrast(ops, t)?;
    e_tot.expect(FieldKind::Total, ops.pixel_count())?;
    let rx = ops.rx_count();
    let mut data = Array1::zeros(rx * e_tot.tx_count());
    for (tx, field) in e_tot.per_tx.iter().enumerate() {
        let currents = field * &t.t;
        let block = matvec(ops.g_rx.view(), currents.view());
        data.slice_mut(ndarray::s![tx * rx..(tx + 1) * rx]).assign(&block);
    }
    MeasurementVector::new(data, e_tot.tx_count(), rx)
}

/// Operators and incident fields for one configuration, reusable across
/// many scenes.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    pub config: ProblemConfig,
    pub ops: GreensOperators,
    pub e_inc: FieldSet,
}

impl ForwardModel {
    pub fn new(config: &ProblemConfig) -> Result<Self> {
        Ok(Self {
            config: config.clone(),
            ops: build_greens(config)?,
            e_inc: incident_fields(config)?,
        })
    }

    /// Noiseless measurements from a converged state solve.
    pub fn solve(&self, t: &ContrastImage) -> Result<MeasurementVector> {
        let e_tot = solve_state(&self.ops, t, &self.e_inc, StateSolve::accurate())?;
        scattered_fields(&self.ops, t, &e_tot)
    }

    /// Born-approximate measurements (`e_tot := e_inc`).
    pub fn born(&self, t: &ContrastImage) -> Result<MeasurementVector> {
        scattered_fields(&self.ops, t, &self.e_inc.as_total())
    }
}

/// Builds the operators, solves the state equation accurately and returns the
/// noiseless cascaded scattered field.
pub fn forward_solve(config: &ProblemConfig, t: &ContrastImage) -> Result<MeasurementVector> {
    ForwardModel::new(config)?.solve(t)
}

/// Adds circular white Gaussian noise at the requested SNR.
///
/// The total noise power is `‖e‖² / 10^(snr/10)`, spread evenly over the
/// entries and split equally between real and imaginary parts. Noiseless
/// returns the input unchanged.
pub fn add_noise(e_sca: &MeasurementVector, snr: Snr, seed: u64) -> MeasurementVector {
    let db = match snr {
        Snr::Noiseless => return e_sca.clone(),
        Snr::Db(db) => db,
    };
    let len = e_sca.len().max(1) as f64;
    let variance = norm2_sqr(e_sca.data.view()) / (len * 10f64.powf(db / 10.0));
    let component = Normal::new(0.0, (0.5 * variance).sqrt()).expect("finite noise level");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = e_sca.data.clone();
    Zip::from(&mut data).for_each(|z| {
        let re = component.sample(&mut rng);
        let im = component.sample(&mut rng);
        *z += Complex64::new(re, im);
    });
    MeasurementVector {
        data,
        ..*e_sca
    }
}
