//! Two-dimensional contrast-field electromagnetic imaging.
//!
//! The crate is organised around the reconstruction pipeline:
//!
//! * [`greens`], [`forward`] and [`bicgstab`] build the method-of-moments
//!   operators and solve the data and state equations.
//! * [`inverse`] holds the linear machinery (power iteration, Landweber,
//!   shrinkage) and the outer Born iterative loops, both the sparse variant
//!   and the network-regularized one.
//! * [`nn`] is a small float32 inference engine for the U-net regularizer
//!   together with its portable weight format.
//! * [`dataset`] generates randomized cylinder scenes and their simulated
//!   measurements.

pub mod bicgstab;
pub mod config;
pub mod convolution;
pub mod dataset;
pub mod error;
pub mod fields;
pub mod forward;
pub mod greens;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod nn;
pub mod report;
pub mod special;

pub use config::{ProblemConfig, Snr};
pub use error::{Error, FormatError, Result};
pub use fields::{ContrastImage, FieldKind, FieldSet, MeasurementVector};
pub use forward::{add_noise, forward_solve, ForwardModel, StateSolve};
pub use greens::{build_greens, GreensOperators};
pub use inverse::{
    rne, mrne, sbim, tbim, BornIterative, ObservationMatrix, Regularizer, ReconstructionResult,
};
pub use nn::{Tensor, UNet, UNetWeights};

pub use num_complex::Complex64;
