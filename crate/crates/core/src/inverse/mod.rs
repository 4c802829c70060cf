//! Linear inverse machinery and the outer Born iterative loops.

mod bim;
mod export;
mod ista;
mod metrics;
mod observation;
mod power;

pub use bim::{sbim, tbim, BornIterative, ReconstructionResult, POWER_SEED};
pub use export::{load_result, save_result, ResultManifest, ResultOrigin};
pub use ista::{landweber_step, soft_threshold, tista, Regularizer};
pub use metrics::{mrne, rne};
pub use observation::{assemble_observation, ObservationMatrix};
pub use power::{power_iteration, SpectralEstimate};
