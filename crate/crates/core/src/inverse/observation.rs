use std::ops::Deref;

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{ContrastImage, FieldKind, FieldSet, MeasurementVector};
use crate::greens::GreensOperators;
use crate::linalg::{matvec, matvec_adjoint, CMatrix, CVector};

/// Cascade of `G D(e_tot)` over transmitters, transmitter-major so that
/// `h · t` lines up with [`MeasurementVector`] ordering.
#[derive(Debug, Clone)]
pub struct ObservationMatrix {
    pub h: CMatrix,
    /// Outer iteration (1-based) whose total fields built this matrix.
    pub bim_step: usize,
}

impl ObservationMatrix {
    pub fn apply(&self, t: &ContrastImage) -> CVector {
        matvec(self.h.view(), t.t.view())
    }

    pub fn apply_adjoint(&self, r: &CVector) -> CVector {
        matvec_adjoint(self.h.view(), r.view())
    }

    pub(crate) fn check(&self, t: &ContrastImage, e_mea: &MeasurementVector) -> Result<()> {
        if self.h.ncols() != t.len() || self.h.nrows() != e_mea.len() {
            return Err(Error::Contract(format!(
                "observation matrix is {}×{}, contrast has {}, measurement has {}",
                self.h.nrows(),
                self.h.ncols(),
                t.len(),
                e_mea.len()
            )));
        }
        Ok(())
    }
}

impl Deref for ObservationMatrix {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.h
    }
}

pub fn assemble_observation(
    ops: &GreensOperators,
    e_tot: &FieldSet,
    bim_step: usize,
) -> Result<ObservationMatrix> {
    let n = ops.pixel_count();
    e_tot.expect(FieldKind::Total, n)?;
    let rx = ops.rx_count();
    let mut h: CMatrix = Array2::zeros((rx * e_tot.tx_count(), n));
    for (tx, field) in e_tot.per_tx.iter().enumerate() {
        let mut block = h.slice_mut(s![tx * rx..(tx + 1) * rx, ..]);
        for (mut row, g_row) in block.outer_iter_mut().zip(ops.g_rx.outer_iter()) {
            ndarray::Zip::from(&mut row)
                .and(&g_row)
                .and(field)
                .for_each(|h, &g, &e| *h = g * e);
        }
    }
    debug_assert!(h.iter().all(|z: &Complex64| z.is_finite()));
    Ok(ObservationMatrix { h, bim_step })
}
