//! Vectors living on the pixel grid or at the receivers.

use ndarray::Array1;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, CVector};

/// Complex contrast over the N pixels, row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastImage {
    pub t: CVector,
    pub nx: usize,
    pub ny: usize,
}

impl ContrastImage {
    pub fn new(t: CVector, nx: usize, ny: usize) -> Result<Self> {
        if t.len() != nx * ny {
            return Err(Error::Contract(format!(
                "contrast has {} entries, grid is {nx}×{ny}",
                t.len()
            )));
        }
        Ok(Self { t, nx, ny })
    }

    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            t: Array1::zeros(nx * ny),
            nx,
            ny,
        }
    }

    pub fn from_real(values: &[f64], nx: usize, ny: usize) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), nx, ny)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        all_finite(self.t.view())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            t: self.t.mapv(|z| z * factor),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Incident,
    Total,
}

/// One complex field vector over the pixels per transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub per_tx: Vec<CVector>,
    pub kind: FieldKind,
}

impl FieldSet {
    pub fn tx_count(&self) -> usize {
        self.per_tx.len()
    }

    /// Reinterpret as total fields (the Born initialization `e_tot = e_inc`).
    pub fn as_total(&self) -> FieldSet {
        FieldSet {
            per_tx: self.per_tx.clone(),
            kind: FieldKind::Total,
        }
    }

    pub(crate) fn expect(&self, kind: FieldKind, n: usize) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Contract(format!(
                "expected {kind:?} fields, got {:?}",
                self.kind
            )));
        }
        if let Some(bad) = self.per_tx.iter().position(|v| v.len() != n) {
            return Err(Error::Contract(format!(
                "field for transmitter {bad} has length {}, expected {n}",
                self.per_tx[bad].len()
            )));
        }
        Ok(())
    }
}

/// Scattered fields at the receivers, cascaded transmitter-major: all
/// receivers of transmitter 0, then transmitter 1, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    pub data: CVector,
    pub tx_count: usize,
    pub rx_count: usize,
}

impl MeasurementVector {
    pub fn new(data: CVector, tx_count: usize, rx_count: usize) -> Result<Self> {
        if data.len() != tx_count * rx_count {
            return Err(Error::Contract(format!(
                "measurement has {} entries, expected {tx_count}×{rx_count}",
                data.len()
            )));
        }
        Ok(Self {
            data,
            tx_count,
            rx_count,
        })
    }

    pub fn zeros(tx_count: usize, rx_count: usize) -> Self {
        Self {
            data: Array1::zeros(tx_count * rx_count),
            tx_count,
            rx_count,
        }
    }

    /// Entry for receiver `rx` under transmitter `tx`.
    pub fn at(&self, tx: usize, rx: usize) -> Complex64 {
        self.data[tx * self.rx_count + rx]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}
