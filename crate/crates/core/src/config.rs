//! Imaging geometry, discretization and iteration settings.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Signal-to-noise condition of the measurements.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Snr {
    #[default]
    Noiseless,
    Db(f64),
}

impl Snr {
    /// Short label used for directory names and report rows, e.g. `25dB`.
    pub fn label(&self) -> String {
        match self {
            Snr::Noiseless => "noiseless".to_string(),
            Snr::Db(db) => format!("{db}dB"),
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Snr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("noiseless") {
            return Ok(Snr::Noiseless);
        }
        let number = s
            .strip_suffix("dB")
            .or_else(|| s.strip_suffix("db"))
            .unwrap_or(s);
        number
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Snr::Db)
            .ok_or_else(|| Error::Config(format!("invalid SNR `{s}`; expected `noiseless` or dB")))
    }
}

impl Serialize for Snr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Snr::Noiseless => serializer.serialize_str("noiseless"),
            Snr::Db(db) => serializer.serialize_f64(*db),
        }
    }
}

impl<'de> Deserialize<'de> for Snr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct SnrVisitor;

        impl Visitor<'_> for SnrVisitor {
            type Value = Snr;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number of dB or the string \"noiseless\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Snr, E> {
                Ok(Snr::Db(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Snr, E> {
                Ok(Snr::Db(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Snr, E> {
                Ok(Snr::Db(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Snr, E> {
                v.parse().map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }

        deserializer.deserialize_any(SnrVisitor)
    }
}

/// Everything needed to set up one imaging problem.
///
/// The investigation domain is a `grid_nx × grid_ny` block of square pixels
/// centred at the origin. Transmitters and receivers sit equispaced on a
/// circle of radius `transceiver_radius_m` around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub frequency_hz: f64,
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub pixel_size_m: f64,
    pub tx_count: usize,
    pub rx_count: usize,
    pub transceiver_radius_m: f64,
    /// Outer Born iterations.
    pub n_bim: usize,
    /// Landweber iterations inside each outer step.
    pub n_lwb: usize,
    /// BiCGStab iterations for the state update during reconstruction.
    pub n_bcg: usize,
    /// Power iterations used to normalize the step length.
    pub n_pow: usize,
    /// Soft-threshold level for the sparse variant.
    pub sbim_delta: f64,
    pub snr_db: Snr,
}

impl Default for ProblemConfig {
    /// Desk-scale default: 110 MHz, 32×32 grid of 0.15 m pixels, 16
    /// transmitters and 32 receivers on a 4 m circle.
    fn default() -> Self {
        Self {
            frequency_hz: 110e6,
            grid_nx: 32,
            grid_ny: 32,
            pixel_size_m: 0.15,
            tx_count: 16,
            rx_count: 32,
            transceiver_radius_m: 4.0,
            n_bim: 3,
            n_lwb: 6,
            n_bcg: 4,
            n_pow: 5,
            sbim_delta: 0.001,
            snr_db: Snr::Noiseless,
        }
    }
}

impl ProblemConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let config: Self =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return fail(format!("frequency_hz must be positive, got {}", self.frequency_hz));
        }
        if self.grid_nx == 0 || self.grid_ny == 0 {
            return fail("grid dimensions must be positive".into());
        }
        if !(self.pixel_size_m.is_finite() && self.pixel_size_m > 0.0) {
            return fail(format!("pixel_size_m must be positive, got {}", self.pixel_size_m));
        }
        if self.tx_count == 0 || self.rx_count == 0 {
            return fail("tx_count and rx_count must be positive".into());
        }
        let half_diagonal = 0.5 * self.domain_width().hypot(self.domain_height());
        if !(self.transceiver_radius_m.is_finite() && self.transceiver_radius_m > half_diagonal) {
            return fail(format!(
                "transceiver_radius_m = {} must exceed the half diagonal {half_diagonal:.4} of the domain",
                self.transceiver_radius_m
            ));
        }
        for (name, value) in [
            ("n_bim", self.n_bim),
            ("n_lwb", self.n_lwb),
            ("n_bcg", self.n_bcg),
            ("n_pow", self.n_pow),
        ] {
            if value == 0 {
                return fail(format!("{name} must be at least 1"));
            }
        }
        if !(self.sbim_delta.is_finite() && self.sbim_delta >= 0.0) {
            return fail(format!("sbim_delta must be nonnegative, got {}", self.sbim_delta));
        }
        if let Snr::Db(db) = self.snr_db {
            if !db.is_finite() {
                return fail("snr_db must be finite".into());
            }
        }
        Ok(())
    }

    /// Number of pixels N.
    pub fn pixel_count(&self) -> usize {
        self.grid_nx * self.grid_ny
    }

    /// Length of a cascaded measurement vector.
    pub fn measurement_len(&self) -> usize {
        self.tx_count * self.rx_count
    }

    /// Background wavenumber k0 = 2πf/c.
    pub fn k0(&self) -> f64 {
        2.0 * PI * self.frequency_hz / SPEED_OF_LIGHT
    }

    pub fn domain_width(&self) -> f64 {
        self.grid_nx as f64 * self.pixel_size_m
    }

    pub fn domain_height(&self) -> f64 {
        self.grid_ny as f64 * self.pixel_size_m
    }

    /// Centre of pixel `n`; pixels are stored row-major with x varying fastest.
    pub fn pixel_center(&self, n: usize) -> (f64, f64) {
        let ix = n % self.grid_nx;
        let iy = n / self.grid_nx;
        (
            (ix as f64 + 0.5) * self.pixel_size_m - 0.5 * self.domain_width(),
            (iy as f64 + 0.5) * self.pixel_size_m - 0.5 * self.domain_height(),
        )
    }

    pub fn tx_position(&self, index: usize) -> (f64, f64) {
        circle_point(self.transceiver_radius_m, index, self.tx_count)
    }

    pub fn rx_position(&self, index: usize) -> (f64, f64) {
        circle_point(self.transceiver_radius_m, index, self.rx_count)
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

fn circle_point(radius: f64, index: usize, count: usize) -> (f64, f64) {
    let angle = 2.0 * PI * index as f64 / count as f64;
    (radius * angle.cos(), radius * angle.sin())
}
