//! Method-of-moments discretization of the 2D scalar Green's function.
//!
//! Pixel integrals of `G(r', r) = H0⁽²⁾(k0 |r' − r|) / 4j` are approximated by
//! a single midpoint sample, except on the diagonal of the domain operator
//! where the pixel is replaced by a disk of equal area and integrated
//! analytically.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::config::ProblemConfig;
use crate::convolution::DomainConvolution;
use crate::error::{Error, Result};
use crate::fields::{FieldKind, FieldSet};
use crate::linalg::CMatrix;
use crate::special::hankel2;

/// `1 / 4j`
const INV_4J: Complex64 = Complex64::new(0.0, -0.25);

/// Receiver and domain coupling matrices.
#[derive(Debug, Clone)]
pub struct GreensOperators {
    /// `rx_count × N`: pixel contrast currents to receiver fields.
    pub g_rx: CMatrix,
    /// `N × N`: pixel to pixel coupling, symmetric.
    pub a_dom: CMatrix,
    /// FFT form of `a_dom`, used for products inside the solvers.
    pub a_conv: DomainConvolution,
    pub k0: f64,
}

impl GreensOperators {
    pub fn pixel_count(&self) -> usize {
        self.a_dom.nrows()
    }

    pub fn rx_count(&self) -> usize {
        self.g_rx.nrows()
    }
}

/// Scalar Green's function `H0⁽²⁾(k0 d) / 4j` at distance `d > 0`.
pub fn greens_2d(k0: f64, distance: f64) -> Result<Complex64> {
    Ok(hankel2(0, k0 * distance)? * INV_4J)
}

/// Diagonal entry of the domain operator for a square pixel of side `pixel`,
/// using the disk of radius `a = pixel / √π`:
/// `k0/4j · (2πa/k0 · H1⁽²⁾(k0 a) − 4j/k0²)`.
pub fn self_term(k0: f64, pixel: f64) -> Result<Complex64> {
    let a = pixel / PI.sqrt();
    let disk_integral =
        (2.0 * PI * a / k0) * hankel2(1, k0 * a)? - Complex64::new(0.0, 4.0 / (k0 * k0));
    Ok(k0 * INV_4J * disk_integral)
}

/// Off-diagonal coupling `k0 Δd² G(d)` for the midpoint rule.
fn coupling(k0: f64, pixel: f64, distance: f64) -> Result<Complex64> {
    Ok(k0 * pixel * pixel * greens_2d(k0, distance)?)
}

pub fn build_greens(config: &ProblemConfig) -> Result<GreensOperators> {
    config.validate()?;
    let k0 = config.k0();
    let dd = config.pixel_size_m;
    let (nx, ny) = (config.grid_nx, config.grid_ny);
    let n = config.pixel_count();

    let mut g_rx = Array2::zeros((config.rx_count, n));
    for m in 0..config.rx_count {
        let (rx, ry) = config.rx_position(m);
        for p in 0..n {
            let (px, py) = config.pixel_center(p);
            let d = (px - rx).hypot(py - ry);
            if d < 1e-9 * dd {
                return Err(Error::Config(format!("receiver {m} coincides with pixel {p}")));
            }
            g_rx[[m, p]] = coupling(k0, dd, d)?;
        }
    }

    // The coupling depends only on the integer pixel offset, so tabulate it
    // once per |dx|, |dy|.
    let mut table = Array2::zeros((ny, nx));
    for dy in 0..ny {
        for dx in 0..nx {
            table[[dy, dx]] = if dx == 0 && dy == 0 {
                self_term(k0, dd)?
            } else {
                coupling(k0, dd, dd * (dx as f64).hypot(dy as f64))?
            };
        }
    }
    let mut a_dom = Array2::zeros((n, n));
    for p in 0..n {
        let (px, py) = (p % nx, p / nx);
        for q in 0..n {
            let (qx, qy) = (q % nx, q / nx);
            a_dom[[p, q]] = table[[py.abs_diff(qy), px.abs_diff(qx)]];
        }
    }

    Ok(GreensOperators {
        g_rx,
        a_dom,
        a_conv: DomainConvolution::new(&table),
        k0,
    })
}

/// Unit-strength line-source fields `H0⁽²⁾(k0 |r_n − r_tx|) / 4j` at every
/// pixel centre.
pub fn incident_fields(config: &ProblemConfig) -> Result<FieldSet> {
    config.validate()?;
    let k0 = config.k0();
    let per_tx = (0..config.tx_count)
        .map(|tx| {
            let (sx, sy) = config.tx_position(tx);
            (0..config.pixel_count())
                .map(|p| {
                    let (px, py) = config.pixel_center(p);
                    greens_2d(k0, (px - sx).hypot(py - sy))
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldSet {
        per_tx,
        kind: FieldKind::Incident,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ProblemConfig {
        ProblemConfig {
            grid_nx: 6,
            grid_ny: 4,
            tx_count: 3,
            rx_count: 5,
            ..Default::default()
        }
    }

    #[test]
    fn domain_operator_is_exactly_symmetric() {
        let ops = build_greens(&small_config()).unwrap();
        let asym = (&ops.a_dom - &ops.a_dom.t())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert_eq!(asym, 0.0);
        assert!(ops.a_dom.iter().chain(ops.g_rx.iter()).all(|z| z.re.is_finite() && z.im.is_finite()));
    }

    #[test]
    fn receiver_entry_is_one_term_quadrature() {
        let config = small_config();
        let ops = build_greens(&config).unwrap();
        let k0 = config.k0();
        let (rx, ry) = config.rx_position(2);
        let (px, py) = config.pixel_center(7);
        let d = (px - rx).hypot(py - ry);
        let expected = k0 * 0.15 * 0.15 * hankel2(0, k0 * d).unwrap() / Complex64::new(0.0, 4.0);
        assert!((ops.g_rx[[2, 7]] - expected).norm() < 1e-15);
    }

    #[test]
    fn self_term_matches_sub_pixel_quadrature() {
        // Brute-force midpoint sum over 256×256 sub-cells of one pixel,
        // observation point at the pixel centre. Sub-cell centres never hit
        // the singular point because 256 is even.
        let k0 = 2.30538;
        let dd = 0.15;
        let m = 256;
        let h = dd / m as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                let x = -0.5 * dd + (i as f64 + 0.5) * h;
                let y = -0.5 * dd + (j as f64 + 0.5) * h;
                sum += hankel2(0, k0 * x.hypot(y)).unwrap();
            }
        }
        let brute = k0 * sum * h * h / Complex64::new(0.0, 4.0);
        let analytic = self_term(k0, dd).unwrap();
        let rel = (analytic - brute).norm() / brute.norm();
        assert!(rel < 0.01, "self term {analytic} vs quadrature {brute}, rel {rel}");
    }

    #[test]
    fn incident_field_shape_and_reference_value() {
        let config = small_config();
        let inc = incident_fields(&config).unwrap();
        assert_eq!(inc.per_tx.len(), 3);
        assert!(inc.per_tx.iter().all(|v| v.len() == 24));

        let k0 = config.k0();
        let g = greens_2d(k0, 1.0 / k0).unwrap();
        let expected = Complex64::new(0.765_197_686_6, -0.088_256_964_2) / Complex64::new(0.0, 4.0);
        assert!((g - expected).norm() < 1e-10);
    }

    #[test]
    fn incident_magnitude_decays_with_distance() {
        let k0 = 2.30538;
        let mut last = f64::INFINITY;
        for i in 0..200 {
            let d = (1.0 + 0.05 * i as f64) / k0;
            let mag = greens_2d(k0, d).unwrap().norm();
            assert!(mag < last);
            last = mag;
        }
    }
}
