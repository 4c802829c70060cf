use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::fields::ContrastImage;

pub const MAX_TARGETS: usize = 3;
pub const CONTRAST_RANGE: (f64, f64) = (0.1, 0.9);
/// Placement attempts per target before the scene settles for fewer.
pub const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub contrast: f64,
}

impl Cylinder {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.center_x).hypot(y - self.center_y) <= self.radius
    }

    pub fn overlaps(&self, other: &Cylinder) -> bool {
        (self.center_x - other.center_x).hypot(self.center_y - other.center_y)
            < self.radius + other.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub cylinders: Vec<Cylinder>,
    pub seed: u64,
}

/// Radius range for random targets, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub r_min: f64,
    pub r_max: f64,
}

impl SceneParams {
    /// `[2Δd, 8Δd]`.
    pub fn for_config(config: &ProblemConfig) -> Self {
        Self {
            r_min: 2.0 * config.pixel_size_m,
            r_max: 8.0 * config.pixel_size_m,
        }
    }

    pub fn validate(&self, config: &ProblemConfig) -> Result<()> {
        let half = 0.5 * config.domain_width().min(config.domain_height());
        if !(self.r_min.is_finite() && self.r_max.is_finite() && self.r_min > 0.0) {
            return Err(Error::Config(format!(
                "radius range [{}, {}] must be positive and finite",
                self.r_min, self.r_max
            )));
        }
        if self.r_min > self.r_max {
            return Err(Error::Config(format!(
                "r_min = {} exceeds r_max = {}",
                self.r_min, self.r_max
            )));
        }
        if self.r_max > half {
            return Err(Error::Config(format!(
                "radius range [{}, {}] does not fit in the half-domain {half}",
                self.r_min, self.r_max
            )));
        }
        Ok(())
    }
}

fn sample_cylinder(rng: &mut ChaCha8Rng, params: &SceneParams, config: &ProblemConfig) -> Cylinder {
    let radius = if params.r_max > params.r_min {
        rng.random_range(params.r_min..=params.r_max)
    } else {
        params.r_min
    };
    let half_x = 0.5 * config.domain_width() - radius;
    let half_y = 0.5 * config.domain_height() - radius;
    let coord = |rng: &mut ChaCha8Rng, half: f64| if half > 0.0 { rng.random_range(-half..=half) } else { 0.0 };
    let center_x = coord(rng, half_x);
    let center_y = coord(rng, half_y);
    Cylinder {
        center_x,
        center_y,
        radius,
        contrast: rng.random_range(CONTRAST_RANGE.0..=CONTRAST_RANGE.1),
    }
}

/// Draws one to three disjoint cylinders, fully inside the domain.
///
/// The target count is uniform on {1, 2, 3}. A candidate that overlaps an
/// accepted cylinder is redrawn; after [`MAX_ATTEMPTS`] failures the scene
/// keeps the cylinders placed so far.
pub fn random_scene(params: &SceneParams, config: &ProblemConfig, seed: u64) -> Result<SceneSpec> {
    params.validate(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(1..=MAX_TARGETS);
    let mut cylinders: Vec<Cylinder> = Vec::with_capacity(count);
    'targets: for _ in 0..count {
        for _ in 0..MAX_ATTEMPTS {
            let candidate = sample_cylinder(&mut rng, params, config);
            if cylinders.iter().all(|c| !c.overlaps(&candidate)) {
                cylinders.push(candidate);
                continue 'targets;
            }
        }
        break;
    }
    Ok(SceneSpec { cylinders, seed })
}

impl SceneSpec {
    pub fn validate(&self, params: &SceneParams, config: &ProblemConfig) -> Result<()> {
        if self.cylinders.is_empty() || self.cylinders.len() > MAX_TARGETS {
            return Err(Error::Contract(format!(
                "scene has {} cylinders, expected 1 to {MAX_TARGETS}",
                self.cylinders.len()
            )));
        }
        let (hw, hh) = (0.5 * config.domain_width(), 0.5 * config.domain_height());
        let eps = 1e-12;
        for (i, c) in self.cylinders.iter().enumerate() {
            if !(CONTRAST_RANGE.0..=CONTRAST_RANGE.1).contains(&c.contrast) {
                return Err(Error::Contract(format!("cylinder {i}: contrast {} out of range", c.contrast)));
            }
            if c.radius < params.r_min - eps || c.radius > params.r_max + eps {
                return Err(Error::Contract(format!("cylinder {i}: radius {} out of range", c.radius)));
            }
            if c.center_x.abs() + c.radius > hw + eps || c.center_y.abs() + c.radius > hh + eps {
                return Err(Error::Contract(format!("cylinder {i} extends outside the domain")));
            }
            if self.cylinders[..i].iter().any(|o| o.overlaps(c)) {
                return Err(Error::Contract(format!("cylinder {i} overlaps an earlier one")));
            }
        }
        Ok(())
    }
}

/// Pixel value is the contrast of the cylinder containing the pixel centre,
/// zero elsewhere.
pub fn rasterize(scene: &SceneSpec, config: &ProblemConfig) -> ContrastImage {
    let values: Vec<f64> = (0..config.pixel_count())
        .map(|n| {
            let (x, y) = config.pixel_center(n);
            scene
                .cylinders
                .iter()
                .find(|c| c.contains(x, y))
                .map_or(0.0, |c| c.contrast)
        })
        .collect();
    ContrastImage::from_real(&values, config.grid_nx, config.grid_ny).expect("grid-sized image")
}
