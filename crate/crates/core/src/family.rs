//! Parameterized trial families for quotient minimization and sampling.
//!
//! Every family maps a small parameter vector to a nonzero radial profile.
//! Parameters live in log scale inside a bounded box; the box keeps the
//! optimizer away from profiles the finite grid cannot represent (width
//! comparable to the box, or needle-thin spikes), and `penalty` grades
//! violations smoothly so simplex steps that cross the wall still rank.

use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::grid::{RadialFunction, RadialGrid};

/// log(0.35): narrowest representable profile width.
const LOG_SIGMA_MIN: f64 = -1.0498221244986776;
/// log(10): widest profile width before box truncation bites.
const LOG_SIGMA_MAX: f64 = 2.302585092994046;
/// log(10): mixture amplitudes may differ by at most a factor of 100.
const LOG_AMP_BOUND: f64 = 2.302585092994046;
/// Quadratic wall strength outside the parameter box.
const PENALTY_STRENGTH: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    #[serde(rename = "single-gaussian")]
    SingleGaussian,
    #[serde(rename = "gaussian-mixture")]
    GaussianMixture,
    #[serde(rename = "exponential")]
    Exponential,
}

impl FromStr for FamilyKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single-gaussian" => Ok(FamilyKind::SingleGaussian),
            "gaussian-mixture" => Ok(FamilyKind::GaussianMixture),
            "exponential" => Ok(FamilyKind::Exponential),
            other => Err(CoreError::config(format!(
                "unknown family '{other}': expected single-gaussian, gaussian-mixture, or exponential"
            ))),
        }
    }
}

impl std::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FamilyKind::SingleGaussian => "single-gaussian",
            FamilyKind::GaussianMixture => "gaussian-mixture",
            FamilyKind::Exponential => "exponential",
        };
        f.write_str(s)
    }
}

/// A trial family over a fixed grid. Parameter layout:
/// single-gaussian and exponential take [log sigma]; gaussian-mixture takes
/// [log a1, log s1, log a2, log s2, log a3, log s3].
#[derive(Debug, Clone)]
pub struct TrialFamily {
    kind: FamilyKind,
    grid: Arc<RadialGrid>,
}

impl TrialFamily {
    pub fn new(kind: FamilyKind, grid: Arc<RadialGrid>) -> Self {
        TrialFamily { kind, grid }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            FamilyKind::SingleGaussian | FamilyKind::Exponential => 1,
            FamilyKind::GaussianMixture => 6,
        }
    }

    /// Canonical in-box start: a unit-width profile (for mixtures, three
    /// staggered widths with descending amplitudes).
    pub fn default_start(&self) -> Vec<f64> {
        match self.kind {
            FamilyKind::SingleGaussian | FamilyKind::Exponential => vec![0.0],
            FamilyKind::GaussianMixture => vec![0.0, 0.0, -0.7, 0.5, -1.4, -0.5],
        }
    }

    /// Uniform in-box parameter draw.
    pub fn random_start(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut params = Vec::with_capacity(self.dim());
        match self.kind {
            FamilyKind::SingleGaussian | FamilyKind::Exponential => {
                params.push(rng.gen_range(LOG_SIGMA_MIN..LOG_SIGMA_MAX));
            }
            FamilyKind::GaussianMixture => {
                for _ in 0..3 {
                    params.push(rng.gen_range(-LOG_AMP_BOUND..LOG_AMP_BOUND));
                    params.push(rng.gen_range(LOG_SIGMA_MIN..LOG_SIGMA_MAX));
                }
            }
        }
        params
    }

    /// Quadratic measure of how far the parameters sit outside the box.
    pub fn penalty(&self, params: &[f64]) -> f64 {
        let mut acc = 0.0;
        let wall = |v: f64, lo: f64, hi: f64| -> f64 {
            let excess = (lo - v).max(0.0) + (v - hi).max(0.0);
            excess * excess
        };
        match self.kind {
            FamilyKind::SingleGaussian | FamilyKind::Exponential => {
                acc += wall(params[0], LOG_SIGMA_MIN, LOG_SIGMA_MAX);
            }
            FamilyKind::GaussianMixture => {
                for k in 0..3 {
                    acc += wall(params[2 * k], -LOG_AMP_BOUND, LOG_AMP_BOUND);
                    acc += wall(params[2 * k + 1], LOG_SIGMA_MIN, LOG_SIGMA_MAX);
                }
            }
        }
        PENALTY_STRENGTH * acc
    }

    /// Builds the profile for an in-box (or mildly out-of-box) parameter
    /// vector. Widths are hard-clamped well outside the box so that even a
    /// wild simplex step cannot overflow the exponentials.
    pub fn materialize(&self, params: &[f64]) -> Result<RadialFunction> {
        if params.len() != self.dim() {
            return Err(CoreError::config(format!(
                "family {} expects {} parameters, got {}",
                self.kind,
                self.dim(),
                params.len()
            )));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::config("family parameters must be finite"));
        }
        let sigma_of = |log_sigma: f64| (log_sigma.clamp(-3.0, 3.5)).exp();
        match self.kind {
            FamilyKind::SingleGaussian => {
                RadialFunction::gaussian(self.grid.clone(), sigma_of(params[0]))
            }
            FamilyKind::Exponential => {
                let sigma = sigma_of(params[0]);
                RadialFunction::from_profile(self.grid.clone(), |r| (-r / sigma).exp())
            }
            FamilyKind::GaussianMixture => {
                let mut values = vec![0.0; self.grid.len()];
                for k in 0..3 {
                    let amp = params[2 * k].clamp(-3.0 * LOG_AMP_BOUND, 3.0 * LOG_AMP_BOUND).exp();
                    let sigma = sigma_of(params[2 * k + 1]);
                    let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.75);
                    for (i, &r) in self.grid.nodes().iter().enumerate() {
                        values[i] += amp * norm * (-r * r / (4.0 * sigma * sigma)).exp();
                    }
                }
                RadialFunction::new(self.grid.clone(), values)
            }
        }
    }
}
