//! Sample-size planning: how many samples make a signal with a given bias
//! or spectral mass distinguishable from uniform noise.
//!
//! With detection constant `c = 8 ln 2` the signal is detectable from `N`
//! samples iff `sum_{i != 0} fhat(i)^2 >= c / N`, equivalently
//! `SNR = N * mass >= c`. For `n = 1` this reads `|d| >= sqrt(c / N)`.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::spectral::{spectral_mass, Distribution};
use crate::{Error, Result};

/// `8 ln 2`, the constant of the capacity-based bound.
pub const SHANNON_CONSTANT: f64 = 8.0 * LN_2;
/// `4 ln 2`, the squared-Euclidean-imbalance constant used by classical
/// distinguisher analyses. Exposed for comparison runs only.
pub const SEI_CONSTANT: f64 = 4.0 * LN_2;

/// Planner parameterised by the detection constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Planner {
    pub constant: f64,
}

impl Default for Planner {
    fn default() -> Self {
        Self {
            constant: SHANNON_CONSTANT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub condition_met: bool,
    /// `mass - c / N`; its sign agrees with `condition_met`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionPlan {
    /// Samples required to detect the given mass.
    pub min_samples: u64,
    /// Sample budget the remaining fields are evaluated at: the supplied `N`,
    /// or `min_samples` when none was given.
    pub sample_budget: u64,
    /// Smallest detectable bias at the budget (`n = 1` reading).
    pub min_bias: f64,
    /// Smallest detectable spectral mass at the budget.
    pub min_spectral_mass: f64,
    pub spectral_mass: f64,
    pub snr: f64,
    pub condition_met: bool,
    pub margin: f64,
}

fn check_mass(mass: f64) -> Result<()> {
    if !mass.is_finite() || mass < 0.0 {
        return Err(Error::Argument(format!(
            "spectral mass {mass} must be finite and >= 0"
        )));
    }
    Ok(())
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::Argument("sample count must be at least 1".into()));
    }
    Ok(())
}

impl Planner {
    pub fn new(constant: f64) -> Result<Self> {
        if !(constant > 0.0) || !constant.is_finite() {
            return Err(Error::Argument(format!(
                "constant {constant} must be positive"
            )));
        }
        Ok(Self { constant })
    }

    /// `ceil(c / d^2)`.
    pub fn classical_sample_size(&self, d: f64) -> Result<u64> {
        if d == 0.0 {
            return Err(Error::Undetectable("bias is zero".into()));
        }
        if !(d.abs() <= 1.0) {
            return Err(Error::Argument(format!("bias {d} outside [-1, 1]")));
        }
        Ok(self.samples_for_mass(d * d))
    }

    fn samples_for_mass(&self, mass: f64) -> u64 {
        (self.constant / mass).ceil().max(1.0) as u64
    }

    /// `ceil(c / mass)`.
    pub fn sample_size_for_mass(&self, mass: f64) -> Result<u64> {
        check_mass(mass)?;
        if mass == 0.0 {
            return Err(Error::Undetectable("spectral mass is zero".into()));
        }
        Ok(self.samples_for_mass(mass))
    }

    /// `sqrt(c) / sqrt(N)`.
    pub fn min_detectable_bias(&self, samples: u64) -> Result<f64> {
        check_samples(samples)?;
        Ok(self.constant.sqrt() / (samples as f64).sqrt())
    }

    pub fn generic_condition(&self, mass: f64, samples: u64) -> Result<Condition> {
        check_mass(mass)?;
        check_samples(samples)?;
        let n = samples as f64;
        let snr = n * mass;
        Ok(Condition {
            condition_met: snr >= self.constant,
            margin: (snr - self.constant) / n,
        })
    }

    pub fn generic_condition_for(&self, f: &Distribution, samples: u64) -> Result<Condition> {
        self.generic_condition(spectral_mass(f), samples)
    }

    /// Plan for a known spectral mass; with `samples = None` the budget is the
    /// minimum sample size itself.
    pub fn plan_for_mass(&self, mass: f64, samples: Option<u64>) -> Result<DetectionPlan> {
        let min_samples = self.sample_size_for_mass(mass)?;
        let budget = samples.unwrap_or(min_samples);
        let condition = self.generic_condition(mass, budget)?;
        Ok(DetectionPlan {
            min_samples,
            sample_budget: budget,
            min_bias: self.min_detectable_bias(budget)?,
            min_spectral_mass: self.constant / budget as f64,
            spectral_mass: mass,
            snr: budget as f64 * mass,
            condition_met: condition.condition_met,
            margin: condition.margin,
        })
    }

    pub fn plan_for_bias(&self, d: f64, samples: Option<u64>) -> Result<DetectionPlan> {
        self.classical_sample_size(d)?;
        self.plan_for_mass(d * d, samples)
    }

    pub fn plan_for_distribution(
        &self,
        f: &Distribution,
        samples: Option<u64>,
    ) -> Result<DetectionPlan> {
        self.plan_for_mass(spectral_mass(f), samples)
    }
}

/// `ceil(8 ln 2 / d^2)`, the minimum samples for a known bias `d`.
pub fn classical_sample_size(d: f64) -> Result<u64> {
    Planner::default().classical_sample_size(d)
}

/// `sqrt(8 ln 2 / N)`.
pub fn min_detectable_bias(samples: u64) -> Result<f64> {
    Planner::default().min_detectable_bias(samples)
}

pub fn generic_condition(mass: f64, samples: u64) -> Result<Condition> {
    Planner::default().generic_condition(mass, samples)
}

pub fn generic_condition_for(f: &Distribution, samples: u64) -> Result<Condition> {
    Planner::default().generic_condition_for(f, samples)
}

/// Spectral mass of a list of nontrivial coefficients.
pub fn mass_from_coefficients(coefficients: &[f64]) -> Result<f64> {
    if let Some(c) = coefficients
        .iter()
        .find(|c| !c.is_finite() || c.abs() > 1.0)
    {
        return Err(Error::Argument(format!("coefficient {c} outside [-1, 1]")));
    }
    Ok(coefficients.iter().map(|c| c * c).sum())
}

/// `N * mass`, the signal-to-noise ratio of the empirical spectrum.
pub fn snr(f: &Distribution, samples: u64) -> Result<f64> {
    check_samples(samples)?;
    Ok(samples as f64 * spectral_mass(f))
}
