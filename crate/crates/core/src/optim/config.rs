//! Training configuration and the noise calibration rule.

use crate::error::{invalid, Error, Result};
use crate::privacy::ZcdpBudget;

/// Step sizes `eta_t`.
#[derive(Clone, Debug, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// One entry per iteration across all epochs.
    PerIteration(Vec<f64>),
}

impl StepSchedule {
    pub fn at(&self, t: usize) -> f64 {
        match self {
            Self::Constant(eta) => *eta,
            Self::PerIteration(v) => v[t],
        }
    }

    fn validate(&self, total: usize) -> Result<()> {
        let ok = |e: &f64| e.is_finite() && *e >= 0.0;
        match self {
            Self::Constant(eta) if ok(eta) => Ok(()),
            Self::Constant(eta) => invalid(format!("step size must be finite and nonnegative, got {eta}")),
            Self::PerIteration(v) if v.len() < total => {
                invalid(format!("step schedule has {} entries for {total} iterations", v.len()))
            }
            Self::PerIteration(v) if v.iter().all(ok) => Ok(()),
            Self::PerIteration(_) => invalid("step sizes must be finite and nonnegative"),
        }
    }
}

/// Hyperparameters shared by the gradient methods.
///
/// `iterations` counts steps per epoch. With private batches drawn without
/// replacement, one epoch touches each private sample at most once, so
/// `iterations * k_priv <= n_priv` is required. Multi-epoch runs split the
/// budget evenly across epochs.
#[derive(Clone, Debug, PartialEq)]
pub struct SgdConfig {
    pub iterations: usize,
    pub epochs: usize,
    pub clip_c: f64,
    pub step_sizes: StepSchedule,
    pub k_priv: usize,
    pub k_pub: usize,
    pub alpha: f64,
    /// Noise variance; `None` uses the calibration floor.
    pub noise_sigma2: Option<f64>,
    /// Radius of the feasible ball; `f64::INFINITY` disables projection.
    pub domain_radius: f64,
    pub warm_start: bool,
    pub rescale_public: bool,
    /// Return the uniform average of the iterates instead of the last one.
    pub average_iterates: bool,
    pub record_trace: bool,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            epochs: 1,
            clip_c: 1.0,
            step_sizes: StepSchedule::Constant(0.1),
            k_priv: 10,
            k_pub: 10,
            alpha: 0.5,
            noise_sigma2: None,
            domain_radius: f64::INFINITY,
            warm_start: false,
            rescale_public: true,
            average_iterates: false,
            record_trace: false,
        }
    }
}

/// Smallest noise variance making `epochs` passes with batch `k_priv` and clip `c` `rho`-zCDP.
pub fn noise_floor(clip_c: f64, k_priv: usize, rho: ZcdpBudget, epochs: usize) -> f64 {
    2.0 * clip_c * clip_c * epochs as f64 / (rho.rho() * (k_priv * k_priv) as f64)
}

impl SgdConfig {
    pub fn total_steps(&self) -> usize {
        self.iterations * self.epochs
    }

    pub(crate) fn validate_common(&self) -> Result<()> {
        if self.iterations == 0 || self.epochs == 0 {
            return invalid("iterations and epochs must be at least 1");
        }
        if !(self.clip_c > 0.0) || !self.clip_c.is_finite() {
            return invalid(format!("clip threshold must be positive and finite, got {}", self.clip_c));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return invalid(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(self.domain_radius > 0.0) {
            return invalid(format!("domain radius must be positive, got {}", self.domain_radius));
        }
        if let Some(s) = self.noise_sigma2 {
            if !(s >= 0.0) || !s.is_finite() {
                return invalid(format!("noise variance must be finite and nonnegative, got {s}"));
            }
        }
        self.step_sizes.validate(self.total_steps())
    }

    /// Checks the weighted private/public configuration against pool sizes and
    /// returns the noise variance to use.
    pub(crate) fn calibrate(&self, n_priv: usize, n_pub: usize, rho: ZcdpBudget) -> Result<f64> {
        self.validate_common()?;
        if self.k_priv > n_priv {
            return invalid(format!("private batch {} exceeds {n_priv} private samples", self.k_priv));
        }
        if self.k_pub > n_pub {
            return invalid(format!("public batch {} exceeds {n_pub} public samples", self.k_pub));
        }
        if self.alpha > 0.0 && self.k_priv == 0 {
            return invalid("a private batch of size 0 requires alpha = 0");
        }
        if self.alpha < 1.0 && self.k_pub == 0 {
            return invalid("alpha < 1 requires a nonempty public batch");
        }
        if self.alpha == 0.0 {
            return Ok(self.noise_sigma2.unwrap_or(0.0));
        }
        if self.iterations * self.k_priv > n_priv {
            return Err(Error::PrivacyCalibration(format!(
                "{} iterations of {} private samples exceed the {n_priv} private samples available per epoch",
                self.iterations, self.k_priv
            )));
        }
        let floor = noise_floor(self.clip_c, self.k_priv, rho, self.epochs);
        match self.noise_sigma2 {
            None => Ok(floor),
            Some(s) if s >= floor * (1.0 - 1e-12) => Ok(s),
            Some(s) => Err(Error::PrivacyCalibration(format!(
                "noise variance {s} is below the calibration floor 2 C^2 E / (rho K_priv^2) = {floor}"
            ))),
        }
    }
}
