//! Privacy budgets and the zCDP to approximate-DP conversion.

use crate::error::{invalid, Result};

/// An `(epsilon, delta)` pair with `epsilon >= 0` and `0 <= delta < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || epsilon.is_nan() {
            return invalid(format!("epsilon must be nonnegative, got {epsilon}"));
        }
        if !(0.0..1.0).contains(&delta) {
            return invalid(format!("delta must lie in [0, 1), got {delta}"));
        }
        Ok(Self { epsilon, delta })
    }

    /// Pure `epsilon`-DP.
    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// A zero-concentrated DP budget `rho > 0`. Compositions add in `rho`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZcdpBudget {
    rho: f64,
}

impl ZcdpBudget {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return invalid(format!("rho must be positive, got {rho}"));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Splits the budget evenly over `parts` sequentially composed releases.
    pub fn split(&self, parts: usize) -> Result<Self> {
        if parts == 0 {
            return invalid("cannot split a budget into zero parts");
        }
        Self::new(self.rho / parts as f64)
    }

    pub fn compose(&self, other: &ZcdpBudget) -> Self {
        Self {
            rho: self.rho + other.rho,
        }
    }
}

/// A `rho`-zCDP mechanism is `(rho + 2 sqrt(rho ln(1/delta)), delta)`-DP.
pub fn zcdp_to_approx_dp(rho: ZcdpBudget, delta: f64) -> Result<PrivacyBudget> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    let r = rho.rho();
    let eps = r + 2.0 * (r * (1.0 / delta).ln()).sqrt();
    PrivacyBudget::new(eps, delta)
}

/// Largest `rho` whose conversion at `delta` does not exceed `epsilon`.
///
/// Inverts the conversion above: with `L = ln(1/delta)`,
/// `sqrt(rho) = sqrt(L + epsilon) - sqrt(L)`.
pub fn approx_dp_to_zcdp(budget: PrivacyBudget) -> Result<ZcdpBudget> {
    let (eps, delta) = (budget.epsilon(), budget.delta());
    if !(delta > 0.0) {
        return invalid("converting to zCDP requires delta > 0");
    }
    if !(eps > 0.0) {
        return invalid("converting to zCDP requires epsilon > 0");
    }
    let l = (1.0 / delta).ln();
    // sqrt(L + eps) - sqrt(L) written to avoid cancellation for small eps
    let root = eps / ((l + eps).sqrt() + l.sqrt());
    ZcdpBudget::new(root * root)
}

/// Norm bound `B` and per-sample standard deviation `V` of a bounded distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundedDistSpec {
    bound_b: f64,
    stddev_v: f64,
}

impl BoundedDistSpec {
    pub fn new(bound_b: f64, stddev_v: f64) -> Result<Self> {
        if !(bound_b > 0.0) || !bound_b.is_finite() {
            return invalid(format!("bound B must be positive and finite, got {bound_b}"));
        }
        if !(stddev_v >= 0.0) {
            return invalid(format!("stddev V must be nonnegative, got {stddev_v}"));
        }
        if stddev_v > bound_b {
            return invalid(format!("stddev V = {stddev_v} exceeds bound B = {bound_b}"));
        }
        Ok(Self { bound_b, stddev_v })
    }

    pub fn bound_b(&self) -> f64 {
        self.bound_b
    }

    pub fn stddev_v(&self) -> f64 {
        self.stddev_v
    }
}
