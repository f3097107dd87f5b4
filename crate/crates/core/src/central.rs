//! Central-model semi-DP mean estimators and their exact worst-case MSE.
//!
//! All estimators here take the full dataset and release one noisy vector.
//! Only the private samples are protected; the public samples enter the
//! weighted sum without noise. Mechanisms stated for unit-ball data take an
//! explicit norm bound `B` and scale their sensitivity linearly in it; the
//! unit ball is `B = 1`.

use rand::Rng;

use crate::dataset::SplitDataset;
use crate::error::{invalid, Error, Result};
use crate::noise::{add_gaussian, add_laplace};
use crate::privacy::{BoundedDistSpec, PrivacyBudget, ZcdpBudget};

const BOUND_SLACK: f64 = 1e-9;

fn check_bounded(data: &SplitDataset, bound_b: f64) -> Result<()> {
    let m = data.max_norm();
    if m > bound_b * (1.0 + BOUND_SLACK) {
        return invalid(format!("sample norm {m} exceeds the declared bound {bound_b}"));
    }
    Ok(())
}

fn sum_of(data: &SplitDataset, select: impl Fn(usize) -> bool) -> Vec<f64> {
    let mut acc = vec![0.0; data.dim()];
    for i in (0..data.len()).filter(|&i| select(i)) {
        for (a, x) in acc.iter_mut().zip(data.sample(i)) {
            *a += x;
        }
    }
    acc
}

fn full_mean(data: &SplitDataset) -> Vec<f64> {
    let n = data.len() as f64;
    sum_of(data, |_| true).into_iter().map(|s| s / n).collect()
}

/// Average of the public samples. Consumes no privacy budget.
pub fn throwaway_mean(data: &SplitDataset) -> Result<Vec<f64>> {
    let n_pub = data.split_counts().n_pub;
    if n_pub == 0 {
        return invalid("throw-away estimation needs at least one public sample");
    }
    Ok(sum_of(data, |i| !data.is_private(i))
        .into_iter()
        .map(|s| s / n_pub as f64)
        .collect())
}

/// Per-coordinate Laplace scale `2 sqrt(d) B / (n eps)` of the pure-DP mean.
pub fn laplace_scale(n: usize, d: usize, epsilon: f64, bound_b: f64) -> f64 {
    2.0 * (d as f64).sqrt() * bound_b / (n as f64 * epsilon)
}

/// `eps`-DP (hence `eps`-semi-DP) mean: sample mean plus i.i.d. Laplace noise.
pub fn laplace_mean<R: Rng + ?Sized>(data: &SplitDataset, budget: PrivacyBudget, bound_b: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(budget.epsilon() > 0.0) {
        return invalid("the Laplace mechanism needs epsilon > 0");
    }
    if budget.delta() > 0.0 {
        return invalid("the Laplace mechanism is pure DP; pass delta = 0");
    }
    check_bounded(data, bound_b)?;
    let mut out = full_mean(data);
    let scale = laplace_scale(data.len(), data.dim(), budget.epsilon(), bound_b);
    if scale.is_finite() {
        add_laplace(&mut out, scale, rng);
    }
    Ok(out)
}

/// Noise variance `8 B^2 ln(2/delta) / (eps^2 n^2)` of the approximate-DP Gaussian mean.
pub fn gaussian_approx_dp_variance(n: usize, budget: PrivacyBudget, bound_b: f64) -> f64 {
    let (eps, delta) = (budget.epsilon(), budget.delta());
    8.0 * bound_b * bound_b * (2.0 / delta).ln() / (eps * eps * (n as f64).powi(2))
}

/// `(eps, delta)`-DP mean: sample mean plus isotropic Gaussian noise.
pub fn gaussian_mean_approx_dp<R: Rng + ?Sized>(
    data: &SplitDataset,
    budget: PrivacyBudget,
    bound_b: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(budget.epsilon() > 0.0) {
        return invalid("the Gaussian mechanism needs epsilon > 0");
    }
    if budget.delta() == 0.0 {
        return invalid("the approximate-DP Gaussian mechanism needs delta > 0");
    }
    check_bounded(data, bound_b)?;
    let mut out = full_mean(data);
    add_gaussian(&mut out, gaussian_approx_dp_variance(data.len(), budget, bound_b).sqrt(), rng);
    Ok(out)
}

/// Per-coordinate noise variance `2 B^2 / (rho n^2)` of the `rho`-zCDP Gaussian mean.
pub fn gaussian_zcdp_variance(n: usize, rho: ZcdpBudget, bound_b: f64) -> f64 {
    2.0 * bound_b * bound_b / (rho.rho() * (n as f64).powi(2))
}

/// `rho`-zCDP Gaussian mean with the smallest admissible noise.
pub fn gaussian_mean_zcdp<R: Rng + ?Sized>(
    data: &SplitDataset,
    rho: ZcdpBudget,
    spec: BoundedDistSpec,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_bounded(data, spec.bound_b())?;
    let mut out = full_mean(data);
    add_gaussian(&mut out, gaussian_zcdp_variance(data.len(), rho, spec.bound_b()).sqrt(), rng);
    Ok(out)
}

/// Worst-case MSE `V^2 / n_pub` of the throw-away mean.
pub fn throwaway_mse(n_pub: usize, spec: BoundedDistSpec) -> f64 {
    spec.stddev_v().powi(2) / n_pub as f64
}

/// Minimax MSE `2 d B^2 / (rho n^2) + V^2 / n` of the `rho`-zCDP Gaussian mean.
pub fn gaussian_zcdp_mse(n: usize, d: usize, spec: BoundedDistSpec, rho: ZcdpBudget) -> f64 {
    d as f64 * gaussian_zcdp_variance(n, rho, spec.bound_b()) + spec.stddev_v().powi(2) / n as f64
}

/// Parameters of one member of the weighted-Gaussian family.
///
/// Each private sample gets weight `r`, each public sample
/// `(1 - n_priv r) / n_pub`, and the release adds `N(0, sigma_r^2 I)`.
/// Replacing one private sample moves the weighted sum by at most `2 r B`,
/// so `sigma_r^2 = 2 B^2 r^2 / rho` gives `rho`-semi-zCDP.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedGaussConfig {
    r: f64,
    sigma_r: f64,
    spec: BoundedDistSpec,
    rho: ZcdpBudget,
}

/// `2 B^2 r^2 / rho`.
pub fn weighted_gauss_noise_variance(r: f64, spec: BoundedDistSpec, rho: ZcdpBudget) -> f64 {
    2.0 * spec.bound_b().powi(2) * r * r / rho.rho()
}

fn check_weight(r: f64, n_priv: usize) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return invalid(format!("private weight r must be a nonnegative number, got {r}"));
    }
    if n_priv > 0 && r > 1.0 / n_priv as f64 * (1.0 + 1e-12) {
        return invalid(format!("private weight r = {r} exceeds 1/n_priv = {}", 1.0 / n_priv as f64));
    }
    Ok(())
}

impl WeightedGaussConfig {
    /// Calibrated form: `sigma_r` is set exactly to the zCDP floor.
    pub fn new(r: f64, n_priv: usize, spec: BoundedDistSpec, rho: ZcdpBudget) -> Result<Self> {
        check_weight(r, n_priv)?;
        Ok(Self {
            r,
            sigma_r: weighted_gauss_noise_variance(r, spec, rho).sqrt(),
            spec,
            rho,
        })
    }

    /// Raw form with an explicit noise level, which must not be below the floor.
    pub fn with_sigma(r: f64, sigma_r: f64, n_priv: usize, spec: BoundedDistSpec, rho: ZcdpBudget) -> Result<Self> {
        check_weight(r, n_priv)?;
        let floor = weighted_gauss_noise_variance(r, spec, rho);
        if !(sigma_r * sigma_r >= floor * (1.0 - 1e-12)) {
            return Err(Error::PrivacyCalibration(format!(
                "sigma_r^2 = {} is below the floor 2 B^2 r^2 / rho = {floor}",
                sigma_r * sigma_r
            )));
        }
        Ok(Self { r, sigma_r, spec, rho })
    }

    /// The member with the MSE-minimizing weight.
    pub fn optimal(n_priv: usize, n_pub: usize, d: usize, spec: BoundedDistSpec, rho: ZcdpBudget) -> Result<Self> {
        let r = if n_priv == 0 { 0.0 } else { optimal_weight(n_priv, n_pub, spec, rho, d)? };
        Self::new(r, n_priv, spec, rho)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sigma_r(&self) -> f64 {
        self.sigma_r
    }

    pub fn spec(&self) -> BoundedDistSpec {
        self.spec
    }

    pub fn rho(&self) -> ZcdpBudget {
        self.rho
    }
}

/// Weighted-Gaussian estimate. With no private samples this is exactly the throw-away mean.
pub fn weighted_gaussian_mean<R: Rng + ?Sized>(data: &SplitDataset, cfg: &WeightedGaussConfig, rng: &mut R) -> Result<Vec<f64>> {
    let c = data.split_counts();
    if c.n_pub == 0 {
        return invalid("weighted estimators need at least one public sample");
    }
    if c.n_priv == 0 {
        return throwaway_mean(data);
    }
    check_weight(cfg.r, c.n_priv)?;
    check_bounded(data, cfg.spec.bound_b())?;
    let mut out = weighted_sum(data, cfg.r);
    add_gaussian(&mut out, cfg.sigma_r, rng);
    Ok(out)
}

fn weighted_sum(data: &SplitDataset, r: f64) -> Vec<f64> {
    let c = data.split_counts();
    let w_pub = (1.0 - c.n_priv as f64 * r) / c.n_pub as f64;
    let priv_sum = sum_of(data, |i| data.is_private(i));
    let pub_sum = sum_of(data, |i| !data.is_private(i));
    priv_sum.iter().zip(&pub_sum).map(|(p, q)| r * p + w_pub * q).collect()
}

/// Convenience form: picks the optimal weight from public knowledge of `B`, `V` and the counts.
pub fn weighted_gaussian_mean_optimal<R: Rng + ?Sized>(
    data: &SplitDataset,
    spec: BoundedDistSpec,
    rho: ZcdpBudget,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let c = data.split_counts();
    if c.n_pub == 0 {
        return invalid("weighted estimators need at least one public sample");
    }
    let cfg = WeightedGaussConfig::optimal(c.n_priv, c.n_pub, data.dim(), spec, rho)?;
    weighted_gaussian_mean(data, &cfg, rng)
}

/// Exact worst-case MSE of the weighted-Gaussian estimator:
/// `J(r) = 2 d B^2 r^2 / rho + n_priv r^2 V^2 + (1 - n_priv r)^2 V^2 / n_pub`.
pub fn weighted_gaussian_mse(r: f64, n_priv: usize, n_pub: usize, d: usize, spec: BoundedDistSpec, rho: ZcdpBudget) -> f64 {
    let v2 = spec.stddev_v().powi(2);
    let np = n_priv as f64;
    2.0 * d as f64 * spec.bound_b().powi(2) * r * r / rho.rho() + np * r * r * v2 + (1.0 - np * r).powi(2) * v2 / n_pub as f64
}

/// The unique minimizer of `J`:
/// `r* = (n_priv V^2 / n_pub) / (2 d B^2 / rho + n_priv V^2 + n_priv^2 V^2 / n_pub)`.
pub fn optimal_weight(n_priv: usize, n_pub: usize, spec: BoundedDistSpec, rho: ZcdpBudget, d: usize) -> Result<f64> {
    if n_pub == 0 {
        return invalid("the optimal weight is undefined without public samples");
    }
    if n_priv == 0 {
        return invalid("the optimal weight needs at least one private sample");
    }
    let v2 = spec.stddev_v().powi(2);
    let (np, nq) = (n_priv as f64, n_pub as f64);
    let denom = 2.0 * d as f64 * spec.bound_b().powi(2) / rho.rho() + np * v2 + np * np * v2 / nq;
    Ok(np * v2 / nq / denom)
}

/// The `(q, s)` pair governing the closed-form advantage.
pub fn advantage_terms(n_priv: usize, n_pub: usize, spec: BoundedDistSpec, rho: ZcdpBudget, d: usize) -> (f64, f64) {
    let (b, v, r) = (spec.bound_b(), spec.stddev_v(), rho.rho());
    let np = n_priv as f64;
    let q = 2.0 + np * r * v * v / (d as f64 * b * b);
    let s = v * np * r.sqrt() / (b * (d as f64 * n_pub as f64).sqrt());
    (q, s)
}

/// Ratio of the optimally weighted estimator's MSE to the better of the two
/// baselines, `(q^2 + q s^2) / (q^2 + 2 q s^2 + s^4)`.
///
/// Valid only when `V^2 / n_pub <= 2 d B^2 / (rho n^2)`; other inputs are rejected.
pub fn advantage_ratio(n_priv: usize, n_pub: usize, spec: BoundedDistSpec, rho: ZcdpBudget, d: usize) -> Result<f64> {
    if n_pub == 0 {
        return invalid("the advantage ratio needs at least one public sample");
    }
    let n = (n_priv + n_pub) as f64;
    let lhs = spec.stddev_v().powi(2) / n_pub as f64;
    let rhs = 2.0 * d as f64 * spec.bound_b().powi(2) / (rho.rho() * n * n);
    if lhs > rhs {
        return Err(Error::OutOfRegime(format!(
            "V^2/n_pub = {lhs:.6e} exceeds 2 d B^2/(rho n^2) = {rhs:.6e}; the closed-form advantage does not apply"
        )));
    }
    let (q, s) = advantage_terms(n_priv, n_pub, spec, rho, d);
    let s2 = s * s;
    Ok((q * q + q * s2) / (q * q + 2.0 * q * s2 + s2 * s2))
}

/// Per-coordinate Laplace scale `2 r sqrt(d) B / eps` of the weighted-Laplace estimator.
pub fn weighted_laplace_scale(r: f64, d: usize, epsilon: f64, bound_b: f64) -> f64 {
    2.0 * r * (d as f64).sqrt() * bound_b / epsilon
}

/// `eps`-semi-DP weighted estimator with Laplace noise.
///
/// The private part `r * sum(x)` moves by at most `2 r B` in l2 and
/// therefore by at most `2 r sqrt(d) B` in l1 when one private sample changes.
pub fn weighted_laplace_mean<R: Rng + ?Sized>(
    data: &SplitDataset,
    r: f64,
    budget: PrivacyBudget,
    spec: BoundedDistSpec,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(budget.epsilon() > 0.0) {
        return invalid("the weighted Laplace estimator needs epsilon > 0");
    }
    if budget.delta() > 0.0 {
        return invalid("the weighted Laplace estimator is pure DP; pass delta = 0");
    }
    let c = data.split_counts();
    if c.n_pub == 0 {
        return invalid("weighted estimators need at least one public sample");
    }
    if c.n_priv == 0 {
        return throwaway_mean(data);
    }
    check_weight(r, c.n_priv)?;
    check_bounded(data, spec.bound_b())?;
    let mut out = weighted_sum(data, r);
    add_laplace(&mut out, weighted_laplace_scale(r, data.dim(), budget.epsilon(), spec.bound_b()), rng);
    Ok(out)
}
