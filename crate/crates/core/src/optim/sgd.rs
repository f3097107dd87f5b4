//! Central semi-private SGD with weighted private/public gradient estimates, and the DP-SGD baseline.

use rand::seq::{index, SliceRandom};

use super::config::SgdConfig;
use super::erm::warm_start_init;
use super::loss::{targets, LossModel};
use crate::dataset::{norm, SplitDataset};
use crate::error::{invalid, Result};
use crate::noise::add_gaussian;
use crate::privacy::{zcdp_to_approx_dp, PrivacyBudget, ZcdpBudget};
use crate::rng::RngStream;

/// Projection onto the centered ball of radius `c`.
pub fn clip(g: &[f64], c: f64) -> Vec<f64> {
    let mut out = g.to_vec();
    clip_in_place(&mut out, c);
    out
}

/// Projection of `w` onto the centered ball of radius `r`; an infinite radius is a no-op.
pub fn project(w: &[f64], r: f64) -> Vec<f64> {
    let mut out = w.to_vec();
    clip_in_place(&mut out, r);
    out
}

pub(crate) fn clip_in_place(g: &mut [f64], c: f64) {
    let n = norm(g);
    if n > c {
        g.iter_mut().for_each(|x| *x = *x * c / n);
    }
}

/// Rescales a nonzero vector to norm exactly `c`; zero stays zero.
pub(crate) fn rescale_in_place(g: &mut [f64], c: f64) {
    let n = norm(g);
    if n > 0.0 {
        g.iter_mut().for_each(|x| *x = *x * c / n);
    }
}

/// Which samples each iteration used.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SamplingLog {
    pub iterations_per_epoch: usize,
    pub private_batches: Vec<Vec<usize>>,
    pub public_batches: Vec<Vec<usize>>,
}

impl SamplingLog {
    /// Largest number of times one private sample appears within a single epoch.
    pub fn max_private_uses_per_epoch(&self) -> usize {
        let per = self.iterations_per_epoch.max(1);
        let mut worst = 0;
        for epoch in self.private_batches.chunks(per) {
            let mut seen = std::collections::HashMap::new();
            for &i in epoch.iter().flatten() {
                let c = seen.entry(i).or_insert(0usize);
                *c += 1;
                worst = worst.max(*c);
            }
        }
        worst
    }
}

/// Result of a training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutput {
    pub weights: Vec<f64>,
    /// Iterates `w_1, ..., w_T` when tracing is enabled.
    pub trace: Vec<Vec<f64>>,
    pub log: SamplingLog,
    /// zCDP cost with respect to private samples; `None` when they were never touched.
    pub rho: Option<f64>,
    /// Local epsilon of each private sample's message, for the local methods.
    pub local_eps: Option<f64>,
    pub noise_sigma2: f64,
}

impl TrainOutput {
    /// `(epsilon, delta)` guarantee implied by the zCDP cost.
    pub fn approx_dp(&self, delta: f64) -> Result<PrivacyBudget> {
        match self.rho {
            Some(r) => zcdp_to_approx_dp(ZcdpBudget::new(r)?, delta),
            None => PrivacyBudget::new(0.0, delta),
        }
    }
}

// child stream indices
const PRIV_SAMPLING: u64 = 0;
const PUB_SAMPLING: u64 = 1;
const NOISE: u64 = 2;

fn check_dims(data: &SplitDataset, init: &[f64]) -> Result<()> {
    if init.len() != data.dim() {
        return invalid(format!("initial point has dimension {}, data has {}", init.len(), data.dim()));
    }
    Ok(())
}

/// Semi-private SGD with weighted gradient estimates.
///
/// Each step averages `k_priv` clipped private gradients, adds Gaussian noise,
/// and mixes the result with the mean of `k_pub` public gradients:
/// `g = alpha [mean clip_C(grad_priv) + N(0, sigma^2 I)] + (1 - alpha) mean grad_pub`.
/// Private batches are disjoint within an epoch, public batches are fresh
/// uniform draws. The run is `budget`-zCDP with respect to private samples.
pub fn semi_dp_sgd(data: &SplitDataset, loss: &LossModel, cfg: &SgdConfig, budget: ZcdpBudget, stream: &RngStream) -> Result<TrainOutput> {
    let init = warm_start_init(data, loss, cfg)?;
    run_weighted(data, loss, cfg, budget, stream, init)
}

/// DP-SGD treating every sample as private, with batch size `k_priv + k_pub`.
///
/// The warm start, when enabled, still comes from the public samples.
pub fn dp_sgd_baseline(data: &SplitDataset, loss: &LossModel, cfg: &SgdConfig, budget: ZcdpBudget, stream: &RngStream) -> Result<TrainOutput> {
    let init = warm_start_init(data, loss, cfg)?;
    let all = SgdConfig {
        k_priv: cfg.k_priv + cfg.k_pub,
        k_pub: 0,
        alpha: 1.0,
        ..cfg.clone()
    };
    run_weighted(&data.all_private(), loss, &all, budget, stream, init)
}

pub(crate) fn run_weighted(
    data: &SplitDataset,
    loss: &LossModel,
    cfg: &SgdConfig,
    budget: ZcdpBudget,
    stream: &RngStream,
    init: Vec<f64>,
) -> Result<TrainOutput> {
    check_dims(data, &init)?;
    let y = targets(data)?;
    let priv_idx = data.private_indices();
    let pub_idx = data.public_indices();
    let sigma2 = cfg.calibrate(priv_idx.len(), pub_idx.len(), budget)?;
    let use_private = cfg.alpha > 0.0;

    let mut priv_rng = stream.child(PRIV_SAMPLING).rng();
    let mut pub_rng = stream.child(PUB_SAMPLING).rng();
    let mut noise_rng = stream.child(NOISE).rng();

    let d = data.dim();
    let mut w = init;
    clip_in_place(&mut w, cfg.domain_radius);
    let mut avg = vec![0.0; d];
    let mut log = SamplingLog {
        iterations_per_epoch: cfg.iterations,
        ..Default::default()
    };
    let mut trace = Vec::new();
    let (mut g_priv, mut g_pub, mut tmp) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut perm = priv_idx.clone();
    let mut t = 0;

    for _ in 0..cfg.epochs {
        if use_private {
            perm.shuffle(&mut priv_rng);
        }
        for it in 0..cfg.iterations {
            g_priv.iter_mut().for_each(|x| *x = 0.0);
            g_pub.iter_mut().for_each(|x| *x = 0.0);

            if use_private {
                let batch = &perm[it * cfg.k_priv..(it + 1) * cfg.k_priv];
                for &i in batch {
                    loss.gradient_into(&w, data.sample(i), y[i], &mut tmp);
                    clip_in_place(&mut tmp, cfg.clip_c);
                    g_priv.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);
                }
                let k = cfg.k_priv as f64;
                g_priv.iter_mut().for_each(|x| *x /= k);
                add_gaussian(&mut g_priv, sigma2.sqrt(), &mut noise_rng);
                log.private_batches.push(batch.to_vec());
            } else {
                log.private_batches.push(Vec::new());
            }

            if cfg.alpha < 1.0 {
                let batch: Vec<usize> = index::sample(&mut pub_rng, pub_idx.len(), cfg.k_pub)
                    .into_iter()
                    .map(|j| pub_idx[j])
                    .collect();
                for &i in &batch {
                    loss.gradient_into(&w, data.sample(i), y[i], &mut tmp);
                    if cfg.rescale_public {
                        rescale_in_place(&mut tmp, cfg.clip_c);
                    }
                    g_pub.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);
                }
                let k = cfg.k_pub as f64;
                g_pub.iter_mut().for_each(|x| *x /= k);
                log.public_batches.push(batch);
            } else {
                log.public_batches.push(Vec::new());
            }

            let eta = cfg.step_sizes.at(t);
            for j in 0..d {
                let g = cfg.alpha * g_priv[j] + (1.0 - cfg.alpha) * g_pub[j];
                w[j] -= eta * g;
            }
            clip_in_place(&mut w, cfg.domain_radius);
            avg.iter_mut().zip(&w).for_each(|(a, b)| *a += b);
            if cfg.record_trace {
                trace.push(w.clone());
            }
            t += 1;
        }
    }

    let weights = if cfg.average_iterates {
        avg.iter().map(|a| a / t as f64).collect()
    } else {
        w
    };
    Ok(TrainOutput {
        weights,
        trace,
        log,
        rho: use_private.then_some(budget.rho()),
        local_eps: None,
        noise_sigma2: if use_private { sigma2 } else { 0.0 },
    })
}
