//! Sweep orchestration: grid search on validation, evaluation on test.

use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::{Algorithm, ExperimentConfig};
use super::data::{gen_linreg, LinRegData};
use super::report::ResultRow;
use crate::error::{Error, Result};
use crate::local::select_privunit_params;
use crate::optim::{dp_sgd_baseline, ldp_sgd_baseline, semi_dp_sgd, semi_ldp_sgd, throwaway_erm, LossModel, SgdConfig, StepSchedule};
use crate::privacy::{approx_dp_to_zcdp, PrivacyBudget};
use crate::rng::RngStream;

/// One hyperparameter combination. Fields an algorithm does not use are `None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub step_size: Option<f64>,
    pub epochs: Option<usize>,
    pub alpha: Option<f64>,
    pub clip_c: Option<f64>,
    pub batch_size: Option<usize>,
}

impl GridPoint {
    /// Stream index shared by grid points that differ only in `alpha` or in the
    /// algorithm, so that compared runs see the same random draws.
    pub fn stream_key(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(self.step_size.unwrap_or(0.0).to_bits().to_le_bytes());
        h.update((self.epochs.unwrap_or(0) as u64).to_le_bytes());
        h.update(self.clip_c.unwrap_or(0.0).to_bits().to_le_bytes());
        h.update((self.batch_size.unwrap_or(0) as u64).to_le_bytes());
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().unwrap_or([0; 8]))
    }
}

/// Every trained grid point, kept so that the selection can be audited.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRecord {
    pub algorithm: Algorithm,
    pub eps: f64,
    pub ratio: f64,
    pub seed: u64,
    pub point: GridPoint,
    pub train_loss: f64,
    pub val_loss: f64,
    pub test_loss: f64,
    /// `||w - w*||^2`, the population excess risk for isotropic features.
    pub excess_risk: f64,
    pub wall_time_ms: f64,
    pub error: Option<String>,
    /// Whether this entry was reported for its sweep point and seed.
    pub selected: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    /// One row per `(algorithm, eps, ratio, seed)`, in the lexicographic order of the config lists.
    pub rows: Vec<ResultRow>,
    /// Excess risk of the reported model, parallel to `rows` (NaN for error rows).
    pub excess_risk: Vec<f64>,
    pub grid: Vec<GridRecord>,
}

/// The hyperparameter grid searched for `alg`.
pub fn grid_for(alg: Algorithm, cfg: &ExperimentConfig) -> Vec<GridPoint> {
    let mut out = Vec::new();
    match alg {
        Algorithm::Throwaway => out.push(GridPoint {
            step_size: None,
            epochs: None,
            alpha: None,
            clip_c: None,
            batch_size: None,
        }),
        Algorithm::SemiDpSgd | Algorithm::DpSgd => {
            let alphas: Vec<Option<f64>> = if alg == Algorithm::SemiDpSgd {
                cfg.alphas.iter().map(|&a| Some(a)).collect()
            } else {
                vec![None]
            };
            for &step in &cfg.step_sizes {
                for &ep in &cfg.epochs {
                    for &alpha in &alphas {
                        for &c in &cfg.clip_c {
                            for &b in &cfg.batch_sizes {
                                out.push(GridPoint {
                                    step_size: Some(step),
                                    epochs: Some(ep),
                                    alpha,
                                    clip_c: Some(c),
                                    batch_size: Some(b),
                                });
                            }
                        }
                    }
                }
            }
        }
        Algorithm::SemiLdpSgd | Algorithm::LdpSgd => {
            for &step in &cfg.step_sizes {
                for &c in &cfg.clip_c {
                    out.push(GridPoint {
                        step_size: Some(step),
                        epochs: Some(1),
                        alpha: None,
                        clip_c: Some(c),
                        batch_size: Some(1),
                    });
                }
            }
        }
    }
    out
}

fn sgd_config(cfg: &ExperimentConfig, p: &GridPoint) -> SgdConfig {
    SgdConfig {
        epochs: p.epochs.unwrap_or(1),
        clip_c: p.clip_c.unwrap_or(1.0),
        step_sizes: StepSchedule::Constant(p.step_size.unwrap_or(0.0)),
        warm_start: cfg.warm_start,
        rescale_public: cfg.rescale_public,
        average_iterates: cfg.average_iterates,
        ..SgdConfig::default()
    }
}

fn train(alg: Algorithm, eps: f64, cfg: &ExperimentConfig, data: &LinRegData, p: &GridPoint, stream: &RngStream) -> Result<Vec<f64>> {
    let loss = LossModel::squared();
    let train = &data.train;
    let counts = train.split_counts();
    let mut sgd = sgd_config(cfg, p);
    Ok(match alg {
        Algorithm::Throwaway => throwaway_erm(train, &loss)?,
        Algorithm::SemiDpSgd => {
            let rho = approx_dp_to_zcdp(PrivacyBudget::new(eps, cfg.delta)?)?;
            let b = p.batch_size.unwrap_or(1);
            let share = (b as f64 * counts.n_pub as f64 / train.len() as f64).round() as usize;
            sgd.k_pub = cfg.batch_size_pub.unwrap_or(share.max(1)).min(counts.n_pub);
            if sgd.k_pub >= b {
                return Err(Error::InvalidInput(format!("batch {b} leaves no room for private samples")));
            }
            sgd.k_priv = b - sgd.k_pub;
            sgd.alpha = p.alpha.unwrap_or(0.5);
            sgd.iterations = counts.n_priv / sgd.k_priv;
            if sgd.iterations == 0 {
                return Err(Error::InvalidInput(format!("private batch {} exceeds {} private samples", sgd.k_priv, counts.n_priv)));
            }
            semi_dp_sgd(train, &loss, &sgd, rho, stream)?.weights
        }
        Algorithm::DpSgd => {
            let rho = approx_dp_to_zcdp(PrivacyBudget::new(eps, cfg.delta)?)?;
            let b = p.batch_size.unwrap_or(1);
            sgd.k_priv = b;
            sgd.k_pub = 0;
            sgd.alpha = 1.0;
            sgd.iterations = train.len() / b;
            dp_sgd_baseline(train, &loss, &sgd, rho, stream)?.weights
        }
        Algorithm::SemiLdpSgd | Algorithm::LdpSgd => {
            let pu = select_privunit_params(eps, train.dim())?;
            sgd.iterations = train.len();
            sgd.epochs = 1;
            if alg == Algorithm::SemiLdpSgd {
                semi_ldp_sgd(train, &loss, &sgd, &pu, stream)?.weights
            } else {
                ldp_sgd_baseline(train, &loss, &sgd, &pu, stream)?.weights
            }
        }
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Runs the full sweep. Deterministic given `cfg`: every random draw comes
/// from streams keyed by the seed and [`GridPoint::stream_key`], and results are merged
/// in a fixed order regardless of thread scheduling.
///
/// Every grid entry is trained once per seed. For each `(algorithm, eps,
/// ratio)` the entry with the smallest validation loss averaged over seeds
/// wins, and its per-seed test results become the reported rows. Entries that
/// fail for some seed are not eligible; a sweep point without any eligible
/// entry yields rows with NaN losses instead of aborting the sweep.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let datasets: Vec<Vec<LinRegData>> = cfg
        .ratios
        .iter()
        .map(|&r| {
            cfg.seeds
                .iter()
                .map(|&s| gen_linreg(cfg.d, cfg.n_train, cfg.n_val, cfg.n_test, cfg.noise_std, r, &RngStream::new(s, 0)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    for &alg in &cfg.algorithms {
        for &eps in &cfg.eps {
            for ratio_idx in 0..cfg.ratios.len() {
                points.push((alg, eps, ratio_idx));
            }
        }
    }
    let grids: Vec<Vec<GridPoint>> = cfg.algorithms.iter().map(|&a| grid_for(a, cfg)).collect();
    // (point, grid entry, seed) in lexicographic order
    let mut jobs = Vec::new();
    for (pi, &(alg, _, _)) in points.iter().enumerate() {
        let ai = cfg.algorithms.iter().position(|&a| a == alg).unwrap_or(0);
        for gi in 0..grids[ai].len() {
            for si in 0..cfg.seeds.len() {
                jobs.push((pi, ai, gi, si));
            }
        }
    }

    let loss = LossModel::squared();
    let records: Vec<GridRecord> = jobs
        .par_iter()
        .map(|&(pi, ai, gi, si)| {
            let (alg, eps, ri) = points[pi];
            let data = &datasets[ri][si];
            let seed = cfg.seeds[si];
            let p = &grids[ai][gi];
            let stream = RngStream::new(seed, 1).child(p.stream_key());
            let start = Instant::now();
            let fit = train(alg, eps, cfg, data, p, &stream);
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let mut rec = GridRecord {
                algorithm: alg,
                eps,
                ratio: cfg.ratios[ri],
                seed,
                point: *p,
                train_loss: f64::NAN,
                val_loss: f64::NAN,
                test_loss: f64::NAN,
                excess_risk: f64::NAN,
                wall_time_ms: if cfg.record_wall_time { ms } else { 0.0 },
                error: None,
                selected: false,
            };
            let evaluated = fit.and_then(|w| {
                Ok((
                    loss.mean_loss(&w, &data.train)?,
                    loss.mean_loss(&w, &data.val)?,
                    loss.mean_loss(&w, &data.test)?,
                    sq_dist(&w, &data.w_star),
                ))
            });
            match evaluated {
                Ok((tr, va, te, ex)) if va.is_finite() && te.is_finite() => {
                    rec.train_loss = tr;
                    rec.val_loss = va;
                    rec.test_loss = te;
                    rec.excess_risk = ex;
                }
                Ok(_) => rec.error = Some("training diverged".into()),
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect();

    let n_seeds = cfg.seeds.len();
    let mut out = ExperimentOutput {
        rows: Vec::new(),
        excess_risk: Vec::new(),
        grid: records,
    };
    let mut offset = 0;
    for &(alg, eps, ri) in &points {
        let ai = cfg.algorithms.iter().position(|&a| a == alg).unwrap_or(0);
        let block = grids[ai].len() * n_seeds;
        let entries = &out.grid[offset..offset + block];
        let best = entries
            .chunks(n_seeds)
            .enumerate()
            .filter(|(_, recs)| recs.iter().all(|r| r.error.is_none()))
            .map(|(gi, recs)| (gi, recs.iter().map(|r| r.val_loss).sum::<f64>() / n_seeds as f64))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(gi, _)| gi);
        for si in 0..n_seeds {
            let mut row = ResultRow {
                algorithm: alg.name().to_string(),
                eps,
                delta: cfg.delta,
                n: cfg.n_train,
                n_pub_ratio: cfg.ratios[ri],
                seed: cfg.seeds[si],
                step_size: None,
                epochs: None,
                alpha: None,
                clip_c: None,
                train_loss: f64::NAN,
                val_loss: f64::NAN,
                test_loss: f64::NAN,
                wall_time_ms: 0.0,
            };
            let mut excess = f64::NAN;
            if let Some(gi) = best {
                let rec = &mut out.grid[offset + gi * n_seeds + si];
                rec.selected = true;
                row.step_size = rec.point.step_size;
                row.epochs = rec.point.epochs;
                row.alpha = rec.point.alpha;
                row.clip_c = rec.point.clip_c;
                row.train_loss = rec.train_loss;
                row.val_loss = rec.val_loss;
                row.test_loss = rec.test_loss;
                row.wall_time_ms = rec.wall_time_ms;
                excess = rec.excess_risk;
            }
            out.rows.push(row);
            out.excess_risk.push(excess);
        }
        offset += block;
    }
    Ok(out)
}
