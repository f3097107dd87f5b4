//! One-pass SGD where private gradients are released through PrivUnit.

use rand::seq::SliceRandom;

use super::config::SgdConfig;
use super::erm::warm_start_init;
use super::loss::{targets, LossModel};
use super::sgd::{clip_in_place, rescale_in_place, SamplingLog, TrainOutput};
use crate::dataset::{norm, SplitDataset};
use crate::error::{invalid, Result};
use crate::local::{privunit_audit, privunit_randomize, PrivUnitConfig};
use crate::noise::standard_normal_vec;
use crate::rng::RngStream;

const ORDER: u64 = 0;
const RANDOMIZER: u64 = 2;

/// Semi-local SGD: one pass over a random permutation of all samples.
///
/// A private sample contributes `C * PrivUnit(u)` where `u` is the direction of
/// its clipped gradient, so the released message has the data-independent norm
/// `C / m`. Public gradients are used directly, rescaled to that same norm when
/// `cfg.rescale_public` is set. Returns the average of the iterates `w_1..w_n`.
pub fn semi_ldp_sgd(data: &SplitDataset, loss: &LossModel, cfg: &SgdConfig, privunit: &PrivUnitConfig, stream: &RngStream) -> Result<TrainOutput> {
    let init = warm_start_init(data, loss, cfg)?;
    run_local(data, loss, cfg, privunit, stream, init)
}

/// Local SGD that privatizes every gradient, public ones included.
///
/// The warm start, when enabled, still comes from the public samples.
pub fn ldp_sgd_baseline(data: &SplitDataset, loss: &LossModel, cfg: &SgdConfig, privunit: &PrivUnitConfig, stream: &RngStream) -> Result<TrainOutput> {
    let init = warm_start_init(data, loss, cfg)?;
    run_local(&data.all_private(), loss, cfg, privunit, stream, init)
}

fn check_local(data: &SplitDataset, cfg: &SgdConfig, privunit: &PrivUnitConfig) -> Result<()> {
    cfg.validate_common()?;
    if cfg.epochs != 1 || cfg.iterations != data.len() {
        return invalid(format!(
            "local SGD makes exactly one pass: need epochs = 1 and iterations = n = {}, got {} x {}",
            data.len(),
            cfg.epochs,
            cfg.iterations
        ));
    }
    if privunit.dim() != data.dim() {
        return invalid(format!("PrivUnit dimension {} does not match data dimension {}", privunit.dim(), data.dim()));
    }
    let certified = privunit.m() > 0.0
        && privunit.eps_certified().is_finite()
        && privunit_audit(privunit, privunit.eps_certified(), 1001)?.pass;
    if !certified {
        return invalid("PrivUnit config is not certified for a finite epsilon with positive scale");
    }
    Ok(())
}

fn run_local(
    data: &SplitDataset,
    loss: &LossModel,
    cfg: &SgdConfig,
    privunit: &PrivUnitConfig,
    stream: &RngStream,
    init: Vec<f64>,
) -> Result<TrainOutput> {
    check_local(data, cfg, privunit)?;
    let y = targets(data)?;
    let d = data.dim();
    if init.len() != d {
        return invalid(format!("initial point has dimension {}, data has {d}", init.len()));
    }
    let mut order_rng = stream.child(ORDER).rng();
    // each sample owns its randomizer stream, as a user's device would
    let randomizer = stream.child(RANDOMIZER);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut order_rng);

    // every randomized private gradient has exactly this norm
    let l_pub = cfg.clip_c / privunit.m();
    let mut w = init;
    clip_in_place(&mut w, cfg.domain_radius);
    let mut avg = vec![0.0; d];
    let mut trace = Vec::new();
    let mut log = SamplingLog {
        iterations_per_epoch: data.len(),
        ..Default::default()
    };
    let mut g = vec![0.0; d];
    let mut touched_private = false;

    for (t, &i) in order.iter().enumerate() {
        loss.gradient_into(&w, data.sample(i), y[i], &mut g);
        if data.is_private(i) {
            touched_private = true;
            clip_in_place(&mut g, cfg.clip_c);
            let n = norm(&g);
            let mut pu_rng = randomizer.child(i as u64).rng();
            let dir: Vec<f64> = if n > 0.0 {
                g.iter().map(|x| x / n).collect()
            } else {
                let z = standard_normal_vec(d, &mut pu_rng);
                let zn = norm(&z);
                z.iter().map(|x| x / zn).collect()
            };
            let z = privunit_randomize(&dir, privunit, &mut pu_rng)?;
            g.iter_mut().zip(&z).for_each(|(a, b)| *a = cfg.clip_c * b);
            log.private_batches.push(vec![i]);
            log.public_batches.push(Vec::new());
        } else {
            if cfg.rescale_public {
                rescale_in_place(&mut g, l_pub);
            }
            log.private_batches.push(Vec::new());
            log.public_batches.push(vec![i]);
        }
        let eta = cfg.step_sizes.at(t);
        w.iter_mut().zip(&g).for_each(|(a, b)| *a -= eta * b);
        clip_in_place(&mut w, cfg.domain_radius);
        avg.iter_mut().zip(&w).for_each(|(a, b)| *a += b);
        if cfg.record_trace {
            trace.push(w.clone());
        }
    }
    let n = data.len() as f64;
    Ok(TrainOutput {
        weights: avg.iter().map(|a| a / n).collect(),
        trace,
        log,
        rho: None,
        local_eps: touched_private.then_some(privunit.eps_certified()),
        noise_sigma2: 0.0,
    })
}
