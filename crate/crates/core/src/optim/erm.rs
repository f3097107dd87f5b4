//! Public-only empirical risk minimization, used as a baseline and as the warm start.

use nalgebra::{DMatrix, DVector};

use super::config::SgdConfig;
use super::loss::{targets, LossKind, LossModel};
use crate::dataset::{norm, SplitDataset};
use crate::error::{invalid, Result};

const LOGISTIC_TOL: f64 = 1e-8;
const LOGISTIC_MAX_ITERS: usize = 200_000;

/// Minimizer of the loss over the public samples only. Uses no privacy budget.
///
/// Squared loss is solved exactly by a least-squares SVD, giving the
/// minimum-norm solution when the public design is rank deficient. Logistic
/// loss runs gradient descent until the gradient norm is below `1e-8` or an
/// iteration cap is reached (separable data has no finite minimizer).
pub fn throwaway_erm(data: &SplitDataset, loss: &LossModel) -> Result<Vec<f64>> {
    let y = targets(data)?;
    let pub_idx = data.public_indices();
    if pub_idx.is_empty() {
        return invalid("throw-away training needs at least one public sample");
    }
    let d = data.dim();
    match loss.kind {
        LossKind::Squared => {
            let x = DMatrix::from_fn(pub_idx.len(), d, |r, c| data.sample(pub_idx[r])[c]);
            let b = DVector::from_iterator(pub_idx.len(), pub_idx.iter().map(|&i| y[i]));
            let svd = x.svd(true, true);
            let smax = svd.singular_values.max();
            let tol = smax * pub_idx.len().max(d) as f64 * f64::EPSILON;
            let w = svd.solve(&b, tol).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
            Ok(w.iter().copied().collect())
        }
        LossKind::Logistic => {
            let mean_sq = pub_idx.iter().map(|&i| norm(data.sample(i)).powi(2)).sum::<f64>() / pub_idx.len() as f64;
            if mean_sq == 0.0 {
                return Ok(vec![0.0; d]);
            }
            // the mean logistic loss is (mean ||x||^2 / 4)-smooth
            let eta = 4.0 / mean_sq;
            let mut w = vec![0.0; d];
            let (mut g, mut tmp) = (vec![0.0; d], vec![0.0; d]);
            for _ in 0..LOGISTIC_MAX_ITERS {
                g.iter_mut().for_each(|x| *x = 0.0);
                for &i in &pub_idx {
                    loss.gradient_into(&w, data.sample(i), y[i], &mut tmp);
                    g.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);
                }
                let k = pub_idx.len() as f64;
                g.iter_mut().for_each(|x| *x /= k);
                if norm(&g) < LOGISTIC_TOL {
                    break;
                }
                w.iter_mut().zip(&g).for_each(|(a, b)| *a -= eta * b);
            }
            Ok(w)
        }
    }
}

/// Initial point: the public minimizer when `cfg.warm_start` is set, else zero.
pub fn warm_start_init(data: &SplitDataset, loss: &LossModel, cfg: &SgdConfig) -> Result<Vec<f64>> {
    if cfg.warm_start {
        throwaway_erm(data, loss)
    } else {
        Ok(vec![0.0; data.dim()])
    }
}
