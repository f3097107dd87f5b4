//! Datasets whose samples are individually flagged private or public.

use crate::error::{invalid, Result};

/// `n` samples in `R^d`, each flagged private or public, with optional scalar targets.
///
/// Samples are stored row-major in one buffer. Membership is a per-sample
/// flag so shuffles and without-replacement passes keep the split intact.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitDataset {
    dim: usize,
    features: Vec<f64>,
    is_private: Vec<bool>,
    targets: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitCounts {
    pub n_priv: usize,
    pub n_pub: usize,
    pub n: usize,
}

impl SplitDataset {
    /// Builds a dataset from row vectors. All rows must share one dimension `d >= 1`.
    pub fn new(samples: Vec<Vec<f64>>, is_private: Vec<bool>, targets: Option<Vec<f64>>) -> Result<Self> {
        let dim = match samples.first() {
            Some(s) => s.len(),
            None => return invalid("dataset must contain at least one sample"),
        };
        if samples.iter().any(|s| s.len() != dim) {
            return invalid("all samples must have the same dimension");
        }
        let features = samples.into_iter().flatten().collect();
        Self::from_flat(dim, features, is_private, targets)
    }

    pub fn from_flat(dim: usize, features: Vec<f64>, is_private: Vec<bool>, targets: Option<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        if features.is_empty() || features.len() % dim != 0 {
            return invalid(format!("feature buffer of length {} is not a nonempty multiple of d = {dim}", features.len()));
        }
        let n = features.len() / dim;
        if is_private.len() != n {
            return invalid(format!("{} privacy flags for {n} samples", is_private.len()));
        }
        if let Some(t) = &targets {
            if t.len() != n {
                return invalid(format!("{} targets for {n} samples", t.len()));
            }
        }
        if features.iter().any(|v| !v.is_finite()) || targets.iter().flatten().any(|v| !v.is_finite()) {
            return invalid("dataset contains non-finite values");
        }
        Ok(Self {
            dim,
            features,
            is_private,
            targets,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.is_private.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_private.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn target(&self, i: usize) -> Option<f64> {
        self.targets.as_ref().map(|t| t[i])
    }

    pub fn targets(&self) -> Option<&[f64]> {
        self.targets.as_deref()
    }

    pub fn is_private(&self, i: usize) -> bool {
        self.is_private[i]
    }

    pub fn privacy_flags(&self) -> &[bool] {
        &self.is_private
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.dim)
    }

    pub fn private_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_private[i]).collect()
    }

    pub fn public_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_private[i]).collect()
    }

    pub fn split_counts(&self) -> SplitCounts {
        let n_priv = self.is_private.iter().filter(|&&p| p).count();
        let n = self.len();
        SplitCounts {
            n_priv,
            n_pub: n - n_priv,
            n,
        }
    }

    /// Same samples, every one flagged private.
    pub fn all_private(&self) -> Self {
        Self {
            is_private: vec![true; self.len()],
            ..self.clone()
        }
    }

    /// Same samples with a new flag vector.
    pub fn with_flags(&self, is_private: Vec<bool>) -> Result<Self> {
        Self::from_flat(self.dim, self.features.clone(), is_private, self.targets.clone())
    }

    /// Largest sample norm; used to check boundedness preconditions.
    pub fn max_norm(&self) -> f64 {
        self.samples().map(norm).fold(0.0, f64::max)
    }
}

/// Returns `(n_priv, n_pub, n)`.
pub fn split_counts(data: &SplitDataset) -> (usize, usize, usize) {
    let c = data.split_counts();
    (c.n_priv, c.n_pub, c.n)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(n_priv: usize, n_pub: usize) -> SplitDataset {
        let n = n_priv + n_pub;
        let samples = (0..n).map(|i| vec![i as f64, 1.0]).collect();
        let mut f = vec![true; n_priv];
        f.extend(vec![false; n_pub]);
        SplitDataset::new(samples, f, None).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(split_counts(&flags(3, 2)), (3, 2, 5));
        assert_eq!(split_counts(&flags(0, 4)), (0, 4, 4));
        assert_eq!(split_counts(&flags(5, 0)), (5, 0, 5));
    }

    #[test]
    fn rejects_ragged_and_empty() {
        assert!(SplitDataset::new(vec![vec![1.0], vec![1.0, 2.0]], vec![true, true], None).is_err());
        assert!(SplitDataset::new(vec![], vec![], None).is_err());
        assert!(SplitDataset::new(vec![vec![]], vec![true], None).is_err());
        assert!(SplitDataset::new(vec![vec![1.0]], vec![true], Some(vec![1.0, 2.0])).is_err());
        assert!(SplitDataset::new(vec![vec![f64::NAN]], vec![true], None).is_err());
    }

    #[test]
    fn index_partitions() {
        let d = flags(2, 3);
        assert_eq!(d.private_indices(), vec![0, 1]);
        assert_eq!(d.public_indices(), vec![2, 3, 4]);
        assert_eq!(d.sample(3), &[3.0, 1.0]);
        assert_eq!(d.all_private().split_counts().n_priv, 5);
    }
}
