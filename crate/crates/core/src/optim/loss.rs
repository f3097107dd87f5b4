//! Per-sample losses and their gradients.

use crate::dataset::{dot, SplitDataset};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// `(<w, x> - y)^2`
    Squared,
    /// `ln(1 + exp(-y <w, x>))` with labels in `{-1, +1}`; a label `<= 0` counts as `-1`.
    Logistic,
}

impl std::str::FromStr for LossKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(Self::Squared),
            "logistic" => Ok(Self::Logistic),
            other => invalid(format!("unknown loss '{other}', expected squared or logistic")),
        }
    }
}

/// A loss with optional Lipschitz and strong-convexity hints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossModel {
    pub kind: LossKind,
    pub lipschitz: Option<f64>,
    pub mu: f64,
}

impl LossModel {
    pub fn new(kind: LossKind) -> Self {
        Self {
            kind,
            lipschitz: None,
            mu: 0.0,
        }
    }

    pub fn squared() -> Self {
        Self::new(LossKind::Squared)
    }

    pub fn logistic() -> Self {
        Self::new(LossKind::Logistic)
    }

    pub fn value(&self, w: &[f64], x: &[f64], y: f64) -> f64 {
        let z = dot(w, x);
        match self.kind {
            LossKind::Squared => (z - y) * (z - y),
            LossKind::Logistic => softplus(-label(y) * z),
        }
    }

    /// Writes the gradient in `w` into `out`.
    pub fn gradient_into(&self, w: &[f64], x: &[f64], y: f64, out: &mut [f64]) {
        let z = dot(w, x);
        let c = match self.kind {
            LossKind::Squared => 2.0 * (z - y),
            LossKind::Logistic => {
                let s = label(y);
                -s * sigmoid(-s * z)
            }
        };
        for (o, xi) in out.iter_mut().zip(x) {
            *o = c * xi;
        }
    }

    pub fn gradient(&self, w: &[f64], x: &[f64], y: f64) -> Vec<f64> {
        let mut g = vec![0.0; w.len()];
        self.gradient_into(w, x, y, &mut g);
        g
    }

    /// Average loss over every sample of `data`.
    pub fn mean_loss(&self, w: &[f64], data: &SplitDataset) -> Result<f64> {
        self.mean_loss_on(w, data, 0..data.len())
    }

    /// Average loss over the given sample indices.
    pub fn mean_loss_on(&self, w: &[f64], data: &SplitDataset, idx: impl IntoIterator<Item = usize>) -> Result<f64> {
        let y = targets(data)?;
        let (mut sum, mut k) = (0.0, 0usize);
        for i in idx {
            sum += self.value(w, data.sample(i), y[i]);
            k += 1;
        }
        if k == 0 {
            return invalid("mean loss over an empty index set");
        }
        Ok(sum / k as f64)
    }
}

pub(crate) fn targets(data: &SplitDataset) -> Result<&[f64]> {
    match data.targets() {
        Some(y) => Ok(y),
        None => invalid("training requires a dataset with targets"),
    }
}

fn label(y: f64) -> f64 {
    if y > 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
