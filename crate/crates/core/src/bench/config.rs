//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored; list values are
//! comma-separated. Recognized keys, with defaults:
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `d` | 50 | feature dimension |
//! | `n_train`, `n_val`, `n_test` | 5000, 1250, 1000 | split sizes |
//! | `noise_std` | 0.5 | label noise standard deviation (Bayes MSE `noise_std^2`) |
//! | `algorithms` | semi-dp-sgd, dp-sgd, throwaway | methods to run |
//! | `eps` | 1, 2 | privacy levels |
//! | `delta` | 1e-5 | delta of the central methods |
//! | `ratios` | 0.03, 0.04 | public fraction of the training split |
//! | `seeds` | 0, 1, 2, 3, 4 | data and training seeds |
//! | `step_sizes` | 0.003, 0.01, 0.03, 0.1 | step-size grid |
//! | `epochs` | 2, 5, 10, 20 | epoch grid (central methods) |
//! | `alphas` | 0.7, 0.8, 0.9, 0.95, 0.97, 0.99 | private-weight grid (semi-dp-sgd) |
//! | `clip_c` | 1 | clipping grid |
//! | `batch_sizes` | 100, 250, 500 | total batch size grid of the central methods |
//! | `batch_size_pub` | public share of the batch | public part of each semi-dp-sgd batch |
//! | `warm_start` | true | initialize at the public least-squares fit |
//! | `rescale_public` | true | rescale public gradients to the clip norm |
//! | `average_iterates` | false | report the average iterate of the central methods |
//! | `record_wall_time` | false | write measured times instead of 0 |
//! | `output` | results.csv | CSV destination used by the CLI |
//!
//! Reported epsilons exclude any leakage from tuning hyperparameters on
//! validation data, which is itself computed non-privately.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    SemiDpSgd,
    DpSgd,
    Throwaway,
    SemiLdpSgd,
    LdpSgd,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::SemiDpSgd => "semi-dp-sgd",
            Self::DpSgd => "dp-sgd",
            Self::Throwaway => "throwaway",
            Self::SemiLdpSgd => "semi-ldp-sgd",
            Self::LdpSgd => "ldp-sgd",
        }
    }

    pub fn is_local(self) -> bool {
        matches!(self, Self::SemiLdpSgd | Self::LdpSgd)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "semi-dp-sgd" => Self::SemiDpSgd,
            "dp-sgd" => Self::DpSgd,
            "throwaway" | "throw-away" => Self::Throwaway,
            "semi-ldp-sgd" => Self::SemiLdpSgd,
            "ldp-sgd" => Self::LdpSgd,
            other => return Err(Error::Parse(format!("unknown algorithm '{other}'"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub d: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub noise_std: f64,
    pub algorithms: Vec<Algorithm>,
    pub eps: Vec<f64>,
    pub delta: f64,
    pub ratios: Vec<f64>,
    pub seeds: Vec<u64>,
    pub step_sizes: Vec<f64>,
    pub epochs: Vec<usize>,
    pub alphas: Vec<f64>,
    pub clip_c: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub batch_size_pub: Option<usize>,
    pub warm_start: bool,
    pub rescale_public: bool,
    pub average_iterates: bool,
    pub record_wall_time: bool,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            d: 50,
            n_train: 5000,
            n_val: 1250,
            n_test: 1000,
            noise_std: 0.5,
            algorithms: vec![Algorithm::SemiDpSgd, Algorithm::DpSgd, Algorithm::Throwaway],
            eps: vec![1.0, 2.0],
            delta: 1e-5,
            ratios: vec![0.03, 0.04],
            seeds: (0..5).collect(),
            step_sizes: vec![0.003, 0.01, 0.03, 0.1],
            epochs: vec![2, 5, 10, 20],
            alphas: vec![0.7, 0.8, 0.9, 0.95, 0.97, 0.99],
            clip_c: vec![1.0],
            batch_sizes: vec![100, 250, 500],
            batch_size_pub: None,
            warm_start: true,
            rescale_public: true,
            average_iterates: false,
            record_wall_time: false,
            output: PathBuf::from("results.csv"),
        }
    }
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad value '{}' for {key}: {e}", v.trim())))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_one(key, s)).collect()
}

impl ExperimentConfig {
    /// Parses the config text, starting from the defaults, then validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected 'key = value'", ln + 1)))?;
            let k = k.trim();
            match k {
                "d" => c.d = parse_one(k, v)?,
                "n_train" => c.n_train = parse_one(k, v)?,
                "n_val" => c.n_val = parse_one(k, v)?,
                "n_test" => c.n_test = parse_one(k, v)?,
                "noise_std" => c.noise_std = parse_one(k, v)?,
                "algorithms" => c.algorithms = parse_list(k, v)?,
                "eps" => c.eps = parse_list(k, v)?,
                "delta" => c.delta = parse_one(k, v)?,
                "ratios" => c.ratios = parse_list(k, v)?,
                "seeds" => c.seeds = parse_list(k, v)?,
                "step_sizes" => c.step_sizes = parse_list(k, v)?,
                "epochs" => c.epochs = parse_list(k, v)?,
                "alphas" => c.alphas = parse_list(k, v)?,
                "clip_c" => c.clip_c = parse_list(k, v)?,
                "batch_sizes" => c.batch_sizes = parse_list(k, v)?,
                "batch_size_pub" => c.batch_size_pub = Some(parse_one(k, v)?),
                "warm_start" => c.warm_start = parse_one(k, v)?,
                "rescale_public" => c.rescale_public = parse_one(k, v)?,
                "average_iterates" => c.average_iterates = parse_one(k, v)?,
                "record_wall_time" => c.record_wall_time = parse_one(k, v)?,
                "output" => c.output = PathBuf::from(v.trim()),
                other => return Err(Error::Parse(format!("line {}: unknown key '{other}'", ln + 1))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.d == 0 || self.n_train == 0 || self.n_val == 0 || self.n_test == 0 {
            return bad("d and all split sizes must be at least 1".into());
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std must be finite and nonnegative, got {}", self.noise_std));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        let lists = [
            ("algorithms", self.algorithms.len()),
            ("eps", self.eps.len()),
            ("ratios", self.ratios.len()),
            ("seeds", self.seeds.len()),
            ("step_sizes", self.step_sizes.len()),
            ("epochs", self.epochs.len()),
            ("alphas", self.alphas.len()),
            ("clip_c", self.clip_c.len()),
            ("batch_sizes", self.batch_sizes.len()),
        ];
        if let Some((k, _)) = lists.iter().find(|(_, n)| *n == 0) {
            return bad(format!("{k} must not be empty"));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return bad(format!("ratios must lie in (0, 1], got {r}"));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return bad(format!("eps values must be positive and finite, got {e}"));
        }
        if let Some(s) = self.step_sizes.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return bad(format!("step sizes must be positive and finite, got {s}"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return bad(format!("alphas must lie in [0, 1], got {a}"));
        }
        if let Some(c) = self.clip_c.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return bad(format!("clip_c values must be positive and finite, got {c}"));
        }
        if self.epochs.contains(&0) || self.batch_sizes.contains(&0) || self.batch_size_pub == Some(0) {
            return bad("epochs and batch sizes must be at least 1".into());
        }
        Ok(())
    }
}
