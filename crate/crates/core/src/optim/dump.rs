//! Plain-text model files: a `#` metadata block followed by one weight per line.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ModelDump {
    pub algorithm: String,
    /// Hex SHA-256 of a canonical rendering of the training configuration.
    pub config_hash: String,
    pub rho: Option<f64>,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub weights: Vec<f64>,
}

/// Hex SHA-256 of any debug-printable configuration.
pub fn config_hash(cfg: &impl std::fmt::Debug) -> String {
    let digest = Sha256::digest(format!("{cfg:?}").as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl ModelDump {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# algorithm = {}", self.algorithm);
        let _ = writeln!(s, "# config_hash = {}", self.config_hash);
        match self.rho {
            Some(r) => {
                let _ = writeln!(s, "# rho = {r}");
            }
            None => s.push_str("# rho = none\n"),
        }
        let _ = writeln!(s, "# epsilon = {}", self.epsilon);
        let _ = writeln!(s, "# delta = {}", self.delta);
        let _ = writeln!(s, "# seed = {}", self.seed);
        s.push_str("w\n");
        for w in &self.weights {
            let _ = writeln!(s, "{w}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Parse(m);
        let mut meta = std::collections::HashMap::new();
        let mut weights = Vec::new();
        let mut in_body = false;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest.split_once('=').ok_or_else(|| bad(format!("malformed metadata line '{line}'")))?;
                meta.insert(k.trim().to_string(), v.trim().to_string());
            } else if !in_body {
                if line != "w" {
                    return Err(bad(format!("expected weight header 'w', got '{line}'")));
                }
                in_body = true;
            } else {
                weights.push(line.parse::<f64>().map_err(|e| bad(format!("bad weight '{line}': {e}")))?);
            }
        }
        let get = |k: &str| meta.get(k).cloned().ok_or_else(|| bad(format!("missing metadata key '{k}'")));
        let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|e| bad(format!("bad value for {k}: {e}"))) };
        let rho = match get("rho")?.as_str() {
            "none" => None,
            v => Some(v.parse().map_err(|e| bad(format!("bad rho: {e}")))?),
        };
        Ok(Self {
            algorithm: get("algorithm")?,
            config_hash: get("config_hash")?,
            rho,
            epsilon: num("epsilon")?,
            delta: num("delta")?,
            seed: get("seed")?.parse().map_err(|e| bad(format!("bad seed: {e}")))?,
            weights,
        })
    }
}
