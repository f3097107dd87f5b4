//! Minimax rate envelopes for semi-private estimation and learning.
//!
//! Every evaluator returns the bracketed expression with all absolute
//! constants set to 1, so curves are meaningful in shape only. Each rate is a
//! minimum of a public-only term and a term for the best algorithm that treats
//! all data as private; the result records which one is smaller.

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    MeanCentral,
    MeanLocal,
    Erm,
    ScoCentral,
    ScoLocal,
}

impl std::str::FromStr for Problem {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-central" | "mean_central" => Ok(Self::MeanCentral),
            "mean-local" | "mean_local" => Ok(Self::MeanLocal),
            "erm" => Ok(Self::Erm),
            "sco-central" | "sco_central" => Ok(Self::ScoCentral),
            "sco-local" | "sco_local" => Ok(Self::ScoLocal),
            other => invalid(format!("unknown problem '{other}'")),
        }
    }
}

/// Upper envelope (achieved by an algorithm) or lower envelope (no algorithm beats it).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Upper,
    Lower,
}

/// Which side of the minimum is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Binding {
    /// The public-only term.
    Public,
    /// The term of the fully private algorithm.
    Private,
    /// No public samples, so only the private term is defined.
    NoPublic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateValue {
    pub value: f64,
    pub binding: Binding,
}

/// Arguments of a rate evaluation. `mu = 0` means merely convex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateQuery {
    pub problem: Problem,
    pub eps: f64,
    pub delta: f64,
    pub n_priv: u64,
    pub n: u64,
    pub d: u64,
    pub lipschitz: f64,
    pub diameter: f64,
    pub mu: f64,
}

impl RateQuery {
    /// A query with `L = D = 1`, `mu = 0` and `delta = 0`.
    pub fn new(problem: Problem, eps: f64, n_priv: u64, n: u64, d: u64) -> Self {
        Self {
            problem,
            eps,
            delta: 0.0,
            n_priv,
            n,
            d,
            lipschitz: 1.0,
            diameter: 1.0,
            mu: 0.0,
        }
    }

    pub fn n_pub(&self) -> u64 {
        self.n - self.n_priv
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return invalid(format!("epsilon must be positive, got {}", self.eps));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return invalid(format!("delta must lie in [0, 1), got {}", self.delta));
        }
        if self.n == 0 || self.d == 0 {
            return invalid("n and d must be positive");
        }
        if self.n_priv > self.n {
            return invalid(format!("n_priv = {} exceeds n = {}", self.n_priv, self.n));
        }
        if !(self.lipschitz > 0.0) || !(self.diameter > 0.0) || !(self.mu >= 0.0) {
            return invalid("L and D must be positive and mu nonnegative");
        }
        Ok(())
    }
}

fn min_of(public: Option<f64>, private: f64) -> RateValue {
    match public {
        None => RateValue {
            value: private,
            binding: Binding::NoPublic,
        },
        Some(p) if p <= private => RateValue {
            value: p,
            binding: Binding::Public,
        },
        Some(_) => RateValue {
            value: private,
            binding: Binding::Private,
        },
    }
}

fn scaled(r: RateValue, factor: f64) -> RateValue {
    RateValue {
        value: r.value * factor,
        ..r
    }
}

/// `1 / n_pub^power`, undefined without public samples.
fn public_term(q: &RateQuery, power: f64) -> Option<f64> {
    let m = q.n_pub();
    (m > 0).then(|| (m as f64).powf(-power))
}

fn local_eps(eps: f64) -> f64 {
    eps.min(eps * eps)
}

/// Population mean estimation in the central model:
/// `min{1/n_pub, d^2/(n eps)^2 + 1/n}` for pure DP and
/// `min{1/n_pub, d ln(1/delta)/(n eps)^2 + 1/n}` for `delta > 0`.
/// The lower envelope for `delta > 0` drops the dimension factor.
pub fn rate_mean_central(q: &RateQuery, bound: Bound) -> Result<RateValue> {
    q.validate()?;
    let (n, d) = (q.n as f64, q.d as f64);
    let ne2 = (n * q.eps).powi(2);
    let private = if q.delta == 0.0 {
        d * d / ne2
    } else {
        match bound {
            Bound::Upper => d * (1.0 / q.delta).ln() / ne2,
            Bound::Lower => 1.0 / ne2,
        }
    } + 1.0 / n;
    Ok(min_of(public_term(q, 1.0), private))
}

/// Population mean estimation in the local model: `min{1/n_pub, d/(n min(eps, eps^2)) + 1/n}`.
pub fn rate_mean_local(q: &RateQuery, _bound: Bound) -> Result<RateValue> {
    q.validate()?;
    let (n, d) = (q.n as f64, q.d as f64);
    Ok(min_of(public_term(q, 1.0), d / (n * local_eps(q.eps)) + 1.0 / n))
}

/// Excess empirical risk under pure DP.
///
/// Convex: `LD min{n_priv/n, d/(n eps)}`. Strongly convex upper:
/// `(L^2/mu) min{n_priv/n, d sqrt(ln n)/(n eps)}^2`, lower `LD min{n_priv/n, d/(n eps)}^2`.
pub fn rate_erm(q: &RateQuery, bound: Bound) -> Result<RateValue> {
    q.validate()?;
    let (n, d) = (q.n as f64, q.d as f64);
    let frac = q.n_priv as f64 / n;
    let ld = q.lipschitz * q.diameter;
    if q.mu == 0.0 {
        return Ok(scaled(min_of(Some(frac), d / (n * q.eps)), ld));
    }
    let r = match bound {
        Bound::Upper => min_of(Some(frac), d * n.ln().sqrt() / (n * q.eps)),
        Bound::Lower => min_of(Some(frac), d / (n * q.eps)),
    };
    let factor = match bound {
        Bound::Upper => q.lipschitz * q.lipschitz / q.mu,
        Bound::Lower => ld,
    };
    Ok(RateValue {
        value: factor * r.value * r.value,
        binding: r.binding,
    })
}

/// Excess population risk in the central model.
///
/// Convex: `LD min{1/sqrt(n_pub), d/(n eps) + 1/sqrt(n)}`, with `sqrt(d ln(1/delta))/(n eps)`
/// for `delta > 0`. Strongly convex: `(L^2/mu) min{1/n_pub, d^2 ln(n)/(n eps)^2 + 1/n}`, with
/// `d ln(1/delta)/(n eps)^2` for `delta > 0`. Lower envelopes use `LD`, drop `ln n`, and
/// drop the dimension when `delta > 0`.
pub fn rate_sco_central(q: &RateQuery, bound: Bound) -> Result<RateValue> {
    q.validate()?;
    let (n, d) = (q.n as f64, q.d as f64);
    let ne = n * q.eps;
    let ld = q.lipschitz * q.diameter;
    let upper = bound == Bound::Upper;
    if q.mu == 0.0 {
        let private = if q.delta == 0.0 {
            d / ne
        } else if upper {
            (d * (1.0 / q.delta).ln()).sqrt() / ne
        } else {
            1.0 / ne
        } + 1.0 / n.sqrt();
        return Ok(scaled(min_of(public_term(q, 0.5), private), ld));
    }
    let private = if q.delta == 0.0 {
        d * d * if upper { n.ln() } else { 1.0 } / (ne * ne)
    } else if upper {
        d * (1.0 / q.delta).ln() / (ne * ne)
    } else {
        1.0 / (ne * ne)
    } + 1.0 / n;
    let factor = if upper { q.lipschitz * q.lipschitz / q.mu } else { ld };
    Ok(scaled(min_of(public_term(q, 1.0), private), factor))
}

/// Excess population risk in the local model.
///
/// Convex: `LD min{1/sqrt(n_pub), sqrt(d/(n min(eps, eps^2))) + 1/sqrt(n)}`.
/// Strongly convex: `(L^2/mu) min{1/n_pub, d/(n min(eps, eps^2)) + 1/n}`, lower with `LD`.
pub fn rate_sco_local(q: &RateQuery, bound: Bound) -> Result<RateValue> {
    q.validate()?;
    let (n, d) = (q.n as f64, q.d as f64);
    let ld = q.lipschitz * q.diameter;
    let a = d / (n * local_eps(q.eps));
    if q.mu == 0.0 {
        return Ok(scaled(min_of(public_term(q, 0.5), a.sqrt() + 1.0 / n.sqrt()), ld));
    }
    let factor = match bound {
        Bound::Upper => q.lipschitz * q.lipschitz / q.mu,
        Bound::Lower => ld,
    };
    Ok(scaled(min_of(public_term(q, 1.0), a + 1.0 / n), factor))
}

/// Dispatches on `q.problem`.
pub fn rate(q: &RateQuery, bound: Bound) -> Result<RateValue> {
    match q.problem {
        Problem::MeanCentral => rate_mean_central(q, bound),
        Problem::MeanLocal => rate_mean_local(q, bound),
        Problem::Erm => rate_erm(q, bound),
        Problem::ScoCentral => rate_sco_central(q, bound),
        Problem::ScoLocal => rate_sco_local(q, bound),
    }
}
