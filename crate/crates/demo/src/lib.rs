//! Browser bindings: each export takes plain numbers and returns a JSON string
//! that `www/index.html` draws on a canvas.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use semidp::central::{advantage_ratio, optimal_weight, weighted_gaussian_mse};
use semidp::local::{select_privunit_params, sphere_inner_product_density};
use semidp::rates::{rate, Binding, Bound, Problem, RateQuery};
use semidp::{BoundedDistSpec, Error, ZcdpBudget};

#[derive(Serialize)]
struct WeightCurve {
    r: Vec<f64>,
    mse: Vec<f64>,
    r_opt: f64,
    mse_opt: f64,
    mse_throwaway: f64,
    mse_gaussian: f64,
    /// `None` outside the regime where the closed-form ratio holds.
    advantage: Option<f64>,
}

#[derive(Serialize)]
struct PrivUnitProfile {
    gamma: f64,
    p: f64,
    m: f64,
    eps_certified: f64,
    mse: f64,
    cap_fraction: f64,
    t: Vec<f64>,
    density: Vec<f64>,
}

#[derive(Serialize)]
struct RateCurves {
    pub_fraction: Vec<f64>,
    upper: Vec<f64>,
    lower: Vec<f64>,
    public_binding: Vec<bool>,
}

#[derive(Serialize)]
struct Failure {
    error: String,
}

fn to_json<T: Serialize>(r: Result<T, Error>) -> String {
    let out = match r {
        Ok(v) => serde_json::to_string(&v),
        Err(e) => serde_json::to_string(&Failure { error: e.to_string() }),
    };
    out.unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"))
}

fn weight_curve_impl(n_priv: usize, n_pub: usize, d: usize, b: f64, v: f64, rho: f64, points: usize) -> Result<WeightCurve, Error> {
    let spec = BoundedDistSpec::new(b, v)?;
    let rho = ZcdpBudget::new(rho)?;
    if n_priv == 0 || n_pub == 0 {
        return Err(Error::InvalidInput("need at least one private and one public sample".into()));
    }
    let n = (n_priv + n_pub) as f64;
    let points = points.clamp(2, 2000);
    let r_max = 1.0 / n_priv as f64;
    let r: Vec<f64> = (0..points).map(|i| r_max * i as f64 / (points - 1) as f64).collect();
    let mse = r.iter().map(|&x| weighted_gaussian_mse(x, n_priv, n_pub, d, spec, rho)).collect();
    let r_opt = optimal_weight(n_priv, n_pub, spec, rho, d)?;
    Ok(WeightCurve {
        mse_opt: weighted_gaussian_mse(r_opt, n_priv, n_pub, d, spec, rho),
        mse_throwaway: weighted_gaussian_mse(0.0, n_priv, n_pub, d, spec, rho),
        mse_gaussian: weighted_gaussian_mse(1.0 / n, n_priv, n_pub, d, spec, rho),
        advantage: advantage_ratio(n_priv, n_pub, spec, rho, d).ok(),
        r,
        mse,
        r_opt,
    })
}

/// Worst-case MSE of the weighted-Gaussian mean across private weights `r in [0, 1/n_priv]`.
#[wasm_bindgen]
pub fn weighted_gaussian_curve(n_priv: usize, n_pub: usize, d: usize, b: f64, v: f64, rho: f64, points: usize) -> String {
    to_json(weight_curve_impl(n_priv, n_pub, d, b, v, rho, points))
}

fn privunit_impl(eps: f64, d: usize, points: usize) -> Result<PrivUnitProfile, Error> {
    let cfg = select_privunit_params(eps, d)?;
    let points = points.clamp(2, 2000);
    let t: Vec<f64> = (0..points).map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64).collect();
    let density = t.iter().map(|&x| cfg.output_density(x) * sphere_inner_product_density(x, d)).collect();
    Ok(PrivUnitProfile {
        gamma: cfg.gamma(),
        p: cfg.p(),
        m: cfg.m(),
        eps_certified: cfg.eps_certified(),
        mse: cfg.mse(),
        cap_fraction: cfg.cap_fraction(),
        t,
        density,
    })
}

/// PrivUnit parameters chosen for `(eps, d)` and the density of `t = <v, output direction>`.
#[wasm_bindgen]
pub fn privunit_profile(eps: f64, d: usize, points: usize) -> String {
    to_json(privunit_impl(eps, d, points))
}

fn rates_impl(problem: &str, eps: f64, n: u64, d: u64, points: usize) -> Result<RateCurves, Error> {
    let problem: Problem = problem.parse()?;
    let points = points.clamp(2, 500);
    let mut out = RateCurves {
        pub_fraction: Vec::new(),
        upper: Vec::new(),
        lower: Vec::new(),
        public_binding: Vec::new(),
    };
    for i in 0..points {
        let n_pub = ((n as f64 * i as f64 / (points - 1) as f64).round() as u64).min(n);
        let mut q = RateQuery::new(problem, eps, n - n_pub, n, d);
        if problem == Problem::ScoCentral || problem == Problem::MeanCentral {
            q.delta = 1e-6;
        }
        let up = rate(&q, Bound::Upper)?;
        out.pub_fraction.push(n_pub as f64 / n as f64);
        out.upper.push(up.value);
        out.lower.push(rate(&q, Bound::Lower)?.value);
        out.public_binding.push(up.binding == Binding::Public);
    }
    Ok(out)
}

/// Upper and lower rate envelopes of `problem` as the public fraction goes from 0 to 1.
#[wasm_bindgen]
pub fn rate_curves(problem: &str, eps: f64, n: u64, d: u64, points: usize) -> String {
    to_json(rates_impl(problem, eps, n, d, points))
}
