//! The PrivUnit randomizer for unit vectors, its parameter selection and a density-ratio audit.

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use rand::Rng;

use super::beta::{beta_reg, inverse_lower_tail, ln_beta};
use crate::dataset::{dot, norm, SplitDataset};
use crate::error::{invalid, Result};
use crate::noise::standard_normal_vec;

const UNIT_TOL: f64 = 1e-9;

/// Parameters `(p, gamma, d)` of PrivUnit with the derived scale `m` and certified epsilon.
///
/// The output is uniform on the cap `{u : <u, v> >= gamma}` with probability `p`
/// and uniform on its complement otherwise, divided by `m` so that it is unbiased.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivUnitConfig {
    p: f64,
    // 1 - p kept separately so that p close to 1 keeps its precision
    q: f64,
    gamma: f64,
    d: usize,
    cap: f64,
    ln_cap: f64,
    ln_cap_c: f64,
    m: f64,
    eps_certified: f64,
}

impl PrivUnitConfig {
    /// Builds a config from a cap probability `p`, a cap height `gamma` in `[0, 1)`
    /// and a dimension `d >= 2`.
    ///
    /// A `p` at or below the cap fraction gives `m <= 0`; such configs can be
    /// audited but not used to randomize.
    pub fn new(p: f64, gamma: f64, d: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("p must lie in [0, 1], got {p}"));
        }
        Self::build(p, 1.0 - p, gamma, d)
    }

    /// Same as [`PrivUnitConfig::new`] with `p` given by its log-odds `ln(p / (1 - p))`.
    pub fn from_log_odds(log_odds: f64, gamma: f64, d: usize) -> Result<Self> {
        if log_odds.is_nan() {
            return invalid("log-odds must not be NaN");
        }
        let (p, q) = if log_odds >= 0.0 {
            let e = (-log_odds).exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            let e = log_odds.exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        Self::build(p, q, gamma, d)
    }

    fn build(p: f64, q: f64, gamma: f64, d: usize) -> Result<Self> {
        if d < 2 {
            return invalid(format!("PrivUnit needs d >= 2, got {d}"));
        }
        if !(0.0..1.0).contains(&gamma) {
            return invalid(format!("gamma must lie in [0, 1), got {gamma}"));
        }
        let alpha = (d as f64 - 1.0) / 2.0;
        let x_cap = (1.0 - gamma) / 2.0;
        let cap = beta_reg(x_cap, alpha, alpha);
        let cap_c = beta_reg((1.0 + gamma) / 2.0, alpha, alpha);
        let (ln_cap, ln_cap_c) = (cap.ln(), cap_c.ln());
        let ln_k = alpha * (1.0 - gamma * gamma).ln() - (d as f64 - 1.0).ln() - (2.0 * alpha - 1.0) * LN_2 - ln_beta(alpha, alpha);
        let m = p * (ln_k - ln_cap).exp() - q * (ln_k - ln_cap_c).exp();
        let eps_certified = ((p.ln() - ln_cap) - (q.ln() - ln_cap_c)).abs();
        Ok(Self {
            p,
            q,
            gamma,
            d,
            cap,
            ln_cap,
            ln_cap_c,
            m,
            eps_certified,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Scale `m` with `E[<V, v>] = m` for `V` the unscaled sphere draw.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Smallest epsilon for which the output density ratio is bounded by `e^eps`.
    pub fn eps_certified(&self) -> f64 {
        self.eps_certified
    }

    /// Surface fraction of the cap.
    pub fn cap_fraction(&self) -> f64 {
        self.cap
    }

    fn ln_density_inside(&self) -> f64 {
        self.p.ln() - self.ln_cap
    }

    fn ln_density_outside(&self) -> f64 {
        self.q.ln() - self.ln_cap_c
    }

    /// Output density relative to the uniform measure on the sphere, as a function of `t = <u, v>`.
    pub fn output_density(&self, t: f64) -> f64 {
        if t >= self.gamma {
            self.ln_density_inside().exp()
        } else {
            self.ln_density_outside().exp()
        }
    }

    /// Expected squared error `E||PrivUnit(v) - v||^2 = 1/m^2 - 1` for a unit input.
    pub fn mse(&self) -> f64 {
        1.0 / (self.m * self.m) - 1.0
    }
}

/// Expected squared error of one PrivUnit release.
pub fn privunit_mse(cfg: &PrivUnitConfig) -> f64 {
    cfg.mse()
}

fn check_unit(v: &[f64]) -> Result<()> {
    let n = norm(v);
    if (n - 1.0).abs() > UNIT_TOL {
        return invalid(format!("PrivUnit input must be a unit vector, got norm {n}"));
    }
    Ok(())
}

/// Draws `t = <V, v>` for `V` uniform on the cap (`inside`) or on its complement.
fn sample_inner<R: Rng + ?Sized>(cfg: &PrivUnitConfig, inside: bool, rng: &mut R) -> (f64, f64) {
    let alpha = (cfg.d as f64 - 1.0) / 2.0;
    // 1 - U lies in (0, 1]
    let u = 1.0 - rng.random::<f64>();
    if inside {
        let x = inverse_lower_tail(alpha, (1.0 - cfg.gamma) / 2.0, u);
        (1.0 - 2.0 * x, 2.0 * (x * (1.0 - x)).sqrt())
    } else {
        let x = inverse_lower_tail(alpha, (1.0 + cfg.gamma) / 2.0, u);
        (2.0 * x - 1.0, 2.0 * (x * (1.0 - x)).sqrt())
    }
}

/// Uniform unit vector orthogonal to `v`.
fn orthogonal_direction<R: Rng + ?Sized>(v: &[f64], rng: &mut R) -> Vec<f64> {
    loop {
        let mut g = standard_normal_vec(v.len(), rng);
        let c = dot(&g, v);
        for (gi, vi) in g.iter_mut().zip(v) {
            *gi -= c * vi;
        }
        let n = norm(&g);
        if n > 1e-12 {
            g.iter_mut().for_each(|x| *x /= n);
            return g;
        }
    }
}

/// Unscaled draw `V` on the sphere together with which region it came from.
pub(crate) fn sample_sphere<R: Rng + ?Sized>(v: &[f64], cfg: &PrivUnitConfig, rng: &mut R) -> (Vec<f64>, bool) {
    let inside = rng.random::<f64>() < cfg.p;
    let (t, s) = sample_inner(cfg, inside, rng);
    let w = orthogonal_direction(v, rng);
    let out = v.iter().zip(&w).map(|(vi, wi)| t * vi + s * wi).collect();
    (out, inside)
}

/// Randomizes a unit vector; the output is an unbiased estimate of `v` with norm `1/m`.
pub fn privunit_randomize<R: Rng + ?Sized>(v: &[f64], cfg: &PrivUnitConfig, rng: &mut R) -> Result<Vec<f64>> {
    if v.len() != cfg.d {
        return invalid(format!("input has dimension {}, config expects {}", v.len(), cfg.d));
    }
    check_unit(v)?;
    if !(cfg.m > 0.0) {
        return invalid(format!("config has non-positive scale m = {}; p must exceed the cap fraction", cfg.m));
    }
    let (mut u, _) = sample_sphere(v, cfg, rng);
    u.iter_mut().for_each(|x| *x /= cfg.m);
    Ok(u)
}

fn privunit_cache() -> &'static Mutex<HashMap<(u64, usize), PrivUnitConfig>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), PrivUnitConfig>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// For a cap height, the largest `p` whose density ratio is exactly `e^eps`.
fn config_at(eps: f64, gamma: f64, d: usize) -> Result<PrivUnitConfig> {
    let alpha = (d as f64 - 1.0) / 2.0;
    let ln_cap = beta_reg((1.0 - gamma) / 2.0, alpha, alpha).ln();
    let ln_cap_c = beta_reg((1.0 + gamma) / 2.0, alpha, alpha).ln();
    PrivUnitConfig::from_log_odds(eps + ln_cap - ln_cap_c, gamma, d)
}

/// Picks the certified `(p, gamma)` with the smallest error at the given epsilon.
///
/// For each cap height the density constraint is saturated, which maximizes `m`
/// in `p`; the height is then chosen by a grid scan refined by golden-section
/// search. Results are cached per `(eps, d)`.
pub fn select_privunit_params(eps: f64, d: usize) -> Result<PrivUnitConfig> {
    if !(eps > 0.0) || !eps.is_finite() {
        return invalid(format!("epsilon must be positive and finite, got {eps}"));
    }
    if d < 2 {
        return invalid(format!("PrivUnit needs d >= 2, got {d}"));
    }
    let key = (eps.to_bits(), d);
    if let Some(cfg) = privunit_cache().lock().expect("cache poisoned").get(&key) {
        return Ok(*cfg);
    }

    let score = |g: f64| config_at(eps, g, d).map(|c| c.m).unwrap_or(f64::NEG_INFINITY);
    const GRID: usize = 400;
    let gammas: Vec<f64> = (0..GRID).map(|i| i as f64 / GRID as f64).collect();
    let scores: Vec<f64> = gammas.iter().map(|&g| score(g)).collect();
    let best = (0..GRID).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });

    let mut lo = gammas[best.saturating_sub(1)];
    let mut hi = if best + 1 < GRID { gammas[best + 1] } else { 1.0 - 1e-12 };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (score(a), score(b));
    for _ in 0..80 {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = score(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = score(b);
        }
    }
    let mut gamma = gammas[best];
    for (g, f) in [(a, fa), (b, fb)] {
        if f > score(gamma) {
            gamma = g;
        }
    }
    let cfg = config_at(eps, gamma, d)?;
    privunit_cache().lock().expect("cache poisoned").insert(key, cfg);
    Ok(cfg)
}

/// Outcome of [`privunit_audit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditReport {
    pub eps_claim: f64,
    pub max_log_ratio: f64,
    /// Inner product with the first input at which the worst ratio occurs.
    pub argmax_t: f64,
    /// Inner product with the second input at the same output.
    pub denominator_t: f64,
    /// Inner product of the two inputs realizing the worst ratio.
    pub v_dot_vprime: f64,
    pub pass: bool,
}

impl AuditReport {
    pub fn to_csv_block(&self) -> String {
        format!(
            "eps_claim,max_log_ratio,argmax_t,denominator_t,v_dot_vprime,pass\n{},{},{},{},{},{}\n",
            self.eps_claim,
            self.max_log_ratio,
            self.argmax_t,
            self.denominator_t,
            self.v_dot_vprime,
            if self.pass { "pass" } else { "fail" }
        )
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv_block())
    }
}

/// Checks the epsilon-LDP density-ratio constraint of a config numerically.
///
/// The output density at `u` depends on the input only through `t = <u, v>`.
/// For any two grid values `t, t'` there are unit inputs `v, v'` and an output
/// `u` realizing them, so the worst log-ratio is the spread of the log-density
/// over the grid. The cap boundary is always added to the grid.
pub fn privunit_audit(cfg: &PrivUnitConfig, eps_claim: f64, grid_size: usize) -> Result<AuditReport> {
    if grid_size < 2 {
        return invalid(format!("audit grid needs at least 2 points, got {grid_size}"));
    }
    if eps_claim.is_nan() {
        return invalid("claimed epsilon must not be NaN");
    }
    let mut ts: Vec<f64> = (0..grid_size).map(|i| -1.0 + 2.0 * i as f64 / (grid_size - 1) as f64).collect();
    ts.push(cfg.gamma);
    let ln_f = |t: f64| {
        if t >= cfg.gamma {
            cfg.ln_density_inside()
        } else {
            cfg.ln_density_outside()
        }
    };
    let (mut t_hi, mut t_lo) = (ts[0], ts[0]);
    for &t in &ts {
        if ln_f(t) > ln_f(t_hi) {
            t_hi = t;
        }
        if ln_f(t) < ln_f(t_lo) {
            t_lo = t;
        }
    }
    let mut max_log_ratio = ln_f(t_hi) - ln_f(t_lo);
    if max_log_ratio.is_nan() {
        max_log_ratio = f64::INFINITY;
    }
    Ok(AuditReport {
        eps_claim,
        max_log_ratio,
        argmax_t: t_hi,
        denominator_t: t_lo,
        v_dot_vprime: (t_hi.acos() - t_lo.acos()).cos(),
        pass: max_log_ratio <= eps_claim + 1e-6,
    })
}

/// Mean of public samples and PrivUnit releases of private samples, all scaled by `1/n`.
pub fn semi_privunit_mean<R: Rng + ?Sized>(data: &SplitDataset, cfg: &PrivUnitConfig, rng: &mut R) -> Result<Vec<f64>> {
    let d = data.dim();
    if d != cfg.d {
        return invalid(format!("data dimension {d} does not match config dimension {}", cfg.d));
    }
    for x in data.samples() {
        check_unit(x)?;
    }
    let mut sum = vec![0.0; d];
    for i in 0..data.len() {
        let x = data.sample(i);
        if data.is_private(i) {
            let z = privunit_randomize(x, cfg, rng)?;
            sum.iter_mut().zip(&z).for_each(|(s, v)| *s += v);
        } else {
            sum.iter_mut().zip(x).for_each(|(s, v)| *s += v);
        }
    }
    let n = data.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Ok(sum)
}
