//! Additive noise samplers shared by the mechanisms.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Adds i.i.d. `N(0, std^2)` to every coordinate.
pub fn add_gaussian<R: Rng + ?Sized>(v: &mut [f64], std: f64, rng: &mut R) {
    if std == 0.0 {
        return;
    }
    for x in v.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *x += std * z;
    }
}

/// One draw from the centered Laplace distribution with the given scale.
pub fn laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    // inverse CDF on u in (-1/2, 1/2)
    let u: f64 = rng.random::<f64>() - 0.5;
    let mag = -(1.0 - 2.0 * u.abs()).ln();
    scale * mag.copysign(u)
}

/// Adds i.i.d. `Laplace(scale)` to every coordinate.
pub fn add_laplace<R: Rng + ?Sized>(v: &mut [f64], scale: f64, rng: &mut R) {
    if scale == 0.0 {
        return;
    }
    for x in v.iter_mut() {
        *x += laplace(scale, rng);
    }
}

pub fn standard_normal_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}
