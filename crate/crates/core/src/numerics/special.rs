//! Hermite and Laguerre families, and a fast unit phasor.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;

/// Normalized Hermite functions `phi_0..=phi_n` at `xi`, where
/// `phi_k(xi) = H_k(xi) exp(-xi^2 / 2) / sqrt(2^k k! sqrt(pi))`.
///
/// The three-term recurrence on the normalized functions stays finite for
/// the level counts used here, unlike raw `H_k`.
pub fn hermite_functions(n: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let phi0 = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    out.push(phi0);
    if n >= 1 {
        out.push(2f64.sqrt() * xi * phi0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Single normalized Hermite function.
pub fn hermite_function(n: usize, xi: f64) -> f64 {
    hermite_functions(n, xi)[n]
}

/// Physicists' Hermite polynomial `H_n(y)`.
pub fn hermite_polynomial(n: usize, y: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * y);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * y * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Laguerre polynomial `L_k(x) = L_k^{(0)}(x)`.
pub fn laguerre(k: usize, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 - x);
    if k == 0 {
        return l0;
    }
    for j in 1..k {
        let jf = j as f64;
        let l2 = ((2.0 * jf + 1.0 - x) * l1 - jf * l0) / (jf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `exp(2 pi i turns)`.
///
/// Reduces to the nearest quarter turn and evaluates Taylor polynomials on
/// `|r| <= pi/4`; agrees with `sin_cos` to a few ulps at a fraction of
/// the cost, which matters in the potential-phase loops.
#[inline]
pub fn cis_turns(turns: f64) -> Complex64 {
    let quarters = (4.0 * turns).round();
    let r = TAU * (turns - 0.25 * quarters);
    let r2 = r * r;
    let sin = r
        * (1.0
            + r2 * (-1.0 / 6.0
                + r2 * (1.0 / 120.0
                    + r2 * (-1.0 / 5040.0
                        + r2 * (1.0 / 362_880.0
                            + r2 * (-1.0 / 39_916_800.0
                                + r2 * (1.0 / 6_227_020_800.0
                                    + r2 * (-1.0 / 1_307_674_368_000.0))))))));
    let cos = 1.0
        + r2 * (-0.5
            + r2 * (1.0 / 24.0
                + r2 * (-1.0 / 720.0
                    + r2 * (1.0 / 40_320.0
                        + r2 * (-1.0 / 3_628_800.0
                            + r2 * (1.0 / 479_001_600.0
                                + r2 * (-1.0 / 87_178_291_200.0 + r2 / 20_922_789_888_000.0)))))));
    match (quarters as i64).rem_euclid(4) {
        0 => Complex64::new(cos, sin),
        1 => Complex64::new(-sin, cos),
        2 => Complex64::new(-cos, -sin),
        _ => Complex64::new(sin, -cos),
    }
}
