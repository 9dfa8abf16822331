//! Gauss-Legendre and Gauss-Hermite quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;

/// Nodes and weights of an n-point rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            derivative = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        if dp != 0.0 {
            derivative = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Hermite rule for the weight `exp(-y^2)` on the real line; exact
/// for polynomials up to degree `2n - 1`.
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        // asymptotic starting guesses for the largest roots first
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[n - 1],
            3 => 1.91 * z - 0.91 * nodes[n - 2],
            _ => 2.0 * z - nodes[n - i + 1],
        };
        let mut dp = 0.0;
        for _ in 0..200 {
            let (p, d) = hermite_normalized_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        let w = 2.0 / (dp * dp);
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Orthonormal Hermite polynomial `p_n` for weight `exp(-y^2)` and its
/// derivative.
fn hermite_normalized_with_derivative(n: usize, y: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = y * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

/// Composite Gauss-Legendre over `[a, b]` split into `panels` equal pieces.
pub fn composite<F: FnMut(f64) -> f64>(
    rule: &Rule,
    a: f64,
    b: f64,
    panels: usize,
    mut f: F,
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    total * 0.5 * h
}

/// Doubles the panel count of an 8-point composite rule until two
/// successive estimates agree to `abs_tol + rel_tol * |I|`.
pub fn adaptive<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    mut f: F,
) -> Result<f64> {
    let rule = gauss_legendre(8);
    let mut panels = 4;
    let mut previous = composite(&rule, a, b, panels, &mut f);
    for _ in 0..16 {
        panels *= 2;
        let current = composite(&rule, a, b, panels, &mut f);
        if (current - previous).abs() <= abs_tol + rel_tol * current.abs() {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::NotConverged {
        what: "adaptive quadrature",
        iterations: 16,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(5);
        // degree 9 polynomial
        let value = composite(&rule, 0.0, 2.0, 1, |x| x.powi(9) + 3.0 * x.powi(4));
        let exact = 2f64.powi(10) / 10.0 + 3.0 * 2f64.powi(5) / 5.0;
        assert!((value - exact).abs() < 1e-11 * exact);
    }

    #[test]
    fn hermite_moments() {
        let rule = gauss_hermite(6);
        let moment = |k: i32| -> f64 {
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(y, w)| w * y.powi(k))
                .sum()
        };
        let sqrt_pi = PI.sqrt();
        assert!((moment(0) - sqrt_pi).abs() < 1e-13);
        assert!((moment(2) - sqrt_pi / 2.0).abs() < 1e-13);
        assert!((moment(4) - 0.75 * sqrt_pi).abs() < 1e-12);
        assert!((moment(10) - 945.0 / 32.0 * sqrt_pi).abs() < 1e-9);
        assert!(moment(3).abs() < 1e-13);
    }

    #[test]
    fn adaptive_converges_on_smooth_integrand() {
        let value = adaptive(0.0, PI, 1e-13, 1e-13, |x| x.sin()).unwrap();
        assert!((value - 2.0).abs() < 1e-12);
    }
}
