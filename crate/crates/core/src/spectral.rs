//! Eigenstates: analytic Hermite-Gauss and Laguerre states, numeric
//! eigenstates of tabulated potentials, expanding modes and the quadratic
//! Lewis-Riesenfeld invariant. Trap units throughout (`hbar = m = 1`).

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;

use crate::error::{positive, Error, Result};
use crate::grid::{Axis, Grid1D, Wavefunction1D, TRUNCATION_LIMIT};
use crate::numerics::eigen;
use crate::numerics::fft::Fft;
use crate::numerics::special::{hermite_functions, laguerre};

fn require_axis(grid: &Grid1D, axis: Axis) -> Result<()> {
    if grid.axis() != axis {
        return Err(Error::Domain {
            what: "grid axis",
            reason: match axis {
                Axis::Longitudinal => "a longitudinal grid is required",
                Axis::Radial => "a radial grid is required",
            },
        });
    }
    Ok(())
}

fn check_truncation(values: &[f64]) -> Result<()> {
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let edge = values[0].abs().max(values[values.len() - 1].abs());
    if edge > TRUNCATION_LIMIT * peak.max(1.0) {
        return Err(Error::Truncated {
            amplitude: edge,
            limit: TRUNCATION_LIMIT,
        });
    }
    Ok(())
}

/// Normalized Hermite-Gauss level `n` of a harmonic trap at `omega`.
/// Energy `(n + 1/2) omega`.
pub fn harmonic_eigenstate_z(n: usize, omega: f64, grid: &Grid1D) -> Result<Wavefunction1D> {
    require_axis(grid, Axis::Longitudinal)?;
    let omega = positive("trap frequency", omega)?;
    let scale = omega.sqrt();
    let amp = scale.sqrt();
    let values: Vec<f64> = grid
        .points()
        .iter()
        .map(|&z| amp * hermite_functions(n, scale * z)[n])
        .collect();
    check_truncation(&values)?;
    Wavefunction1D::from_real(*grid, &values)?.normalized()
}

/// Radial level `k` (`nu = 0`) of a harmonic trap at `omega_r`, as
/// `sqrt(r) F`: `sqrt(2 omega r) exp(-omega r^2 / 2) L_k(omega r^2)`.
/// Energy `(2k + 1) omega_r`.
pub fn radial_eigenstate(k: usize, omega_r: f64, grid: &Grid1D) -> Result<Wavefunction1D> {
    require_axis(grid, Axis::Radial)?;
    let omega = positive("radial frequency", omega_r)?;
    let values: Vec<f64> = grid
        .points()
        .iter()
        .map(|&r| {
            let x = omega * r * r;
            (2.0 * omega * r).sqrt() * (-0.5 * x).exp() * laguerre(k, x)
        })
        .collect();
    let edge = values[values.len() - 1].abs();
    if edge > TRUNCATION_LIMIT {
        return Err(Error::Truncated {
            amplitude: edge,
            limit: TRUNCATION_LIMIT,
        });
    }
    Wavefunction1D::from_real(*grid, &values)?.normalized()
}

/// Level `n` of the finite-difference Hamiltonian `T + centrifugal + V` on
/// `grid`, with its energy.
///
/// Eigenvectors are fixed to be positive at their first antinode. Levels
/// above the potential at the outer wall are rejected: they are box states.
pub fn stationary_state_numeric<F: Fn(f64) -> f64>(
    potential: F,
    grid: &Grid1D,
    nu: i32,
    n: usize,
) -> Result<(Wavefunction1D, f64)> {
    let op = grid.hamiltonian(nu, &potential);
    let (lo, hi) = grid.extent();
    let wall = match grid.axis() {
        Axis::Radial => potential(hi),
        Axis::Longitudinal => potential(lo).min(potential(hi)),
    };
    let bound = eigen::count_below(&op, wall);
    if n >= bound {
        return Err(Error::OutOfSpectrum {
            requested: n,
            available: bound,
        });
    }
    let (energy, mut vector) = eigen::eigenpair(&op, n);
    fix_sign(&mut vector);
    let psi = Wavefunction1D::from_real(*grid, &vector)?.normalized()?;
    Ok((psi, energy))
}

/// Flips `v` so that its first local maximum of `|v|` (ignoring the noise
/// floor) is positive.
fn fix_sign(v: &mut [f64]) {
    let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let floor = 1e-3 * peak;
    let n = v.len();
    let mut pick = None;
    for i in 0..n {
        let a = v[i].abs();
        if a < floor {
            continue;
        }
        let left = if i > 0 { v[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { v[i + 1].abs() } else { 0.0 };
        if a >= left && a >= right {
            pick = Some(i);
            break;
        }
    }
    if let Some(i) = pick {
        if v[i] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Expanding mode of level `n` at one instant of a harmonic evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpandingModeSpec {
    pub level: usize,
    pub omega0: f64,
    pub b: f64,
    pub db: f64,
    /// `int_0^t dt' / b^2`.
    pub phase_integral: f64,
}

/// `exp(i b' z^2 / 2b) b^{-1/2} phi_n(z / b; omega0)
/// exp(-i (n + 1/2) omega0 int dt/b^2)`, normalized on the grid.
pub fn expanding_mode(spec: &ExpandingModeSpec, grid: &Grid1D) -> Result<Wavefunction1D> {
    require_axis(grid, Axis::Longitudinal)?;
    let b = positive("scaling factor", spec.b)?;
    let omega0 = positive("trap frequency", spec.omega0)?;
    if spec.phase_integral < 0.0 {
        return Err(Error::Domain {
            what: "phase integral",
            reason: "must be non-negative",
        });
    }
    let scale = omega0.sqrt() / b;
    let amp = scale.sqrt();
    let n = spec.level;
    let global = -(n as f64 + 0.5) * omega0 * spec.phase_integral;
    let data = grid
        .points()
        .iter()
        .map(|&z| {
            let shape = amp * hermite_functions(n, scale * z)[n];
            Complex64::from_polar(shape, global + spec.db * z * z / (2.0 * b))
        })
        .collect();
    Wavefunction1D::new(*grid, data)?.normalized()
}

/// Radial (`nu = 0`) ground expanding mode of a trap starting at
/// `omega_r0`: `b^{-1/2} u_0(r / b) exp(i b' r^2 / 2b)`, up to its global
/// phase.
pub fn radial_expanding_mode(
    omega_r0: f64,
    b: f64,
    db: f64,
    grid: &Grid1D,
) -> Result<Wavefunction1D> {
    require_axis(grid, Axis::Radial)?;
    let b = positive("scaling factor", b)?;
    let omega = positive("radial frequency", omega_r0)? / (b * b);
    let data = grid
        .points()
        .iter()
        .map(|&r| {
            let x = omega * r * r;
            let shape = (2.0 * omega * r).sqrt() * (-0.5 * x).exp();
            Complex64::from_polar(shape, db * r * r / (2.0 * b))
        })
        .collect();
    Wavefunction1D::new(*grid, data)?.normalized()
}

/// `d psi / dz`, spectrally on power-of-two grids and by central
/// differences otherwise.
fn derivative(psi: &Wavefunction1D) -> Result<Vec<Complex64>> {
    let grid = psi.grid();
    let n = grid.len();
    if grid.is_power_of_two() {
        let fft = Fft::new(n)?;
        let k = fft.wavenumbers(grid.spacing());
        let mut buf = psi.data().to_vec();
        fft.forward(&mut buf);
        for (c, &kk) in buf.iter_mut().zip(&k) {
            *c *= Complex64::new(0.0, kk);
        }
        fft.inverse(&mut buf);
        Ok(buf)
    } else {
        let d = psi.data();
        let h = grid.spacing();
        let zero = Complex64::new(0.0, 0.0);
        Ok((0..n)
            .map(|i| {
                let left = if i > 0 { d[i - 1] } else { zero };
                let right = if i + 1 < n { d[i + 1] } else { zero };
                (right - left) / (2.0 * h)
            })
            .collect())
    }
}

/// Expectation of the invariant
/// `b^2 p^2/2 - b b' (zp + pz)/2 + b'^2 z^2/2 + omega0^2 z^2 / (2 b^2)`.
pub fn invariant_expectation(psi: &Wavefunction1D, b: f64, db: f64, omega0: f64) -> Result<f64> {
    require_axis(psi.grid(), Axis::Longitudinal)?;
    let h = psi.grid().spacing();
    let dpsi = derivative(psi)?;
    let data = psi.data();
    let mut p2 = 0.0;
    let mut zp = 0.0;
    let mut z2 = 0.0;
    for (i, (&f, &df)) in data.iter().zip(&dpsi).enumerate() {
        let z = psi.grid().point(i);
        // p psi = -i psi'
        let p_psi = Complex64::new(0.0, -1.0) * df;
        p2 += p_psi.norm_sqr();
        zp += (f.conj() * z * p_psi).re;
        z2 += z * z * f.norm_sqr();
    }
    let (p2, zp, z2) = (p2 * h, zp * h, z2 * h);
    // <(zp + pz)/2> = Re <z p>
    Ok(0.5 * b * b * p2 - b * db * zp + 0.5 * (db * db + omega0 * omega0 / (b * b)) * z2)
}

/// Harmonic potential `omega^2 x^2 / 2` for use with
/// [`stationary_state_numeric`].
pub fn harmonic_potential(omega: f64) -> impl Fn(f64) -> f64 {
    move |x| 0.5 * omega * omega * x * x
}

/// Energies of the lowest `count` levels of the harmonic oscillator on a
/// longitudinal grid, for convergence checks.
pub fn harmonic_grid_energies(omega: f64, grid: &Grid1D, count: usize) -> Vec<f64> {
    let op = grid.hamiltonian(0, harmonic_potential(omega));
    (0..count).map(|k| eigen::eigenvalue(&op, k)).collect()
}
