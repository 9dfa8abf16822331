//! Perturbative fidelity estimates for the anharmonic longitudinal well and
//! adiabatic perturbation theory for the radial frequency.
//!
//! The longitudinal quantities take an SI task (`hbar` is the SI value).
//! The quadratures run in the dimensionless time `omega0 t`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;

use crate::error::{positive, Error, Result};
use crate::numerics::quad::{adaptive, gauss_hermite, gauss_legendre, Rule};
use crate::protocol::{ExpansionTask, FrequencyTrajectory, ScalingFunction};
use crate::trap::{AtomSpecies, BeamGeometry};
use crate::units::HBAR;

const TAU: f64 = core::f64::consts::TAU;
const NODES_PER_PERIOD: usize = 40;
const PANEL_NODES: usize = 8;
const ABS_TOL: f64 = 1e-10;
const MAX_PANELS: usize = 1 << 22;

/// Task, scaling and level that the longitudinal estimates refer to.
#[derive(Debug, Clone)]
pub struct PerturbationContext {
    task: ExpansionTask,
    scaling: ScalingFunction,
    geometry: BeamGeometry,
    level_n: usize,
}

impl PerturbationContext {
    /// The scaling must last exactly the task duration.
    pub fn new(task: &ExpansionTask, scaling: ScalingFunction, level_n: usize) -> Result<Self> {
        let tf = task.t_final();
        if (scaling.duration() - tf).abs() > 1e-9 * tf {
            return Err(Error::Domain {
                what: "scaling function",
                reason: "duration differs from the task's final time",
            });
        }
        Ok(Self {
            task: *task,
            scaling,
            geometry: task.geometry(),
            level_n,
        })
    }

    /// Quintic scaling for the task.
    pub fn quintic(task: &ExpansionTask, level_n: usize) -> Result<Self> {
        let scaling = ScalingFunction::quintic(task.gamma(), task.t_final())?;
        Self::new(task, scaling, level_n)
    }

    pub fn with_level(&self, level_n: usize) -> Self {
        Self {
            level_n,
            ..self.clone()
        }
    }

    pub fn task(&self) -> &ExpansionTask {
        &self.task
    }

    pub fn scaling(&self) -> &ScalingFunction {
        &self.scaling
    }

    pub fn geometry(&self) -> &BeamGeometry {
        &self.geometry
    }

    pub fn level(&self) -> usize {
        self.level_n
    }

    fn mass(&self) -> f64 {
        self.task.atom().mass()
    }

    /// `hbar / (2 m zR^2 omega0^2)`: prefactor of every `f1` element.
    fn prefactor(&self) -> f64 {
        let zr = self.geometry.rayleigh_range();
        let w = self.task.omega0();
        HBAR / (2.0 * self.mass() * zr * zr * w * w)
    }

    /// `omega0 T`.
    fn span(&self) -> f64 {
        self.task.omega0() * self.task.t_final()
    }

    /// `[b, d2b/dtau2]` at dimensionless time `tau = omega0 t`.
    fn scaling_at(&self, tau: f64) -> (f64, f64) {
        let span = self.span();
        let s = (tau / span).clamp(0.0, 1.0);
        let [b, _, b2, _] = self.scaling.in_s(s);
        (b, b2 / (span * span))
    }
}

fn level_factor(n: usize) -> f64 {
    let n = n as f64;
    (n + 1.0) * (n + 1.0) + n * n
}

/// `<psi_n|z^4|psi_n> = (hbar/m omega0)^2 (3 b^4 / 4) [(n+1)^2 + n^2]`.
pub fn z4_matrix_element(n: usize, b: f64, omega0: f64, atom: &AtomSpecies) -> f64 {
    let sigma2 = HBAR / (atom.mass() * omega0);
    sigma2 * sigma2 * 0.75 * b.powi(4) * level_factor(n)
}

/// `f1_nn = (i m / 2 hbar zR^2) int omega_z^2 <z^4> dt`, with `omega_z^2`
/// taken from the Ermakov equation of the context's scaling.
pub fn f1_diagonal(ctx: &PerturbationContext) -> Result<Complex64> {
    let task = &ctx.task;
    let atom = task.atom();
    let w0 = task.omega0();
    let zr = ctx.geometry.rayleigh_range();
    let integral = adaptive(0.0, task.t_final(), 0.0, 1e-12, |t| {
        let st = ctx.scaling.at(t);
        let omega_sq = w0 * w0 / st.b.powi(4) - st.d2b / st.b;
        omega_sq * z4_matrix_element(ctx.level_n, st.b, w0, &atom)
    })?;
    Ok(Complex64::new(
        0.0,
        atom.mass() / (2.0 * HBAR * zr * zr) * integral,
    ))
}

/// `|f1_nn| = (3 hbar / 8 m zR^2) [(n+1)^2 + n^2] (t_f - int b'' b^3 dt / omega0^2)`.
pub fn f1_diagonal_magnitude(ctx: &PerturbationContext) -> Result<f64> {
    let task = &ctx.task;
    let w0 = task.omega0();
    let zr = ctx.geometry.rayleigh_range();
    let tf = task.t_final();
    let curvature = adaptive(0.0, tf, 0.0, 1e-12, |t| {
        let st = ctx.scaling.at(t);
        st.d2b * st.b.powi(3)
    })?;
    Ok(3.0 * HBAR / (8.0 * ctx.mass() * zr * zr)
        * level_factor(ctx.level_n)
        * (tf - curvature / (w0 * w0)))
}

/// Scaling families for which `int b^2 b'^2 dt` has a dedicated route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    /// `b = sqrt(1 + (g^2 - 1) t / t_f)`, closed form.
    Optimal,
    /// The quintic polynomial, by quadrature.
    Quintic,
}

/// `int_0^tf b^2 b'^2 dt`.
pub fn scaling_action_integral(kind: ActionKind, gamma: f64, t_f: f64) -> f64 {
    match kind {
        ActionKind::Optimal => (gamma * gamma - 1.0).powi(2) / (4.0 * t_f),
        ActionKind::Quintic => {
            // b^2 b'^2 is a polynomial of degree 18 in s
            let rule = gauss_legendre(10);
            let g = gamma - 1.0;
            let value = crate::numerics::quad::composite(&rule, 0.0, 1.0, 1, |s| {
                let (s2, s3) = (s * s, s * s * s);
                let b = g * (6.0 * s2 * s3 - 15.0 * s2 * s2 + 10.0 * s3) + 1.0;
                let db = 30.0 * g * (s2 * s2 - 2.0 * s3 + s2);
                b * b * db * db
            });
            value / t_f
        }
    }
}

/// `int b^2 b'^2 dt` for an arbitrary scaling function.
pub fn scaling_action(scaling: &ScalingFunction) -> Result<f64> {
    let tf = scaling.duration();
    let value = adaptive(0.0, 1.0, 0.0, 1e-12, |s| {
        let [b, db, _, _] = scaling.in_s(s);
        b * b * db * db
    })?;
    Ok(value / tf)
}

/// Closed form for the quintic action as printed, with `(g^2 - 1)^2`.
pub fn quintic_action_printed(gamma: f64, t_f: f64) -> f64 {
    quintic_action_form((gamma * gamma - 1.0).powi(2), gamma, t_f)
}

/// The same closed form with `(g - 1)^2`, which matches the quadrature.
pub fn quintic_action_corrected(gamma: f64, t_f: f64) -> f64 {
    quintic_action_form((gamma - 1.0).powi(2), gamma, t_f)
}

fn quintic_action_form(lead: f64, gamma: f64, t_f: f64) -> f64 {
    10.0 * lead * (1101.0 + 1351.0 * gamma + 1101.0 * gamma * gamma) / (24871.0 * t_f)
}

/// Lower bound on the longitudinal fidelity and the first-order estimate
/// for the context's scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderBound {
    /// Bracket evaluated with the optimal action.
    pub bound: f64,
    /// Bracket evaluated with the quintic action.
    pub bound_quintic: f64,
    /// `1 - |f1_nn|` for the actual scaling.
    pub estimate: f64,
}

/// `1 - (3 hbar lambda^2 / 8 m pi^2 w0^4) [(n+1)^2 + n^2] [t_f + 3 A / omega0^2]`
/// with `A` the action of the optimal (and, separately, the quintic) `b`.
pub fn fidelity_first_order_bound(ctx: &PerturbationContext) -> Result<FirstOrderBound> {
    let task = &ctx.task;
    let (gamma, tf, w0) = (task.gamma(), task.t_final(), task.omega0());
    let zr = ctx.geometry.rayleigh_range();
    let coeff = 3.0 * HBAR / (8.0 * ctx.mass() * zr * zr) * level_factor(ctx.level_n);
    let bracket = |action: f64| tf + 3.0 * action / (w0 * w0);
    let optimal = scaling_action_integral(ActionKind::Optimal, gamma, tf);
    let quintic = scaling_action_integral(ActionKind::Quintic, gamma, tf);
    Ok(FirstOrderBound {
        bound: 1.0 - coeff * bracket(optimal),
        bound_quintic: 1.0 - coeff * bracket(quintic),
        estimate: 1.0 - f1_diagonal(ctx)?.norm(),
    })
}

/// Orthonormal Hermite functions without the Gaussian, `h_k(y)` with
/// `int e^{-y^2} h_j h_k = sqrt(pi) delta_jk`.
fn hermite_normalized(n: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * y * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn selection_allows(n: usize, n_prime: usize) -> bool {
    matches!(n.abs_diff(n_prime), 0 | 2 | 4)
}

/// `alpha / sqrt(pi 2^(n+n') n! n'!)`.
fn alpha_normalized(n: usize, n_prime: usize) -> f64 {
    if !selection_allows(n, n_prime) {
        return 0.0;
    }
    let rule: Rule = gauss_hermite((n + n_prime) / 2 + 3);
    let sum: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&y, &w)| w * hermite_normalized(n, y) * hermite_normalized(n_prime, y) * y.powi(4))
        .sum();
    sum / core::f64::consts::PI.sqrt()
}

/// `int e^{-y^2} H_n H_n' y^4 dy`; zero unless `|n - n'|` is 0, 2 or 4.
pub fn alpha_coefficient(n: usize, n_prime: usize) -> f64 {
    let weight = |k: usize| (1..=k).fold(1.0, |acc, i| acc * 2.0 * i as f64);
    alpha_normalized(n, n_prime) * (core::f64::consts::PI * weight(n) * weight(n_prime)).sqrt()
}

/// `int_a^b A(x) e^{i phi(x)} dx`, `phi(x) = phi_a + int_a^x rate`. Panels
/// hold 8 Gauss-Legendre nodes, at least 40 nodes per local phase period,
/// and are doubled until two passes agree. Returns the integral and
/// `phi(b)`.
fn oscillatory<A, R>(
    a: f64,
    b: f64,
    phase_a: f64,
    amplitude: A,
    rate: R,
) -> Result<(Complex64, f64)>
where
    A: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    if b <= a {
        return Ok((Complex64::new(0.0, 0.0), phase_a));
    }
    let samples = 512;
    let max_rate = (0..=samples)
        .map(|i| rate(a + (b - a) * i as f64 / samples as f64).abs())
        .fold(0.0, f64::max);
    let periods = max_rate * (b - a) / TAU;
    let per_period = NODES_PER_PERIOD / PANEL_NODES;
    let mut panels = ((periods * per_period as f64).ceil() as usize).max(16);
    let rule = gauss_legendre(PANEL_NODES);
    let mut previous = oscillatory_pass(&rule, a, b, panels, phase_a, &amplitude, &rate);
    while panels < MAX_PANELS {
        panels *= 2;
        let current = oscillatory_pass(&rule, a, b, panels, phase_a, &amplitude, &rate);
        let diff = (current.0 - previous.0).norm();
        if diff <= ABS_TOL + ABS_TOL * current.0.norm() {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::NotConverged {
        what: "oscillatory quadrature",
        iterations: panels,
    })
}

fn oscillatory_pass<A, R>(
    rule: &Rule,
    a: f64,
    b: f64,
    panels: usize,
    phase_a: f64,
    amplitude: &A,
    rate: &R,
) -> (Complex64, f64)
where
    A: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    let h = (b - a) / panels as f64;
    let mut phase = phase_a;
    let mut total = Complex64::new(0.0, 0.0);
    let integrate = |lo: f64, hi: f64| -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = lo + half;
        let s: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * rate(mid + half * x))
            .sum();
        s * half
    };
    for p in 0..panels {
        let lo = a + h * p as f64;
        let hi = lo + h;
        let mid = lo + 0.5 * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let node = mid + 0.5 * h * x;
            let local = phase + integrate(lo, node);
            total += Complex64::from_polar(w * amplitude(node), local);
        }
        phase += integrate(lo, hi);
    }
    (total * 0.5 * h, phase)
}

/// `beta_{n,n'}(t) = int_0^t b^4 omega_z^2 e^{-i (n'-n) omega0 int_0^t1 dt2 / b^2} dt1`
/// in `s^-1`.
pub fn beta_integral(
    n: usize,
    n_prime: usize,
    ctx: &PerturbationContext,
    t: f64,
) -> Result<Complex64> {
    let w0 = ctx.task.omega0();
    let tf = ctx.task.t_final();
    if !(0.0..=tf * (1.0 + 1e-12)).contains(&t) {
        return Err(Error::Domain {
            what: "beta integral time",
            reason: "must lie in [0, t_f]",
        });
    }
    let dn = n_prime as f64 - n as f64;
    let (value, _) = oscillatory(
        0.0,
        t.min(tf) * w0,
        0.0,
        |tau| {
            let (b, d2b) = ctx.scaling_at(tau);
            1.0 - d2b * b.powi(3)
        },
        |tau| {
            let (b, _) = ctx.scaling_at(tau);
            -dn / (b * b)
        },
    )?;
    Ok(value * w0)
}

/// `f1_{n,n'}(t_f)`.
pub fn f1_element(ctx: &PerturbationContext, n_prime: usize) -> Result<Complex64> {
    let n = ctx.level_n;
    let alpha = alpha_normalized(n, n_prime);
    if alpha == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let beta = beta_integral(n, n_prime, ctx, ctx.task.t_final())?;
    Ok(Complex64::new(0.0, ctx.prefactor() * alpha) * beta)
}

/// Neighbours reached by the quartic term: `n +- 2`, `n +- 4`, non-negative.
pub fn coupled_levels(n: usize) -> Vec<usize> {
    [n.checked_sub(4), n.checked_sub(2), Some(n + 2), Some(n + 4)]
        .into_iter()
        .flatten()
        .collect()
}

/// `sqrt(1 - sum_{n' != n} |f1_{n,n'}|^2)`, clamped at zero.
pub fn second_order_fidelity(ctx: &PerturbationContext) -> Result<f64> {
    let mut leak = 0.0;
    for m in coupled_levels(ctx.level_n) {
        leak += f1_element(ctx, m)?.norm_sqr();
    }
    Ok((1.0 - leak).max(0.0).sqrt())
}

/// First-order adiabatic amplitude of the first excited radial pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticAmplitude {
    pub amplitude: Complex64,
    /// Frequency jumps folded in as instantaneous `-ln(w_b/w_a)/2` terms.
    pub jumps: usize,
}

impl AdiabaticAmplitude {
    /// `sqrt(1 - |a1|^2)`, clamped at zero.
    pub fn fidelity(&self) -> f64 {
        (1.0 - self.amplitude.norm_sqr()).max(0.0).sqrt()
    }
}

/// `a1(t) = -int_0^t (w_R' / 2 w_R) e^{2i int_0^t' w_R} dt'` in the harmonic
/// radial approximation, in the trajectory's units.
pub fn adiabatic_amplitude(traj: &FrequencyTrajectory, t: f64) -> Result<AdiabaticAmplitude> {
    positive("integration time", t)?;
    let (t_min, omega_sq_min) = traj.min_omega_sq();
    if omega_sq_min <= 0.0 {
        return Err(Error::Attractivity {
            time: t_min,
            omega_sq: omega_sq_min,
        });
    }
    let kappa = traj.radial_ratio();
    let eps = 1e-9 * traj.t_final();
    let jump_times: Vec<f64> = traj
        .breakpoints()
        .iter()
        .copied()
        .filter(|&bp| (0.0..=t).contains(&bp))
        .collect();
    let smooth = |x: f64| -traj.omega_z_sq_rate(x) / (4.0 * traj.omega_z_sq(x));
    let rate = |x: f64| 2.0 * kappa * traj.omega_z(x);
    let mut amplitude = Complex64::new(0.0, 0.0);
    let mut phase = 0.0;
    let mut start = 0.0;
    let mut jumps = 0;
    for bp in jump_times {
        let (part, end_phase) = oscillatory(start, bp, phase, smooth, rate)?;
        amplitude += part;
        phase = end_phase;
        start = bp;
        let log_step = 0.5 * (traj.omega_z_sq(bp + eps) / traj.omega_z_sq(bp - eps)).ln();
        if log_step.abs() > 1e-9 {
            amplitude -= Complex64::from_polar(0.5 * log_step, phase);
            jumps += 1;
        }
    }
    let (part, _) = oscillatory(start, t, phase, smooth, rate)?;
    amplitude += part;
    Ok(AdiabaticAmplitude { amplitude, jumps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{bang_bang, invariant_quintic, static_trap};
    use crate::trap::SignPolicy;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn task(waist: f64, f_final: f64, tf: f64) -> ExpansionTask {
        let geom = BeamGeometry::new(waist, 1.06e-6).unwrap();
        ExpansionTask::from_hz(2500.0, f_final, tf, AtomSpecies::rubidium87(), geom).unwrap()
    }

    #[test]
    fn fourth_moment_of_ground_state() {
        let atom = AtomSpecies::rubidium87();
        let w = TAU * 2500.0;
        let sigma2 = HBAR / (atom.mass() * w);
        assert_relative_eq!(
            z4_matrix_element(0, 1.0, w, &atom),
            0.75 * sigma2 * sigma2,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            z4_matrix_element(3, 2.0, w, &atom),
            16.0 * z4_matrix_element(3, 1.0, w, &atom),
            max_relative = 1e-14
        );
    }

    #[test]
    fn alpha_values_and_selection_rule() {
        let sq = PI.sqrt();
        assert_relative_eq!(alpha_coefficient(0, 0), 0.75 * sq, max_relative = 1e-12);
        assert_relative_eq!(alpha_coefficient(0, 2), 6.0 * sq, max_relative = 1e-12);
        assert_relative_eq!(alpha_coefficient(2, 0), 6.0 * sq, max_relative = 1e-12);
        assert_eq!(alpha_coefficient(0, 1), 0.0);
        assert_eq!(alpha_coefficient(1, 6), 0.0);
        // H_4 = 16y^4 - 48y^2 + 12, so alpha_04 = 16 * 105 sqrt(pi)/16 - 48 * 15 sqrt(pi)/8 + 12 * 3 sqrt(pi)/4
        let expect = (105.0 - 90.0 + 9.0) * sq;
        assert_relative_eq!(alpha_coefficient(0, 4), expect, max_relative = 1e-12);
    }

    #[test]
    fn diagonal_alpha_matches_fourth_moment() {
        for n in 0..8 {
            assert_relative_eq!(
                alpha_normalized(n, n),
                0.75 * level_factor(n),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn action_integrals() {
        let g = 10f64.sqrt();
        assert_relative_eq!(
            scaling_action_integral(ActionKind::Optimal, g, 1e-3),
            20250.0,
            max_relative = 1e-12
        );
        let quintic = scaling_action_integral(ActionKind::Quintic, g, 1e-3);
        assert_relative_eq!(quintic, 3.08e4, max_relative = 1e-2);
        assert_relative_eq!(
            quintic,
            quintic_action_corrected(g, 1e-3),
            max_relative = 1e-3
        );
        assert!((quintic - quintic_action_printed(g, 1e-3)).abs() > 0.5 * quintic);
        let generic = scaling_action(&ScalingFunction::quintic(g, 1e-3).unwrap()).unwrap();
        assert_relative_eq!(quintic, generic, max_relative = 1e-10);
        for kind in [ActionKind::Optimal, ActionKind::Quintic] {
            assert_eq!(scaling_action_integral(kind, 1.0, 1e-3), 0.0);
        }
    }

    #[test]
    fn f1_static_trap_phase() {
        let t = task(3e-6, 2500.0, 1e-3);
        let ctx =
            PerturbationContext::new(&t, ScalingFunction::quintic(1.0, 1e-3).unwrap(), 2).unwrap();
        let zr = t.geometry().rayleigh_range();
        let expect = 3.0 * HBAR / (8.0 * t.atom().mass() * zr * zr) * 13.0 * 1e-3;
        let f1 = f1_diagonal(&ctx).unwrap();
        assert_relative_eq!(f1.im, expect, max_relative = 1e-10);
        assert_eq!(f1.re, 0.0);
    }

    #[test]
    fn f1_two_routes_agree() {
        let t = task(3e-6, 250.0, 1e-3);
        let ctx = PerturbationContext::quintic(&t, 0).unwrap();
        let direct = f1_diagonal(&ctx).unwrap();
        let magnitude = f1_diagonal_magnitude(&ctx).unwrap();
        assert_relative_eq!(direct.norm(), magnitude, max_relative = 1e-8);
        // the b'' b^3 integral also equals -3 int b^2 b'^2
        let w0 = t.omega0();
        let zr = t.geometry().rayleigh_range();
        let by_parts = 3.0 * HBAR / (8.0 * t.atom().mass() * zr * zr)
            * (1e-3
                + 3.0 * scaling_action_integral(ActionKind::Quintic, t.gamma(), 1e-3) / (w0 * w0));
        assert_relative_eq!(magnitude, by_parts, max_relative = 1e-8);
    }

    #[test]
    fn f1_scales_as_inverse_fourth_power_of_waist() {
        let a = PerturbationContext::quintic(&task(3e-6, 250.0, 1e-3), 1).unwrap();
        let b = PerturbationContext::quintic(&task(6e-6, 250.0, 1e-3), 1).unwrap();
        let ratio = f1_diagonal(&a).unwrap().norm() / f1_diagonal(&b).unwrap().norm();
        assert_relative_eq!(ratio, 16.0, max_relative = 1e-9);
    }

    #[test]
    fn bound_values() {
        let t = task(3e-6, 25.0, 2.5e-3);
        let ctx = PerturbationContext::quintic(&t, 0).unwrap();
        let b0 = fidelity_first_order_bound(&ctx).unwrap();
        assert!((b0.bound - 0.9944).abs() < 1e-3, "{}", b0.bound);
        let b5 = fidelity_first_order_bound(&ctx.with_level(5)).unwrap();
        assert!((b5.bound - 0.661).abs() < 1e-2, "{}", b5.bound);
        assert!(b5.bound_quintic <= b5.bound);
        let wide = PerturbationContext::quintic(&task(10e-6, 25.0, 2.5e-3), 5).unwrap();
        let bw = fidelity_first_order_bound(&wide).unwrap();
        assert!(bw.bound >= 0.997, "{}", bw.bound);
        // the quintic's own first-order value is the quintic-bracket bound
        assert!((bw.estimate - bw.bound_quintic).abs() < 1e-9);
        assert!(bw.bound_quintic <= bw.bound);
    }

    #[test]
    fn beta_static_closed_form() {
        let t = task(3e-6, 2500.0, 1e-3);
        let ctx =
            PerturbationContext::new(&t, ScalingFunction::quintic(1.0, 1e-3).unwrap(), 1).unwrap();
        let w = t.omega0();
        for (n, m) in [(1usize, 3usize), (1, 5), (3, 1), (1, 1)] {
            for &time in &[0.3e-3, 1e-3] {
                let got = beta_integral(n, m, &ctx, time).unwrap();
                let d = (m as f64 - n as f64) * w;
                let expect = if d == 0.0 {
                    Complex64::new(w * w * time, 0.0)
                } else {
                    w * w * (Complex64::from_polar(1.0, -d * time) - 1.0) / Complex64::new(0.0, -d)
                };
                assert!((got - expect).norm() <= 1e-9 * w, "{n} {m} {got} {expect}");
            }
        }
    }

    #[test]
    fn beta_is_conjugate_under_exchange() {
        let ctx = PerturbationContext::quintic(&task(3e-6, 25.0, 2.5e-3), 0).unwrap();
        let a = beta_integral(0, 2, &ctx, 2e-3).unwrap();
        let b = beta_integral(2, 0, &ctx, 2e-3).unwrap();
        assert!((a - b.conj()).norm() <= 1e-10 * a.norm());
        let d = beta_integral(3, 3, &ctx, 2.5e-3).unwrap();
        assert!(d.im.abs() <= 1e-12 * d.re);
    }

    #[test]
    fn static_trap_has_no_transitions_at_half_periods() {
        let w = TAU * 2500.0;
        let tf = 4.0 * PI / w * 10.0;
        let t = task(3e-6, 2500.0, tf);
        let ctx =
            PerturbationContext::new(&t, ScalingFunction::quintic(1.0, tf).unwrap(), 3).unwrap();
        assert!(1.0 - second_order_fidelity(&ctx).unwrap() < 1e-12);
    }

    #[test]
    fn wide_waist_second_order_is_near_one() {
        let ctx = PerturbationContext::quintic(&task(10e-6, 25.0, 2.5e-3), 0).unwrap();
        for n in 0..=5 {
            assert!(second_order_fidelity(&ctx.with_level(n)).unwrap() >= 0.999);
        }
    }

    #[test]
    fn adiabatic_amplitude_vanishes_for_constant_frequency() {
        let t = task(3e-6, 250.0, 1e-3).to_trap_units().unwrap().0;
        let traj = static_trap(&t, 50.0).unwrap();
        let a = adiabatic_amplitude(&traj, 50.0).unwrap();
        assert_eq!(a.jumps, 0);
        assert!(a.amplitude.norm() < 1e-12);
    }

    #[test]
    fn adiabatic_amplitude_shrinks_for_slow_protocols() {
        let t = task(3e-6, 250.0, 0.5e-3).to_trap_units().unwrap().0;
        let fast = invariant_quintic(&t, SignPolicy::AttractiveOnly).unwrap();
        let slow_task = t.with_final_time(10.0 * t.t_final()).unwrap();
        let slow = invariant_quintic(&slow_task, SignPolicy::AttractiveOnly).unwrap();
        let a = adiabatic_amplitude(&fast, fast.t_final())
            .unwrap()
            .amplitude
            .norm();
        let b = adiabatic_amplitude(&slow, slow.t_final())
            .unwrap()
            .amplitude
            .norm();
        assert!(a >= 5.0 * b, "{a} {b}");
    }

    #[test]
    fn bang_bang_jumps_are_counted() {
        let t = task(3e-6, 250.0, 1e-3).to_trap_units().unwrap().0;
        let traj = bang_bang(&t);
        let a = adiabatic_amplitude(&traj, traj.t_final()).unwrap();
        assert_eq!(a.jumps, 2);
        // -ln(w1/w0)/2 at t = 0 and -ln(wf/w1)/2 after a quarter period of w1
        let w1 = (t.omega0() * t.omegaf()).sqrt();
        let phase = 2.0 * t.geometry().radial_ratio() * w1 * traj.t_final();
        let expect =
            0.25 * 10f64.ln() * (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, phase));
        assert!(
            (a.amplitude - expect).norm() < 1e-9,
            "{} {}",
            a.amplitude,
            expect
        );
    }

    #[test]
    fn context_rejects_mismatched_duration() {
        let t = task(3e-6, 250.0, 1e-3);
        let s = ScalingFunction::quintic(t.gamma(), 2e-3).unwrap();
        assert!(PerturbationContext::new(&t, s, 0).is_err());
    }
}
