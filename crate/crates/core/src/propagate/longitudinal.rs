//! Split-operator stepping along `z`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{drive, shape_z, LongitudinalKinetic, Observer, Propagated, PropagationPlan, Scheme};
use crate::error::{Error, Result};
use crate::grid::{Axis, Wavefunction1D};
use crate::numerics::fft::Fft;
use crate::numerics::tridiag::CayleyFactor;

/// Advances `initial` through the plan with Strang splitting along `z`.
pub fn propagate_longitudinal(
    initial: &Wavefunction1D,
    plan: &PropagationPlan,
    observer: Option<&mut Observer<'_, Wavefunction1D>>,
) -> Result<Propagated<Wavefunction1D>> {
    plan.check_scheme(Scheme::SplitOperatorZ)?;
    let grid = *initial.grid();
    if grid.axis() != Axis::Longitudinal {
        return Err(Error::GridMismatch);
    }
    let shape_fn = shape_z(plan.model(), plan.trajectory().geometry());
    let shape: Vec<f64> = grid.points().into_iter().map(shape_fn).collect();
    let mut state = initial.clone();

    let diagnostics = match plan.longitudinal_kinetic() {
        LongitudinalKinetic::Spectral => {
            if !grid.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(grid.len()));
            }
            let fft = Fft::new(grid.len())?;
            let k = fft.wavenumbers(grid.spacing());
            let factors: Vec<Vec<Complex64>> = plan
                .segments()
                .iter()
                .map(|seg| {
                    k.iter()
                        .map(|k| Complex64::from_polar(1.0, -0.5 * k * k * seg.dt))
                        .collect()
                })
                .collect();
            let mut kinetic = |segment: usize, data: &mut [Complex64]| {
                fft.forward(data);
                for (x, f) in data.iter_mut().zip(&factors[segment]) {
                    *x *= f;
                }
                fft.inverse(data);
            };
            drive(plan, &mut state, &shape, &mut kinetic, observer)?
        }
        LongitudinalKinetic::FiniteDifference => {
            let op = grid.kinetic();
            let factors: Vec<CayleyFactor> = plan
                .segments()
                .iter()
                .map(|seg| CayleyFactor::new(&op, Complex64::new(0.0, 0.5 * seg.dt)))
                .collect();
            let mut scratch = vec![Complex64::new(0.0, 0.0); grid.len()];
            let mut kinetic = |segment: usize, data: &mut [Complex64]| {
                factors[segment].apply(data, &mut scratch);
            };
            drive(plan, &mut state, &shape, &mut kinetic, observer)?
        }
    };
    Ok(Propagated { state, diagnostics })
}
