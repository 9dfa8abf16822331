//! Uniform grids and wavefunctions sampled on them.
//!
//! Longitudinal grids are symmetric about `z = 0`. Radial grids are cell
//! centred, `r_i = (i + 1/2) dr`, and carry the `sqrt(r)`-transformed
//! function, whose Dirichlet zero at `r = 0` sits half a cell below the
//! first node. Inner products use the uniform weight `dx` on both.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods shadow it whenever std is linked
use num_traits::Float;

use crate::error::{positive, Error, Result};
use crate::numerics::tridiag::SymTridiagonal;

/// Smallest grid accepted anywhere.
pub const MIN_POINTS: usize = 16;

/// Boundary amplitude above which a state counts as truncated.
pub const TRUNCATION_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Longitudinal,
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    axis: Axis,
    n: usize,
    start: f64,
    spacing: f64,
}

impl Grid1D {
    /// `n` points spanning `[-half_width, half_width]`.
    pub fn longitudinal(n: usize, half_width: f64) -> Result<Self> {
        check_points(n)?;
        let half_width = positive("grid half-width", half_width)?;
        let spacing = 2.0 * half_width / (n - 1) as f64;
        Ok(Self {
            axis: Axis::Longitudinal,
            n,
            start: -half_width,
            spacing,
        })
    }

    /// `n` cell-centred points `(i + 1/2) dr` covering `(0, r_max]`.
    pub fn radial(n: usize, r_max: f64) -> Result<Self> {
        check_points(n)?;
        let r_max = positive("radial extent", r_max)?;
        let spacing = r_max / (n as f64 - 0.5);
        Ok(Self {
            axis: Axis::Radial,
            n,
            start: 0.5 * spacing,
            spacing,
        })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + self.spacing * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// First and last node.
    pub fn extent(&self) -> (f64, f64) {
        (self.start, self.point(self.n - 1))
    }

    /// Same axis and extent with `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        match self.axis {
            Axis::Longitudinal => Self::longitudinal((self.n - 1) * factor + 1, -self.start),
            Axis::Radial => Self::radial(self.n * factor, self.extent().1),
        }
    }

    /// Same spacing rule with a power-of-two point count, for the spectral
    /// kinetic step.
    pub fn is_power_of_two(&self) -> bool {
        self.n.is_power_of_two()
    }

    /// Kinetic energy `-1/2 d^2/dx^2` (trap units) as a tridiagonal
    /// operator with Dirichlet walls.
    ///
    /// On the radial axis the operator acts on `u = sqrt(r) F` and already
    /// contains the `-1/(8 r^2)` part of the centrifugal term: it is the
    /// symmetrized flux form of `-(1/2r) d/dr (r dF/dr)`, which converges at
    /// second order where the bare stencil plus `-1/(8r^2)` does not.
    pub fn kinetic(&self) -> SymTridiagonal {
        let h2 = self.spacing * self.spacing;
        let diag = vec![1.0 / h2; self.n];
        let off = match self.axis {
            Axis::Longitudinal => vec![-0.5 / h2; self.n - 1],
            Axis::Radial => (0..self.n - 1)
                .map(|i| {
                    let face = self.spacing * (i + 1) as f64;
                    -face / (2.0 * (self.point(i) * self.point(i + 1)).sqrt() * h2)
                })
                .collect(),
        };
        SymTridiagonal::new(diag, off)
    }

    /// Static diagonal term that completes [`Grid1D::kinetic`]: the
    /// `nu^2 / (2 r^2)` remainder of the centrifugal term on radial grids,
    /// zero on longitudinal ones.
    pub fn centrifugal(&self, nu: i32) -> Vec<f64> {
        match self.axis {
            Axis::Longitudinal => vec![0.0; self.n],
            Axis::Radial => {
                let nu2 = (nu as f64).powi(2);
                (0..self.n)
                    .map(|i| 0.5 * nu2 / self.point(i).powi(2))
                    .collect()
            }
        }
    }

    /// Kinetic plus centrifugal plus `potential` sampled on the nodes.
    pub fn hamiltonian<F: Fn(f64) -> f64>(&self, nu: i32, potential: F) -> SymTridiagonal {
        let mut op = self.kinetic();
        let extra: Vec<f64> = self
            .centrifugal(nu)
            .iter()
            .enumerate()
            .map(|(i, c)| c + potential(self.point(i)))
            .collect();
        op.add_diagonal(&extra);
        op
    }
}

fn check_points(n: usize) -> Result<()> {
    if n < MIN_POINTS {
        return Err(Error::Domain {
            what: "grid",
            reason: "needs at least 16 points",
        });
    }
    Ok(())
}

/// Default longitudinal grid in trap units of `omega0`.
///
/// Half-width `8 sqrt(n + 1) max(1, b_max)` and spacing resolving
/// wavenumbers up to eight times `p_scale`, the largest expected momentum
/// spread; at least 1024 points, rounded up to a power of two.
pub fn default_longitudinal(level: usize, b_max: f64, p_scale: f64) -> Result<Grid1D> {
    let spread = (level as f64 + 0.5).sqrt();
    let half_width = 8.0 * (level as f64 + 1.0).sqrt() * b_max.max(1.0);
    let k_max = 8.0 * p_scale.max(spread);
    let dx = core::f64::consts::PI / k_max;
    let needed = (2.0 * half_width / dx).ceil() as usize + 1;
    Grid1D::longitudinal(needed.max(1024).next_power_of_two(), half_width)
}

/// Default radial grid for an initial radial frequency `omega_r0` (trap
/// units): twelve points per initial width, extent eight widths times the
/// largest expected scaling.
pub fn default_radial(omega_r0: f64, b_max: f64) -> Result<Grid1D> {
    let width = 1.0 / positive("radial frequency", omega_r0)?.sqrt();
    let r_max = 8.0 * width * b_max.max(1.0);
    let n = (r_max / (width / 12.0)).ceil() as usize;
    Grid1D::radial(n.max(MIN_POINTS), r_max)
}

fn inner(a: &[Complex64], b: &[Complex64], weight: f64) -> Complex64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        * weight
}

fn norm_sq(a: &[Complex64], weight: f64) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>() * weight
}

/// Complex samples on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction1D {
    grid: Grid1D,
    data: Vec<Complex64>,
}

impl Wavefunction1D {
    pub fn new(grid: Grid1D, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, data })
    }

    pub fn from_real(grid: Grid1D, values: &[f64]) -> Result<Self> {
        Self::new(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        norm_sq(&self.data, self.grid.spacing).sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NonPositive {
                what: "wavefunction norm",
                value: n,
            });
        }
        let inv = 1.0 / n;
        self.data.iter_mut().for_each(|x| *x *= inv);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(inner(&self.data, &other.data, self.grid.spacing))
    }

    /// Largest `|psi|^2` among the `width` outermost nodes. On radial grids
    /// only the outer edge counts; the inner one is the physical origin.
    pub fn boundary_density(&self, width: usize) -> f64 {
        let n = self.data.len();
        let width = width.min(n / 2);
        let outer = self.data[n - width..].iter().map(|x| x.norm_sqr());
        match self.grid.axis {
            Axis::Radial => outer.fold(0.0, f64::max),
            Axis::Longitudinal => outer
                .chain(self.data[..width].iter().map(|x| x.norm_sqr()))
                .fold(0.0, f64::max),
        }
    }

    /// Multiplies by a global phase `exp(i theta)`.
    pub fn with_phase(mut self, theta: f64) -> Self {
        let p = Complex64::from_polar(1.0, theta);
        self.data.iter_mut().for_each(|x| *x *= p);
        self
    }

    /// `<x^k>` over the grid coordinate.
    pub fn moment(&self, k: i32) -> f64 {
        self.data
            .iter()
            .enumerate()
            .map(|(i, x)| x.norm_sqr() * self.grid.point(i).powi(k))
            .sum::<f64>()
            * self.grid.spacing
    }

    /// `<psi|op|psi>` for a real tridiagonal operator.
    pub fn expectation(&self, op: &SymTridiagonal) -> f64 {
        let mut out = vec![Complex64::new(0.0, 0.0); self.data.len()];
        op.apply(&self.data, &mut out);
        inner(&self.data, &out, self.grid.spacing).re
    }
}

/// Radial-by-longitudinal product grid; the flat index is `iz * nr + ir`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub r: Grid1D,
    pub z: Grid1D,
}

impl Grid2D {
    pub fn new(r: Grid1D, z: Grid1D) -> Result<Self> {
        if r.axis != Axis::Radial || z.axis != Axis::Longitudinal {
            return Err(Error::Domain {
                what: "2D grid",
                reason: "needs a radial and a longitudinal axis",
            });
        }
        Ok(Self { r, z })
    }

    pub fn len(&self) -> usize {
        self.r.len() * self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self) -> f64 {
        self.r.spacing * self.z.spacing
    }

    #[inline]
    pub fn index(&self, ir: usize, iz: usize) -> usize {
        iz * self.r.len() + ir
    }
}

/// Complex samples on a [`Grid2D`], `sqrt(r)`-transformed in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction2D {
    grid: Grid2D,
    data: Vec<Complex64>,
}

impl Wavefunction2D {
    pub fn new(grid: Grid2D, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, data })
    }

    /// Separable product `u(r) Z(z)`.
    pub fn product(radial: &Wavefunction1D, longitudinal: &Wavefunction1D) -> Result<Self> {
        let grid = Grid2D::new(radial.grid, longitudinal.grid)?;
        let mut data = Vec::with_capacity(grid.len());
        for z in &longitudinal.data {
            for r in &radial.data {
                data.push(r * z);
            }
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn norm(&self) -> f64 {
        norm_sq(&self.data, self.grid.cell()).sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NonPositive {
                what: "wavefunction norm",
                value: n,
            });
        }
        let inv = 1.0 / n;
        self.data.iter_mut().for_each(|x| *x *= inv);
        Ok(())
    }

    pub fn overlap(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(inner(&self.data, &other.data, self.grid.cell()))
    }

    /// Largest `|psi|^2` within `width` nodes of the outer radial edge or
    /// either longitudinal edge.
    pub fn boundary_density(&self, width: usize) -> f64 {
        let (nr, nz) = (self.grid.r.len(), self.grid.z.len());
        let mut worst: f64 = 0.0;
        for iz in 0..nz {
            let z_edge = iz < width || iz + width >= nz;
            for ir in 0..nr {
                if z_edge || ir + width >= nr {
                    worst = worst.max(self.data[self.grid.index(ir, iz)].norm_sqr());
                }
            }
        }
        worst
    }
}
