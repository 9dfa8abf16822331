//! Self-contained numerical kernels: FFT, tridiagonal algebra, quadrature
//! and orthogonal polynomial families.

pub mod eigen;
pub mod fft;
pub mod quad;
pub mod special;
pub mod tridiag;
