//! Fourier coefficients of the spectral density `1 / |p|^2` for degree-one
//! symmetric polynomials `p(z) = p0 + p1*(z1 + ... + zd)` on the d-torus, and
//! the inverse problem of reconstructing `p` from prescribed low-order
//! coefficients.
//!
//! The crate is organised around independent evaluation routes that can be
//! cross-checked against each other:
//!
//! * [`series`] — multinomial power series in the slope `s = -p1/p0`,
//!   valid whenever `d*|s| < 1`;
//! * [`quadrature`] — torus integrals of closed two-variable slice formulas;
//! * [`closedform`] — complete elliptic / hypergeometric expressions for
//!   `d = 3` (`s = 1/r`, `r > 3`) and explicit formulas for `d = 2`;
//! * [`solver`] — the inverse (covariance extension) problem: given the
//!   zeroth, first and mixed coefficients `(a, b, c)`, decide feasibility and
//!   reconstruct the polynomial;
//! * [`oracle`] — slow reference evaluators (FFT sampling, autocorrelation)
//!   used for validation;
//! * [`specfun`] — the special functions everything else is built on.

pub mod closedform;
pub mod error;
pub mod oracle;
pub mod quadrature;
pub mod series;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
