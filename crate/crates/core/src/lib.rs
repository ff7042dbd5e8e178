//! Numerical laboratory for the quadratic differential −D_A(z)/z² dz², its
//! critical graph, the associated equilibrium problem, and strong asymptotics
//! of generalized Laguerre polynomials L_n^{(nA)}(nz) with complex A.
//!
//! Layout:
//! - [`param`]: the parameter A, branch points ζ±, zero-location predicates
//! - [`branch`]: the global square root R of D_A, closed-form antiderivative of R/t
//! - [`geom`], [`quad`]: polyline geometry and Gauss–Legendre machinery
//! - [`trajectory`]: trajectory tracing and the critical graph
//! - [`phi`]: the φ-family of antiderivative branches and the contour Σ
//! - [`equilibrium`]: equilibrium measure, potentials, g-function, energy oracle
//! - [`laguerre`], [`mp`], [`logc`]: exact polynomial evaluation at controlled precision
//! - [`airy`]: complex Airy function
//! - [`asymptotics`]: the four strong-asymptotic formulas and comparison harness
//! - [`checks`]: the acceptance checks shared by tests and the CLI verifier

pub mod airy;
pub mod asymptotics;
pub mod branch;
pub mod checks;
pub mod equilibrium;
pub mod error;
pub mod geom;
pub mod laguerre;
pub mod logc;
pub mod mp;
pub mod param;
pub mod phi;
pub mod quad;
pub mod trajectory;

pub use error::CoreError;
pub use logc::LogComplex;
pub use num_complex::Complex64;
pub use param::Parameter;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
