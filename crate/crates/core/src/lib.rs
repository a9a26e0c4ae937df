//! Spectrum of the radial p-Laplacian with a sign-changing weight on the
//! unit ball, and nodal solutions of the associated nonlinear problem.
//!
//! ```
//! use pspect::pfuncs::Exponent;
//! use pspect::radial_ivp::Operator;
//! use pspect::spectrum::{find_eigenvalues, Sign, SpectrumOptions};
//! use pspect::weight::Weight;
//!
//! let op = Operator::new(Exponent::new(2.0)?, 1, Weight::constant(1.0)?)?;
//! let slice = find_eigenvalues(&op, 2, Sign::Plus, &SpectrumOptions::default())?;
//! let mu1 = slice.eigenpairs[0].mu;
//! assert!((mu1 - std::f64::consts::PI.powi(2) / 4.0).abs() < 1e-8);
//! # Ok::<(), pspect::Error>(())
//! ```

mod bracket;
pub mod error;
pub mod greens;
pub mod nodal;
pub mod pfuncs;
pub mod quad;
pub mod radial_ivp;
pub mod spectrum;
pub mod weight;

pub use error::Error;
