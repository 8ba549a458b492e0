//! Sturm-Liouville spectral problems with measure-valued coefficients.
//!
//! The differential expression is `tau f = d/dvarrho (-df/dvarsigma + int f dchi)`
//! where `varrho`, `varsigma`, `chi` are locally finite Borel measures on an
//! open interval: atoms plus piecewise-constant densities. The crate provides
//!
//! * Lebesgue-Stieltjes integration with the half-open orientation
//!   ([`measure`]),
//! * a first-order linear measure-differential-equation solver with the jump
//!   rule at atoms ([`mde`]),
//! * quasi-solutions, Wronskians and the expression calculus ([`sturm`]),
//! * endpoint classification, boundary functionals, self-adjoint boundary
//!   conditions and the one-point case ([`boundary`]),
//! * eigenvalues by shooting, Green's function and resolvent,
//!   Weyl-Titchmarsh m-functions, spectral-measure atoms and the 2x2 Weyl
//!   matrix ([`spectral`]),
//! * adapters realizing classical, Jacobi, Krein-string and peakon problems
//!   ([`adapters`]), and
//! * a batch CLI over a small problem-file format ([`problem_file`], [`cli`]).
//!
//! Everything is immutable after construction and safe to use from multiple
//! threads; eigenvalue scans are data-parallel when the `parallel` feature
//! (default) is enabled.

pub mod adapters;
pub mod boundary;
pub mod cli;
pub mod error;
pub mod exec;
pub mod exppoly;
pub mod linalg;
pub mod measure;
pub mod mde;
pub mod piecewise;
pub mod problem_file;
pub mod spectral;
pub mod sturm;

pub use error::{HypothesisClause, Result, SlError};
pub use measure::{integrate, Interval, Measure};
pub use piecewise::PiecewiseFunction;

pub type Complex = num_complex::Complex<f64>;
