//! Numerical toolkit for random expanding-on-average circle cocycles.
//!
//! The crate computes equivariant densities of transfer-operator cocycles by
//! pullback, quenched statistical-stability and linear-response rates for
//! parameterized map families, Lasota–Yorke constants, and the heavy-tailed
//! suspension example where quenched response is finite on every sample while
//! the annealed average diverges.
//!
//! Functions on the circle are truncated Fourier series ([`FourierFunction`]),
//! fiber transfer operators are Fourier–Galerkin matrices assembled by Koopman
//! adjoint quadrature ([`transfer::assemble`]), and all randomness is seeded
//! and reproducible.

pub mod density;
pub mod error;
pub mod fourier;
pub mod ly;
pub mod maps;
pub mod poly;
pub mod response;
pub mod suspension;
pub mod transfer;

pub use error::{Error, Result};
pub use fourier::FourierFunction;
pub use maps::{DrivingOrbit, ParamCircleMap};
pub use transfer::TransferMatrix;
