//! Exact computation of p-adic deformations of ternary theta series.
//!
//! The trace-zero part of a definite quaternion algebra over Q is a rank-3
//! positive definite quadratic space. A norm-one unit gamma of an Eichler
//! Z[1/p]-order that is hyperbolic at p decomposes the space p-adically into
//! eigenlines; weighting lattice-point counts by powers of the pairing
//! against the isotropic eigenvectors produces a family of half-integral
//! weight theta series that interpolates p-adically in the weight variable.
//! This crate computes the family, its weight-derivative at the vanishing
//! specialization, Hecke operators (T, U, V at p^2), the ordinary projection,
//! eigencomponent extraction and Shimura lifts, all in exact arithmetic.
//!
//! Entry points:
//! - [`quaternion`]: algebras, orders, the conjugation action, eigendata.
//! - [`lattice`]: exact enumeration (the performance core), p-local lattices,
//!   p-neighbours, depth.
//! - [`padic`]: fixed-precision Z_p arithmetic, Hensel lifting, the Iwasawa
//!   logarithm and unit powers.
//! - [`schwartz`]: lattice-indicator weight functions and their p-local
//!   refinements.
//! - [`theta`] / [`qseries`]: the theta builders and truncated q-expansions.
//! - [`hecke`]: operators on q-expansions, ordinary projection, Shimura lift,
//!   Sturm bounds.
//! - [`pipeline`]: staged end-to-end runs driven by a TOML configuration,
//!   with CSV/JSON artifacts.
//!
//! The `examples/` directory contains one runnable example per capability;
//! `padic-theta --help` describes the thin CLI over [`pipeline`].

pub mod algebra;
pub mod error;
pub mod hecke;
pub mod lattice;
pub mod padic;
pub mod pipeline;
pub mod qseries;
pub mod quaternion;
pub mod sample;
pub mod schwartz;
pub mod theta;

pub use error::{Error, Result};
