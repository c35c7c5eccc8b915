//! Exact arithmetic substrate: arbitrary-precision rationals, the imaginary
//! quadratic extension `Q[x]/(x^2 + c)`, and integer matrix normal forms.
//! All values are immutable and all operations are pure functions.

pub mod matrix;
pub mod quadext;
pub mod rational;

pub use matrix::{hermite_form, smith_form, smith_p_part, IntMat, RatMat};
pub use quadext::QuadExt;
pub use rational::Rat;
