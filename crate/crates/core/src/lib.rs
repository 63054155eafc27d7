//! Numerical laboratory for weighted backward shifts `H_p`, their adjoints and
//! the Jacobi operators `H_p + H_p*` on Fock–Bargmann-type spaces.
//!
//! * [`weights`]: weight sequences of the four spaces, exact radical forms, gamma ratios.
//! * [`recurrence`]: the eigenvector recurrence and hypothesis certificates.
//! * [`operators`]: truncated operators, eigenvectors, orbits and periodic points.
//! * [`spaces`]: basis functions, quadrature inner products and kernels.

// NaN parameters must fail validation, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod operators;
pub mod param;
pub mod precision;
pub mod recurrence;
pub mod spaces;
pub mod weights;

pub use error::{Error, Result};
pub use param::RealParam;
pub use precision::Precision;
pub use weights::{make_weights, SpaceKind, SpaceSpec, Weight, WeightSequence};
