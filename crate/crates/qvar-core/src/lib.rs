//! Certified lower bounds for smooth functionals of quantum second moments.
//!
//! Given a smooth function f(x, y, w) of a particle's momentum variance
//! x = Δ²p, position variance y = Δ²q, and symmetrized covariance
//! w = C_pq, this crate decides whether f is bounded from below over all
//! quantum states, computes the sharp bound when one exists, and returns
//! the squeezed-state parameters that attain it.
//!
//! The pipeline:
//!
//! 1. [`expr`] parses the functional and differentiates it exactly with
//!    dual numbers.
//! 2. [`geometry`] models the moment space and its sheet hyperboloids of
//!    pure-state moments at fixed excitation number.
//! 3. [`symplectic`] builds the gradient's 2×2 coefficient matrix,
//!    classifies its definiteness, extracts squeeze parameters, and
//!    converts them to complex (r, θ, χ) form.
//! 4. [`solver`] finds the extremal set on each sheet by damped
//!    Gauss-Newton from a seed lattice, classifies its dimension, and
//!    traces one-dimensional branches by continuation.
//! 5. [`certify`] turns extremal sets plus divergence probes into a
//!    verdict: BOUNDED with a value and minimizer, UNBOUNDED or
//!    INFIMUM_NOT_ATTAINED with a witness sequence, or INCONCLUSIVE.
//! 6. [`oracle`] cross-checks every claim by brute force: projected
//!    gradient descent over truncated number-basis states and a direct
//!    search over squeezed-state parameters.
//! 7. [`catalog`], [`mesh`], and [`report`] package known functional
//!    families, surface meshes, and JSON reports.
//!
//! Conventions: ħ is configurable (default 1), e_n = (n + ½)ħ, and the
//! shorthand z = x + y + 2w denotes the variance of p + q.

pub mod catalog;
pub mod certify;
pub mod dual;
pub mod expr;
pub mod geometry;
pub mod mesh;
pub mod oracle;
pub mod report;
pub mod solver;
pub mod special;
pub mod symplectic;
pub mod tol;

pub use certify::{certify, BoundReport, CertifyConfig, Verdict};
pub use expr::Functional;
pub use geometry::{MomentPoint, Moments3, SheetIndex};
pub use solver::{ExtremalSet, SetDimension, SolverConfig};
pub use symplectic::{ComplexSqueeze, DefinitenessClass, FMatrix, SqueezeParams};
