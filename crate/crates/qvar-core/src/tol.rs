//! Centralized numeric tolerances.
//!
//! Every hard-coded threshold used by the solver, certifier, oracles and
//! meshes lives here so that a tolerance change is a one-line diff and the
//! test suite can reference the exact same constants as the implementation.

/// Convergence target for the extremal residual system, scaled by
/// `1 + |f|` at the candidate point. Newton typically lands well below
/// this; anything above it is treated as non-converged.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Definiteness classification threshold factor; the effective tolerance is
/// `DEFINITENESS_TOL * (1 + max-abs-entry of the matrix)`.
pub const DEFINITENESS_TOL: f64 = 1e-10;

/// Singular values below `RANK_TOL * sigma_max` count as zero when ranking
/// the residual Jacobian to classify extremal-set dimensionality.
pub const RANK_TOL: f64 = 1e-8;

/// Converged extremal points closer than this (relative to the larger
/// norm) are considered the same point and merged.
pub const DEDUP_TOL: f64 = 1e-7;

/// Maximum spread of functional values along a one- or two-dimensional
/// extremal manifold before it is flagged as non-constant (scaled by
/// `1 + |f|`).
pub const MANIFOLD_CONST_TOL: f64 = 1e-8;

/// Agreement required between a certified minimizer and the squeezed-state
/// moments reconstructed from its own shape parameters (scaled by
/// `1 + |moments|`). A mismatch downgrades the verdict to inconclusive.
pub const FIXED_POINT_TOL: f64 = 1e-8;

/// Relative margin by which a strictly decreasing witness ray must undercut
/// the best extremal candidate before it overrides a bounded verdict.
pub const PROBE_MARGIN: f64 = 1e-7;

/// Residual target for the Lambert W Halley iteration (internal); the
/// public guarantee is `LAMBERT_RESIDUAL`.
pub const LAMBERT_TARGET: f64 = 1e-14;

/// Guaranteed residual `|W e^W - s|` of the principal-branch Lambert W
/// over its tested domain.
pub const LAMBERT_RESIDUAL: f64 = 1e-12;

/// Componentwise agreement required between the two sides of the
/// squeeze-decomposition coefficient identities on the verification grid.
pub const BOGOLIUBOV_TOL: f64 = 1e-12;

/// Scale-relative tolerance for emitted mesh rows against their defining
/// surface equation. Checked against `1 + u^2 + v^2 + w^2 + e_n^2` because
/// plain f64 products already carry ~1e-13 absolute error at the far
/// corners of the lattice.
pub const MESH_SURFACE_TOL: f64 = 1e-12;

/// Relative agreement between closed-form catalog bounds and certified
/// bounds, and between analytic and finite-difference gradients is checked
/// at these two levels respectively.
pub const BOUND_MATCH_REL: f64 = 1e-8;
/// See [`BOUND_MATCH_REL`].
pub const GRAD_FD_REL: f64 = 1e-6;

/// Fock-space variational minimum must land in
/// `[bound - ORACLE_FOCK_LOW, bound + ORACLE_FOCK_HIGH]`: it can never be
/// genuinely below the bound (truncated states are valid states), while the
/// upper slack absorbs truncation and optimizer error.
pub const ORACLE_FOCK_LOW: f64 = 1e-6;
/// See [`ORACLE_FOCK_LOW`].
pub const ORACLE_FOCK_HIGH: f64 = 1e-4;

/// Sheet-parameterized search is exact up to refinement error, so it gets
/// tighter brackets than the Fock oracle.
pub const ORACLE_PARAM_LOW: f64 = 1e-8;
/// See [`ORACLE_PARAM_LOW`].
pub const ORACLE_PARAM_HIGH: f64 = 1e-6;

/// Slack allowed when spot-checking a certified bound against random
/// on-sheet samples (soundness check).
pub const SOUNDNESS_SLACK: f64 = 1e-9;

/// Minimum admissible variance relative to hbar; moment triples with
/// `x` or `y` below `MOMENT_FLOOR * hbar` are rejected as degenerate.
pub const MOMENT_FLOOR: f64 = 1e-12;

/// A probe ray that stops evaluating (overflow in an interior term) still
/// counts as a divergence witness when its finite prefix descends, with
/// non-contracting decrements, below this value: no physically meaningful
/// finite infimum lies that deep, and the same tail heuristic already
/// governs full-length rays.
pub const DEEP_DESCENT: f64 = -1e100;
