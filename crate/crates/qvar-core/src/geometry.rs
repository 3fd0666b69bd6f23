//! Second-moment geometry.
//!
//! A state of one continuous degree of freedom enters the library only
//! through its centered second moments: the momentum variance `x`, the
//! position variance `y` and the symmetrized covariance `w`. The derived
//! combination `z = x + y + 2w` is the variance of the third quadrature
//! `-(p + q)` and is eliminated in favor of `(x, y, w)` everywhere.
//!
//! In the rotated coordinates `u = (x + y)/2`, `v = (x - y)/2` the pure
//! squeezed states of energy level `n` fill one sheet of the hyperboloid
//! `u^2 - v^2 - w^2 = e_n^2` with `e_n = (n + 1/2) * hbar`, and the
//! physical (uncertainty) region is `x y - w^2 >= (hbar/2)^2`.

use thiserror::Error;

use crate::tol;

/// Centered second moments `(x, y, w)` of a state: momentum variance,
/// position variance, symmetrized covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments3 {
    /// Momentum variance; strictly positive for any admissible state.
    pub x: f64,
    /// Position variance; strictly positive for any admissible state.
    pub y: f64,
    /// Symmetrized covariance; any sign.
    pub w: f64,
}

/// The same data in hyperboloid coordinates `(u, v, w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPoint {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

/// Index of a squeezed-number-state sheet; sheet `n` carries the states
/// built on the `n`-th number state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SheetIndex(pub u32);

impl SheetIndex {
    /// Sheet energy scale `e_n = (n + 1/2) * hbar`.
    pub fn energy(&self, hbar: f64) -> f64 {
        (self.0 as f64 + 0.5) * hbar
    }
}

/// Errors for degenerate moment data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// A variance was not positive enough to describe a state.
    #[error("degenerate moments: x = {x}, y = {y} (floor {floor})")]
    DegenerateMoments { x: f64, y: f64, floor: f64 },
}

impl Moments3 {
    /// Bundles raw values without validation; use [`Moments3::checked`]
    /// for externally supplied data.
    pub fn new(x: f64, y: f64, w: f64) -> Self {
        Moments3 { x, y, w }
    }

    /// Validating constructor: both variances must exceed the degeneracy
    /// floor `MOMENT_FLOOR * hbar`.
    pub fn checked(x: f64, y: f64, w: f64, hbar: f64) -> Result<Self, GeometryError> {
        let floor = tol::MOMENT_FLOOR * hbar;
        if !(x.is_finite() && y.is_finite() && w.is_finite()) || x <= floor || y <= floor {
            return Err(GeometryError::DegenerateMoments { x, y, floor });
        }
        Ok(Moments3 { x, y, w })
    }

    /// Variance of the third quadrature, `z = x + y + 2w`.
    pub fn z(&self) -> f64 {
        self.x + self.y + 2.0 * self.w
    }

    /// The invariant `x y - w^2`; equals `e_n^2` exactly on sheet `n` and
    /// is at least `(hbar/2)^2` for every admissible state.
    pub fn rs_value(&self) -> f64 {
        self.x * self.y - self.w * self.w
    }

    /// Rotated coordinates `(u, v, w)`.
    pub fn to_uvw(&self) -> MomentPoint {
        MomentPoint {
            u: 0.5 * (self.x + self.y),
            v: 0.5 * (self.x - self.y),
            w: self.w,
        }
    }

    /// Euclidean distance to another triple.
    pub fn distance(&self, other: &Moments3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dw = self.w - other.w;
        (dx * dx + dy * dy + dw * dw).sqrt()
    }

    /// Euclidean norm of the triple.
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.w * self.w).sqrt()
    }
}

impl MomentPoint {
    /// Back to variance coordinates. Fails when the point does not
    /// describe a state with positive variances.
    pub fn to_moments(&self, hbar: f64) -> Result<Moments3, GeometryError> {
        Moments3::checked(self.u + self.v, self.u - self.v, self.w, hbar)
    }

    /// Residual of the sheet equation, `u^2 - v^2 - w^2 - e_n^2`.
    pub fn hyperboloid_residual(&self, sheet: SheetIndex, hbar: f64) -> f64 {
        let e = sheet.energy(hbar);
        self.u * self.u - self.v * self.v - self.w * self.w - e * e
    }
}

/// Whether the triple lies in the closed uncertainty region
/// `x y - w^2 >= (hbar/2)^2` (with a tiny numerical slack).
pub fn in_uncertainty_region(m: &Moments3, hbar: f64) -> bool {
    let q = 0.5 * hbar;
    m.x > 0.0 && m.y > 0.0 && m.rs_value() >= q * q * (1.0 - 1e-12)
}
