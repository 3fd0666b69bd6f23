//! Curvature data and squeezed-state parameterization.
//!
//! At an extremal moment triple the gradient of the functional assembles
//! into the symmetric 2x2 matrix `F = [[f_x, f_w/2], [f_w/2, f_y]]`.
//! When `F` is positive definite it factors through a shear `G_b` and a
//! scaling `S_gamma`, and the moment triple is exactly the second-moment
//! set of the number state `n` transformed by those two operations:
//!
//! `x = e_n e^{2 gamma}`, `w = -b x`, `y = e_n (b^2 e^{2 gamma} + e^{-2 gamma})`.
//!
//! The same pair `(b, gamma)` converts to the complex squeeze parameters
//! `(r, theta, chi)` of the metaplectic factorization, verified against
//! the transformation coefficients of the ladder operator.

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

use crate::expr::Grad3;
use crate::geometry::{Moments3, SheetIndex};
use crate::tol;

/// Symmetric curvature matrix stored by its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FMatrix {
    pub f_x: f64,
    pub f_y: f64,
    pub f_w: f64,
}

/// Shear strength `b` and scaling exponent `gamma` of a squeezed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    pub b: f64,
    pub gamma: f64,
}

/// Polar squeeze parameters: modulus `r >= 0`, squeeze phase `theta` in
/// `(-pi, pi]`, rotation phase `chi` in `(-pi/2, pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSqueeze {
    pub r: f64,
    pub theta: f64,
    pub chi: f64,
}

/// Definiteness classes of the curvature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefinitenessClass {
    PosDef,
    NegDef,
    Indefinite,
    Singular,
}

impl std::fmt::Display for DefinitenessClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DefinitenessClass::PosDef => "POS_DEF",
            DefinitenessClass::NegDef => "NEG_DEF",
            DefinitenessClass::Indefinite => "INDEFINITE",
            DefinitenessClass::Singular => "SINGULAR",
        };
        f.write_str(s)
    }
}

/// Errors from the squeeze-parameter extraction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymplecticError {
    #[error("curvature matrix is {0}, not positive definite")]
    NotPositiveDefinite(DefinitenessClass),
}

impl FMatrix {
    /// Curvature matrix of a functional gradient.
    pub fn from_gradient(g: &Grad3) -> Self {
        FMatrix { f_x: g.dx, f_y: g.dy, f_w: g.dw }
    }

    pub fn det(&self) -> f64 {
        self.f_x * self.f_y - 0.25 * self.f_w * self.f_w
    }

    pub fn to_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.f_x, 0.5 * self.f_w, 0.5 * self.f_w, self.f_y)
    }

    /// Largest absolute entry, used to scale tolerances.
    pub fn max_abs(&self) -> f64 {
        self.f_x.abs().max(self.f_y.abs()).max(0.5 * self.f_w.abs())
    }

    /// Classifies definiteness with threshold `DEFINITENESS_TOL * (1 + max_abs)`.
    pub fn classify(&self) -> DefinitenessClass {
        self.classify_with(tol::DEFINITENESS_TOL * (1.0 + self.max_abs()))
    }

    /// Classifies with an explicit absolute threshold.
    pub fn classify_with(&self, tol: f64) -> DefinitenessClass {
        let det = self.det();
        if det.abs() <= tol {
            DefinitenessClass::Singular
        } else if det > tol && self.f_x > tol {
            DefinitenessClass::PosDef
        } else if det > tol && self.f_x < -tol {
            DefinitenessClass::NegDef
        } else {
            DefinitenessClass::Indefinite
        }
    }
}

/// Extracts `(b, gamma)` and the scale `c = sqrt(det F)` from a positive
/// definite curvature matrix: `b = f_w / (2 f_y)`,
/// `gamma = ln(f_y / c) / 2`.
pub fn williamson_params(f: &FMatrix) -> Result<(SqueezeParams, f64), SymplecticError> {
    let class = f.classify();
    if class != DefinitenessClass::PosDef {
        return Err(SymplecticError::NotPositiveDefinite(class));
    }
    let c = f.det().sqrt();
    let b = f.f_w / (2.0 * f.f_y);
    let gamma = 0.5 * (f.f_y / c).ln();
    Ok((SqueezeParams { b, gamma }, c))
}

/// Second moments of the number state `n` after scaling by `gamma` and
/// shearing by `b`. Satisfies `x*y - w^2 = e_n^2` identically.
pub fn squeezed_moments(n: SheetIndex, s: &SqueezeParams, hbar: f64) -> Moments3 {
    let e = n.energy(hbar);
    let e2g = (2.0 * s.gamma).exp();
    let x = e * e2g;
    Moments3 { x, y: e * (s.b * s.b * e2g + 1.0 / e2g), w: -s.b * x }
}

/// Residual of the congruence identity: with `Sigma = (S_gamma G_b)^{-1}`
/// built from the extracted parameters, `Sigma^T F Sigma` must equal
/// `sqrt(det F) * I`. Returns the max-abs deviation.
pub fn conjugation_residual(f: &FMatrix) -> Result<f64, SymplecticError> {
    let (s, c) = williamson_params(f)?;
    let eg = s.gamma.exp();
    // (S_gamma G_b)^{-1} for S = diag(e^-g, e^g), G = [[1,0],[b,1]].
    let sigma = Matrix2::new(eg, 0.0, -s.b * eg, 1.0 / eg);
    let m = sigma.transpose() * f.to_matrix() * sigma;
    let dev = (m - Matrix2::identity() * c).abs();
    Ok(dev.max())
}

/// Ladder-operator transformation coefficients of the shear-scale pair:
/// `c1 = cosh(gamma) - i (b/2) e^{gamma}`,
/// `c2 = sinh(gamma) + i (b/2) e^{gamma}`.
pub fn bogoliubov_lhs(s: &SqueezeParams) -> (Complex64, Complex64) {
    let half_b_eg = 0.5 * s.b * s.gamma.exp();
    (
        Complex64::new(s.gamma.cosh(), -half_b_eg),
        Complex64::new(s.gamma.sinh(), half_b_eg),
    )
}

/// The same coefficients expressed through the polar parameters:
/// `c1 = e^{-i chi} cosh r`, `c2 = -e^{i (theta - chi)} sinh r`.
pub fn bogoliubov_rhs(cs: &ComplexSqueeze) -> (Complex64, Complex64) {
    let c1 = Complex64::from_polar(cs.r.cosh(), -cs.chi);
    let c2 = -Complex64::from_polar(cs.r.sinh(), cs.theta - cs.chi);
    (c1, c2)
}

/// Converts shear-scale parameters to polar squeeze parameters.
///
/// `chi = atan(b / (1 + e^{-2 gamma}))` and
/// `r = acosh(sqrt(cosh^2 gamma + (b^2/4) e^{2 gamma}))` are read off the
/// modulus and phase of the first coefficient. The squeeze phase comes
/// from the second coefficient via a quadrant-aware arctangent, which
/// automatically resolves the sign that a naive arctangent form leaves
/// ambiguous at `gamma = 0` (the choice that makes the coefficient
/// identities hold exactly).
pub fn bch_convert(s: &SqueezeParams) -> ComplexSqueeze {
    let half_b_eg = 0.5 * s.b * s.gamma.exp();
    let chi = (s.b / (1.0 + (-2.0 * s.gamma).exp())).atan();
    let cosh2 = s.gamma.cosh().powi(2) + half_b_eg * half_b_eg;
    let r = cosh2.sqrt().max(1.0).acosh();
    if r == 0.0 {
        // No squeeze at all: the phase is immaterial.
        return ComplexSqueeze { r: 0.0, theta: 0.0, chi };
    }
    // c2 = -e^{i(theta-chi)} sinh r  =>  theta = chi + arg(-c2).
    let theta = normalize_angle(chi + (-half_b_eg).atan2(-s.gamma.sinh()));
    ComplexSqueeze { r, theta, chi }
}

/// Wraps an angle into `(-pi, pi]`.
fn normalize_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Largest componentwise mismatch of the two coefficient expressions for
/// the given shear-scale pair; the self-test of [`bch_convert`].
pub fn bogoliubov_residual(s: &SqueezeParams) -> f64 {
    let (l1, l2) = bogoliubov_lhs(s);
    let (r1, r2) = bogoliubov_rhs(&bch_convert(s));
    let d1 = (l1 - r1).norm_sqr().sqrt();
    let d2 = (l2 - r2).norm_sqr().sqrt();
    d1.max(d2)
}
