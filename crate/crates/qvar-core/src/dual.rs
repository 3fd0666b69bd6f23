//! Forward-mode dual numbers over the three moment variables.
//!
//! A [`Dual3`] carries a value and its exact partial derivatives with
//! respect to `(x, y, w)`; arithmetic propagates all three tangents at
//! once, so one evaluation of an expression yields its full gradient with
//! no truncation error.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Reasons a pointwise numeric operation can fail.
#[derive(Debug, Clone, PartialEq)]
pub enum NumIssue {
    /// `sqrt` of a negative value.
    NegativeSqrt(f64),
    /// `ln` of a non-positive value.
    LogNonPositive(f64),
    /// Division by exact zero.
    DivByZero,
    /// Negative base raised to a non-integer power.
    FractionalPowNegative { base: f64, exp: f64 },
    /// Zero base raised to a negative power.
    NegativePowZero { exp: f64 },
    /// Derivative of `abs` requested exactly at its kink.
    AbsKink,
    /// Derivative of `sqrt` (or an equivalent fractional power) requested
    /// exactly at zero, where it diverges.
    SqrtKink,
    /// An intermediate value or derivative left the finite range.
    NonFinite,
}

/// Value plus partials with respect to `x`, `y`, `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual3 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dw: f64,
}

impl Dual3 {
    pub const fn constant(v: f64) -> Self {
        Dual3 { v, dx: 0.0, dy: 0.0, dw: 0.0 }
    }

    /// Seed for the variable `x` (unit tangent in the `x` direction).
    pub const fn var_x(v: f64) -> Self {
        Dual3 { v, dx: 1.0, dy: 0.0, dw: 0.0 }
    }

    pub const fn var_y(v: f64) -> Self {
        Dual3 { v, dx: 0.0, dy: 1.0, dw: 0.0 }
    }

    pub const fn var_w(v: f64) -> Self {
        Dual3 { v, dx: 0.0, dy: 0.0, dw: 1.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.dx.is_finite() && self.dy.is_finite() && self.dw.is_finite()
    }

    fn has_tangent(&self) -> bool {
        self.dx != 0.0 || self.dy != 0.0 || self.dw != 0.0
    }

    /// Chain rule: same value transform `g`, derivative factor `gp`.
    fn lift(self, g: f64, gp: f64) -> Self {
        Dual3 { v: g, dx: gp * self.dx, dy: gp * self.dy, dw: gp * self.dw }
    }

    pub fn checked_div(self, o: Self) -> Result<Self, NumIssue> {
        if o.v == 0.0 {
            return Err(NumIssue::DivByZero);
        }
        let v = self.v / o.v;
        let inv = 1.0 / o.v;
        Ok(Dual3 {
            v,
            dx: (self.dx - v * o.dx) * inv,
            dy: (self.dy - v * o.dy) * inv,
            dw: (self.dw - v * o.dw) * inv,
        })
    }

    pub fn checked_sqrt(self) -> Result<Self, NumIssue> {
        if self.v < 0.0 {
            return Err(NumIssue::NegativeSqrt(self.v));
        }
        if self.v == 0.0 {
            if self.has_tangent() {
                return Err(NumIssue::SqrtKink);
            }
            return Ok(Dual3::constant(0.0));
        }
        let s = self.v.sqrt();
        Ok(self.lift(s, 0.5 / s))
    }

    pub fn checked_exp(self) -> Result<Self, NumIssue> {
        let e = self.v.exp();
        if !e.is_finite() {
            return Err(NumIssue::NonFinite);
        }
        Ok(self.lift(e, e))
    }

    pub fn checked_ln(self) -> Result<Self, NumIssue> {
        if self.v <= 0.0 {
            return Err(NumIssue::LogNonPositive(self.v));
        }
        Ok(self.lift(self.v.ln(), 1.0 / self.v))
    }

    /// `lenient` picks the right-hand subgradient at the kink instead of
    /// failing, which lets descent methods cross `w = 0`.
    pub fn checked_abs(self, lenient: bool) -> Result<Self, NumIssue> {
        if self.v > 0.0 {
            return Ok(self);
        }
        if self.v < 0.0 {
            return Ok(-self);
        }
        if !self.has_tangent() {
            return Ok(Dual3::constant(0.0));
        }
        if lenient {
            Ok(self)
        } else {
            Err(NumIssue::AbsKink)
        }
    }

    /// General power. A tangent-free exponent follows the monomial rule
    /// (valid for negative bases at integer exponents); otherwise the
    /// base must be positive.
    pub fn checked_pow(self, e: Self) -> Result<Self, NumIssue> {
        if !e.has_tangent() {
            return self.checked_pow_const(e.v);
        }
        if self.v <= 0.0 {
            return Err(NumIssue::FractionalPowNegative { base: self.v, exp: e.v });
        }
        let v = self.v.powf(e.v);
        if !v.is_finite() {
            return Err(NumIssue::NonFinite);
        }
        let lnb = self.v.ln();
        let du = e.v * v / self.v; // d/d(base)
        let de = v * lnb; // d/d(exp)
        Ok(Dual3 {
            v,
            dx: du * self.dx + de * e.dx,
            dy: du * self.dy + de * e.dy,
            dw: du * self.dw + de * e.dw,
        })
    }

    fn checked_pow_const(self, e: f64) -> Result<Self, NumIssue> {
        let is_int = e == e.round() && e.abs() < 1e9;
        if self.v == 0.0 {
            if e < 0.0 {
                return Err(NumIssue::NegativePowZero { exp: e });
            }
            if e == 0.0 {
                return Ok(Dual3::constant(1.0));
            }
            if e == 1.0 {
                return Ok(self);
            }
            if e > 1.0 {
                return Ok(Dual3::constant(0.0));
            }
            // 0 < e < 1: value 0 but infinite slope.
            if self.has_tangent() {
                return Err(NumIssue::SqrtKink);
            }
            return Ok(Dual3::constant(0.0));
        }
        if self.v < 0.0 && !is_int {
            return Err(NumIssue::FractionalPowNegative { base: self.v, exp: e });
        }
        let v = self.v.powf(e);
        if !v.is_finite() {
            return Err(NumIssue::NonFinite);
        }
        // e * base^(e-1); computed via v / base to honor negative bases.
        let gp = e * v / self.v;
        Ok(self.lift(v, gp))
    }
}

impl Add for Dual3 {
    type Output = Dual3;
    fn add(self, o: Dual3) -> Dual3 {
        Dual3 { v: self.v + o.v, dx: self.dx + o.dx, dy: self.dy + o.dy, dw: self.dw + o.dw }
    }
}

impl Sub for Dual3 {
    type Output = Dual3;
    fn sub(self, o: Dual3) -> Dual3 {
        Dual3 { v: self.v - o.v, dx: self.dx - o.dx, dy: self.dy - o.dy, dw: self.dw - o.dw }
    }
}

impl Mul for Dual3 {
    type Output = Dual3;
    fn mul(self, o: Dual3) -> Dual3 {
        Dual3 {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dw: self.dw * o.v + self.v * o.dw,
        }
    }
}

impl Div for Dual3 {
    type Output = Dual3;
    fn div(self, o: Dual3) -> Dual3 {
        self.checked_div(o).expect("division by zero in unchecked dual division")
    }
}

impl Neg for Dual3 {
    type Output = Dual3;
    fn neg(self) -> Dual3 {
        Dual3 { v: -self.v, dx: -self.dx, dy: -self.dy, dw: -self.dw }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_rule() {
        // d(x*y)/dx = y, d(x*y)/dy = x at (3, 7).
        let x = Dual3::var_x(3.0);
        let y = Dual3::var_y(7.0);
        let p = x * y;
        assert_eq!(p.v, 21.0);
        assert_eq!(p.dx, 7.0);
        assert_eq!(p.dy, 3.0);
        assert_eq!(p.dw, 0.0);
    }

    #[test]
    fn quotient_and_chain() {
        // f = sqrt(x) / y at (4, 2): f = 1, fx = 1/(2*2*2) = 1/8,
        // fy = -1/2.
        let x = Dual3::var_x(4.0);
        let y = Dual3::var_y(2.0);
        let f = x.checked_sqrt().unwrap().checked_div(y).unwrap();
        assert_relative_eq!(f.v, 1.0);
        assert_relative_eq!(f.dx, 0.125);
        assert_relative_eq!(f.dy, -0.5);
    }

    #[test]
    fn integer_power_of_negative_base() {
        let w = Dual3::var_w(-1.5);
        let f = w.checked_pow(Dual3::constant(2.0)).unwrap();
        assert_relative_eq!(f.v, 2.25);
        assert_relative_eq!(f.dw, -3.0);
        assert!(w.checked_pow(Dual3::constant(0.5)).is_err());
    }

    #[test]
    fn abs_kink_modes() {
        let w = Dual3::var_w(0.0);
        assert_eq!(w.checked_abs(false), Err(NumIssue::AbsKink));
        assert_eq!(w.checked_abs(true).unwrap().dw, 1.0);
        let neg = Dual3::var_w(-2.0).checked_abs(false).unwrap();
        assert_eq!(neg.v, 2.0);
        assert_eq!(neg.dw, -1.0);
    }

    #[test]
    fn exp_ln_round_trip_derivative() {
        let x = Dual3::var_x(1.3);
        let f = x.checked_ln().unwrap().checked_exp().unwrap();
        assert_relative_eq!(f.v, 1.3, max_relative = 1e-15);
        assert_relative_eq!(f.dx, 1.0, max_relative = 1e-14);
    }
}
