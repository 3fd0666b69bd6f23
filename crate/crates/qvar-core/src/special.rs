//! Special functions: principal-branch Lambert W and the symmetric
//! monomial-class count used when enumerating polynomial families.

use thiserror::Error;

use crate::tol;

/// Errors from special-function evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    /// Argument below -1/e, where the real principal branch does not exist.
    #[error("lambert_w: argument {0} is below -1/e")]
    OutOfDomain(f64),
    /// Halley iteration failed to reach the residual target.
    #[error("lambert_w: no convergence for argument {0}")]
    NoConvergence(f64),
}

/// Principal branch `W(s)` of the Lambert W function, defined by
/// `W(s) * exp(W(s)) = s` for `s >= -1/e`.
///
/// Halley iteration from a branch-aware initial guess; the returned value
/// satisfies `|W e^W - s| <= 1e-14 * max(1, |s|)` (looser only in the last
/// few ulps right at the branch point).
pub fn lambert_w(s: f64) -> Result<f64, SpecialError> {
    let branch_point = -(-1.0f64).exp(); // -1/e
    if !s.is_finite() || s < branch_point - 1e-15 {
        return Err(SpecialError::OutOfDomain(s));
    }
    if s == 0.0 {
        return Ok(0.0);
    }

    // Initial guess: series around the branch point for arguments close to
    // it, log-based guess elsewhere.
    let mut w = if s < -0.25 {
        // W(s) = -1 + p - p^2/3 + 11 p^3/72 + ...,  p = sqrt(2(e s + 1))
        let p = (2.0 * (std::f64::consts::E * s + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p.powi(3) / 72.0
    } else if s < 0.0 {
        // ln(1+s) matches W to second order at the origin.
        s.ln_1p()
    } else {
        s.ln_1p()
    };

    let tol = tol::LAMBERT_TARGET * s.abs().max(1.0);
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - s;
        if f.abs() <= tol {
            return Ok(w);
        }
        // Halley step for f(w) = w e^w - s.
        let fp = ew * (w + 1.0);
        let fpp = ew * (w + 2.0);
        let denom = fp - f * fpp / (2.0 * fp);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        w -= f / denom;
        // The iterate can never leave the branch domain.
        if w < -1.0 {
            w = -1.0 + 1e-12;
        }
    }

    let resid = (w * w.exp() - s).abs();
    if resid <= 1e-12 * s.abs().max(1.0) {
        Ok(w) // close to the branch point Halley stalls in the last ulps
    } else {
        Err(SpecialError::NoConvergence(s))
    }
}

/// Number of distinct symmetric monomial classes of total degree `n` in
/// three variables, i.e. the number of partitions of `n` into at most
/// three parts.
pub fn symmetric_class_count(n: u32) -> u64 {
    let n = n as u64;
    ((n + 3) * (n + 3) + 6) / 12
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lambert_w_fixed_points() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert_relative_eq!(
            lambert_w(std::f64::consts::E).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        // W(1) is the omega constant.
        assert_relative_eq!(
            lambert_w(1.0).unwrap(),
            0.567_143_290_409_783_8,
            max_relative = 1e-13
        );
    }

    #[test]
    fn lambert_w_defining_identity_on_grid() {
        // Dense sweep over the domain the certifier actually uses.
        let lo = -0.35;
        let hi = 10.0;
        let steps = 2000;
        for i in 0..=steps {
            let s = lo + (hi - lo) * i as f64 / steps as f64;
            let w = lambert_w(s).unwrap();
            let resid = (w * w.exp() - s).abs();
            assert!(
                resid < tol::LAMBERT_RESIDUAL,
                "residual {} at s = {}",
                resid,
                s
            );
        }
    }

    #[test]
    fn lambert_w_near_branch_point() {
        let s = -(-1.0f64).exp() + 1e-9;
        let w = lambert_w(s).unwrap();
        assert!(w > -1.0 && w < -0.99);
        assert!((w * w.exp() - s).abs() < 1e-12);
    }

    #[test]
    fn lambert_w_rejects_bad_arguments() {
        assert!(lambert_w(-0.4).is_err());
        assert!(lambert_w(f64::NAN).is_err());
    }

    #[test]
    fn class_count_matches_enumeration() {
        // Independent oracle: count partitions n = j + k + l with
        // j >= k >= l >= 0 directly.
        for n in 1..=30u32 {
            let mut count = 0u64;
            for j in 0..=n {
                for k in 0..=j {
                    let rest = n as i64 - j as i64 - k as i64;
                    if rest >= 0 && rest <= k as i64 {
                        count += 1;
                    }
                }
            }
            assert_eq!(symmetric_class_count(n), count, "degree {}", n);
        }
    }

    #[test]
    fn class_count_small_values() {
        assert_eq!(symmetric_class_count(1), 1);
        assert_eq!(symmetric_class_count(2), 2);
        assert_eq!(symmetric_class_count(3), 3);
        assert_eq!(symmetric_class_count(4), 4);
        assert_eq!(symmetric_class_count(5), 5);
        assert_eq!(symmetric_class_count(6), 7);
    }
}
