//! Shared helpers for the integration suites.
//!
//! Each integration target compiles this module independently, so not
//! every helper is used by every target.
#![allow(dead_code)]

use qvar_core::expr::Functional;
use qvar_core::geometry::Moments3;
use rand::Rng;

/// Central finite-difference gradient of a functional, with one-sided
/// fallback when a probe leaves the admissible domain.
pub fn fd_gradient(f: &Functional, m: &Moments3) -> Option<[f64; 3]> {
    let coords = [m.x, m.y, m.w];
    let mut grad = [0.0; 3];
    for (i, g) in grad.iter_mut().enumerate() {
        let h = 1e-6 * (1.0 + coords[i].abs());
        let probe = |delta: f64| {
            let mut c = coords;
            c[i] += delta;
            f.evaluate(&Moments3::new(c[0], c[1], c[2])).ok()
        };
        *g = match (probe(h), probe(-h)) {
            (Some(fp), Some(fm)) => (fp - fm) / (2.0 * h),
            (Some(fp), None) => {
                let f0 = probe(0.0)?;
                (fp - f0) / h
            }
            (None, Some(fm)) => {
                let f0 = probe(0.0)?;
                (f0 - fm) / h
            }
            (None, None) => return None,
        };
    }
    Some(grad)
}

/// Random moments strictly inside the admissible region: a point on a
/// random sheet pushed outward by a random factor.
pub fn random_region_moments<R: Rng>(rng: &mut R, hbar: f64) -> Moments3 {
    let e = (rng.random_range(0..4) as f64 + 0.5) * hbar;
    let gamma: f64 = rng.random_range(-1.2..1.2);
    let b: f64 = rng.random_range(-2.0..2.0);
    let slack: f64 = rng.random_range(1.0..3.0);
    let x = e * (2.0 * gamma).exp() * slack;
    let y = e * (b * b * (2.0 * gamma).exp() + (-2.0 * gamma).exp()) * slack;
    let w = -b * e * (2.0 * gamma).exp();
    Moments3::new(x, y, w)
}

/// Deterministic tolerance for gradient comparisons: relative in the
/// larger of the gradient scale and the function scale at the point.
pub fn grad_close(ad: &[f64; 3], fd: &[f64; 3], f_scale: f64, rel: f64) -> bool {
    let scale = 1.0
        + f_scale.abs()
        + ad.iter().fold(0.0f64, |a, g| a.max(g.abs()))
        + fd.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    ad.iter().zip(fd).all(|(a, b)| (a - b).abs() <= rel * scale)
}
