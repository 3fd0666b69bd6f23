//! Brute-force verification oracles.
//!
//! Two independent checks back every certified bound:
//!
//! * [`parametric_search`] minimizes the functional over squeezed-state
//!   moments on one hyperboloid sheet (coarse grid plus compass
//!   refinement) without using any gradient or consistency information.
//! * [`fock_minimize`] minimizes the functional over normalized state
//!   vectors in a truncated number basis by projected-gradient descent,
//!   touching none of the extremal machinery.
//!
//! Ladder operators are always applied in a slightly larger space than
//! the state's support (two buffer levels), so the second moments of any
//! representable state are exact — not truncation approximations. As a
//! consequence every moment triple the oracle produces obeys the
//! covariance-product inequality by theorem, and the variational minimum
//! can never undercut a true bound.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::Functional;
use crate::geometry::{Moments3, SheetIndex};
use crate::symplectic::{squeezed_moments, SqueezeParams};

/// Normalized state vector in a truncated number basis.
#[derive(Debug, Clone)]
pub struct FockState {
    coeffs: Vec<Complex64>,
}

/// Where an oracle found its minimum.
#[derive(Debug, Clone)]
pub enum Argmin {
    /// Squeezed-state parameters on a sheet.
    Squeeze { sheet: u32, b: f64, gamma: f64 },
    /// Truncated state vector, summarized by its dominant basis weight.
    Fock { dim: usize, leading_index: usize, leading_weight: f64 },
}

/// Outcome of an oracle minimization.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Smallest functional value found.
    pub value: f64,
    /// Moments at the minimizing argument.
    pub moments: Moments3,
    pub argmin: Argmin,
    pub converged: bool,
    /// Restarts actually run (1 for the deterministic parametric search).
    pub restarts_used: usize,
}

impl FockState {
    /// Oscillator ground state.
    pub fn ground(dim: usize) -> FockState {
        FockState::number(dim, 0)
    }

    /// Number state `|k⟩`.
    pub fn number(dim: usize, k: usize) -> FockState {
        assert!(dim >= 2, "need at least two levels");
        assert!(k < dim, "level index out of range");
        let mut coeffs = vec![Complex64::ZERO; dim];
        coeffs[k] = Complex64::ONE;
        FockState { coeffs }
    }

    /// Build from raw coefficients, normalizing; `None` for a null vector.
    pub fn from_coeffs(raw: Vec<Complex64>) -> Option<FockState> {
        if raw.len() < 2 {
            return None;
        }
        let n = norm(&raw);
        if !(n.is_finite() && n > 0.0) {
            return None;
        }
        let coeffs = raw.into_iter().map(|c| c / n).collect();
        Some(FockState { coeffs })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Euclidean norm (1 up to rounding).
    pub fn norm(&self) -> f64 {
        norm(&self.coeffs)
    }

    /// Rotate the global phase so the largest-magnitude coefficient is
    /// real and positive.
    pub fn gauge_fixed(&self) -> FockState {
        let (idx, _) = self
            .coeffs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .expect("state has at least two coefficients");
        let c = self.coeffs[idx];
        if c.norm() == 0.0 {
            return self.clone();
        }
        let phase = c / c.norm();
        let coeffs = self.coeffs.iter().map(|z| z / phase).collect();
        FockState { coeffs }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Momentum operator applied via ladder actions; the result has one more
/// slot than the input so no amplitude is lost.
pub fn apply_p(psi: &[Complex64], hbar: f64) -> Vec<Complex64> {
    let n = psi.len();
    let s = (hbar / 2.0).sqrt();
    let i = Complex64::i();
    let mut out = vec![Complex64::ZERO; n + 1];
    for (k, slot) in out.iter_mut().enumerate() {
        let lower = if k >= 1 { (k as f64).sqrt() * psi[k - 1] } else { Complex64::ZERO };
        let upper =
            if k + 1 < n { ((k + 1) as f64).sqrt() * psi[k + 1] } else { Complex64::ZERO };
        *slot = i * s * (lower - upper);
    }
    out
}

/// Position operator applied via ladder actions; one extra output slot.
pub fn apply_q(psi: &[Complex64], hbar: f64) -> Vec<Complex64> {
    let n = psi.len();
    let s = (hbar / 2.0).sqrt();
    let mut out = vec![Complex64::ZERO; n + 1];
    for (k, slot) in out.iter_mut().enumerate() {
        let lower = if k >= 1 { (k as f64).sqrt() * psi[k - 1] } else { Complex64::ZERO };
        let upper =
            if k + 1 < n { ((k + 1) as f64).sqrt() * psi[k + 1] } else { Complex64::ZERO };
        *slot = s * (lower + upper);
    }
    out
}

/// Exact second moments of a truncated-basis state.
pub fn fock_moments(state: &FockState, hbar: f64) -> Moments3 {
    moments_from_coeffs(&state.coeffs, hbar)
}

fn moments_from_coeffs(psi: &[Complex64], hbar: f64) -> Moments3 {
    let p1 = apply_p(psi, hbar);
    let q1 = apply_q(psi, hbar);
    let mp = dot(psi, &p1[..psi.len()]).re;
    let mq = dot(psi, &q1[..psi.len()]).re;
    let x = p1.iter().map(|c| c.norm_sqr()).sum::<f64>() - mp * mp;
    let y = q1.iter().map(|c| c.norm_sqr()).sum::<f64>() - mq * mq;
    let w = dot(&p1, &q1).re - mp * mq;
    Moments3::new(x, y, w)
}

fn objective(f: &Functional, psi: &[Complex64], hbar: f64) -> (f64, Moments3) {
    let m = moments_from_coeffs(psi, hbar);
    match f.evaluate(&m) {
        Ok(v) if v.is_finite() => (v, m),
        _ => (f64::INFINITY, m),
    }
}

/// Euclidean gradient of `f(moments(psi))` with respect to the state
/// coefficients, restricted to the state's support.
fn euclidean_gradient(f: &Functional, psi: &[Complex64], hbar: f64) -> Option<Vec<Complex64>> {
    let n = psi.len();
    let m = moments_from_coeffs(psi, hbar);
    let g = f.gradient_lenient(&m).ok()?;
    let p1 = apply_p(psi, hbar);
    let q1 = apply_q(psi, hbar);
    let mp = dot(psi, &p1[..n]).re;
    let mq = dot(psi, &q1[..n]).re;
    let p2 = apply_p(&p1, hbar);
    let q2 = apply_q(&q1, hbar);
    let pq = apply_p(&q1, hbar);
    let qp = apply_q(&p1, hbar);
    let mut grad = vec![Complex64::ZERO; n];
    for k in 0..n {
        let dp2 = p2[k] - 2.0 * mp * p1[k];
        let dq2 = q2[k] - 2.0 * mq * q1[k];
        let dw = 0.5 * (pq[k] + qp[k]) - mp * q1[k] - mq * p1[k];
        grad[k] = g.dx * dp2 + g.dy * dq2 + g.dw * dw;
    }
    Some(grad)
}

/// Component of `grad` tangent to the unit sphere at `psi`.
fn tangent_part(psi: &[Complex64], grad: &[Complex64]) -> Vec<Complex64> {
    let radial = dot(psi, grad).re;
    psi.iter().zip(grad).map(|(p, g)| g - radial * p).collect()
}

fn renormalized(mut v: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = norm(&v);
    if !(n.is_finite() && n > 0.0) {
        return None;
    }
    for c in &mut v {
        *c /= n;
    }
    Some(v)
}

/// Projected-gradient descent on the unit sphere from one seed.
/// Barzilai-Borwein step lengths with an Armijo backtracking safeguard.
fn descend(f: &Functional, seed: Vec<Complex64>, hbar: f64) -> Option<(f64, Vec<Complex64>)> {
    const MAX_ITERS: usize = 3000;
    const MAX_BACKTRACKS: usize = 40;

    let mut psi = renormalized(seed)?;
    let (mut value, _) = objective(f, &psi, hbar);
    if !value.is_finite() {
        return None;
    }
    let mut prev: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
    for _ in 0..MAX_ITERS {
        let grad = euclidean_gradient(f, &psi, hbar)?;
        let gt = tangent_part(&psi, &grad);
        let gnorm2 = gt.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let gnorm = gnorm2.sqrt();
        if gnorm <= 1e-9 * (1.0 + value.abs()) {
            return Some((value, psi));
        }
        // Barzilai-Borwein step from the previous (position, gradient) pair.
        let mut alpha = match &prev {
            Some((psi_old, gt_old)) => {
                let s: Vec<Complex64> =
                    psi.iter().zip(psi_old).map(|(a, b)| a - b).collect();
                let yv: Vec<Complex64> = gt.iter().zip(gt_old).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &yv).re;
                let ss = s.iter().map(|c| c.norm_sqr()).sum::<f64>();
                if sy > 1e-300 && ss.is_finite() {
                    (ss / sy).clamp(1e-10, 1e3)
                } else {
                    0.1 / (1.0 + gnorm)
                }
            }
            None => 0.1 / (1.0 + gnorm),
        };
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<Complex64> =
                psi.iter().zip(&gt).map(|(p, g)| p - alpha * g).collect();
            let Some(trial) = renormalized(trial) else {
                alpha *= 0.5;
                continue;
            };
            let (tv, _) = objective(f, &trial, hbar);
            if tv < value - 1e-4 * alpha * gnorm2 {
                prev = Some((std::mem::replace(&mut psi, trial), gt.clone()));
                value = tv;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Step length exhausted: treat as converged to the best found.
            return Some((value, psi));
        }
    }
    Some((value, psi))
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Variational minimization of `f` over normalized truncated-basis
/// states. Deterministic for fixed `(dim, restarts, seed)`.
pub fn fock_minimize(
    f: &Functional,
    dim: usize,
    restarts: usize,
    seed: u64,
    hbar: f64,
) -> OracleResult {
    let dim = dim.max(2);
    let restarts = restarts.max(1);
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    let mut converged_any = false;
    for r in 0..restarts {
        let seed_vec: Vec<Complex64> = match r {
            0 => FockState::ground(dim).coeffs,
            1 => FockState::number(dim, 1).coeffs,
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
                (0..dim)
                    .map(|_| Complex64::new(gaussian(&mut rng), gaussian(&mut rng)))
                    .collect()
            }
        };
        if let Some((value, psi)) = descend(f, seed_vec, hbar) {
            converged_any = true;
            let better = match &best {
                Some((bv, _)) => value < *bv,
                None => true,
            };
            if better {
                best = Some((value, psi));
            }
        }
    }
    match best {
        Some((value, psi)) => {
            let state = FockState { coeffs: psi }.gauge_fixed();
            let m = fock_moments(&state, hbar);
            let (leading_index, leading) = state
                .coeffs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                .expect("nonempty state");
            OracleResult {
                value,
                moments: m,
                argmin: Argmin::Fock {
                    dim,
                    leading_index,
                    leading_weight: leading.norm_sqr(),
                },
                converged: converged_any,
                restarts_used: restarts,
            }
        }
        None => OracleResult {
            value: f64::INFINITY,
            moments: Moments3::new(1.0, 1.0, 0.0),
            argmin: Argmin::Fock { dim, leading_index: 0, leading_weight: 0.0 },
            converged: false,
            restarts_used: restarts,
        },
    }
}

/// Derivative-free minimum of `f` over squeezed-state moments on sheet
/// `n`: coarse `(b, γ)` grid, then compass-search refinement down to a
/// step of 1e-7.
pub fn parametric_search(f: &Functional, n: SheetIndex, hbar: f64) -> OracleResult {
    let eval = |b: f64, g: f64| -> f64 {
        let m = squeezed_moments(n, &SqueezeParams { b, gamma: g }, hbar);
        match f.evaluate(&m) {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    };

    let (b_lo, b_hi, g_lo, g_hi) = (-4.0, 4.0, -3.0, 3.0);
    let nb = 81;
    let ng = 61;
    let mut best_b = 0.0;
    let mut best_g = 0.0;
    let mut best_v = f64::INFINITY;
    for i in 0..nb {
        let b = b_lo + (b_hi - b_lo) * i as f64 / (nb - 1) as f64;
        for j in 0..ng {
            let g = g_lo + (g_hi - g_lo) * j as f64 / (ng - 1) as f64;
            let v = eval(b, g);
            if v < best_v {
                best_v = v;
                best_b = b;
                best_g = g;
            }
        }
    }

    let mut step = 0.1;
    while step > 1e-7 {
        let mut moved = false;
        for (db, dg) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = eval(best_b + db, best_g + dg);
            if v < best_v {
                best_v = v;
                best_b += db;
                best_g += dg;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }

    let m = squeezed_moments(n, &SqueezeParams { b: best_b, gamma: best_g }, hbar);
    OracleResult {
        value: best_v,
        moments: m,
        argmin: Argmin::Squeeze { sheet: n.0, b: best_b, gamma: best_g },
        converged: best_v.is_finite(),
        restarts_used: 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn number_state_moments_sit_on_their_sheet() {
        for (dim, k) in [(2usize, 0usize), (10, 1), (10, 4), (31, 7)] {
            let m = fock_moments(&FockState::number(dim, k), 1.0);
            let e = k as f64 + 0.5;
            assert_relative_eq!(m.x, e, max_relative = 1e-12);
            assert_relative_eq!(m.y, e, max_relative = 1e-12);
            assert!(m.w.abs() < 1e-12);
        }
    }

    #[test]
    fn ground_state_scales_with_hbar() {
        let m = fock_moments(&FockState::ground(8), 2.0);
        assert_relative_eq!(m.x, 1.0, max_relative = 1e-12);
        assert_relative_eq!(m.y, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn equal_superposition_matches_ladder_algebra() {
        // (|0> + |1>)/sqrt(2): worked out by hand from the tridiagonal
        // ladder actions on a three-level vector.
        let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = FockState::from_coeffs(vec![c, c, Complex64::ZERO]).unwrap();
        let m = fock_moments(&s, 1.0);
        assert_relative_eq!(m.x, 1.0, max_relative = 1e-12);
        assert_relative_eq!(m.y, 0.5, max_relative = 1e-12);
        assert!(m.w.abs() < 1e-12);
    }

    #[test]
    fn covariance_product_inequality_holds_for_sampled_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..200 {
            let dim = 3 + (trial % 28);
            let raw: Vec<Complex64> =
                (0..dim).map(|_| Complex64::new(gaussian(&mut rng), gaussian(&mut rng))).collect();
            let Some(s) = FockState::from_coeffs(raw) else { continue };
            let m = fock_moments(&s, 1.0);
            assert!(
                m.rs_value() >= 0.25 - 1e-10,
                "state (trial {trial}) violates the product bound: {m:?}"
            );
        }
    }

    #[test]
    fn gauge_fixing_makes_leading_coefficient_real() {
        let s = FockState::from_coeffs(vec![
            Complex64::new(0.0, 0.8),
            Complex64::new(0.3, -0.2),
        ])
        .unwrap();
        let g = s.gauge_fixed();
        let lead = g.coeffs()[0];
        assert!(lead.im.abs() < 1e-14);
        assert!(lead.re > 0.0);
        assert_relative_eq!(g.norm(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn variance_sum_minimum_is_the_ground_state() {
        let f = Functional::parse_simple("x + y").unwrap();
        let r = fock_minimize(&f, 10, 5, 42, 1.0);
        assert!(r.converged);
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-8);
        match r.argmin {
            Argmin::Fock { leading_index, leading_weight, .. } => {
                assert_eq!(leading_index, 0);
                assert!(leading_weight > 1.0 - 1e-6);
            }
            _ => panic!("expected a Fock argmin"),
        }
    }

    #[test]
    fn geometric_mean_minimum_from_fock_search() {
        let f = Functional::parse_simple("sqrt(x*y)").unwrap();
        let r = fock_minimize(&f, 20, 8, 42, 1.0);
        assert!(r.value >= 0.5 - 1e-9);
        assert!(r.value <= 0.5 + 1e-4);
    }

    #[test]
    fn triple_product_minimum_from_fock_search() {
        let f = Functional::parse_simple("x*y*z").unwrap();
        let r = fock_minimize(&f, 30, 12, 42, 1.0);
        let expect = 3.0f64.powf(-1.5);
        assert!(r.value >= expect - 1e-6, "value {}", r.value);
        assert!(r.value <= expect + 1e-4, "value {}", r.value);
    }

    #[test]
    fn enlarging_the_basis_never_hurts() {
        let f = Functional::parse_simple("sqrt(x*y)").unwrap();
        let v10 = fock_minimize(&f, 10, 6, 42, 1.0).value;
        let v20 = fock_minimize(&f, 20, 6, 42, 1.0).value;
        let v30 = fock_minimize(&f, 30, 6, 42, 1.0).value;
        assert!(v20 <= v10 + 1e-6);
        assert!(v30 <= v20 + 1e-6);
    }

    #[test]
    fn parametric_search_on_flat_sheet() {
        let f = Functional::parse_simple("x*y - w^2").unwrap();
        let r = parametric_search(&f, SheetIndex(0), 1.0);
        assert!(r.converged);
        assert_relative_eq!(r.value, 0.25, max_relative = 1e-9);
    }

    #[test]
    fn parametric_search_finds_triple_product_minimum() {
        let f = Functional::parse_simple("x*y*z").unwrap();
        let r = parametric_search(&f, SheetIndex(0), 1.0);
        assert_relative_eq!(r.value, 3.0f64.powf(-1.5), max_relative = 1e-8);
        match r.argmin {
            Argmin::Squeeze { b, gamma, .. } => {
                assert_relative_eq!(b, 0.5, epsilon = 1e-4);
                assert_relative_eq!(gamma, 0.25 * (4.0f64 / 3.0).ln(), epsilon = 1e-4);
            }
            _ => panic!("expected squeeze argmin"),
        }
    }

    #[test]
    fn parametric_search_respects_higher_sheets() {
        let f = Functional::parse_simple("x + y").unwrap();
        let r0 = parametric_search(&f, SheetIndex(0), 1.0);
        let r2 = parametric_search(&f, SheetIndex(2), 1.0);
        assert_relative_eq!(r0.value, 1.0, max_relative = 1e-9);
        assert_relative_eq!(r2.value, 5.0, max_relative = 1e-9);
    }
}
