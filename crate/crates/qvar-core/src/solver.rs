//! Extremal-point solver.
//!
//! On sheet `n` the candidate minimizers of a functional `f` are the
//! moment triples where the residual system
//!
//! ```text
//! r1 = x f_x - y f_y
//! r2 = x f_w + 2 w f_y
//! r3 = x y - w^2 - e_n^2
//! ```
//!
//! vanishes. The solver runs damped Gauss-Newton (pseudo-inverse steps,
//! backtracking line search) from a lattice of on-sheet squeezed-state
//! seeds, deduplicates the converged points, classifies the local solution
//! dimensionality from the rank of the residual Jacobian, and samples
//! one-dimensional solution manifolds by predictor-corrector continuation.
//!
//! The Jacobian is taken by central finite differences of the residuals:
//! the expression layer provides exact first derivatives of `f` only, and
//! `r1`, `r2` already contain them, so exact rows would need second
//! derivatives of `f`.

use nalgebra::{Matrix3, Vector3};

use crate::expr::{AbsBranch, Functional};
use crate::geometry::{Moments3, SheetIndex};
use crate::symplectic::{DefinitenessClass, FMatrix, SqueezeParams, squeezed_moments};
use crate::tol;

/// Tunables for the multistart solve. The defaults are used by the
/// certifier and the test suite.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Seed lattice half-width in the shear parameter `b`.
    pub seed_b_max: f64,
    /// Seed lattice half-width in the scaling parameter `gamma`.
    pub seed_gamma_max: f64,
    /// Seeds per lattice axis (the lattice is square).
    pub seeds_per_axis: usize,
    /// Newton iteration cap per seed.
    pub max_iters: usize,
    /// Step-halving cap inside the line search.
    pub max_backtracks: usize,
    /// Residual acceptance threshold, scaled by `1 + |f|`.
    pub residual_tol: f64,
    /// Continuation arc-length step as a fraction of the sheet energy.
    pub continuation_step: f64,
    /// Continuation samples per manifold branch.
    pub continuation_samples: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed_b_max: 2.0,
            seed_gamma_max: 1.5,
            seeds_per_axis: 7,
            max_iters: 100,
            max_backtracks: 30,
            residual_tol: tol::RESIDUAL_TOL,
            continuation_step: 0.05,
            continuation_samples: 200,
        }
    }
}

/// Dimensionality of the solution set found on a sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetDimension {
    /// No residual zero found from any seed.
    Empty,
    /// Isolated point(s).
    Dim0,
    /// One-parameter family.
    Dim1,
    /// Two-parameter family (the full sheet).
    Dim2,
}

impl std::fmt::Display for SetDimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SetDimension::Empty => "EMPTY",
            SetDimension::Dim0 => "DIM0",
            SetDimension::Dim1 => "DIM1",
            SetDimension::Dim2 => "DIM2",
        };
        f.write_str(s)
    }
}

/// One converged, admissible extremal point.
#[derive(Debug, Clone)]
pub struct ExtremalPoint {
    pub moments: Moments3,
    /// Max-abs residual at the point.
    pub residual_norm: f64,
    /// Functional value at the point.
    pub f_value: f64,
    /// Rank of the residual Jacobian (0..=3).
    pub rank: usize,
    /// Shear-scale parameters reconstructed from the gradient.
    pub squeeze: SqueezeParams,
}

impl ExtremalPoint {
    /// Local solution-set dimension at this point.
    pub fn local_dimension(&self) -> usize {
        3 - self.rank.min(3)
    }
}

/// Everything found on one sheet.
#[derive(Debug, Clone)]
pub struct ExtremalSet {
    pub sheet: SheetIndex,
    pub dimension: SetDimension,
    /// Deduplicated admissible extremal points.
    pub points: Vec<ExtremalPoint>,
    /// Continuation / lattice samples tracing out DIM1 and DIM2 manifolds
    /// (value = functional value at the sample).
    pub samples: Vec<(Moments3, f64)>,
    /// Converged points rejected because their curvature matrix was not
    /// positive definite (by class).
    pub discarded_not_posdef: usize,
    /// Converged points rejected for violating a pinned sign branch.
    pub discarded_off_branch: usize,
    pub seeds_tried: usize,
    pub seeds_converged: usize,
    /// Human-readable diagnostics (manifold parameterization, rejects).
    pub notes: Vec<String>,
}

/// Consistency residual vector at a moment triple, or `None` where the
/// gradient does not exist.
pub fn residuals(
    f: &Functional,
    m: &Moments3,
    sheet: SheetIndex,
    hbar: f64,
) -> Option<Vector3<f64>> {
    let g = f.gradient(m).ok()?;
    let e = sheet.energy(hbar);
    Some(Vector3::new(
        m.x * g.dx - m.y * g.dy,
        m.x * g.dw + 2.0 * m.w * g.dy,
        m.x * m.y - m.w * m.w - e * e,
    ))
}

fn residual_scale(f: &Functional, m: &Moments3) -> f64 {
    1.0 + f.evaluate(m).map(f64::abs).unwrap_or(0.0)
}

/// On-sheet seed lattice: squeezed-state moments over a square grid of
/// `(b, gamma)` values.
pub fn seed_grid(sheet: SheetIndex, cfg: &SolverConfig, hbar: f64) -> Vec<Moments3> {
    let k = cfg.seeds_per_axis.max(1);
    let mut seeds = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let frac = |idx: usize| {
                if k == 1 {
                    0.0
                } else {
                    -1.0 + 2.0 * idx as f64 / (k - 1) as f64
                }
            };
            let s = SqueezeParams {
                b: cfg.seed_b_max * frac(i),
                gamma: cfg.seed_gamma_max * frac(j),
            };
            seeds.push(squeezed_moments(sheet, &s, hbar));
        }
    }
    seeds
}

/// Central-difference Jacobian of the residual vector. Falls back to
/// one-sided differences when a probe point leaves the functional's
/// domain.
fn fd_jacobian(
    f: &Functional,
    m: &Moments3,
    sheet: SheetIndex,
    hbar: f64,
) -> Option<Matrix3<f64>> {
    let base = [m.x, m.y, m.w];
    let mut cols = [Vector3::zeros(); 3];
    let r0 = residuals(f, m, sheet, hbar);
    for i in 0..3 {
        let h = 1e-6 * (1.0 + base[i].abs());
        let mut plus = base;
        plus[i] += h;
        let mut minus = base;
        minus[i] -= h;
        let rp = residuals(f, &Moments3::new(plus[0], plus[1], plus[2]), sheet, hbar);
        let rm = residuals(f, &Moments3::new(minus[0], minus[1], minus[2]), sheet, hbar);
        cols[i] = match (rp, rm) {
            (Some(rp), Some(rm)) => (rp - rm) / (2.0 * h),
            (Some(rp), None) => (rp - r0?) / h,
            (None, Some(rm)) => (r0? - rm) / h,
            (None, None) => return None,
        };
    }
    Some(Matrix3::from_columns(&cols))
}

/// Gauss-Newton correction back onto the residual manifold. Returns the
/// corrected point and its residual norm when it converges.
fn correct(
    f: &Functional,
    start: &Moments3,
    sheet: SheetIndex,
    cfg: &SolverConfig,
    hbar: f64,
) -> Option<(Moments3, f64)> {
    let floor = tol::MOMENT_FLOOR * hbar;
    let mut m = *start;
    let mut r = residuals(f, &m, sheet, hbar)?;
    let mut rnorm = r.amax();
    for _ in 0..cfg.max_iters {
        let tol_here = cfg.residual_tol * residual_scale(f, &m);
        if rnorm <= tol_here {
            return Some((m, rnorm));
        }
        let jac = fd_jacobian(f, &m, sheet, hbar)?;
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        if smax == 0.0 || !smax.is_finite() {
            return None;
        }
        let cut = tol::RANK_TOL * smax;
        let pinv = svd.pseudo_inverse(cut).ok()?;
        let full_step = -pinv * r;
        // Backtracking on the residual norm.
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..=cfg.max_backtracks {
            let trial = Moments3::new(
                m.x + alpha * full_step.x,
                m.y + alpha * full_step.y,
                m.w + alpha * full_step.z,
            );
            if trial.x > floor && trial.y > floor {
                if let Some(rt) = residuals(f, &trial, sheet, hbar) {
                    let rt_norm = rt.amax();
                    if rt_norm < rnorm * (1.0 - 1e-4 * alpha) || rt_norm <= tol_here {
                        m = trial;
                        r = rt;
                        rnorm = rt_norm;
                        improved = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let tol_here = cfg.residual_tol * residual_scale(f, &m);
    if rnorm <= tol_here {
        Some((m, rnorm))
    } else {
        None
    }
}

/// Rank of the residual Jacobian and the right-singular direction of its
/// smallest singular value (the manifold tangent when the rank is 2).
fn rank_and_tangent(
    f: &Functional,
    m: &Moments3,
    sheet: SheetIndex,
    hbar: f64,
) -> Option<(usize, Vector3<f64>)> {
    let jac = fd_jacobian(f, m, sheet, hbar)?;
    let svd = jac.svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Some((0, Vector3::x()));
    }
    let cut = tol::RANK_TOL * smax;
    let rank = svd.singular_values.iter().filter(|s| **s > cut).count();
    let imin = (0..3)
        .min_by(|a, b| svd.singular_values[*a].total_cmp(&svd.singular_values[*b]))
        .unwrap();
    let vt = svd.v_t.expect("svd requested V");
    let tangent = Vector3::new(vt[(imin, 0)], vt[(imin, 1)], vt[(imin, 2)]);
    Some((rank, tangent.normalize()))
}

fn too_close(a: &Moments3, b: &Moments3) -> bool {
    let scale = a.norm().max(b.norm()).max(1.0);
    a.distance(b) < tol::DEDUP_TOL * scale
}

/// Multistart solve of the residual system on one sheet.
///
/// `branch` restricts accepted covariances to one sign when the functional
/// was branch-pinned to remove an `abs(w)` kink.
pub fn solve_sheet(
    f: &Functional,
    sheet: SheetIndex,
    cfg: &SolverConfig,
    hbar: f64,
    branch: Option<AbsBranch>,
) -> ExtremalSet {
    let mut set = ExtremalSet {
        sheet,
        dimension: SetDimension::Empty,
        points: Vec::new(),
        samples: Vec::new(),
        discarded_not_posdef: 0,
        discarded_off_branch: 0,
        seeds_tried: 0,
        seeds_converged: 0,
        notes: Vec::new(),
    };
    let e_n = sheet.energy(hbar);

    let mut rejected_classes: Vec<DefinitenessClass> = Vec::new();
    for seed in seed_grid(sheet, cfg, hbar) {
        set.seeds_tried += 1;
        let Some((m, rnorm)) = correct(f, &seed, sheet, cfg, hbar) else {
            continue;
        };
        set.seeds_converged += 1;
        if let Some(br) = branch {
            if !br.admits(m.w, e_n) {
                set.discarded_off_branch += 1;
                continue;
            }
        }
        let Ok(g) = f.gradient(&m) else { continue };
        let fmat = FMatrix::from_gradient(&g);
        let class = fmat.classify();
        if class != DefinitenessClass::PosDef {
            set.discarded_not_posdef += 1;
            if !rejected_classes.contains(&class) {
                rejected_classes.push(class);
            }
            continue;
        }
        if set.points.iter().any(|p| too_close(&p.moments, &m)) {
            continue;
        }
        let Some((rank, _)) = rank_and_tangent(f, &m, sheet, hbar) else {
            continue;
        };
        let squeeze = SqueezeParams { b: -m.w / m.x, gamma: 0.5 * (m.x / e_n).ln() };
        set.points.push(ExtremalPoint {
            moments: m,
            residual_norm: rnorm,
            f_value: g.value,
            rank,
            squeeze,
        });
    }

    for class in rejected_classes {
        set.notes.push(format!(
            "converged points with {class} curvature were discarded on sheet {}",
            sheet.0
        ));
    }

    if set.points.is_empty() {
        if set.seeds_converged == 0 {
            set.notes.push(format!(
                "no seed converged on sheet {} ({} tried)",
                sheet.0, set.seeds_tried
            ));
        }
        return set;
    }

    let max_dim = set.points.iter().map(|p| p.local_dimension()).max().unwrap_or(0);
    set.dimension = match max_dim {
        0 => SetDimension::Dim0,
        1 => SetDimension::Dim1,
        _ => SetDimension::Dim2,
    };

    match set.dimension {
        SetDimension::Dim1 => {
            trace_dim1(f, sheet, cfg, hbar, branch, &mut set);
        }
        SetDimension::Dim2 => {
            sample_dim2(f, sheet, cfg, hbar, branch, &mut set);
        }
        _ => {}
    }
    set
}

/// Predictor-corrector sweep along a one-dimensional solution manifold,
/// both directions from the first rank-2 point.
fn trace_dim1(
    f: &Functional,
    sheet: SheetIndex,
    cfg: &SolverConfig,
    hbar: f64,
    branch: Option<AbsBranch>,
    set: &mut ExtremalSet,
) {
    let Some(start) = set.points.iter().find(|p| p.local_dimension() == 1) else {
        return;
    };
    let start_m = start.moments;
    let e_n = sheet.energy(hbar);
    let h = cfg.continuation_step * e_n;
    let floor = tol::MOMENT_FLOOR * hbar;

    for dir in [1.0, -1.0] {
        let mut m = start_m;
        let Some((_, mut tangent)) = rank_and_tangent(f, &m, sheet, hbar) else {
            continue;
        };
        tangent *= dir;
        for _ in 0..cfg.continuation_samples {
            let predicted = Moments3::new(
                m.x + h * tangent.x,
                m.y + h * tangent.y,
                m.w + h * tangent.z,
            );
            if predicted.x <= floor || predicted.y <= floor {
                break;
            }
            let Some((corrected, _)) = correct(f, &predicted, sheet, cfg, hbar) else {
                break;
            };
            if let Some(br) = branch {
                if !br.admits(corrected.w, e_n) {
                    break;
                }
            }
            let Ok(g) = f.gradient(&corrected) else { break };
            if FMatrix::from_gradient(&g).classify() != DefinitenessClass::PosDef {
                break;
            }
            set.samples.push((corrected, g.value));
            let Some((_, mut t_next)) = rank_and_tangent(f, &corrected, sheet, hbar) else {
                break;
            };
            if t_next.dot(&tangent) < 0.0 {
                t_next = -t_next;
            }
            m = corrected;
            tangent = t_next;
        }
    }
    set.notes.push(format!(
        "sheet {}: one-parameter extremal family traced by arc-length continuation ({} samples)",
        sheet.0,
        set.samples.len()
    ));
}

/// A two-dimensional solution set is the whole sheet; sample it on a
/// squeezed-state lattice and keep the residual zeros.
fn sample_dim2(
    f: &Functional,
    sheet: SheetIndex,
    cfg: &SolverConfig,
    hbar: f64,
    branch: Option<AbsBranch>,
    set: &mut ExtremalSet,
) {
    let e_n = sheet.energy(hbar);
    let dense = SolverConfig { seeds_per_axis: 2 * cfg.seeds_per_axis + 1, ..cfg.clone() };
    for m in seed_grid(sheet, &dense, hbar) {
        if let Some(br) = branch {
            if !br.admits(m.w, e_n) {
                continue;
            }
        }
        let Some(r) = residuals(f, &m, sheet, hbar) else { continue };
        if r.amax() <= cfg.residual_tol * residual_scale(f, &m) {
            if let Ok(v) = f.evaluate(&m) {
                set.samples.push((m, v));
            }
        }
    }
    set.notes.push(format!(
        "sheet {}: extremal set fills the sheet; sampled on a squeeze-parameter lattice ({} samples)",
        sheet.0,
        set.samples.len()
    ));
}

/// Gauss-Newton projection onto the solution manifold, exposed for the
/// certifier's refinement pass.
pub(crate) fn project_onto_manifold(
    f: &Functional,
    start: &Moments3,
    sheet: SheetIndex,
    cfg: &SolverConfig,
    hbar: f64,
) -> Option<(Moments3, f64)> {
    correct(f, start, sheet, cfg, hbar)
}

/// Manifold tangent at an extremal point, exposed for the certifier's
/// refinement pass.
pub(crate) fn manifold_tangent(
    f: &Functional,
    m: &Moments3,
    sheet: SheetIndex,
    hbar: f64,
) -> Option<Vector3<f64>> {
    rank_and_tangent(f, m, sheet, hbar).map(|(_, t)| t)
}
