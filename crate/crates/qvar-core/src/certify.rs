//! Bound certification.
//!
//! Combines per-sheet extremal sets into one verdict:
//!
//! * `BOUNDED` — an admissible extremal point attains the infimum; the
//!   bound, the minimizer, and its squeeze parameters are reported.
//! * `UNBOUNDED` — a probe ray exhibits strictly decreasing, divergent
//!   functional values inside the admissible region.
//! * `INFIMUM_NOT_ATTAINED` — probe values decrease convergently below
//!   every admissible extremum (or none exists), approaching a finite
//!   infimum that no state reaches.
//! * `INCONCLUSIVE` — extremal candidates exist but every one fails the
//!   positive-definiteness requirement, or the minimizer fails its
//!   fixed-point reconstruction; no claim is made.

use std::collections::BTreeMap;

use crate::expr::{AbsBranch, Functional};
use crate::geometry::{MomentPoint, Moments3, SheetIndex};
use crate::solver::{self, ExtremalSet, SetDimension, SolverConfig};
use crate::symplectic::{
    bch_convert, squeezed_moments, ComplexSqueeze, FMatrix, SqueezeParams, williamson_params,
};
use crate::tol;

/// Outcome of a certification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Unbounded,
    InfimumNotAttained,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Bounded => "BOUNDED",
            Verdict::Unbounded => "UNBOUNDED",
            Verdict::InfimumNotAttained => "INFIMUM_NOT_ATTAINED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        f.write_str(s)
    }
}

/// Certification tunables.
#[derive(Debug, Clone)]
pub struct CertifyConfig {
    /// Planck constant scale.
    pub hbar: f64,
    /// Highest sheet index swept (inclusive); sheets `0..=max_sheet`.
    pub max_sheet: u32,
    pub solver: SolverConfig,
    /// Points per probe ray.
    pub ray_points: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            hbar: 1.0,
            max_sheet: 5,
            solver: SolverConfig::default(),
            ray_points: 50,
        }
    }
}

/// Condensed view of what one sheet contributed.
#[derive(Debug, Clone)]
pub struct SheetSummary {
    pub sheet: u32,
    pub dimension: SetDimension,
    /// Smallest functional value over the sheet's admissible extrema.
    pub best_value: Option<f64>,
    pub points_found: usize,
    pub manifold_samples: usize,
    pub discarded_not_posdef: usize,
    pub notes: Vec<String>,
}

/// A strictly decreasing probe sequence certifying non-attainment or
/// unboundedness.
#[derive(Debug, Clone)]
pub struct WitnessSequence {
    /// Probe-ray label.
    pub ray: String,
    /// Functional values along the ray (strictly decreasing).
    pub values: Vec<f64>,
    /// Moment triples the values were taken at.
    pub moments: Vec<Moments3>,
    /// Geometric-mean ratio of the trailing decrements; < 1 signals a
    /// convergent tail.
    pub tail_ratio: f64,
    /// True when the tail diverges (unbounded descent).
    pub divergent: bool,
}

/// Minimizer data attached to a BOUNDED verdict.
#[derive(Debug, Clone)]
pub struct MinimizerInfo {
    pub sheet: u32,
    pub moments: Moments3,
    pub uvw: MomentPoint,
    pub squeeze: SqueezeParams,
    pub complex: ComplexSqueeze,
    /// Relative distance between the minimizer and the squeezed-state
    /// moments reconstructed from its own gradient (fixed-point check).
    pub fixed_point_error: f64,
}

/// Full certification outcome.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// Pretty-printed functional.
    pub source: String,
    pub params: BTreeMap<String, f64>,
    pub hbar: f64,
    pub verdict: Verdict,
    /// Certified bound (BOUNDED) or infimum estimate
    /// (INFIMUM_NOT_ATTAINED); candidate value for a downgraded
    /// INCONCLUSIVE report.
    pub bound: Option<f64>,
    pub minimizer: Option<MinimizerInfo>,
    pub sheets: Vec<SheetSummary>,
    pub witness: Option<WitnessSequence>,
    pub notes: Vec<String>,
}

/// One admissible extremal candidate pooled across sheets and branches.
#[derive(Debug, Clone)]
struct Candidate {
    branch: Option<AbsBranch>,
    sheet: SheetIndex,
    moments: Moments3,
    value: f64,
}

/// Per-sheet solve results for one pinned branch.
struct BranchRun {
    branch: Option<AbsBranch>,
    sets: Vec<ExtremalSet>,
}

pub fn certify(f: &Functional, cfg: &CertifyConfig) -> BoundReport {
    let mut report = BoundReport {
        source: f.source().to_string(),
        params: f.params().clone(),
        hbar: cfg.hbar,
        verdict: Verdict::Inconclusive,
        bound: None,
        minimizer: None,
        sheets: Vec::new(),
        witness: None,
        notes: Vec::new(),
    };

    // Case-split a |w| kink into two sign-pinned smooth problems.
    let runs: Vec<(Option<AbsBranch>, Functional)> = if f.uses_abs_w() {
        report
            .notes
            .push("covariance enters through |w|; solved on both sign branches".into());
        vec![
            (Some(AbsBranch::NonNegativeW), f.pin_abs(AbsBranch::NonNegativeW)),
            (Some(AbsBranch::NonPositiveW), f.pin_abs(AbsBranch::NonPositiveW)),
        ]
    } else {
        vec![(None, f.clone())]
    };

    let mut branch_runs = Vec::new();
    for (branch, pinned) in &runs {
        let mut sets = Vec::new();
        for n in 0..=cfg.max_sheet {
            sets.push(solver::solve_sheet(pinned, SheetIndex(n), &cfg.solver, cfg.hbar, *branch));
        }
        branch_runs.push(BranchRun { branch: *branch, sets });
    }

    report.sheets = summarize_sheets(cfg, &branch_runs);
    check_sheet_monotonicity(&report.sheets, &mut report.notes);

    let total_discarded: usize =
        report.sheets.iter().map(|s| s.discarded_not_posdef).sum();

    // Pool admissible candidates; refine non-constant manifolds.
    let mut candidates = Vec::new();
    for run in &branch_runs {
        let pinned = runs
            .iter()
            .find(|(b, _)| *b == run.branch)
            .map(|(_, p)| p)
            .expect("branch run matches a pinned functional");
        for set in &run.sets {
            collect_candidates(pinned, set, run.branch, cfg, &mut candidates, &mut report.notes);
        }
    }

    let probes = run_probe_rays(f, cfg);

    if let Some(best) = best_candidate(&candidates, cfg) {
        let beat_margin = tol::PROBE_MARGIN * (1.0 + best.value.abs());
        let beating: Vec<&WitnessSequence> = probes
            .iter()
            .filter(|w| *w.values.last().unwrap() < best.value - beat_margin)
            .collect();
        if let Some(w) = pick_witness(&beating) {
            if w.divergent {
                report.verdict = Verdict::Unbounded;
                report.notes.push(format!(
                    "probe ray {} descends below every admissible extremum without converging",
                    w.ray
                ));
            } else {
                report.verdict = Verdict::InfimumNotAttained;
                report.bound = Some(extrapolate_limit(w));
                report.notes.push(format!(
                    "probe ray {} converges below every admissible extremum; the infimum is approached but not attained",
                    w.ray
                ));
            }
            report.witness = Some(w.clone());
        } else {
            report.verdict = Verdict::Bounded;
            report.bound = Some(best.value);
            attach_minimizer_params(&runs, &best, cfg, &mut report);
        }
    } else {
        // No admissible extremum anywhere.
        let decreasing: Vec<&WitnessSequence> = probes.iter().collect();
        let divergent = decreasing.iter().find(|w| w.divergent);
        if let Some(w) = divergent {
            report.verdict = Verdict::Unbounded;
            report.witness = Some((*w).clone());
            report
                .notes
                .push(format!("no admissible extremum; probe ray {} diverges downward", w.ray));
        } else if total_discarded > 0 {
            report.verdict = Verdict::Inconclusive;
            report.notes.push(
                "extremal candidates exist but none passes positive-definiteness; no prediction"
                    .into(),
            );
        } else if let Some(w) = pick_witness(&decreasing) {
            report.verdict = Verdict::InfimumNotAttained;
            report.bound = Some(extrapolate_limit(w));
            report.witness = Some(w.clone());
            report.notes.push(format!(
                "no extremal point exists; probe ray {} approaches the infimum without attaining it",
                w.ray
            ));
        } else {
            report.verdict = Verdict::Inconclusive;
            report
                .notes
                .push("no extremal point found and no decreasing probe ray; no prediction".into());
        }
    }
    report
}

fn summarize_sheets(cfg: &CertifyConfig, branch_runs: &[BranchRun]) -> Vec<SheetSummary> {
    let mut out = Vec::new();
    for n in 0..=cfg.max_sheet {
        let mut summary = SheetSummary {
            sheet: n,
            dimension: SetDimension::Empty,
            best_value: None,
            points_found: 0,
            manifold_samples: 0,
            discarded_not_posdef: 0,
            notes: Vec::new(),
        };
        for run in branch_runs {
            let set = &run.sets[n as usize];
            summary.dimension = merge_dimension(summary.dimension, set.dimension);
            summary.points_found += set.points.len();
            summary.manifold_samples += set.samples.len();
            summary.discarded_not_posdef += set.discarded_not_posdef;
            summary.notes.extend(set.notes.iter().cloned());
            let set_best = set
                .points
                .iter()
                .map(|p| p.f_value)
                .chain(set.samples.iter().map(|(_, v)| *v))
                .fold(f64::INFINITY, f64::min);
            if set_best.is_finite() {
                summary.best_value = Some(match summary.best_value {
                    Some(b) => b.min(set_best),
                    None => set_best,
                });
            }
        }
        out.push(summary);
    }
    out
}

fn merge_dimension(a: SetDimension, b: SetDimension) -> SetDimension {
    let order = |d: SetDimension| match d {
        SetDimension::Empty => 0,
        SetDimension::Dim0 => 1,
        SetDimension::Dim1 => 2,
        SetDimension::Dim2 => 3,
    };
    if order(b) > order(a) { b } else { a }
}

fn check_sheet_monotonicity(sheets: &[SheetSummary], notes: &mut Vec<String>) {
    let mins: Vec<(u32, f64)> =
        sheets.iter().filter_map(|s| s.best_value.map(|v| (s.sheet, v))).collect();
    let mut monotone = true;
    for pair in mins.windows(2) {
        if pair[1].1 < pair[0].1 - 1e-12 * (1.0 + pair[0].1.abs()) {
            monotone = false;
            notes.push(format!(
                "sheet minima are not monotone: sheet {} has {} < sheet {}'s {}",
                pair[1].0, pair[1].1, pair[0].0, pair[0].1
            ));
        }
    }
    if monotone && mins.len() > 1 {
        notes.push("per-sheet minima are non-decreasing in the sheet index".into());
    }
}

/// Harvest candidates from a set; when f is not constant along a DIM1/DIM2
/// manifold, descend along the manifold to refine its minimum.
fn collect_candidates(
    pinned: &Functional,
    set: &ExtremalSet,
    branch: Option<AbsBranch>,
    cfg: &CertifyConfig,
    out: &mut Vec<Candidate>,
    notes: &mut Vec<String>,
) {
    let mut values: Vec<f64> = Vec::new();
    for p in &set.points {
        out.push(Candidate {
            branch,
            sheet: set.sheet,
            moments: p.moments,
            value: p.f_value,
        });
        values.push(p.f_value);
    }
    for (m, v) in &set.samples {
        out.push(Candidate { branch, sheet: set.sheet, moments: *m, value: *v });
        values.push(*v);
    }
    if matches!(set.dimension, SetDimension::Dim1 | SetDimension::Dim2) && values.len() > 1 {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > tol::MANIFOLD_CONST_TOL * (1.0 + lo.abs()) {
            notes.push(format!(
                "sheet {}: functional varies along the extremal manifold (spread {:.3e}); refining its minimum by tangent descent",
                set.sheet.0,
                hi - lo
            ));
            let start = out
                .iter()
                .filter(|c| c.sheet == set.sheet && c.branch == branch)
                .min_by(|a, b| a.value.total_cmp(&b.value))
                .map(|c| c.moments)
                .expect("values nonempty implies candidates exist");
            if let Some(c) = descend_manifold(pinned, start, set.sheet, branch, cfg) {
                out.push(c);
            }
        } else {
            notes.push(format!(
                "sheet {}: functional is constant along the extremal manifold to {:.1e}",
                set.sheet.0,
                tol::MANIFOLD_CONST_TOL
            ));
        }
    }
}

/// Pattern search along the manifold tangent with projection back onto the
/// solution set.
fn descend_manifold(
    pinned: &Functional,
    start: Moments3,
    sheet: SheetIndex,
    branch: Option<AbsBranch>,
    cfg: &CertifyConfig,
) -> Option<Candidate> {
    let e_n = sheet.energy(cfg.hbar);
    let mut m = start;
    let mut value = pinned.evaluate(&m).ok()?;
    let mut h = cfg.solver.continuation_step * e_n;
    for _ in 0..200 {
        if h < 1e-9 * e_n {
            break;
        }
        let Some(t) = solver::manifold_tangent(pinned, &m, sheet, cfg.hbar) else {
            break;
        };
        let mut moved = false;
        for dir in [1.0, -1.0] {
            let trial = Moments3::new(m.x + dir * h * t.x, m.y + dir * h * t.y, m.w + dir * h * t.z);
            let Some((proj, _)) =
                solver::project_onto_manifold(pinned, &trial, sheet, &cfg.solver, cfg.hbar)
            else {
                continue;
            };
            if let Some(br) = branch {
                if !br.admits(proj.w, e_n) {
                    continue;
                }
            }
            let Ok(v) = pinned.evaluate(&proj) else { continue };
            if v < value - 1e-14 * (1.0 + value.abs()) {
                m = proj;
                value = v;
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    Some(Candidate { branch, sheet, moments: m, value })
}

/// Global best candidate with a vertex-proximity tie-break so flat
/// manifolds report their most symmetric representative.
fn best_candidate(candidates: &[Candidate], cfg: &CertifyConfig) -> Option<Candidate> {
    let min_value = candidates.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    if !min_value.is_finite() {
        return None;
    }
    let tie = 1e-10 * (1.0 + min_value.abs());
    candidates
        .iter()
        .filter(|c| c.value <= min_value + tie)
        .min_by(|a, b| {
            let va = vertex_distance(a, cfg);
            let vb = vertex_distance(b, cfg);
            va.total_cmp(&vb)
        })
        .cloned()
}

fn vertex_distance(c: &Candidate, cfg: &CertifyConfig) -> f64 {
    let e = c.sheet.energy(cfg.hbar);
    c.moments.distance(&Moments3::new(e, e, 0.0))
}

/// Probe rays: deterministic descent paths through the admissible region.
/// Returns only rays along which the functional is finite and strictly
/// decreasing at every one of the `ray_points` samples.
fn run_probe_rays(f: &Functional, cfg: &CertifyConfig) -> Vec<WitnessSequence> {
    let n0 = SheetIndex(0);
    let hbar = cfg.hbar;
    let k = cfg.ray_points.max(3);

    let geom = move |a: f64, b: f64, i: usize| a * (b / a).powf(i as f64 / (k - 1) as f64);
    type Ray = (&'static str, Box<dyn Fn(usize) -> Moments3>);
    let sq = move |b: f64, g: f64| squeezed_moments(n0, &SqueezeParams { b, gamma: g }, hbar);
    // Scale rays run to gamma = 18 (no cancellation: each moment is a
    // single exponential); shear-squeeze rays stop at gamma = 6 because
    // their functional values are small differences of e^{2 gamma}-sized
    // moments and deeper samples would drown in rounding noise.
    let rays: Vec<Ray> = vec![
        ("gamma+", Box::new(move |i| sq(0.0, geom(0.25, 18.0, i)))),
        ("gamma-", Box::new(move |i| sq(0.0, -geom(0.25, 18.0, i)))),
        ("b+", Box::new(move |i| sq(geom(0.25, 1e4, i), 0.0))),
        ("b-", Box::new(move |i| sq(-geom(0.25, 1e4, i), 0.0))),
        ("u-axis", {
            let h2 = hbar;
            Box::new(move |i| {
                let t = h2 * geom(1.0, 1e8, i);
                Moments3::new(t, t, 0.0)
            })
        }),
        ("shear-", {
            let h2 = hbar;
            Box::new(move |i| {
                let t = geom(0.75, 1e8, i);
                Moments3::new(h2 * t, h2 * t, -h2 * (t - 1.0))
            })
        }),
        ("shear+", {
            let h2 = hbar;
            Box::new(move |i| {
                let t = geom(0.75, 1e8, i);
                Moments3::new(h2 * t, h2 * t, h2 * (t - 1.0))
            })
        }),
        ("rsqueeze+", Box::new(move |i| sq(1.0, geom(0.25, 6.0, i)))),
        ("rsqueeze-", Box::new(move |i| sq(-1.0, geom(0.25, 6.0, i)))),
    ];

    let mut witnesses = Vec::new();
    for (name, ray) in rays {
        let mut values = Vec::with_capacity(k);
        let mut moments = Vec::with_capacity(k);
        let mut ok = true;
        // A ray whose evaluation stops mid-run (overflow or a domain edge)
        // can still witness divergence, but only on the strength of its
        // finite prefix: producing -inf outright is conclusive, and an
        // evaluation error is accepted only when the prefix already shows
        // a full window of non-contracting decrements reaching below
        // DEEP_DESCENT. Everything else invalidates the ray.
        let mut conclusive_overflow = false;
        let mut truncated_by_error = false;
        for i in 0..k {
            let m = ray(i);
            match f.evaluate(&m) {
                Ok(v) if v.is_finite() => {
                    if let Some(prev) = values.last() {
                        if v >= *prev {
                            ok = false;
                            break;
                        }
                    }
                    values.push(v);
                    moments.push(m);
                }
                Ok(v) if v == f64::NEG_INFINITY && values.len() >= 4 => {
                    conclusive_overflow = true;
                    break;
                }
                _ => {
                    truncated_by_error = values.len() >= 12;
                    ok = truncated_by_error;
                    break;
                }
            }
        }
        if !ok || (values.len() < k && !(conclusive_overflow || truncated_by_error)) {
            continue;
        }
        let (tail_ratio, divergent) = classify_tail(&values);
        let divergent = if conclusive_overflow {
            true
        } else if truncated_by_error {
            divergent && *values.last().unwrap() <= tol::DEEP_DESCENT
        } else {
            divergent
        };
        if truncated_by_error && !divergent {
            continue;
        }
        witnesses.push(WitnessSequence {
            ray: name.to_string(),
            values,
            moments,
            tail_ratio,
            divergent,
        });
    }
    witnesses
}

/// Convergence heuristic on a strictly decreasing sequence sampled along a
/// geometrically growing parameter: the geometric-mean ratio of the last
/// ten decrements is < 1 for power-law or exponential approach to a finite
/// limit and >= 1 for (even logarithmically) divergent descent. The cut is
/// placed at 0.98 to absorb rounding.
fn classify_tail(values: &[f64]) -> (f64, bool) {
    let n = values.len();
    let take = 11.min(n);
    let tail = &values[n - take..];
    let mut ratios = Vec::new();
    for i in 0..tail.len().saturating_sub(2) {
        let d0 = tail[i] - tail[i + 1];
        let d1 = tail[i + 1] - tail[i + 2];
        if d0 > 0.0 && d1 > 0.0 {
            ratios.push(d1 / d0);
        }
    }
    if ratios.is_empty() {
        return (1.0, true);
    }
    let log_mean = ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64;
    let ratio = log_mean.exp();
    (ratio, ratio >= 0.98)
}

fn pick_witness<'a>(ws: &[&'a WitnessSequence]) -> Option<&'a WitnessSequence> {
    // Prefer divergent witnesses (stronger claim), then the lowest final
    // value.
    if let Some(w) = ws
        .iter()
        .filter(|w| w.divergent)
        .min_by(|a, b| a.values.last().unwrap().total_cmp(b.values.last().unwrap()))
    {
        return Some(w);
    }
    ws.iter()
        .min_by(|a, b| a.values.last().unwrap().total_cmp(b.values.last().unwrap()))
        .copied()
}

/// Geometric extrapolation of a convergent tail to its limit.
fn extrapolate_limit(w: &WitnessSequence) -> f64 {
    let n = w.values.len();
    let last = w.values[n - 1];
    let d = w.values[n - 2] - last;
    let r = w.tail_ratio;
    if r > 0.0 && r < 1.0 {
        last - d * r / (1.0 - r)
    } else {
        last
    }
}

/// Reconstruct (b, γ) and (r, θ, χ) at the winning candidate and verify
/// the squeezed-moment fixed point; a mismatch downgrades the verdict.
fn attach_minimizer_params(
    runs: &[(Option<AbsBranch>, Functional)],
    best: &Candidate,
    cfg: &CertifyConfig,
    report: &mut BoundReport,
) {
    let pinned = runs
        .iter()
        .find(|(b, _)| *b == best.branch)
        .map(|(_, p)| p)
        .expect("winning candidate has a matching branch");
    let grad = match pinned.gradient(&best.moments) {
        Ok(g) => g,
        Err(e) => {
            report.verdict = Verdict::Inconclusive;
            report.notes.push(format!("gradient unavailable at the minimizer: {e}"));
            return;
        }
    };
    let fmat = FMatrix::from_gradient(&grad);
    let (squeeze, _c) = match williamson_params(&fmat) {
        Ok(v) => v,
        Err(e) => {
            report.verdict = Verdict::Inconclusive;
            report.notes.push(format!("minimizer curvature not decomposable: {e}"));
            return;
        }
    };
    let reconstructed = squeezed_moments(best.sheet, &squeeze, cfg.hbar);
    let err = reconstructed.distance(&best.moments) / (1.0 + best.moments.norm());
    let complex = bch_convert(&squeeze);
    report.minimizer = Some(MinimizerInfo {
        sheet: best.sheet.0,
        moments: best.moments,
        uvw: best.moments.to_uvw(),
        squeeze,
        complex,
        fixed_point_error: err,
    });
    if err > tol::FIXED_POINT_TOL {
        report.verdict = Verdict::Inconclusive;
        report.notes.push(format!(
            "fixed-point check failed: squeezed moments from the minimizer's own gradient differ by relative {err:.3e}"
        ));
    } else {
        report
            .notes
            .push("minimizer gamma follows the convention x = e_n * exp(2*gamma)".into());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn certify_src(src: &str) -> BoundReport {
        let f = Functional::parse_simple(src).unwrap();
        certify(&f, &CertifyConfig::default())
    }

    fn quick(src: &str) -> BoundReport {
        // Two sheets keep the slower negative cases fast.
        let f = Functional::parse_simple(src).unwrap();
        let cfg = CertifyConfig { max_sheet: 1, ..Default::default() };
        certify(&f, &cfg)
    }

    #[test]
    fn geometric_mean_is_bounded_by_half() {
        let r = certify_src("sqrt(x*y)");
        assert_eq!(r.verdict, Verdict::Bounded);
        assert_relative_eq!(r.bound.unwrap(), 0.5, max_relative = 1e-10);
        let m = r.minimizer.unwrap();
        assert_eq!(m.sheet, 0);
        assert_relative_eq!(m.moments.x, 0.5, max_relative = 1e-8);
        assert_relative_eq!(m.moments.y, 0.5, max_relative = 1e-8);
        assert!(m.moments.w.abs() < 1e-8);
        assert!(m.squeeze.b.abs() < 1e-7);
        assert!(m.squeeze.gamma.abs() < 1e-7);
        assert!(m.fixed_point_error < 1e-8);
        assert_eq!(r.sheets[0].dimension, SetDimension::Dim1);
    }

    #[test]
    fn covariance_product_bound_is_quarter() {
        let r = certify_src("x*y - w^2");
        assert_eq!(r.verdict, Verdict::Bounded);
        assert_relative_eq!(r.bound.unwrap(), 0.25, max_relative = 1e-10);
        assert_eq!(r.sheets[0].dimension, SetDimension::Dim2);
        let m = r.minimizer.unwrap();
        assert_relative_eq!(m.moments.x, 0.5, max_relative = 1e-8);
        assert_relative_eq!(m.moments.y, 0.5, max_relative = 1e-8);
    }

    #[test]
    fn variance_sum_bound_is_one() {
        let r = certify_src("x + y");
        assert_eq!(r.verdict, Verdict::Bounded);
        assert_relative_eq!(r.bound.unwrap(), 1.0, max_relative = 1e-10);
        let m = r.minimizer.unwrap();
        assert_relative_eq!(m.moments.x, 0.5, max_relative = 1e-8);
        assert_relative_eq!(m.moments.y, 0.5, max_relative = 1e-8);
    }

    #[test]
    fn triple_product_bound_and_minimizer() {
        let r = certify_src("x*y*z");
        assert_eq!(r.verdict, Verdict::Bounded);
        assert_relative_eq!(r.bound.unwrap(), 3.0f64.powf(-1.5), max_relative = 1e-9);
        let m = r.minimizer.unwrap();
        let s3 = 3.0f64.sqrt();
        assert_eq!(m.sheet, 0);
        assert_relative_eq!(m.moments.x, 1.0 / s3, max_relative = 1e-8);
        assert_relative_eq!(m.moments.y, 1.0 / s3, max_relative = 1e-8);
        assert_relative_eq!(m.moments.w, -0.5 / s3, max_relative = 1e-8);
        assert_relative_eq!(m.squeeze.b, 0.5, max_relative = 1e-8);
        assert_relative_eq!(m.squeeze.gamma, 0.25 * (4.0f64 / 3.0).ln(), max_relative = 1e-7);
        assert_eq!(r.sheets[0].dimension, SetDimension::Dim0);
        assert!(m.fixed_point_error < 1e-8);
    }

    #[test]
    fn ratio_functional_infimum_is_not_attained() {
        let r = quick("sqrt(x)*sqrt(y)/(sqrt(x) + sqrt(y))");
        assert_eq!(r.verdict, Verdict::InfimumNotAttained);
        let w = r.witness.unwrap();
        for pair in w.values.windows(2) {
            assert!(pair[1] < pair[0]);
        }
        assert!(*w.values.last().unwrap() < 1e-6);
        assert!(r.bound.unwrap().abs() < 1e-6);
    }

    #[test]
    fn indefinite_linear_form_is_unbounded() {
        let r = quick("x + y + 4*w");
        assert_eq!(r.verdict, Verdict::Unbounded);
        let w = r.witness.unwrap();
        assert!(w.divergent);
        for pair in w.values.windows(2) {
            assert!(pair[1] < pair[0]);
        }
        assert!(*w.values.last().unwrap() < -1e6);
    }

    #[test]
    fn boundary_linear_form_approaches_zero() {
        let r = quick("x + y + 2*w");
        assert_eq!(r.verdict, Verdict::InfimumNotAttained);
        assert!(r.bound.unwrap().abs() < 1e-5);
    }

    #[test]
    fn negated_geometric_mean_is_unbounded() {
        let r = quick("0 - sqrt(x*y)");
        assert_eq!(r.verdict, Verdict::Unbounded);
        assert!(r.witness.is_some());
    }

    #[test]
    fn squared_difference_is_inconclusive() {
        let r = quick("(x - y)^2");
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let discarded: usize = r.sheets.iter().map(|s| s.discarded_not_posdef).sum();
        assert!(discarded > 0);
    }

    #[test]
    fn exponential_descent_that_overflows_is_still_unbounded() {
        // exp overflows f64 long before the probe rays end; the strictly
        // decreasing finite prefix must still be accepted as a divergence
        // witness.
        let r = quick("x - exp(y)");
        assert_eq!(r.verdict, Verdict::Unbounded);
        let w = r.witness.expect("divergence witness");
        assert!(w.divergent);
        assert!(*w.values.last().unwrap() <= tol::DEEP_DESCENT);
    }

    #[test]
    fn bounded_descent_into_a_domain_edge_is_not_misread_as_divergent() {
        // Along the ray that shrinks x while growing y this decreases
        // strictly for dozens of samples and then dies on sqrt of a
        // negative number, yet its infimum is finite (0.1, at the
        // uncertainty-saturating x for y = 25). The truncated prefix must
        // not be promoted to a divergence witness.
        let r = quick("sqrt(x) + sqrt(25 - y)");
        assert_ne!(r.verdict, Verdict::Unbounded);
    }

    #[test]
    fn bare_variance_infimum_is_zero() {
        let r = quick("x");
        assert_eq!(r.verdict, Verdict::InfimumNotAttained);
        assert!(r.bound.unwrap().abs() < 1e-6);
    }

    #[test]
    fn kinked_covariance_bound() {
        let r = certify_src("sqrt(x*y) - 0.5*abs(w)");
        assert_eq!(r.verdict, Verdict::Bounded);
        assert_relative_eq!(r.bound.unwrap(), 0.75f64.sqrt() / 2.0, max_relative = 1e-8);
        let m = r.minimizer.unwrap();
        assert!(m.fixed_point_error < 1e-8);
        // The minimizing family has |w| = sqrt(x y)/2 on either sign branch.
        assert_relative_eq!(
            m.moments.w.abs(),
            0.5 * (m.moments.x * m.moments.y).sqrt(),
            max_relative = 1e-7
        );
    }

    #[test]
    fn sheet_minima_are_monotone_for_sum() {
        let r = certify_src("x + y");
        let mins: Vec<f64> = r.sheets.iter().filter_map(|s| s.best_value).collect();
        assert_eq!(mins.len(), 6);
        for (n, v) in mins.iter().enumerate() {
            assert_relative_eq!(*v, 2.0 * (n as f64 + 0.5), max_relative = 1e-8);
        }
        assert!(r.notes.iter().any(|s| s.contains("non-decreasing")));
    }
}
