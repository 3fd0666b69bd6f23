//! Built-in functional catalog.
//!
//! Each entry names a functional family, builds its expression source
//! from a parameter map, and knows what certification should produce:
//! either a closed-form bound or a set of acceptable verdicts. Running
//! an entry certifies the built functional and compares.

use std::collections::BTreeMap;

use crate::certify::{certify, BoundReport, CertifyConfig, Verdict};
use crate::expr::{ExprError, Functional};
use crate::geometry::Moments3;
use crate::special::lambert_w;
use crate::tol;

/// Entry names, in listing order.
pub const NAMES: [&str; 13] = [
    "heisenberg",
    "pair_sum",
    "rs",
    "triple_product",
    "triple_sum",
    "linear",
    "power_sum",
    "gen_rs",
    "mod_rs",
    "exponential",
    "rational",
    "s3_poly",
    "s2_func",
];

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown catalog entry '{0}'")]
    UnknownEntry(String),
    #[error("parameter problem in entry '{entry}': {detail}")]
    BadParam { entry: String, detail: String },
    #[error("expression problem: {0}")]
    Expr(#[from] ExprError),
}

/// What certification of an entry is expected to produce.
#[derive(Debug, Clone)]
pub enum Expectation {
    /// A certified bound with this closed-form value.
    Bound(f64),
    /// One of these verdicts (entries without an attained bound).
    Verdicts(Vec<Verdict>),
}

/// Result of certifying one catalog entry against its expectation.
#[derive(Debug, Clone)]
pub struct CatalogRun {
    pub name: String,
    pub source: String,
    pub params: BTreeMap<String, f64>,
    pub hbar: f64,
    pub report: BoundReport,
    pub expectation: Expectation,
    pub matched: bool,
    pub detail: String,
}

/// One-line description of each entry.
pub fn describe(name: &str) -> Option<&'static str> {
    let d = match name {
        "heisenberg" => "geometric mean of the variances, sqrt(x*y)",
        "pair_sum" => "sum of the variances, x + y",
        "rs" => "covariance-corrected product, x*y - w^2",
        "triple_product" => "product of the three variances, x*y*z",
        "triple_sum" => "sum of the three variances, x + y + z",
        "linear" => "general linear form, mu*x + nu*y + 2*lambda*w",
        "power_sum" => "weighted powers, mu*x^m + nu*y^mp",
        "gen_rs" => "generalized covariance product, (x*y)^m - mu*w^(2m)",
        "mod_rs" => "kinked covariance product, sqrt(x*y) - mu*abs(w)",
        "exponential" => "variance against an exponential, x + mu*exp(y/nu)",
        "rational" => "ratio form, sqrt(x)*sqrt(y)/(mu*sqrt(x)+nu*sqrt(y))",
        "s3_poly" => "polynomial symmetric under permuting (x, y, z)",
        "s2_func" => "polynomial symmetric under swapping (x, y)",
        _ => return None,
    };
    Some(d)
}

/// Default parameter bindings for an entry.
pub fn default_params(name: &str) -> Result<BTreeMap<String, f64>, CatalogError> {
    let pairs: &[(&str, f64)] = match name {
        "heisenberg" | "pair_sum" | "rs" | "triple_product" | "triple_sum" => &[],
        "linear" => &[("mu", 1.0), ("nu", 1.0), ("lambda", 0.5)],
        "power_sum" => &[("mu", 1.0), ("nu", 1.0), ("m", 1.0), ("mp", 1.0)],
        "gen_rs" => &[("mu", 2.0), ("m", 2.0)],
        "mod_rs" => &[("mu", 0.5)],
        "exponential" => &[("mu", 1.0), ("nu", 1.0)],
        "rational" => &[("mu", 1.0), ("nu", 1.0)],
        "s3_poly" => &[("a100", 1.0), ("a111", 1.0)],
        "s2_func" => &[("a10", 1.0), ("a11", 1.0)],
        _ => return Err(CatalogError::UnknownEntry(name.into())),
    };
    Ok(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
}

fn bad(entry: &str, detail: impl Into<String>) -> CatalogError {
    CatalogError::BadParam { entry: entry.into(), detail: detail.into() }
}

fn get(entry: &str, params: &BTreeMap<String, f64>, key: &str) -> Result<f64, CatalogError> {
    params.get(key).copied().ok_or_else(|| bad(entry, format!("missing parameter '{key}'")))
}

fn get_positive(
    entry: &str,
    params: &BTreeMap<String, f64>,
    key: &str,
) -> Result<f64, CatalogError> {
    let v = get(entry, params, key)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(bad(entry, format!("parameter '{key}' must be positive, got {v}")));
    }
    Ok(v)
}

fn get_integer(
    entry: &str,
    params: &BTreeMap<String, f64>,
    key: &str,
    min: i64,
) -> Result<i64, CatalogError> {
    let v = get(entry, params, key)?;
    let r = v.round();
    if !(v.is_finite() && (v - r).abs() < 1e-9 && r >= min as f64 && r <= 9.0) {
        return Err(bad(
            entry,
            format!("parameter '{key}' must be an integer in {min}..=9, got {v}"),
        ));
    }
    Ok(r as i64)
}

fn check_keys(
    entry: &str,
    params: &BTreeMap<String, f64>,
    allowed: &[&str],
) -> Result<(), CatalogError> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(bad(entry, format!("unknown parameter '{k}'")));
        }
    }
    Ok(())
}

/// Coefficient classes for the permutation-symmetric entries: keys like
/// `a210` (three sorted exponents) or `a21` (two sorted exponents).
fn symmetric_classes(
    entry: &str,
    params: &BTreeMap<String, f64>,
    arity: usize,
) -> Result<Vec<(Vec<u32>, f64)>, CatalogError> {
    let mut classes = Vec::new();
    let mut any_positive = false;
    for (k, v) in params {
        let digits: Option<Vec<u32>> =
            k.strip_prefix('a').map(|d| d.chars().filter_map(|c| c.to_digit(10)).collect());
        let Some(digits) = digits else {
            return Err(bad(entry, format!("unknown parameter '{k}'")));
        };
        if digits.len() != arity || k.len() != arity + 1 {
            return Err(bad(
                entry,
                format!("coefficient key '{k}' must be 'a' followed by {arity} digits"),
            ));
        }
        if digits.windows(2).any(|p| p[0] < p[1]) {
            return Err(bad(
                entry,
                format!("coefficient key '{k}' must have non-increasing exponents"),
            ));
        }
        if !(v.is_finite() && *v >= 0.0) {
            return Err(bad(entry, format!("coefficient '{k}' must be non-negative, got {v}")));
        }
        if *v > 0.0 && digits.iter().any(|d| *d > 0) {
            any_positive = true;
        }
        if *v != 0.0 {
            classes.push((digits, *v));
        }
    }
    if !any_positive {
        return Err(bad(entry, "need at least one positive non-constant coefficient"));
    }
    Ok(classes)
}

fn unique_permutations(exps: &[u32]) -> Vec<Vec<u32>> {
    let mut scratch = exps.to_vec();
    let mut all = Vec::new();
    permute(&mut scratch, 0, &mut all);
    all.sort();
    all.dedup();
    all
}

fn permute(v: &mut Vec<u32>, start: usize, out: &mut Vec<Vec<u32>>) {
    if start == v.len() {
        out.push(v.clone());
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permute(v, start + 1, out);
        v.swap(start, i);
    }
}

fn monomial(vars: &[&str], exps: &[u32]) -> String {
    let mut parts = Vec::new();
    for (var, e) in vars.iter().zip(exps) {
        match e {
            0 => {}
            1 => parts.push((*var).to_string()),
            _ => parts.push(format!("{var}^{e}")),
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

fn symmetric_source(classes: &[(Vec<u32>, f64)], vars: &[&str]) -> String {
    let mut terms = Vec::new();
    for (exps, coeff) in classes {
        for perm in unique_permutations(exps) {
            terms.push(format!("{coeff:?}*{}", monomial(vars, &perm)));
        }
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

/// Build the expression source for an entry at given parameters.
pub fn build_source(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<String, CatalogError> {
    let src = match name {
        "heisenberg" => {
            check_keys(name, params, &[])?;
            "sqrt(x*y)".to_string()
        }
        "pair_sum" => {
            check_keys(name, params, &[])?;
            "x + y".to_string()
        }
        "rs" => {
            check_keys(name, params, &[])?;
            "x*y - w^2".to_string()
        }
        "triple_product" => {
            check_keys(name, params, &[])?;
            "x*y*z".to_string()
        }
        "triple_sum" => {
            check_keys(name, params, &[])?;
            "x + y + z".to_string()
        }
        "linear" => {
            check_keys(name, params, &["mu", "nu", "lambda"])?;
            get_positive(name, params, "mu")?;
            get_positive(name, params, "nu")?;
            get(name, params, "lambda")?;
            "mu*x + nu*y + 2*lambda*w".to_string()
        }
        "power_sum" => {
            check_keys(name, params, &["mu", "nu", "m", "mp"])?;
            get_positive(name, params, "mu")?;
            get_positive(name, params, "nu")?;
            let m = get_integer(name, params, "m", 1)?;
            let mp = get_integer(name, params, "mp", 1)?;
            format!("mu*x^{m} + nu*y^{mp}")
        }
        "gen_rs" => {
            check_keys(name, params, &["mu", "m"])?;
            get_positive(name, params, "mu")?;
            let m = get_integer(name, params, "m", 1)?;
            format!("(x*y)^{m} - mu*w^{}", 2 * m)
        }
        "mod_rs" => {
            check_keys(name, params, &["mu"])?;
            let mu = get(name, params, "mu")?;
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(bad(name, format!("parameter 'mu' must be non-negative, got {mu}")));
            }
            "sqrt(x*y) - mu*abs(w)".to_string()
        }
        "exponential" => {
            check_keys(name, params, &["mu", "nu"])?;
            get_positive(name, params, "mu")?;
            get_positive(name, params, "nu")?;
            "x + mu*exp(y/nu)".to_string()
        }
        "rational" => {
            check_keys(name, params, &["mu", "nu"])?;
            get_positive(name, params, "mu")?;
            get_positive(name, params, "nu")?;
            "sqrt(x)*sqrt(y)/(mu*sqrt(x) + nu*sqrt(y))".to_string()
        }
        "s3_poly" => {
            let classes = symmetric_classes(name, params, 3)?;
            symmetric_source(&classes, &["x", "y", "z"])
        }
        "s2_func" => {
            // Class (j, k) contributes x^j y^k plus its mirror when j != k.
            let classes = symmetric_classes(name, params, 2)?;
            symmetric_source(&classes, &["x", "y"])
        }
        _ => return Err(CatalogError::UnknownEntry(name.into())),
    };
    Ok(src)
}

/// Closed-form expectation of an entry at given parameters.
pub fn expectation(
    name: &str,
    params: &BTreeMap<String, f64>,
    hbar: f64,
) -> Result<Expectation, CatalogError> {
    use Verdict::*;
    let e = match name {
        "heisenberg" => Expectation::Bound(hbar / 2.0),
        "pair_sum" => Expectation::Bound(hbar),
        "rs" => Expectation::Bound(hbar * hbar / 4.0),
        "triple_product" => Expectation::Bound((hbar / 3.0f64.sqrt()).powi(3)),
        "triple_sum" => Expectation::Bound(3.0f64.sqrt() * hbar),
        "linear" => {
            let mu = get_positive(name, params, "mu")?;
            let nu = get_positive(name, params, "nu")?;
            let lambda = get(name, params, "lambda")?;
            let det = mu * nu - lambda * lambda;
            if det > 0.0 {
                Expectation::Bound(hbar * det.sqrt())
            } else if det == 0.0 {
                Expectation::Verdicts(vec![InfimumNotAttained, Inconclusive])
            } else {
                Expectation::Verdicts(vec![Unbounded])
            }
        }
        "power_sum" => {
            let mu = get_positive(name, params, "mu")?;
            let nu = get_positive(name, params, "nu")?;
            let m = get_integer(name, params, "m", 1)? as f64;
            let mp = get_integer(name, params, "mp", 1)? as f64;
            let base = (hbar / 2.0).powf(2.0 * m * mp / (m + mp));
            let term_a = mu * ((nu * mp) / (mu * m)).powf(m / (m + mp));
            let term_b = nu * ((mu * m) / (nu * mp)).powf(mp / (m + mp));
            Expectation::Bound(base * (term_a + term_b))
        }
        "gen_rs" => {
            // For mu <= 1 the covariance term cannot overcome the product
            // term and the minimum sits at w = 0 on the lowest sheet; for
            // mu > 1 squeezed states drive the functional to -infinity.
            let mu = get_positive(name, params, "mu")?;
            let m = get_integer(name, params, "m", 1)?;
            if mu <= 1.0 {
                Expectation::Bound((hbar / 2.0).powi(2 * m as i32))
            } else {
                Expectation::Verdicts(vec![Unbounded])
            }
        }
        "mod_rs" => {
            let mu = get(name, params, "mu")?;
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(bad(name, format!("parameter 'mu' must be non-negative, got {mu}")));
            }
            if mu < 1.0 {
                Expectation::Bound(hbar / 2.0 * (1.0 - mu * mu).sqrt())
            } else if mu == 1.0 {
                Expectation::Verdicts(vec![InfimumNotAttained])
            } else {
                Expectation::Verdicts(vec![Unbounded])
            }
        }
        "exponential" => {
            let mu = get_positive(name, params, "mu")?;
            let nu = get_positive(name, params, "nu")?;
            // Stationarity of x + mu*exp(y/nu) on x*y = (hbar/2)^2 reads
            // u^2 e^u = hbar^2/(4 mu nu) with u = y/nu, so u = 2 W0(s)
            // with s linear (not quadratic) in hbar.
            let s = hbar / (4.0 * (mu * nu).sqrt());
            let w = lambert_w(s).map_err(|e| bad(name, format!("Lambert evaluation: {e}")))?;
            Expectation::Bound(mu * (1.0 + 2.0 * w) * (2.0 * w).exp())
        }
        "rational" => {
            get_positive(name, params, "mu")?;
            get_positive(name, params, "nu")?;
            Expectation::Verdicts(vec![InfimumNotAttained])
        }
        "s3_poly" => {
            let t = hbar / 3.0f64.sqrt();
            Expectation::Bound(eval_at(name, params, Moments3::new(t, t, -0.5 * t))?)
        }
        "s2_func" => {
            let e = hbar / 2.0;
            Expectation::Bound(eval_at(name, params, Moments3::new(e, e, 0.0))?)
        }
        _ => return Err(CatalogError::UnknownEntry(name.into())),
    };
    Ok(e)
}

fn eval_at(
    name: &str,
    params: &BTreeMap<String, f64>,
    m: Moments3,
) -> Result<f64, CatalogError> {
    let src = build_source(name, params)?;
    let f = Functional::parse(&src, params)?;
    f.evaluate(&m).map_err(CatalogError::Expr)
}

/// Merge defaults with overrides (overrides win). For the symmetric
/// entries an override map replaces the default coefficient set.
pub fn resolve_params(
    name: &str,
    overrides: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>, CatalogError> {
    let mut params = if matches!(name, "s3_poly" | "s2_func") && !overrides.is_empty() {
        BTreeMap::new()
    } else {
        default_params(name)?
    };
    for (k, v) in overrides {
        params.insert(k.clone(), *v);
    }
    Ok(params)
}

/// Certify one entry and compare with its expectation.
pub fn run(
    name: &str,
    overrides: &BTreeMap<String, f64>,
    cfg: &CertifyConfig,
) -> Result<CatalogRun, CatalogError> {
    let params = resolve_params(name, overrides)?;
    let source = build_source(name, &params)?;
    let expect = expectation(name, &params, cfg.hbar)?;
    let f = Functional::parse(&source, &params)?;
    let report = certify(&f, cfg);
    let (matched, detail) = match &expect {
        Expectation::Bound(v) => match (report.verdict, report.bound) {
            (Verdict::Bounded, Some(b)) => {
                let err = (b - v).abs() / (1.0 + v.abs());
                if err <= tol::BOUND_MATCH_REL {
                    (true, format!("bound {b:.12e} matches closed form {v:.12e}"))
                } else {
                    (
                        false,
                        format!(
                            "bound {b:.12e} differs from closed form {v:.12e} (relative {err:.3e})"
                        ),
                    )
                }
            }
            _ => (
                false,
                format!("expected a bound near {v:.12e}, got verdict {}", report.verdict),
            ),
        },
        Expectation::Verdicts(vs) => {
            if vs.contains(&report.verdict) {
                (true, format!("verdict {} is among the expected outcomes", report.verdict))
            } else {
                let names: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                (
                    false,
                    format!(
                        "verdict {} not among expected [{}]",
                        report.verdict,
                        names.join(", ")
                    ),
                )
            }
        }
    };
    Ok(CatalogRun {
        name: name.to_string(),
        source,
        params,
        hbar: cfg.hbar,
        report,
        expectation: expect,
        matched,
        detail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn defaults(name: &str) -> BTreeMap<String, f64> {
        default_params(name).unwrap()
    }

    #[test]
    fn listing_is_complete_and_described() {
        for name in NAMES {
            assert!(describe(name).is_some(), "{name} lacks a description");
            assert!(default_params(name).is_ok());
            let p = defaults(name);
            assert!(build_source(name, &p).is_ok(), "{name} source");
            assert!(expectation(name, &p, 1.0).is_ok(), "{name} expectation");
        }
        assert!(describe("nope").is_none());
        assert!(matches!(
            build_source("nope", &BTreeMap::new()),
            Err(CatalogError::UnknownEntry(_))
        ));
    }

    #[test]
    fn closed_forms_at_unit_hbar() {
        let cases = [
            ("heisenberg", 0.5),
            ("pair_sum", 1.0),
            ("rs", 0.25),
            ("triple_product", 0.19245008972987526),
            ("triple_sum", 1.7320508075688772),
            ("linear", 0.8660254037844386),
            ("power_sum", 1.0),
            ("mod_rs", 0.4330127018922193),
            ("s3_poly", 1.9245008972987525),
            ("s2_func", 1.25),
        ];
        for (name, want) in cases {
            match expectation(name, &defaults(name), 1.0).unwrap() {
                Expectation::Bound(v) => {
                    assert_relative_eq!(v, want, max_relative = 1e-12);
                }
                other => panic!("{name}: expected a bound, got {other:?}"),
            }
        }
    }

    #[test]
    fn exponential_bound_satisfies_the_defining_identity() {
        let p = defaults("exponential");
        let Expectation::Bound(v) = expectation("exponential", &p, 1.0).unwrap() else {
            panic!("expected bound");
        };
        // v = mu (1 + 2W) e^{2W} with W e^W = 1/4; recover W and check.
        let w = lambert_w(0.25).unwrap();
        assert_relative_eq!(v, (1.0 + 2.0 * w) * (2.0 * w).exp(), max_relative = 1e-14);
        assert!((w * w.exp() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn exponential_expectation_tracks_hbar() {
        // At hbar = 2 the stationarity argument is W0(1/2), not W0(1);
        // the certified bound pins which one is right.
        let p = defaults("exponential");
        let Expectation::Bound(v) = expectation("exponential", &p, 2.0).unwrap() else {
            panic!("expected bound");
        };
        let w = lambert_w(0.5).unwrap();
        assert_relative_eq!(v, (1.0 + 2.0 * w) * (2.0 * w).exp(), max_relative = 1e-14);

        let cfg = CertifyConfig { hbar: 2.0, max_sheet: 1, ..CertifyConfig::default() };
        let r = run("exponential", &BTreeMap::new(), &cfg).unwrap();
        assert!(r.matched, "{}", r.detail);
    }

    #[test]
    fn exponential_matches_linear_growth_for_large_weights() {
        for mu in [1e2, 1e4] {
            let mut p = defaults("exponential");
            p.insert("mu".into(), mu);
            p.insert("nu".into(), mu);
            let Expectation::Bound(v) = expectation("exponential", &p, 1.0).unwrap() else {
                panic!("expected bound");
            };
            assert!(
                (v - (mu + 1.0)).abs() <= 10.0 / mu,
                "mu={mu}: bound {v} vs asymptote {}",
                mu + 1.0
            );
        }
    }

    #[test]
    fn power_sum_reduces_to_pair_sum() {
        let Expectation::Bound(v) = expectation("power_sum", &defaults("power_sum"), 1.0).unwrap()
        else {
            panic!("expected bound");
        };
        assert_eq!(v, 1.0);
    }

    #[test]
    fn power_sum_closed_form_cases() {
        let case = |mu: f64, nu: f64, m: f64, mp: f64| {
            let mut p = BTreeMap::new();
            p.insert("mu".to_string(), mu);
            p.insert("nu".to_string(), nu);
            p.insert("m".to_string(), m);
            p.insert("mp".to_string(), mp);
            match expectation("power_sum", &p, 1.0).unwrap() {
                Expectation::Bound(v) => v,
                other => panic!("unexpected {other:?}"),
            }
        };
        assert_relative_eq!(case(1.0, 3.0, 2.0, 2.0), 0.75f64.sqrt(), max_relative = 1e-12);
        // mu=2, nu=1, m=2, mp=1: minimize 2x^2 + y on x y = 1/2... the
        // stationary condition gives 4 x^3 = 1/4.
        let x = 0.25f64.powf(1.0 / 3.0) / 4.0f64.powf(1.0 / 3.0);
        let expect = 2.0 * x * x + 0.25 / x;
        assert_relative_eq!(case(2.0, 1.0, 2.0, 1.0), expect, max_relative = 1e-12);
    }

    #[test]
    fn symmetric_entries_recover_their_special_cases() {
        let mut only_sum = BTreeMap::new();
        only_sum.insert("a100".to_string(), 1.0);
        let Expectation::Bound(v) = expectation("s3_poly", &only_sum, 1.0).unwrap() else {
            panic!()
        };
        assert_relative_eq!(v, 3.0f64.sqrt(), max_relative = 1e-12);

        let mut only_product = BTreeMap::new();
        only_product.insert("a111".to_string(), 1.0);
        let Expectation::Bound(v) = expectation("s3_poly", &only_product, 1.0).unwrap() else {
            panic!()
        };
        assert_relative_eq!(v, 3.0f64.powf(-1.5), max_relative = 1e-12);
    }

    #[test]
    fn symmetric_source_expansion() {
        let mut p = BTreeMap::new();
        p.insert("a210".to_string(), 1.5);
        let src = build_source("s3_poly", &p).unwrap();
        // Six distinct permutations of the exponents (2, 1, 0).
        assert_eq!(src.matches('+').count(), 5);
        assert!(src.contains("x^2*y"));
        let f = Functional::parse(&src, &p).unwrap();
        let v = f.evaluate(&Moments3::new(1.0, 1.0, -0.5)).unwrap();
        // At x = y = z = 1 the class sums to 6 * 1.5.
        assert_relative_eq!(v, 9.0, max_relative = 1e-12);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut p = defaults("linear");
        p.insert("mu".into(), -1.0);
        assert!(matches!(
            expectation("linear", &p, 1.0),
            Err(CatalogError::BadParam { .. })
        ));
        let mut p = defaults("power_sum");
        p.insert("m".into(), 2.5);
        assert!(build_source("power_sum", &p).is_err());
        let mut p = BTreeMap::new();
        p.insert("a12".to_string(), 1.0);
        assert!(build_source("s2_func", &p).is_err(), "increasing exponents must fail");
        let mut p = BTreeMap::new();
        p.insert("a00".to_string(), 1.0);
        assert!(build_source("s2_func", &p).is_err(), "constant-only polynomial must fail");
    }

    #[test]
    fn invalid_linear_expectations_are_verdicts() {
        let mut p = defaults("linear");
        p.insert("lambda".into(), 2.0);
        match expectation("linear", &p, 1.0).unwrap() {
            Expectation::Verdicts(vs) => assert_eq!(vs, vec![Verdict::Unbounded]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn run_matches_for_flagship_entries() {
        let cfg = CertifyConfig { max_sheet: 1, ..Default::default() };
        for name in ["heisenberg", "triple_product"] {
            let r = run(name, &BTreeMap::new(), &cfg).unwrap();
            assert!(r.matched, "{name}: {}", r.detail);
        }
    }

    #[test]
    fn run_confirms_rational_non_attainment() {
        let cfg = CertifyConfig { max_sheet: 1, ..Default::default() };
        let r = run("rational", &BTreeMap::new(), &cfg).unwrap();
        assert!(r.matched, "{}", r.detail);
        assert_eq!(r.report.verdict, Verdict::InfimumNotAttained);
    }

    #[test]
    fn run_flags_unbounded_covariance_power() {
        // At the documented defaults the covariance term dominates along
        // squeezed states, so the honest verdict is UNBOUNDED.
        let cfg = CertifyConfig { max_sheet: 1, ..Default::default() };
        let r = run("gen_rs", &BTreeMap::new(), &cfg).unwrap();
        assert!(r.matched, "{}", r.detail);
        assert_eq!(r.report.verdict, Verdict::Unbounded);
    }
}
