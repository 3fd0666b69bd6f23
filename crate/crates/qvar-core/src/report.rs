//! JSON report documents.
//!
//! Reports are rendered with a small hand-rolled writer so that every
//! floating-point number is emitted with 17 significant digits — enough
//! for an exact round trip — and the schema stays under our control.

use crate::certify::{BoundReport, CertifyConfig};
use crate::tol;

/// Incremental JSON writer with comma bookkeeping.
pub struct Json {
    buf: String,
    first: Vec<bool>,
}

impl Json {
    pub fn new() -> Self {
        Json { buf: String::new(), first: vec![true] }
    }

    pub fn finish(self) -> String {
        self.buf
    }

    fn pad(&mut self) {
        if let Some(first) = self.first.last_mut() {
            if *first {
                *first = false;
            } else {
                self.buf.push(',');
            }
        }
    }

    fn label(&mut self, key: Option<&str>) {
        self.pad();
        if let Some(k) = key {
            self.buf.push('"');
            escape_into(&mut self.buf, k);
            self.buf.push_str("\":");
        }
    }

    pub fn open_object(&mut self, key: Option<&str>) {
        self.label(key);
        self.buf.push('{');
        self.first.push(true);
    }

    pub fn close_object(&mut self) {
        self.first.pop();
        self.buf.push('}');
    }

    pub fn open_array(&mut self, key: Option<&str>) {
        self.label(key);
        self.buf.push('[');
        self.first.push(true);
    }

    pub fn close_array(&mut self) {
        self.first.pop();
        self.buf.push(']');
    }

    pub fn number(&mut self, key: Option<&str>, v: f64) {
        self.label(key);
        push_number(&mut self.buf, v);
    }

    pub fn opt_number(&mut self, key: Option<&str>, v: Option<f64>) {
        match v {
            Some(v) => self.number(key, v),
            None => self.null(key),
        }
    }

    pub fn integer(&mut self, key: Option<&str>, v: i64) {
        use std::fmt::Write as _;
        self.label(key);
        let _ = write!(self.buf, "{v}");
    }

    pub fn unsigned(&mut self, key: Option<&str>, v: u64) {
        use std::fmt::Write as _;
        self.label(key);
        let _ = write!(self.buf, "{v}");
    }

    pub fn boolean(&mut self, key: Option<&str>, v: bool) {
        self.label(key);
        self.buf.push_str(if v { "true" } else { "false" });
    }

    pub fn string(&mut self, key: Option<&str>, v: &str) {
        self.label(key);
        self.buf.push('"');
        escape_into(&mut self.buf, v);
        self.buf.push('"');
    }

    pub fn null(&mut self, key: Option<&str>) {
        self.label(key);
        self.buf.push_str("null");
    }
}

impl Default for Json {
    fn default() -> Self {
        Self::new()
    }
}

fn escape_into(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                use std::fmt::Write as _;
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
}

/// 17 significant digits; non-finite values become null (JSON has no
/// NaN/Infinity literals).
fn push_number(out: &mut String, v: f64) {
    use std::fmt::Write as _;
    if v.is_finite() {
        let _ = write!(out, "{v:.16e}");
    } else {
        out.push_str("null");
    }
}

/// Parametric-oracle record for the report's oracle section.
#[derive(Debug, Clone)]
pub struct ParametricRecord {
    pub value: f64,
    pub sheet: u32,
    pub b: f64,
    pub gamma: f64,
    pub converged: bool,
}

/// Fock-oracle record for the report's oracle section.
#[derive(Debug, Clone)]
pub struct FockRecord {
    pub value: f64,
    pub dim: usize,
    pub restarts: u32,
    pub seed: u64,
    pub leading_index: usize,
    pub leading_weight: f64,
    pub converged: bool,
}

/// Oracle cross-checks to embed in a report; either side is optional.
#[derive(Debug, Clone, Default)]
pub struct OracleSection {
    pub parametric: Option<ParametricRecord>,
    pub fock: Option<FockRecord>,
}

/// Catalog context for `catalog run` reports.
#[derive(Debug, Clone)]
pub struct CatalogSection {
    pub entry: String,
    pub expectation_bound: Option<f64>,
    pub expectation_verdicts: Vec<String>,
    pub matched: bool,
    pub detail: String,
}

/// Render a full report document as a JSON string.
pub fn render_report(
    report: &BoundReport,
    cfg: &CertifyConfig,
    oracle: Option<&OracleSection>,
    catalog: Option<&CatalogSection>,
) -> String {
    let mut j = Json::new();
    j.open_object(None);
    j.string(Some("functional"), &report.source);
    j.open_object(Some("params"));
    for (k, v) in &report.params {
        j.number(Some(k), *v);
    }
    j.close_object();
    j.number(Some("hbar"), report.hbar);
    j.string(Some("verdict"), &report.verdict.to_string());
    j.opt_number(Some("bound"), report.bound);
    match &report.minimizer {
        Some(m) => j.integer(Some("sheet"), m.sheet as i64),
        None => j.null(Some("sheet")),
    }
    match &report.minimizer {
        Some(m) => {
            j.open_object(Some("minimizer"));
            j.number(Some("x"), m.moments.x);
            j.number(Some("y"), m.moments.y);
            j.number(Some("w"), m.moments.w);
            j.number(Some("u"), m.uvw.u);
            j.number(Some("v"), m.uvw.v);
            j.number(Some("b"), m.squeeze.b);
            j.number(Some("gamma"), m.squeeze.gamma);
            j.number(Some("r"), m.complex.r);
            j.number(Some("theta"), m.complex.theta);
            j.number(Some("chi"), m.complex.chi);
            j.number(Some("fixed_point_error"), m.fixed_point_error);
            j.close_object();
        }
        None => j.null(Some("minimizer")),
    }
    j.open_array(Some("sheets"));
    for s in &report.sheets {
        j.open_object(None);
        j.integer(Some("n"), s.sheet as i64);
        j.string(Some("dimension"), &s.dimension.to_string());
        j.opt_number(Some("best_value"), s.best_value);
        j.integer(Some("points_found"), s.points_found as i64);
        j.integer(Some("manifold_samples"), s.manifold_samples as i64);
        j.integer(Some("discarded_not_posdef"), s.discarded_not_posdef as i64);
        j.open_array(Some("notes"));
        for note in &s.notes {
            j.string(None, note);
        }
        j.close_array();
        j.close_object();
    }
    j.close_array();
    match &report.witness {
        Some(w) => {
            j.open_object(Some("witness"));
            j.string(Some("ray"), &w.ray);
            j.boolean(Some("divergent"), w.divergent);
            j.number(Some("tail_ratio"), w.tail_ratio);
            j.integer(Some("points"), w.values.len() as i64);
            j.opt_number(Some("first_value"), w.values.first().copied());
            j.opt_number(Some("final_value"), w.values.last().copied());
            j.close_object();
        }
        None => j.null(Some("witness")),
    }
    j.open_object(Some("oracle"));
    match oracle.and_then(|o| o.parametric.as_ref()) {
        Some(p) => {
            j.open_object(Some("parametric"));
            j.number(Some("value"), p.value);
            j.integer(Some("sheet"), p.sheet as i64);
            j.number(Some("b"), p.b);
            j.number(Some("gamma"), p.gamma);
            j.boolean(Some("converged"), p.converged);
            j.close_object();
        }
        None => j.null(Some("parametric")),
    }
    match oracle.and_then(|o| o.fock.as_ref()) {
        Some(f) => {
            j.open_object(Some("fock"));
            j.number(Some("value"), f.value);
            j.integer(Some("dim"), f.dim as i64);
            j.integer(Some("restarts"), f.restarts as i64);
            j.unsigned(Some("seed"), f.seed);
            j.integer(Some("leading_index"), f.leading_index as i64);
            j.number(Some("leading_weight"), f.leading_weight);
            j.boolean(Some("converged"), f.converged);
            j.close_object();
        }
        None => j.null(Some("fock")),
    }
    j.close_object();
    if let Some(c) = catalog {
        j.open_object(Some("catalog"));
        j.string(Some("entry"), &c.entry);
        j.opt_number(Some("expected_bound"), c.expectation_bound);
        j.open_array(Some("expected_verdicts"));
        for v in &c.expectation_verdicts {
            j.string(None, v);
        }
        j.close_array();
        j.boolean(Some("matched"), c.matched);
        j.string(Some("detail"), &c.detail);
        j.close_object();
    }
    j.open_object(Some("config"));
    j.integer(Some("max_sheet"), cfg.max_sheet as i64);
    j.integer(Some("ray_points"), cfg.ray_points as i64);
    j.open_object(Some("solver"));
    j.integer(Some("seeds_per_axis"), cfg.solver.seeds_per_axis as i64);
    j.number(Some("seed_b_max"), cfg.solver.seed_b_max);
    j.number(Some("seed_gamma_max"), cfg.solver.seed_gamma_max);
    j.integer(Some("max_iters"), cfg.solver.max_iters as i64);
    j.integer(Some("max_backtracks"), cfg.solver.max_backtracks as i64);
    j.number(Some("residual_tol"), cfg.solver.residual_tol);
    j.number(Some("continuation_step"), cfg.solver.continuation_step);
    j.integer(Some("continuation_samples"), cfg.solver.continuation_samples as i64);
    j.close_object();
    j.close_object();
    j.open_object(Some("tolerances"));
    j.number(Some("residual"), tol::RESIDUAL_TOL);
    j.number(Some("definiteness"), tol::DEFINITENESS_TOL);
    j.number(Some("rank"), tol::RANK_TOL);
    j.number(Some("dedup"), tol::DEDUP_TOL);
    j.number(Some("manifold_const"), tol::MANIFOLD_CONST_TOL);
    j.number(Some("fixed_point"), tol::FIXED_POINT_TOL);
    j.number(Some("probe_margin"), tol::PROBE_MARGIN);
    j.number(Some("bound_match_rel"), tol::BOUND_MATCH_REL);
    j.number(Some("bogoliubov"), tol::BOGOLIUBOV_TOL);
    j.number(Some("mesh_surface"), tol::MESH_SURFACE_TOL);
    j.number(Some("lambert_residual"), tol::LAMBERT_RESIDUAL);
    j.close_object();
    j.open_array(Some("notes"));
    for note in &report.notes {
        j.string(None, note);
    }
    j.close_array();
    j.string(Some("version"), env!("CARGO_PKG_VERSION"));
    j.close_object();
    j.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::certify;
    use crate::expr::Functional;

    #[test]
    fn numbers_round_trip_exactly() {
        let samples = [
            0.25,
            1.0 / 3.0,
            0.1924500897298752,
            -1.4433756729740645e8,
            5e-324,
            f64::MAX,
            -0.0,
        ];
        for v in samples {
            let mut s = String::new();
            push_number(&mut s, v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "value {v} -> {s}");
        }
        let mut s = String::new();
        push_number(&mut s, f64::NAN);
        assert_eq!(s, "null");
    }

    #[test]
    fn escaping_is_json_safe() {
        let mut j = Json::new();
        j.open_object(None);
        j.string(Some("text"), "a\"b\\c\nd\te\u{1}f");
        j.close_object();
        let out = j.finish();
        let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(parsed["text"], "a\"b\\c\nd\te\u{1}f");
    }

    #[test]
    fn report_document_schema() {
        let f = Functional::parse_simple("sqrt(x*y)").unwrap();
        let cfg = CertifyConfig { max_sheet: 1, ..Default::default() };
        let report = certify(&f, &cfg);
        let oracle = OracleSection {
            parametric: Some(ParametricRecord {
                value: 0.5,
                sheet: 0,
                b: 0.0,
                gamma: 0.0,
                converged: true,
            }),
            fock: None,
        };
        let text = render_report(&report, &cfg, Some(&oracle), None);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["functional"], "sqrt(x*y)");
        assert_eq!(v["verdict"], "BOUNDED");
        assert!((v["bound"].as_f64().unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(v["sheet"], 0);
        let m = &v["minimizer"];
        for key in ["x", "y", "w", "u", "v", "b", "gamma", "r", "theta", "chi"] {
            assert!(m[key].is_number(), "minimizer key {key}");
        }
        assert_eq!(v["sheets"].as_array().unwrap().len(), 2);
        assert_eq!(v["oracle"]["parametric"]["sheet"], 0);
        assert!(v["oracle"]["fock"].is_null());
        assert!(v["config"]["solver"]["seeds_per_axis"].is_number());
        assert!(v["tolerances"]["residual"].is_number());
        assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
        // The bound survives the round trip bit-for-bit.
        let emitted = v["bound"].as_f64().unwrap();
        assert_eq!(emitted.to_bits(), report.bound.unwrap().to_bits());
    }

    #[test]
    fn catalog_section_is_embedded() {
        let f = Functional::parse_simple("x + y").unwrap();
        let cfg = CertifyConfig { max_sheet: 0, ..Default::default() };
        let report = certify(&f, &cfg);
        let catalog = CatalogSection {
            entry: "pair_sum".into(),
            expectation_bound: Some(1.0),
            expectation_verdicts: Vec::new(),
            matched: true,
            detail: "bound matches".into(),
        };
        let text = render_report(&report, &cfg, None, Some(&catalog));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["catalog"]["entry"], "pair_sum");
        assert_eq!(v["catalog"]["matched"], true);
        assert!(v["oracle"]["parametric"].is_null());
    }
}
