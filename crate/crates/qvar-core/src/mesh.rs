//! CSV mesh emission for the moment-space surfaces.
//!
//! Three meshes are produced: the nested sheet hyperboloids swept by
//! squeezed number states, the zero-covariance hyperbolas, and the
//! straight line of triple-product minimizers. All rows live in the
//! half-space coordinates (u, v, w) where the sheet equation reads
//! u² − v² − w² = e_n².

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::geometry::SheetIndex;
use crate::symplectic::{squeezed_moments, SqueezeParams};

/// Which mesh to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// Sheet hyperboloids for n = 0..=nmax, sampled on a (b, γ) lattice.
    Hyperboloid { nmax: u32 },
    /// Zero-covariance hyperbolas u² − v² = e_n², w = 0, for n = 0..=2.
    Heisenberg,
    /// The line of symmetric three-variance minimizers, n = 0..=2.
    TripleLine,
}

/// Lattice extents for the hyperboloid mesh.
const B_MAX: f64 = 2.0;
const B_COUNT: usize = 41;
const GAMMA_MAX: f64 = 1.5;
const GAMMA_COUNT: usize = 31;
/// Sample count along each zero-covariance hyperbola.
const CURVE_COUNT: usize = 201;

fn lattice(max_abs: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| -max_abs + 2.0 * max_abs * i as f64 / (count - 1) as f64)
}

/// Hyperboloid rows (n, u, v, w): squeezed-state moments on each sheet.
pub fn hyperboloid_rows(nmax: u32, hbar: f64) -> Vec<(u32, f64, f64, f64)> {
    let mut rows = Vec::new();
    for n in 0..=nmax {
        for b in lattice(B_MAX, B_COUNT) {
            for gamma in lattice(GAMMA_MAX, GAMMA_COUNT) {
                let m = squeezed_moments(SheetIndex(n), &SqueezeParams { b, gamma }, hbar);
                let p = m.to_uvw();
                rows.push((n, p.u, p.v, p.w));
            }
        }
    }
    rows
}

/// Zero-covariance rows (n, u, v): u = e_n cosh 2γ, v = e_n sinh 2γ.
pub fn heisenberg_rows(hbar: f64) -> Vec<(u32, f64, f64)> {
    let mut rows = Vec::new();
    for n in 0..=2u32 {
        let e = SheetIndex(n).energy(hbar);
        for gamma in lattice(GAMMA_MAX, CURVE_COUNT) {
            rows.push((n, e * (2.0 * gamma).cosh(), e * (2.0 * gamma).sinh()));
        }
    }
    rows
}

/// Triple-product minimizer rows (n, u, v, w): the point (τ e_n, 0, −τ e_n/2)
/// with τ = 2/√3, one per sheet.
pub fn triple_line_rows(hbar: f64) -> Vec<(u32, f64, f64, f64)> {
    let tau = 2.0 / 3.0f64.sqrt();
    (0..=2u32)
        .map(|n| {
            let e = SheetIndex(n).energy(hbar);
            (n, tau * e, 0.0, -0.5 * tau * e)
        })
        .collect()
}

fn push_row(out: &mut String, n: u32, coords: &[f64]) {
    let _ = write!(out, "{n}");
    for c in coords {
        let _ = write!(out, ",{c:.14e}");
    }
    out.push('\n');
}

/// Render a mesh as CSV text: header line, LF endings, 15 significant
/// digits per float so a re-parsed row still satisfies its equation.
pub fn emit_csv(kind: MeshKind, hbar: f64) -> String {
    let mut out = String::new();
    match kind {
        MeshKind::Hyperboloid { nmax } => {
            out.push_str("n,u,v,w\n");
            for (n, u, v, w) in hyperboloid_rows(nmax, hbar) {
                push_row(&mut out, n, &[u, v, w]);
            }
        }
        MeshKind::Heisenberg => {
            out.push_str("n,u,v\n");
            for (n, u, v) in heisenberg_rows(hbar) {
                push_row(&mut out, n, &[u, v]);
            }
        }
        MeshKind::TripleLine => {
            out.push_str("n,u,v,w\n");
            for (n, u, v, w) in triple_line_rows(hbar) {
                push_row(&mut out, n, &[u, v, w]);
            }
        }
    }
    out
}

/// Write a mesh CSV to a file.
pub fn write_csv(kind: MeshKind, hbar: f64, path: &Path) -> io::Result<()> {
    std::fs::write(path, emit_csv(kind, hbar))
}

/// Residual of the sheet equation u² − v² − w² = e_n², scaled so the
/// check is meaningful for rows far from the vertex.
pub fn sheet_equation_residual(n: u32, u: f64, v: f64, w: f64, hbar: f64) -> f64 {
    let e = SheetIndex(n).energy(hbar);
    let scale = 1.0 + u * u + v * v + w * w + e * e;
    (u * u - v * v - w * w - e * e).abs() / scale
}
