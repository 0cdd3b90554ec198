//! Catalog of explicit minimal isoparametric submanifolds of the 7-sphere:
//! great spheres, products of round spheres, and minimal hypersurfaces of great
//! spheres (product type), each with analytic charts and analytic parallel
//! normal frames.
//!
//! Embedding convention: the ambient space splits as
//! `ℝ^8 = ℝ^{n₁+1} ⊕ … ⊕ ℝ^{n_p+1} ⊕ (zero padding)` in factor order; each
//! factor `S^{n}(r)` is parametrized by polyspherical angles (polar angles in
//! `(0,π)`, one periodic angle per factor) so grid values are reproducible
//! bit-for-bit for a given grid.

use std::sync::Arc;

use crate::chart::{Axis, Chart, Immersion, Jet1, NormalField, NormalHint, NormalHintSet};
use crate::{Error, Result};

/// One round-sphere factor `S^n(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    pub n: usize,
    pub radius: f64,
}

/// A parsed manifold spec.
///
/// `Great` is the totally geodesic `S^m ⊂ S^7`; `Product` a product of round
/// spheres filling all eight ambient coordinates; `Compose` a minimal product
/// hypersurface of `S^m` included via `S^m ⊂ S^7`.
#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldSpec {
    Great { m: usize },
    Product { factors: Vec<Factor> },
    Compose { m: usize, inner: (usize, usize) },
}

impl ManifoldSpec {
    /// Factor list together with the ambient dimension they fill (≤ 8);
    /// remaining coordinates are zero-padded.
    pub fn factors(&self) -> Vec<Factor> {
        match self {
            ManifoldSpec::Great { m } => vec![Factor { n: *m, radius: 1.0 }],
            ManifoldSpec::Product { factors } => factors.clone(),
            ManifoldSpec::Compose { m, inner } => {
                let d = m - 1;
                vec![
                    Factor {
                        n: inner.0,
                        radius: (inner.0 as f64 / d as f64).sqrt(),
                    },
                    Factor {
                        n: inner.1,
                        radius: (inner.1 as f64 / d as f64).sqrt(),
                    },
                ]
            }
        }
    }

    pub fn ambient_filled(&self) -> usize {
        self.factors().iter().map(|f| f.n + 1).sum()
    }

    pub fn dim(&self) -> usize {
        self.factors().iter().map(|f| f.n).sum()
    }

    pub fn codim(&self) -> usize {
        7 - self.dim()
    }

    /// Minimality of the entry. Great spheres are totally geodesic, composed
    /// hypersurfaces are built at minimal radii; products are minimal exactly
    /// when every radius matches √(n_i/d).
    pub fn is_minimal(&self) -> bool {
        match self {
            ManifoldSpec::Great { .. } | ManifoldSpec::Compose { .. } => true,
            ManifoldSpec::Product { factors } => {
                let d = self.dim() as f64;
                factors
                    .iter()
                    .all(|f| (f.radius * f.radius - f.n as f64 / d).abs() < 1e-12)
            }
        }
    }
}

/// Radii that make a product of round spheres minimal: `r_i = √(n_i/d)`.
///
/// The factor list must fit inside the ambient space (Σ(n_i+1) ≤ 8); a single
/// factor gives the totally geodesic case r = 1. Full products additionally
/// require Σ(n_i+1) = 8, which is enforced by the spec validation layer.
pub fn minimal_radii(ns: &[usize]) -> Result<Vec<f64>> {
    let ambient: usize = ns.iter().map(|n| n + 1).sum();
    if ambient > 8 {
        return Err(Error::SpecInvalid(format!(
            "factor dimensions {ns:?} fill {ambient} > 8 ambient coordinates"
        )));
    }
    if ns.contains(&0) {
        return Err(Error::SpecInvalid("factor dimensions must be >= 1".into()));
    }
    let d: usize = ns.iter().sum();
    Ok(ns.iter().map(|&n| (n as f64 / d as f64).sqrt()).collect())
}

// ---------------------------------------------------------------------------
// Polyspherical immersion
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct FactorLayout {
    n: usize,
    radius: f64,
    coord_offset: usize,
    axis_offset: usize,
}

/// Product of round spheres in block coordinates, parametrized by polyspherical
/// angles; all derivatives are exact products of sines and cosines.
pub struct ProductSphereImmersion {
    layout: Vec<FactorLayout>,
    dim: usize,
}

impl ProductSphereImmersion {
    pub fn new(factors: &[Factor]) -> Result<Self> {
        let ambient: usize = factors.iter().map(|f| f.n + 1).sum();
        if ambient > 8 {
            return Err(Error::SpecInvalid(format!(
                "factors fill {ambient} > 8 ambient coordinates"
            )));
        }
        let mut layout = Vec::with_capacity(factors.len());
        let mut coord = 0;
        let mut axis = 0;
        for f in factors {
            if f.n == 0 || f.radius <= 0.0 {
                return Err(Error::SpecInvalid(
                    "factors need dimension >= 1 and positive radius".into(),
                ));
            }
            layout.push(FactorLayout {
                n: f.n,
                radius: f.radius,
                coord_offset: coord,
                axis_offset: axis,
            });
            coord += f.n + 1;
            axis += f.n;
        }
        Ok(ProductSphereImmersion { layout, dim: axis })
    }

    pub fn axes(&self) -> Vec<Axis> {
        let mut axes = Vec::with_capacity(self.dim);
        for f in &self.layout {
            for t in 0..f.n {
                let periodic = t == f.n - 1;
                axes.push(Axis {
                    lo: 0.0,
                    hi: if periodic {
                        std::f64::consts::TAU
                    } else {
                        std::f64::consts::PI
                    },
                    periodic,
                });
            }
        }
        axes
    }
}

/// sin(φ + p·π/2) from precomputed (sin φ, cos φ): the four phases cycle under
/// differentiation.
#[inline]
fn phase_val(s: f64, c: f64, p: u8) -> f64 {
    match p & 3 {
        0 => s,
        1 => c,
        2 => -s,
        _ => -c,
    }
}

/// Coordinate `l` of the unit polyspherical S^n (angles via their sin/cos),
/// optionally differentiated along local axes `da` and `db`.
/// Coordinate l < n is `Π_{t<l} sin φ_t · cos φ_l`; coordinate n is
/// `Π_{t<n} sin φ_t`.
fn coord_term(
    s: &[f64],
    c: &[f64],
    l: usize,
    n: usize,
    da: Option<usize>,
    db: Option<usize>,
) -> f64 {
    let last = if l < n { l } else { n - 1 };
    if let Some(a) = da {
        if a > last {
            return 0.0;
        }
    }
    if let Some(b) = db {
        if b > last {
            return 0.0;
        }
    }
    let mut prod = 1.0;
    for t in 0..=last {
        let mut p: u8 = if t < l { 0 } else { 1 };
        if da == Some(t) {
            p += 1;
        }
        if db == Some(t) {
            p += 1;
        }
        prod *= phase_val(s[t], c[t], p);
    }
    prod
}

impl Immersion for ProductSphereImmersion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, u: &[f64]) -> [f64; 8] {
        let mut x = [0.0; 8];
        let mut s = [0.0; 7];
        let mut c = [0.0; 7];
        for f in &self.layout {
            for t in 0..f.n {
                let (sv, cv) = u[f.axis_offset + t].sin_cos();
                s[t] = sv;
                c[t] = cv;
            }
            for l in 0..=f.n {
                x[f.coord_offset + l] = f.radius * coord_term(&s, &c, l, f.n, None, None);
            }
        }
        x
    }

    fn jet1(&self, u: &[f64]) -> Jet1 {
        let mut jet = Jet1::zeroed(self.dim);
        let mut s = [0.0; 7];
        let mut c = [0.0; 7];
        for f in &self.layout {
            for t in 0..f.n {
                let (sv, cv) = u[f.axis_offset + t].sin_cos();
                s[t] = sv;
                c[t] = cv;
            }
            for l in 0..=f.n {
                jet.x[f.coord_offset + l] = f.radius * coord_term(&s, &c, l, f.n, None, None);
                for a in 0..f.n {
                    jet.d1_mut()[f.axis_offset + a][f.coord_offset + l] =
                        f.radius * coord_term(&s, &c, l, f.n, Some(a), None);
                }
            }
        }
        jet
    }

    fn d2(&self, u: &[f64], i: usize, j: usize) -> [f64; 8] {
        let mut out = [0.0; 8];
        let mut s = [0.0; 7];
        let mut c = [0.0; 7];
        for f in &self.layout {
            let local_i = i.checked_sub(f.axis_offset).filter(|&a| a < f.n);
            let local_j = j.checked_sub(f.axis_offset).filter(|&a| a < f.n);
            // coordinates of a factor depend only on that factor's angles
            let (a, b) = match (local_i, local_j) {
                (Some(a), Some(b)) => (a, b),
                (None, None) => continue,
                _ => continue,
            };
            for t in 0..f.n {
                let (sv, cv) = u[f.axis_offset + t].sin_cos();
                s[t] = sv;
                c[t] = cv;
            }
            for l in 0..=f.n {
                out[f.coord_offset + l] = f.radius * coord_term(&s, &c, l, f.n, Some(a), Some(b));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Normal hints
// ---------------------------------------------------------------------------

/// Coefficient rows for the in-product normal sections: an orthonormal basis of
/// the hyperplane {a : Σ a_i r_i = 0}, produced by Gram-Schmidt on the standard
/// basis in fixed order.
pub fn normal_coefficient_rows(radii: &[f64]) -> Vec<Vec<f64>> {
    let p = radii.len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(p.saturating_sub(1));
    for i in 0..p {
        if rows.len() == p - 1 {
            break;
        }
        let mut v = vec![0.0; p];
        v[i] = 1.0;
        // project out the radius direction (unit, since Σ r_i² = 1)
        for _ in 0..2 {
            let cr: f64 = v.iter().zip(radii).map(|(a, r)| a * r).sum();
            for (a, r) in v.iter_mut().zip(radii) {
                *a -= cr * r;
            }
            for row in &rows {
                let c: f64 = v.iter().zip(row).map(|(a, b)| a * b).sum();
                for (a, b) in v.iter_mut().zip(row) {
                    *a -= c * b;
                }
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-10 {
            for a in v.iter_mut() {
                *a /= norm;
            }
            rows.push(v);
        }
    }
    rows
}

/// Block-scaled normal field `ν_a(x) = (a_i/r_i)·x` on factor block i.
fn block_scaled_field(factors: &[Factor], coeffs: &[f64]) -> NormalField {
    let mut a = [[0.0; 8]; 8];
    let mut offset = 0;
    for (f, &cf) in factors.iter().zip(coeffs) {
        let scale = cf / f.radius;
        for l in 0..=f.n {
            a[offset + l][offset + l] = scale;
        }
        offset += f.n + 1;
    }
    NormalField::linear(a)
}

/// Build the analytic parallel normal frame of a spec: in-product sections
/// first (when the spec has ≥ 2 factors), then the constant coordinate normals
/// of the zero-padded ambient directions.
pub fn normal_hints(spec: &ManifoldSpec) -> NormalHintSet {
    let factors = spec.factors();
    let radii: Vec<f64> = factors.iter().map(|f| f.radius).collect();
    let mut hints = Vec::new();
    if factors.len() >= 2 {
        for (idx, row) in normal_coefficient_rows(&radii).into_iter().enumerate() {
            hints.push(NormalHint {
                label: format!("nu{}", idx + 1),
                field: block_scaled_field(&factors, &row),
                parallel: true,
            });
        }
    }
    for coord in spec.ambient_filled()..8 {
        let mut e = [0.0; 8];
        e[coord] = 1.0;
        hints.push(NormalHint {
            label: format!("e{}", coord + 1),
            field: NormalField::constant(e),
            parallel: true,
        });
    }
    NormalHintSet { hints }
}

/// Build the chart (with the given per-axis grid) and its normal hint set.
pub fn build_chart(spec: &ManifoldSpec, grid: &[usize]) -> Result<(Chart, NormalHintSet)> {
    validate_spec(spec)?;
    let factors = spec.factors();
    let immersion = ProductSphereImmersion::new(&factors)?;
    let axes = immersion.axes();
    let chart = Chart::new(Arc::new(immersion), axes, grid.to_vec())?;
    Ok((chart, normal_hints(spec)))
}

fn validate_spec(spec: &ManifoldSpec) -> Result<()> {
    match spec {
        ManifoldSpec::Great { m } => {
            if !(1..=6).contains(m) {
                return Err(Error::SpecInvalid(format!(
                    "great sphere dimension m = {m} must lie in 1..=6 (m = 7 is the whole sphere)"
                )));
            }
        }
        ManifoldSpec::Product { factors } => {
            let ambient: usize = factors.iter().map(|f| f.n + 1).sum();
            if ambient != 8 {
                return Err(Error::SpecInvalid(format!(
                    "product factors {:?} fill {ambient} ambient coordinates, need exactly 8",
                    factors.iter().map(|f| f.n).collect::<Vec<_>>()
                )));
            }
            let sum_sq: f64 = factors.iter().map(|f| f.radius * f.radius).sum();
            if (sum_sq - 1.0).abs() > 1e-9 {
                return Err(Error::SpecInvalid(format!(
                    "radii must satisfy Σ r_i² = 1, got {sum_sq}"
                )));
            }
        }
        ManifoldSpec::Compose { m, inner } => {
            if !(3..=6).contains(m) {
                return Err(Error::SpecInvalid(format!(
                    "composition requires 3 <= m <= 6, got m = {m} (for m = 7 use product:p,q)"
                )));
            }
            let filled = inner.0 + inner.1 + 2;
            if inner.0 == 0 || inner.1 == 0 || filled != m + 1 {
                return Err(Error::SpecInvalid(format!(
                    "inner hypersurface S^{}×S^{} fills {filled} coordinates, S^{m} needs {}",
                    inner.0,
                    inner.1,
                    m + 1
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Grammar
// ---------------------------------------------------------------------------

/// Parse the manifold-spec grammar:
/// `great:M` | `product:N1,N2,...[@R1,R2,...]` | `compose:great:M/product:P,Q`.
/// Omitted product radii mean the minimal ones. Explicit radii are accepted
/// within 1e-3 of Σ r_i² = 1 and renormalized exactly onto the sphere.
pub fn parse_spec(text: &str) -> Result<ManifoldSpec> {
    let parse_usize = |s: &str, pos: usize, what: &str| -> Result<usize> {
        s.parse::<usize>().map_err(|_| Error::SpecParse {
            pos,
            msg: format!("expected {what}, got '{s}'"),
        })
    };

    if let Some(rest) = text.strip_prefix("compose:") {
        let base = "compose:".len();
        let inner_rest = rest.strip_prefix("great:").ok_or(Error::SpecParse {
            pos: base,
            msg: "expected 'great:M' after 'compose:'".into(),
        })?;
        let slash = inner_rest.find('/').ok_or(Error::SpecParse {
            pos: base + 6 + inner_rest.len(),
            msg: "expected '/product:P,Q' after the great-sphere dimension".into(),
        })?;
        let m = parse_usize(&inner_rest[..slash], base + 6, "a great-sphere dimension")?;
        let prod_part = &inner_rest[slash + 1..];
        let prod_pos = base + 6 + slash + 1;
        let ns_text = prod_part.strip_prefix("product:").ok_or(Error::SpecParse {
            pos: prod_pos,
            msg: "expected 'product:P,Q' after '/'".into(),
        })?;
        let parts: Vec<&str> = ns_text.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::SpecParse {
                pos: prod_pos + 8,
                msg: format!(
                    "composition inner hypersurface takes exactly two factors, got {}",
                    parts.len()
                ),
            });
        }
        let p = parse_usize(parts[0], prod_pos + 8, "a factor dimension")?;
        let q = parse_usize(
            parts[1],
            prod_pos + 8 + parts[0].len() + 1,
            "a factor dimension",
        )?;
        let spec = ManifoldSpec::Compose { m, inner: (p, q) };
        validate_spec(&spec)?;
        return Ok(spec);
    }

    if let Some(rest) = text.strip_prefix("great:") {
        let m = parse_usize(rest, "great:".len(), "a great-sphere dimension")?;
        let spec = ManifoldSpec::Great { m };
        validate_spec(&spec)?;
        return Ok(spec);
    }

    if let Some(rest) = text.strip_prefix("product:") {
        let base = "product:".len();
        let (ns_text, radii_text) = match rest.find('@') {
            Some(at) => (&rest[..at], Some((&rest[at + 1..], base + at + 1))),
            None => (rest, None),
        };
        let mut ns = Vec::new();
        let mut pos = base;
        for part in ns_text.split(',') {
            ns.push(parse_usize(part, pos, "a factor dimension")?);
            pos += part.len() + 1;
        }
        if ns.contains(&0) {
            return Err(Error::SpecInvalid("factor dimensions must be >= 1".into()));
        }
        let ambient: usize = ns.iter().map(|n| n + 1).sum();
        if ambient != 8 {
            return Err(Error::SpecInvalid(format!(
                "product factors {ns:?} fill Σ(n_i+1) = {ambient} ambient coordinates, need exactly 8"
            )));
        }
        let radii = match radii_text {
            None => minimal_radii(&ns)?,
            Some((rtext, rpos)) => {
                let mut radii = Vec::new();
                let mut pos = rpos;
                for part in rtext.split(',') {
                    let r: f64 = part.parse().map_err(|_| Error::SpecParse {
                        pos,
                        msg: format!("expected a radius, got '{part}'"),
                    })?;
                    if !r.is_finite() || r <= 0.0 {
                        return Err(Error::SpecInvalid(format!("radius {r} must be positive")));
                    }
                    radii.push(r);
                    pos += part.len() + 1;
                }
                if radii.len() != ns.len() {
                    return Err(Error::SpecInvalid(format!(
                        "{} radii given for {} factors",
                        radii.len(),
                        ns.len()
                    )));
                }
                let sum_sq: f64 = radii.iter().map(|r| r * r).sum();
                if (sum_sq - 1.0).abs() > 1e-3 {
                    return Err(Error::SpecInvalid(format!(
                        "radii must satisfy Σ r_i² = 1 (within 1e-3), got {sum_sq}"
                    )));
                }
                // renormalize exactly onto the sphere
                let scale = sum_sq.sqrt();
                radii.iter().map(|r| r / scale).collect()
            }
        };
        let factors = ns
            .iter()
            .zip(&radii)
            .map(|(&n, &radius)| Factor { n, radius })
            .collect();
        let spec = ManifoldSpec::Product { factors };
        validate_spec(&spec)?;
        return Ok(spec);
    }

    Err(Error::SpecParse {
        pos: 0,
        msg: format!("expected 'great:', 'product:' or 'compose:', got '{text}'"),
    })
}

/// Canonical text form; radii are printed only when they differ from minimal.
pub fn format_spec(spec: &ManifoldSpec) -> String {
    match spec {
        ManifoldSpec::Great { m } => format!("great:{m}"),
        ManifoldSpec::Compose { m, inner } => {
            format!("compose:great:{m}/product:{},{}", inner.0, inner.1)
        }
        ManifoldSpec::Product { factors } => {
            let ns: Vec<String> = factors.iter().map(|f| f.n.to_string()).collect();
            let base = format!("product:{}", ns.join(","));
            if spec.is_minimal() {
                base
            } else {
                let rs: Vec<String> = factors.iter().map(|f| f.radius.to_string()).collect();
                format!("{base}@{}", rs.join(","))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Shipped catalog
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub spec: ManifoldSpec,
    pub dim: usize,
    pub codim: usize,
    pub minimal: bool,
}

fn entry(spec: ManifoldSpec) -> CatalogEntry {
    CatalogEntry {
        name: format_spec(&spec),
        dim: spec.dim(),
        codim: spec.codim(),
        minimal: spec.is_minimal(),
        spec,
    }
}

/// Every shipped spec: great spheres for m = 2..6, all valid minimal products
/// of round spheres (the factor dimensions must satisfy Σ(n_i+1) = 8, which
/// excludes partitions like 1,1,1,2 or 1,1,1,1,1), and one composed minimal
/// product hypersurface of S^m for each m = 3..6.
pub fn catalog_list() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    for m in 2..=6 {
        out.push(entry(ManifoldSpec::Great { m }));
    }
    for ns in [
        vec![3, 3],
        vec![1, 5],
        vec![2, 4],
        vec![1, 1, 3],
        vec![1, 2, 2],
        vec![1, 1, 1, 1],
    ] {
        let radii = minimal_radii(&ns).unwrap();
        let factors = ns
            .iter()
            .zip(&radii)
            .map(|(&n, &radius)| Factor { n, radius })
            .collect();
        out.push(entry(ManifoldSpec::Product { factors }));
    }
    for (m, inner) in [(3, (1, 1)), (4, (1, 2)), (5, (2, 2)), (6, (2, 3))] {
        out.push(entry(ManifoldSpec::Compose { m, inner }));
    }
    out
}
