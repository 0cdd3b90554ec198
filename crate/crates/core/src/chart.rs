//! Chart-based representation of submanifolds `M^d ⊂ S^7`: analytic immersion
//! jets, induced metric, sphere covariant derivative, divergence-form
//! Laplace-Beltrami operator and midpoint quadrature on half-cell-offset grids.
//!
//! Charts carry analytic first and second derivatives. Finite differences are
//! used in exactly one place per operator: the outer derivative of the
//! divergence form. Grids are offset by half a cell so no node ever touches a
//! coordinate singularity of an angle chart.

use std::sync::Arc;

use rayon::prelude::*;

use crate::linalg::{dot8, norm8, orthonormalize_against, small_spd, SmallSpd, MAX_DIM};
use crate::{Error, Result};

/// One chart coordinate axis.
#[derive(Debug, Clone)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

/// Immersion value together with all first partial derivatives, stored inline
/// (charts have at most [`MAX_DIM`] coordinates).
#[derive(Debug, Clone)]
pub struct Jet1 {
    pub x: [f64; 8],
    dim: usize,
    d1: [[f64; 8]; MAX_DIM],
}

impl Jet1 {
    pub fn zeroed(dim: usize) -> Self {
        debug_assert!(dim <= MAX_DIM);
        Jet1 {
            x: [0.0; 8],
            dim,
            d1: [[0.0; 8]; MAX_DIM],
        }
    }

    pub fn d1(&self) -> &[[f64; 8]] {
        &self.d1[..self.dim]
    }

    pub fn d1_mut(&mut self) -> &mut [[f64; 8]] {
        &mut self.d1[..self.dim]
    }
}

/// A parametrized patch `u ↦ F(u) ∈ S^7` with analytic derivatives.
pub trait Immersion: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, u: &[f64]) -> [f64; 8];
    fn jet1(&self, u: &[f64]) -> Jet1;
    fn d2(&self, u: &[f64], i: usize, j: usize) -> [f64; 8];
}

/// A chart of a d-dimensional submanifold: immersion, domain box and grid.
#[derive(Clone)]
pub struct Chart {
    immersion: Arc<dyn Immersion>,
    axes: Vec<Axis>,
    grid: Vec<usize>,
}

impl Chart {
    pub fn new(immersion: Arc<dyn Immersion>, axes: Vec<Axis>, grid: Vec<usize>) -> Result<Self> {
        if axes.len() != immersion.dim() || grid.len() != immersion.dim() {
            return Err(Error::Domain(format!(
                "chart dimension mismatch: immersion dim {}, {} axes, {} grid entries",
                immersion.dim(),
                axes.len(),
                grid.len()
            )));
        }
        if grid.iter().any(|&n| n < 2) {
            return Err(Error::Domain("grid needs at least 2 nodes per axis".into()));
        }
        Ok(Chart {
            immersion,
            axes,
            grid,
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Codimension inside the 7-sphere.
    pub fn codim(&self) -> usize {
        7 - self.dim()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn node_count(&self) -> usize {
        self.grid.iter().product()
    }

    pub fn delta(&self, axis: usize) -> f64 {
        (self.axes[axis].hi - self.axes[axis].lo) / self.grid[axis] as f64
    }

    /// Product of cell widths (the flat quadrature weight before √g).
    pub fn cell_measure(&self) -> f64 {
        (0..self.dim()).map(|a| self.delta(a)).product()
    }

    /// Chart coordinates of a grid node (row-major index, axis 0 slowest,
    /// half-cell offset on every axis).
    pub fn node_u(&self, index: usize) -> Vec<f64> {
        let d = self.dim();
        let mut u = vec![0.0; d];
        let mut rest = index;
        for a in (0..d).rev() {
            let n = self.grid[a];
            let j = rest % n;
            rest /= n;
            u[a] = self.axes[a].lo + (j as f64 + 0.5) * self.delta(a);
        }
        u
    }

    /// True when every non-periodic coordinate keeps `margin` distance to the
    /// domain boundary (periodic axes always qualify).
    pub fn is_interior(&self, u: &[f64], margin: f64) -> bool {
        self.axes
            .iter()
            .zip(u)
            .all(|(ax, &c)| ax.periodic || (c >= ax.lo + margin && c <= ax.hi - margin))
    }

    pub fn ensure_stencil(&self, u: &[f64], reach: f64) -> Result<()> {
        for (a, (ax, &c)) in self.axes.iter().zip(u).enumerate() {
            if !ax.periodic && (c - reach < ax.lo || c + reach > ax.hi) {
                return Err(Error::StencilOutOfDomain {
                    axis: a,
                    u: u.to_vec(),
                });
            }
        }
        Ok(())
    }

    pub fn position(&self, u: &[f64]) -> [f64; 8] {
        self.immersion.eval(u)
    }

    pub fn jet1(&self, u: &[f64]) -> Jet1 {
        self.immersion.jet1(u)
    }

    pub fn second_derivative(&self, u: &[f64], i: usize, j: usize) -> [f64; 8] {
        self.immersion.d2(u, i, j)
    }

    /// Spot-check the chart invariants (unit position, tangency of derivatives,
    /// positive definite metric) on a deterministic subsample of grid nodes.
    pub fn check_invariants(&self, norm_tol: f64, tangency_tol: f64) -> Result<()> {
        let count = self.node_count();
        let stride = (count / 128).max(1);
        for idx in (0..count).step_by(stride) {
            let u = self.node_u(idx);
            let jet = self.jet1(&u);
            let n = norm8(&jet.x);
            if (n - 1.0).abs() > norm_tol {
                return Err(Error::ChartDegeneracy {
                    u,
                    what: format!("|F| = {n} departs from 1"),
                });
            }
            for (i, di) in jet.d1().iter().enumerate() {
                let t = dot8(di, &jet.x);
                if t.abs() > tangency_tol {
                    return Err(Error::ChartDegeneracy {
                        u,
                        what: format!("⟨∂_{i}F, F⟩ = {t:e} is not tangent"),
                    });
                }
            }
            metric_data(self, &u)?;
        }
        Ok(())
    }
}

/// Evaluate `f` on every grid node in parallel; the output vector is in node
/// order regardless of the worker count.
pub fn map_nodes<T: Send>(chart: &Chart, f: impl Fn(usize, &[f64]) -> T + Sync) -> Vec<T> {
    (0..chart.node_count())
        .into_par_iter()
        .map(|i| f(i, &chart.node_u(i)))
        .collect()
}

/// First fundamental form at a point: `g`, its inverse, and `√det g`.
#[derive(Debug, Clone)]
pub struct MetricData {
    pub d: usize,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    pub sqrt_det: f64,
}

pub fn metric_data(chart: &Chart, u: &[f64]) -> Result<MetricData> {
    let jet = chart.jet1(u);
    metric_from_jet(chart, u, &jet)
}

/// Stack-allocated metric for the per-stencil-point path.
fn small_metric(jet: &Jet1) -> Option<SmallSpd> {
    let d = jet.d1().len();
    let mut g = [[0.0f64; MAX_DIM]; MAX_DIM];
    for i in 0..d {
        for j in 0..=i {
            let v = dot8(&jet.d1()[i], &jet.d1()[j]);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    small_spd(d, &g)
}

pub fn metric_from_jet(chart: &Chart, u: &[f64], jet: &Jet1) -> Result<MetricData> {
    let d = chart.dim();
    let sm = small_metric(jet).ok_or_else(|| Error::ChartDegeneracy {
        u: u.to_vec(),
        what: "metric is not positive definite".into(),
    })?;
    let mut g = vec![0.0; d * d];
    let mut g_inv = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            g[i * d + j] = sm.g[i][j];
            g_inv[i * d + j] = sm.inv[i][j];
        }
    }
    Ok(MetricData {
        d,
        g,
        g_inv,
        sqrt_det: sm.sqrt_det,
    })
}

/// Central-difference gradient of an N-vector valued function of the chart
/// coordinates, written into `out[..d]`.
pub fn fd_gradient<const N: usize>(
    value: &(dyn Fn(&[f64]) -> [f64; N] + '_),
    u: &[f64],
    h: f64,
    out: &mut [[f64; N]; MAX_DIM],
) {
    let d = u.len();
    let mut w = u.to_vec();
    for i in 0..d {
        w.copy_from_slice(u);
        w[i] = u[i] + h;
        let plus = value(&w);
        w[i] = u[i] - h;
        let minus = value(&w);
        for c in 0..N {
            out[i][c] = (plus[c] - minus[c]) / (2.0 * h);
        }
    }
}

/// Divergence-form Laplacian `(1/√g) ∂_i(√g g^{ij} ∂_j f)` for an N-vector
/// valued `f`, with the outer derivative by central differences of step `h` and
/// the inner gradient supplied by the caller (analytic where available).
///
/// The gradient closure receives the immersion jet already evaluated at the
/// stencil point and fills the partials buffer. `reach` is the total stencil
/// extent used to validate non-periodic axes: `h` for analytic gradients, `2h`
/// when the gradient itself is a central difference.
#[allow(clippy::type_complexity)]
pub fn divergence_laplacian<const N: usize>(
    chart: &Chart,
    u: &[f64],
    h: f64,
    reach: f64,
    grad: &(dyn Fn(&[f64], &Jet1, &mut [[f64; N]; MAX_DIM]) -> Result<()> + '_),
) -> Result<[f64; N]> {
    chart.ensure_stencil(u, reach)?;
    let d = chart.dim();
    let degenerate = |w: &[f64]| Error::ChartDegeneracy {
        u: w.to_vec(),
        what: "metric is not positive definite".into(),
    };
    let center = small_metric(&chart.jet1(u)).ok_or_else(|| degenerate(u))?;
    let mut acc = [0.0; N];
    let mut w = u.to_vec();
    let mut partials = [[0.0; N]; MAX_DIM];
    for i in 0..d {
        for (step, sign) in [(h, 1.0), (-h, -1.0)] {
            w.copy_from_slice(u);
            w[i] += step;
            let jet = chart.jet1(&w);
            let md = small_metric(&jet).ok_or_else(|| degenerate(&w))?;
            grad(&w, &jet, &mut partials)?;
            let mut flux = [0.0; N];
            for j in 0..d {
                let gij = md.inv[i][j];
                if gij == 0.0 {
                    continue;
                }
                for c in 0..N {
                    flux[c] += gij * partials[j][c];
                }
            }
            let scale = sign * md.sqrt_det / (2.0 * h);
            for c in 0..N {
                acc[c] += scale * flux[c];
            }
        }
    }
    for c in acc.iter_mut() {
        *c /= center.sqrt_det;
    }
    Ok(acc)
}

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A real function on a chart: values on the grid plus an evaluator (and an
/// optional analytic gradient) for off-grid points.
#[derive(Clone)]
pub struct ScalarField {
    pub values: Vec<f64>,
    eval: ValueFn,
    grad: Option<GradientFn>,
}

impl ScalarField {
    pub fn from_fn(chart: &Chart, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        let eval: ValueFn = Arc::new(f);
        let e = eval.clone();
        let values = map_nodes(chart, move |_, u| e(u));
        ScalarField {
            values,
            eval,
            grad: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        (self.eval)(u)
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }
}

/// Laplace-Beltrami operator applied to a scalar field at `u`.
pub fn laplace_beltrami(chart: &Chart, f: &ScalarField, u: &[f64], h: f64) -> Result<f64> {
    let d = chart.dim();
    let result = if let Some(g) = &f.grad {
        let grad = |w: &[f64], _jet: &Jet1, out: &mut [[f64; 1]; MAX_DIM]| -> Result<()> {
            let mut buf = vec![0.0; d];
            g(w, &mut buf);
            for (o, v) in out.iter_mut().zip(buf) {
                o[0] = v;
            }
            Ok(())
        };
        divergence_laplacian::<1>(chart, u, h, h, &grad)?
    } else {
        let grad = |w: &[f64], _jet: &Jet1, out: &mut [[f64; 1]; MAX_DIM]| -> Result<()> {
            fd_gradient::<1>(&|p| [f.eval(p)], w, h, out);
            Ok(())
        };
        divergence_laplacian::<1>(chart, u, h, 2.0 * h, &grad)?
    };
    Ok(result[0])
}

// ---------------------------------------------------------------------------
// Ambient vector fields along a chart
// ---------------------------------------------------------------------------

pub type ChartFieldFn = Arc<dyn Fn(&[f64]) -> [f64; 8] + Send + Sync>;

/// A vector field along the submanifold, with values in the ambient space.
///
/// Affine fields `x ↦ c + A·x` cover every catalog normal section (constant
/// coordinate normals and the block-scaled product-sphere normals) and both
/// canonical tangent fields (position, rotational fields); their ambient
/// derivative is exact. `Chartwise` fields fall back to finite differences.
#[derive(Clone)]
pub enum NormalField {
    Affine {
        c: [f64; 8],
        a: Option<Box<[[f64; 8]; 8]>>,
    },
    Chartwise(ChartFieldFn),
}

impl NormalField {
    pub fn constant(c: [f64; 8]) -> Self {
        NormalField::Affine { c, a: None }
    }

    pub fn linear(a: [[f64; 8]; 8]) -> Self {
        NormalField::Affine {
            c: [0.0; 8],
            a: Some(Box::new(a)),
        }
    }

    pub fn chartwise(f: impl Fn(&[f64]) -> [f64; 8] + Send + Sync + 'static) -> Self {
        NormalField::Chartwise(Arc::new(f))
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, NormalField::Affine { .. })
    }

    /// Value at the ambient point `x` (affine fields only).
    pub fn value_at(&self, x: &[f64; 8]) -> Option<[f64; 8]> {
        match self {
            NormalField::Affine { c, a } => {
                let mut v = *c;
                if let Some(m) = a {
                    for r in 0..8 {
                        v[r] += dot8(&m[r], x);
                    }
                }
                Some(v)
            }
            NormalField::Chartwise(_) => None,
        }
    }

    pub fn value(&self, chart: &Chart, u: &[f64]) -> [f64; 8] {
        match self {
            NormalField::Affine { .. } => self.value_at(&chart.position(u)).unwrap(),
            NormalField::Chartwise(f) => f(u),
        }
    }

    /// Ambient derivative of the field along a direction `w` (affine only).
    pub fn directional(&self, w: &[f64; 8]) -> Option<[f64; 8]> {
        match self {
            NormalField::Affine { a, .. } => Some(match a {
                Some(m) => {
                    let mut v = [0.0; 8];
                    for r in 0..8 {
                        v[r] = dot8(&m[r], w);
                    }
                    v
                }
                None => [0.0; 8],
            }),
            NormalField::Chartwise(_) => None,
        }
    }

    /// Ambient derivative along the chart axis: `d/dt η(F(u + t·e_axis))`,
    /// analytic for affine fields, a central difference otherwise.
    pub fn coord_derivative(&self, jet: &Jet1, u: &[f64], axis: usize, h: f64) -> [f64; 8] {
        match self {
            NormalField::Affine { .. } => self.directional(&jet.d1()[axis]).unwrap(),
            NormalField::Chartwise(f) => {
                let mut w = u.to_vec();
                w[axis] = u[axis] + h;
                let plus = f(&w);
                w[axis] = u[axis] - h;
                let minus = f(&w);
                let mut d = [0.0; 8];
                for c in 0..8 {
                    d[c] = (plus[c] - minus[c]) / (2.0 * h);
                }
                d
            }
        }
    }

    /// Linear combination of analytic fields; `None` when any term is chartwise.
    pub fn combine(terms: &[(f64, NormalField)]) -> Option<NormalField> {
        if !terms.iter().all(|(_, f)| f.is_analytic()) {
            return None;
        }
        let mut c = [0.0; 8];
        let mut a = [[0.0; 8]; 8];
        let mut has_linear = false;
        for (w, f) in terms {
            if let NormalField::Affine { c: fc, a: fa } = f {
                for i in 0..8 {
                    c[i] += w * fc[i];
                }
                if let Some(m) = fa {
                    has_linear = true;
                    for i in 0..8 {
                        for j in 0..8 {
                            a[i][j] += w * m[i][j];
                        }
                    }
                }
            }
        }
        Some(NormalField::Affine {
            c,
            a: if has_linear { Some(Box::new(a)) } else { None },
        })
    }
}

/// A unit normal section shipped with a catalog entry.
#[derive(Clone)]
pub struct NormalHint {
    pub label: String,
    pub field: NormalField,
    /// Whether the section is parallel in the normal connection (a property of
    /// the construction, re-verified numerically by the parallelism check).
    pub parallel: bool,
}

#[derive(Clone, Default)]
pub struct NormalHintSet {
    pub hints: Vec<NormalHint>,
}

/// Orthonormal frames at one chart point: tangent frame `E_a` (with its
/// expansion in chart derivatives) and normal frame inside the tangent space of
/// the 7-sphere.
#[derive(Debug, Clone)]
pub struct FrameField {
    pub u: Vec<f64>,
    pub x: [f64; 8],
    pub tangent: Vec<[f64; 8]>,
    /// `E_a = Σ_i coeffs[a][i] ∂_i F`.
    pub tangent_chart_coeffs: Vec<Vec<f64>>,
    pub normal: Vec<[f64; 8]>,
    pub normal_labels: Vec<String>,
}

/// Build orthonormal tangent and normal frames at `u`.
///
/// Tangents come from Gram-Schmidt on the chart derivatives in axis order. With
/// a hint set, normals are the Gram-Schmidt orthonormalization of the hints in
/// order (labels preserved); missing directions — and the whole normal frame
/// when no hints are given — are completed from the ambient basis e₁,…,e₈ in
/// that fixed order.
pub fn frames_at(chart: &Chart, u: &[f64], hints: Option<&NormalHintSet>) -> Result<FrameField> {
    const RANK_EPS: f64 = 1e-8;
    let d = chart.dim();
    let k = chart.codim();
    let jet = chart.jet1(u);
    let x = jet.x;

    let mut accepted: Vec<[f64; 8]> = vec![x];
    let mut tangent = Vec::with_capacity(d);
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(d);
    for a in 0..d {
        let mut w = jet.d1()[a];
        let mut coef = vec![0.0; d];
        coef[a] = 1.0;
        for _ in 0..2 {
            let cx = dot8(&w, &x);
            for i in 0..8 {
                w[i] -= cx * x[i];
            }
            for (b, e) in tangent.iter().enumerate() {
                let c = dot8(&w, e);
                for i in 0..8 {
                    w[i] -= c * e[i];
                }
                for i in 0..d {
                    coef[i] -= c * coeffs[b][i];
                }
            }
        }
        let n = norm8(&w);
        if n < RANK_EPS {
            return Err(Error::ChartDegeneracy {
                u: u.to_vec(),
                what: format!("tangent frame rank-deficient at derivative {a}"),
            });
        }
        for i in 0..8 {
            w[i] /= n;
        }
        for c in coef.iter_mut() {
            *c /= n;
        }
        accepted.push(w);
        tangent.push(w);
        coeffs.push(coef);
    }

    let mut normal = Vec::with_capacity(k);
    let mut labels = Vec::with_capacity(k);
    if let Some(set) = hints {
        for hint in &set.hints {
            if normal.len() == k {
                break;
            }
            let v = hint.field.value(chart, u);
            let w = orthonormalize_against(&accepted, &v, RANK_EPS).ok_or_else(|| {
                Error::ChartDegeneracy {
                    u: u.to_vec(),
                    what: format!("normal hint '{}' is degenerate here", hint.label),
                }
            })?;
            accepted.push(w);
            normal.push(w);
            labels.push(hint.label.clone());
        }
    }
    let mut ambient = 0;
    while normal.len() < k && ambient < 8 {
        let mut e = [0.0; 8];
        e[ambient] = 1.0;
        if let Some(w) = orthonormalize_against(&accepted, &e, RANK_EPS) {
            accepted.push(w);
            normal.push(w);
            labels.push(format!("ambient:e{}", ambient + 1));
        }
        ambient += 1;
    }
    if normal.len() < k {
        return Err(Error::ChartDegeneracy {
            u: u.to_vec(),
            what: format!("could not complete normal frame ({} of {k})", normal.len()),
        });
    }

    Ok(FrameField {
        u: u.to_vec(),
        x,
        tangent,
        tangent_chart_coeffs: coeffs,
        normal,
        normal_labels: labels,
    })
}

impl FrameField {
    /// Gram matrix of the full 8-frame {x, E_a, η_i}; identity when orthonormal.
    pub fn full_frame_gram_defect(&self) -> f64 {
        let mut frame: Vec<[f64; 8]> = vec![self.x];
        frame.extend_from_slice(&self.tangent);
        frame.extend_from_slice(&self.normal);
        let mut worst = 0.0f64;
        for (i, a) in frame.iter().enumerate() {
            for (j, b) in frame.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot8(a, b) - expect).abs());
            }
        }
        worst
    }
}

/// Covariant derivative (connection of the 7-sphere) of an ambient field along
/// the chart direction `∂_axis` at `u`: ambient derivative projected onto the
/// tangent space of the sphere at `F(u)`.
pub fn sphere_covariant_derivative(
    chart: &Chart,
    field: &NormalField,
    u: &[f64],
    axis: usize,
    h: f64,
) -> Result<[f64; 8]> {
    if !field.is_analytic() {
        chart.ensure_stencil(u, h)?;
    }
    let jet = chart.jet1(u);
    let dw = field.coord_derivative(&jet, u, axis, h);
    let radial = dot8(&dw, &jet.x);
    let mut out = dw;
    for i in 0..8 {
        out[i] -= radial * jet.x[i];
    }
    Ok(out)
}

/// Riemannian quadrature `Σ f·√g·Δu` over the grid (midpoint rule on the
/// half-cell-offset nodes). The reduction order is fixed.
pub fn integrate_fn(chart: &Chart, f: impl Fn(&[f64], &[f64; 8]) -> f64 + Sync) -> f64 {
    let cell = chart.cell_measure();
    let contributions = map_nodes(chart, |_, u| {
        let jet = chart.jet1(u);
        let md = metric_from_jet(chart, u, &jet).expect("metric defined on grid nodes");
        f(u, &jet.x) * md.sqrt_det * cell
    });
    contributions.iter().sum()
}

pub fn integrate(chart: &Chart, f: &ScalarField) -> f64 {
    integrate_fn(chart, |u, _| f.eval(u))
}

/// Quadrature of an ℝ⁸-valued integrand, plus the volume, in one sweep.
pub fn integrate_vec8(
    chart: &Chart,
    f: impl Fn(usize, &[f64], &[f64; 8]) -> [f64; 8] + Sync,
) -> ([f64; 8], f64) {
    let cell = chart.cell_measure();
    let contributions = map_nodes(chart, |i, u| {
        let jet = chart.jet1(u);
        let md = metric_from_jet(chart, u, &jet).expect("metric defined on grid nodes");
        let w = md.sqrt_det * cell;
        let v = f(i, u, &jet.x);
        let mut out = [0.0; 9];
        for c in 0..8 {
            out[c] = w * v[c];
        }
        out[8] = w;
        out
    });
    let mut sum = [0.0; 8];
    let mut vol = 0.0;
    for c in &contributions {
        for i in 0..8 {
            sum[i] += c[i];
        }
        vol += c[8];
    }
    (sum, vol)
}

/// Coarsen a grid until its node count fits under `cap`: repeatedly shrink the
/// first axis holding the largest count (by 2 while that keeps it ≥ 4, else by
/// 1, never below 4). Deterministic, parity-preserving for even counts.
pub fn cap_grid(grid: &mut [usize], cap: usize) {
    loop {
        let total: usize = grid.iter().product();
        if total <= cap {
            return;
        }
        let max = *grid.iter().max().unwrap();
        if max <= 4 {
            return;
        }
        let pos = grid.iter().position(|&n| n == max).unwrap();
        grid[pos] = if max >= 6 { max - 2 } else { max - 1 };
    }
}
