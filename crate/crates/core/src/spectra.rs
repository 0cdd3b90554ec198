//! Shape operators, their Hilbert-Schmidt Gram matrix in a normal frame, and
//! the spectral decomposition of the associated bundle map on normal sections.
//!
//! The shape operator of a normal section η is `S_η(X) = -(∇_X η)^⊤`, the sign
//! being the convention used throughout. In an orthonormal normal frame the
//! bundle map η ↦ ⟨S_η, S_·⟩ is represented by the Gram matrix
//! `G_{ij} = ⟨S_{η_i}, S_{η_j}⟩`, diagonalized here by cyclic Jacobi rotations.

use serde::Serialize;

use crate::chart::{frames_at, Chart, FrameField, NormalField, NormalHintSet};
use crate::linalg::{dot8, jacobi_eigen, norm8};
use crate::{Error, Result};

/// A shape operator expressed in the orthonormal tangent frame of a
/// [`FrameField`], row-major d×d.
#[derive(Debug, Clone)]
pub struct ShapeOperatorMatrix {
    pub d: usize,
    pub entries: Vec<f64>,
    pub normal_label: String,
}

impl ShapeOperatorMatrix {
    pub fn trace(&self) -> f64 {
        (0..self.d).map(|a| self.entries[a * self.d + a]).sum()
    }

    /// Squared Hilbert-Schmidt norm (sum of squared entries).
    pub fn hs_norm_sq(&self) -> f64 {
        self.entries.iter().map(|e| e * e).sum()
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.d {
            for b in (a + 1)..self.d {
                worst =
                    worst.max((self.entries[a * self.d + b] - self.entries[b * self.d + a]).abs());
            }
        }
        worst
    }

    /// Eigenvalues (principal curvatures along the normal), sorted ascending.
    /// The matrix is symmetrized first; the symmetry defect is an invariant
    /// checked separately.
    pub fn principal_curvatures(&self) -> Result<Vec<f64>> {
        let d = self.d;
        let mut sym = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                sym[a * d + b] = 0.5 * (self.entries[a * d + b] + self.entries[b * d + a]);
            }
        }
        let (vals, _) = jacobi_eigen(d, &sym)?;
        Ok(vals)
    }
}

/// Covariant derivatives of a normal field along each tangent frame vector,
/// projected onto the tangent space of the sphere.
fn covariant_along_frame(
    chart: &Chart,
    frames: &FrameField,
    field: &NormalField,
    h: f64,
) -> Result<Vec<[f64; 8]>> {
    let d = frames.tangent.len();
    let x = frames.x;
    if field.is_analytic() {
        let mut out = Vec::with_capacity(d);
        for e in &frames.tangent {
            let mut dv = field.directional(e).unwrap();
            let radial = dot8(&dv, &x);
            for i in 0..8 {
                dv[i] -= radial * x[i];
            }
            out.push(dv);
        }
        Ok(out)
    } else {
        chart.ensure_stencil(&frames.u, h)?;
        let jet = chart.jet1(&frames.u);
        let per_axis: Vec<[f64; 8]> = (0..d)
            .map(|i| field.coord_derivative(&jet, &frames.u, i, h))
            .collect();
        let mut out = Vec::with_capacity(d);
        for coef in &frames.tangent_chart_coeffs {
            let mut dv = [0.0; 8];
            for (i, &c) in coef.iter().enumerate() {
                for r in 0..8 {
                    dv[r] += c * per_axis[i][r];
                }
            }
            let radial = dot8(&dv, &x);
            for r in 0..8 {
                dv[r] -= radial * x[r];
            }
            out.push(dv);
        }
        Ok(out)
    }
}

/// Shape operator of η at the frame point: `M_{ab} = ⟨-(∇_{E_a}η)^⊤, E_b⟩`.
pub fn shape_operator(
    chart: &Chart,
    frames: &FrameField,
    field: &NormalField,
    h: f64,
    label: &str,
) -> Result<ShapeOperatorMatrix> {
    let d = frames.tangent.len();
    let cov = covariant_along_frame(chart, frames, field, h)?;
    let mut entries = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            entries[a * d + b] = -dot8(&cov[a], &frames.tangent[b]);
        }
    }
    Ok(ShapeOperatorMatrix {
        d,
        entries,
        normal_label: label.to_string(),
    })
}

/// Largest norm, over the tangent frame directions, of the normal-bundle
/// component of ∇_{E_a}η. Zero exactly when η is parallel in the normal
/// connection at this point.
pub fn normal_connection_defect(
    chart: &Chart,
    frames: &FrameField,
    field: &NormalField,
    h: f64,
) -> Result<f64> {
    let cov = covariant_along_frame(chart, frames, field, h)?;
    let mut worst = 0.0f64;
    for dv in &cov {
        let mut perp = *dv;
        for e in &frames.tangent {
            let c = dot8(&perp, e);
            for i in 0..8 {
                perp[i] -= c * e[i];
            }
        }
        worst = worst.max(norm8(&perp));
    }
    Ok(worst)
}

/// Gram matrix of the shape operators of a normal frame with its eigenvalues
/// and eigenvector coefficient columns (ascending, deterministic Jacobi basis,
/// degeneracy multiplicities recorded).
#[derive(Debug, Clone, Serialize)]
pub struct GramSpectrum {
    pub k: usize,
    pub gram: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    /// `vectors[j]` is the coefficient column of the j-th eigenvector over the
    /// normal frame that produced the Gram matrix.
    pub vectors: Vec<Vec<f64>>,
    /// Multiplicities of the eigenvalue clusters in ascending order.
    pub degeneracies: Vec<usize>,
}

pub fn gram_from_ops(ops: &[ShapeOperatorMatrix]) -> Result<GramSpectrum> {
    let k = ops.len();
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let v: f64 = ops[i]
                .entries
                .iter()
                .zip(&ops[j].entries)
                .map(|(a, b)| a * b)
                .sum();
            gram[i * k + j] = v;
            gram[j * k + i] = v;
        }
    }
    let (sigma, vecs) = jacobi_eigen(k, &gram)?;

    let scale = sigma.iter().fold(1.0f64, |m, s| m.max(s.abs()));
    let mut degeneracies = Vec::new();
    let mut run = 1;
    for j in 1..k {
        if (sigma[j] - sigma[j - 1]).abs() <= 1e-9 * scale {
            run += 1;
        } else {
            degeneracies.push(run);
            run = 1;
        }
    }
    degeneracies.push(run);

    Ok(GramSpectrum {
        k,
        gram: (0..k).map(|i| gram[i * k..(i + 1) * k].to_vec()).collect(),
        sigma,
        vectors: (0..k)
            .map(|j| (0..k).map(|i| vecs[i * k + j]).collect())
            .collect(),
        degeneracies,
    })
}

/// Shape operators of every hint normal at the frame point.
pub fn hint_shape_operators(
    chart: &Chart,
    frames: &FrameField,
    hints: &NormalHintSet,
    h: f64,
) -> Result<Vec<ShapeOperatorMatrix>> {
    hints
        .hints
        .iter()
        .map(|hint| shape_operator(chart, frames, &hint.field, h, &hint.label))
        .collect()
}

/// Gram spectrum of the hint frame at one chart point.
pub fn gram_spectrum(
    chart: &Chart,
    frames: &FrameField,
    hints: &NormalHintSet,
    h: f64,
) -> Result<GramSpectrum> {
    let ops = hint_shape_operators(chart, frames, hints, h)?;
    gram_from_ops(&ops)
}

/// Result of checking one coefficient column against the Gram matrix.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenCheck {
    pub is_eigenvector: bool,
    pub eigenvalue: f64,
    pub residual: f64,
}

/// Residual of the eigenvector equation: `‖G·c − (cᵀGc)·c‖` for a unit column c.
pub fn bstarb_eigencheck(spectrum: &GramSpectrum, coeffs: &[f64], tol: f64) -> Result<EigenCheck> {
    let k = spectrum.k;
    if coeffs.len() != k {
        return Err(Error::Domain(format!(
            "coefficient column has length {}, normal frame has {k}",
            coeffs.len()
        )));
    }
    let norm: f64 = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "coefficient column must be unit, got norm {norm}"
        )));
    }
    let mut gc = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            gc[i] += spectrum.gram[i][j] * coeffs[j];
        }
    }
    let eigenvalue: f64 = gc.iter().zip(coeffs).map(|(a, b)| a * b).sum();
    let residual: f64 = gc
        .iter()
        .zip(coeffs)
        .map(|(a, b)| (a - eigenvalue * b) * (a - eigenvalue * b))
        .sum::<f64>()
        .sqrt();
    Ok(EigenCheck {
        is_eigenvector: residual < tol,
        eigenvalue,
        residual,
    })
}

/// Aggregated statistics of one sweep over the grid: spectra constancy, flat
/// normal bundle and minimality witnesses, and the parallelism defect of the
/// hint frame.
#[derive(Debug, Clone, Serialize)]
pub struct SpectraScan {
    pub nodes: usize,
    pub ref_spectrum: GramSpectrum,
    /// max over nodes and entries of |G(u) − G(u₀)|
    pub gram_spread: f64,
    /// max over nodes and j of |σ_j(u) − σ_j(u₀)|
    pub sigma_spread: f64,
    /// max over nodes and hint pairs of ‖[S_i, S_j]‖
    pub commutator_max: f64,
    /// max over nodes and hints of the per-node principal-curvature spread
    pub principal_spread: f64,
    /// max over nodes of ‖Σ_i tr(S_{η_i}) η_i‖ (mean curvature vector)
    pub mean_curvature_max: f64,
    /// max over nodes and hints of |tr S_{η_i}|
    pub trace_max: f64,
    /// max over nodes and hints of the shape-operator symmetry defect
    pub symmetry_max: f64,
    /// max over nodes and hints of the normal-connection defect
    pub parallel_defect_max: f64,
}

struct NodeStats {
    gram: Vec<f64>,
    sigma: Vec<f64>,
    principal: Vec<Vec<f64>>,
    commutator: f64,
    mean_curvature: f64,
    trace: f64,
    symmetry: f64,
    parallel: f64,
}

fn node_stats(chart: &Chart, hints: &NormalHintSet, u: &[f64], h: f64) -> Result<NodeStats> {
    let frames = frames_at(chart, u, Some(hints))?;
    let ops = hint_shape_operators(chart, &frames, hints, h)?;
    let k = ops.len();
    let d = frames.tangent.len();

    let spectrum = gram_from_ops(&ops)?;
    let mut gram_flat = Vec::with_capacity(k * k);
    for row in &spectrum.gram {
        gram_flat.extend_from_slice(row);
    }

    let mut principal = Vec::with_capacity(k);
    let mut trace = 0.0f64;
    let mut symmetry = 0.0f64;
    let mut trace_sq_sum = 0.0;
    for op in &ops {
        principal.push(op.principal_curvatures()?);
        let t = op.trace();
        trace = trace.max(t.abs());
        trace_sq_sum += t * t;
        symmetry = symmetry.max(op.symmetry_defect());
    }

    let mut commutator = 0.0f64;
    for i in 0..k {
        for j in (i + 1)..k {
            let mut frob = 0.0;
            for a in 0..d {
                for b in 0..d {
                    let mut cab = 0.0;
                    for c in 0..d {
                        cab += ops[i].entries[a * d + c] * ops[j].entries[c * d + b]
                            - ops[j].entries[a * d + c] * ops[i].entries[c * d + b];
                    }
                    frob += cab * cab;
                }
            }
            commutator = commutator.max(frob.sqrt());
        }
    }

    let mut parallel = 0.0f64;
    for hint in &hints.hints {
        parallel = parallel.max(normal_connection_defect(chart, &frames, &hint.field, h)?);
    }

    Ok(NodeStats {
        gram: gram_flat,
        sigma: spectrum.sigma,
        principal,
        commutator,
        mean_curvature: trace_sq_sum.sqrt(),
        trace,
        symmetry,
        parallel,
    })
}

/// One parallel pass over all grid nodes, reduced in node order.
pub fn spectra_scan(chart: &Chart, hints: &NormalHintSet, h: f64) -> Result<SpectraScan> {
    let per_node = crate::chart::map_nodes(chart, |_, u| node_stats(chart, hints, u, h));

    let mut iter = per_node.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Domain("empty grid".into()))??;
    let u0 = chart.node_u(0);
    let frames0 = frames_at(chart, &u0, Some(hints))?;
    let ops0 = hint_shape_operators(chart, &frames0, hints, h)?;
    let ref_spectrum = gram_from_ops(&ops0)?;

    let mut scan = SpectraScan {
        nodes: 1,
        ref_spectrum,
        gram_spread: 0.0,
        sigma_spread: 0.0,
        commutator_max: first.commutator,
        principal_spread: 0.0,
        mean_curvature_max: first.mean_curvature,
        trace_max: first.trace,
        symmetry_max: first.symmetry,
        parallel_defect_max: first.parallel,
    };
    for stats in iter {
        let stats = stats?;
        scan.nodes += 1;
        for (a, b) in stats.gram.iter().zip(&first.gram) {
            scan.gram_spread = scan.gram_spread.max((a - b).abs());
        }
        for (a, b) in stats.sigma.iter().zip(&first.sigma) {
            scan.sigma_spread = scan.sigma_spread.max((a - b).abs());
        }
        for (pa, pb) in stats.principal.iter().zip(&first.principal) {
            for (a, b) in pa.iter().zip(pb) {
                scan.principal_spread = scan.principal_spread.max((a - b).abs());
            }
        }
        scan.commutator_max = scan.commutator_max.max(stats.commutator);
        scan.mean_curvature_max = scan.mean_curvature_max.max(stats.mean_curvature);
        scan.trace_max = scan.trace_max.max(stats.trace);
        scan.symmetry_max = scan.symmetry_max.max(stats.symmetry);
        scan.parallel_defect_max = scan.parallel_defect_max.max(stats.parallel);
    }
    Ok(scan)
}

/// Combine hint fields into one normal section with the given coefficients.
pub fn combined_normal(hints: &NormalHintSet, coeffs: &[f64]) -> Result<NormalField> {
    if coeffs.len() != hints.hints.len() {
        return Err(Error::Domain(format!(
            "{} coefficients for {} hints",
            coeffs.len(),
            hints.hints.len()
        )));
    }
    let terms: Vec<(f64, NormalField)> = coeffs
        .iter()
        .zip(&hints.hints)
        .map(|(&c, h)| (c, h.field.clone()))
        .collect();
    NormalField::combine(&terms)
        .ok_or_else(|| Error::Domain("cannot combine non-analytic hint fields".into()))
}
