//! The octonionic Gauss map of a unit normal section, its Laplacian, and the
//! residual checks built on them: the pointwise Laplacian identity, the
//! eigenmap identity `Δγ_η = -(7-k+σ)γ_η`, and the harmonicity defect.
//!
//! For a unit normal section η of `M ⊂ S^7` the map is
//! `γ_η(x) = x⁻¹·η(x) = conj(x)·η(x)` (the inverse of a unit octonion is its
//! conjugate, so no division enters). Values lie on the unit sphere of the
//! purely imaginary octonions: `‖γ‖ = 1` by the norm law and `Re γ = 0` because
//! left translation by `conj(x)` is orthogonal and `η ⊥ x`.

use serde::Serialize;

use crate::algebra::{oct_conj, oct_mul};
use crate::chart::{
    divergence_laplacian, fd_gradient, frames_at, map_nodes, metric_from_jet, Chart, Jet1,
    NormalField, NormalHintSet,
};
use crate::linalg::{dot8, norm8, MAX_DIM};
use crate::spectra::{combined_normal, gram_from_ops, hint_shape_operators, GramSpectrum};
use crate::tol::Tolerances;
use crate::{Error, Result};

/// Gauss map of a normal section on one chart: grid values plus the analytic
/// evaluator (the section itself).
#[derive(Clone)]
pub struct GaussMapField {
    pub label: String,
    pub eta: NormalField,
    pub values: Vec<[f64; 8]>,
}

/// Pointwise Gauss map with precondition checks. The section must be unit and
/// orthogonal to the position and to every chart tangent direction; the error
/// names the first inner product that fails.
pub fn gauss_map(chart: &Chart, eta: &NormalField, u: &[f64], tol: f64) -> Result<[f64; 8]> {
    let jet = chart.jet1(u);
    let v = eta.value(chart, u);
    let n = norm8(&v);
    if (n - 1.0).abs() > tol {
        return Err(Error::Domain(format!(
            "gauss map precondition failed: ‖η‖ = {n} is not 1 at u = {u:?}"
        )));
    }
    let vx = dot8(&v, &jet.x);
    if vx.abs() > tol {
        return Err(Error::Domain(format!(
            "gauss map precondition failed: ⟨η, x⟩ = {vx:e} at u = {u:?}"
        )));
    }
    for (i, t) in jet.d1().iter().enumerate() {
        let vt = dot8(&v, t) / norm8(t);
        if vt.abs() > tol {
            return Err(Error::Domain(format!(
                "gauss map precondition failed: ⟨η, ∂_{i}F⟩ = {vt:e} at u = {u:?}"
            )));
        }
    }
    Ok(oct_mul(&oct_conj(&jet.x), &v))
}

/// Build the Gauss map on the whole grid, validating the image invariants
/// (unit norm to 1e-12, vanishing real part to 1e-10) at every node.
pub fn gauss_field(
    chart: &Chart,
    eta: NormalField,
    label: impl Into<String>,
) -> Result<GaussMapField> {
    let values_res = map_nodes(chart, |_, u| -> Result<[f64; 8]> {
        let x = chart.position(u);
        let v = eta.value(chart, u);
        let g = oct_mul(&oct_conj(&x), &v);
        let n = norm8(&g);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "gauss image leaves the unit sphere: ‖γ‖ = {n} at u = {u:?}"
            )));
        }
        if g[0].abs() > 1e-10 {
            return Err(Error::Domain(format!(
                "gauss image has real part {:e} at u = {u:?}",
                g[0]
            )));
        }
        Ok(g)
    });
    let mut values = Vec::with_capacity(values_res.len());
    for v in values_res {
        values.push(v?);
    }
    Ok(GaussMapField {
        label: label.into(),
        eta,
        values,
    })
}

impl GaussMapField {
    pub fn value(&self, chart: &Chart, u: &[f64]) -> [f64; 8] {
        let x = chart.position(u);
        oct_mul(&oct_conj(&x), &self.eta.value(chart, u))
    }
}

/// Analytic chart gradient of γ from the immersion jet:
/// `∂_jγ = conj(∂_jF)·η + conj(F)·(dη·∂_jF)`, written into `out`.
fn analytic_gamma_gradient(eta: &NormalField, jet: &Jet1, out: &mut [[f64; 8]; MAX_DIM]) {
    let ev = eta.value_at(&jet.x).expect("analytic field");
    let cx = oct_conj(&jet.x);
    for (j, dj) in jet.d1().iter().enumerate() {
        let mut g = oct_mul(&oct_conj(dj), &ev);
        let de = eta.directional(dj).expect("analytic field");
        let second = oct_mul(&cx, &de);
        for c in 0..8 {
            g[c] += second[c];
        }
        out[j] = g;
    }
}

/// Componentwise Laplacian of the Gauss map over the fixed ambient basis,
/// assembled in divergence form. The inner gradient is analytic whenever the
/// section is; otherwise nested central differences are used.
pub fn gauss_laplacian(chart: &Chart, eta: &NormalField, u: &[f64], h: f64) -> Result<[f64; 8]> {
    if eta.is_analytic() {
        let grad = |_w: &[f64], jet: &Jet1, out: &mut [[f64; 8]; MAX_DIM]| -> Result<()> {
            analytic_gamma_gradient(eta, jet, out);
            Ok(())
        };
        divergence_laplacian::<8>(chart, u, h, h, &grad)
    } else {
        let value = |w: &[f64]| {
            let x = chart.position(w);
            oct_mul(&oct_conj(&x), &eta.value(chart, w))
        };
        let grad = |w: &[f64], _jet: &Jet1, out: &mut [[f64; 8]; MAX_DIM]| -> Result<()> {
            fd_gradient::<8>(&value, w, h, out);
            Ok(())
        };
        divergence_laplacian::<8>(chart, u, h, 2.0 * h, &grad)
    }
}

/// Laplacian of γ at every grid node; `None` where the stencil would leave the
/// domain of a non-periodic axis (such nodes are excluded from residuals).
pub fn laplacian_grid(chart: &Chart, eta: &NormalField, h: f64) -> Result<Vec<Option<[f64; 8]>>> {
    let reach = if eta.is_analytic() { h } else { 2.0 * h };
    let margin = 2.0 * reach;
    let per_node = map_nodes(chart, |_, u| -> Result<Option<[f64; 8]>> {
        if !chart.is_interior(u, margin) {
            return Ok(None);
        }
        Ok(Some(gauss_laplacian(chart, eta, u, h)?))
    });
    let mut out = Vec::with_capacity(per_node.len());
    for v in per_node {
        out.push(v?);
    }
    Ok(out)
}

/// Quadrature weights √g·Δu of every grid node.
pub fn node_weights(chart: &Chart) -> Vec<f64> {
    let cell = chart.cell_measure();
    map_nodes(chart, |_, u| {
        let jet = chart.jet1(u);
        metric_from_jet(chart, u, &jet)
            .map(|md| md.sqrt_det * cell)
            .unwrap_or(0.0)
    })
}

/// Verdict of one eigenmap check.
#[derive(Debug, Clone, Serialize)]
pub struct EigenmapVerdict {
    pub label: String,
    /// claimed eigenvalue 7 − k + σ
    pub lambda: f64,
    /// quadrature-weighted relative L² norm of Δγ + λγ
    pub residual_l2: f64,
    /// largest pointwise residual norm
    pub residual_max: f64,
    /// largest component of Δγ orthogonal to γ (harmonicity defect)
    pub tangency_defect: f64,
    /// worst single-component residual (the eigenfunction statement applied to
    /// each ⟨γ, e_c⟩)
    pub component_residual_max: f64,
    pub nodes: usize,
    pub pass: bool,
}

/// Aggregate an eigenmap verdict from precomputed Laplacians.
pub fn aggregate_eigenmap(
    field: &GaussMapField,
    laplacians: &[Option<[f64; 8]>],
    weights: &[f64],
    lambda: f64,
    tol: &Tolerances,
) -> EigenmapVerdict {
    let mut wsum = 0.0;
    let mut wres = 0.0;
    let mut res_max = 0.0f64;
    let mut comp_max = 0.0f64;
    let mut tangency = 0.0f64;
    let mut nodes = 0;
    for ((lap, g), &w) in laplacians.iter().zip(&field.values).zip(weights) {
        let Some(lap) = lap else { continue };
        nodes += 1;
        let mut r = [0.0; 8];
        for c in 0..8 {
            r[c] = lap[c] + lambda * g[c];
        }
        let rn = norm8(&r);
        wsum += w;
        wres += w * rn * rn;
        res_max = res_max.max(rn);
        for rc in r {
            comp_max = comp_max.max(rc.abs());
        }
        let radial = dot8(lap, g);
        let mut perp = *lap;
        for c in 0..8 {
            perp[c] -= radial * g[c];
        }
        tangency = tangency.max(norm8(&perp));
    }
    let residual_l2 = if wsum > 0.0 {
        (wres / wsum).sqrt() / lambda
    } else {
        f64::INFINITY
    };
    EigenmapVerdict {
        label: field.label.clone(),
        lambda,
        residual_l2,
        residual_max: res_max,
        tangency_defect: tangency,
        component_residual_max: comp_max,
        nodes,
        pass: residual_l2 < tol.eigenmap_l2,
    }
}

/// Verify the eigenmap identity for the j-th eigen-direction of a spectrum.
///
/// When a constancy spread is supplied and exceeds its tolerance the check is
/// refused: the eigenvalue 7−k+σ_j is only defined for a constant spectrum.
pub fn eigenmap_verify(
    chart: &Chart,
    hints: &NormalHintSet,
    spectrum: &GramSpectrum,
    j: usize,
    h: f64,
    tol: &Tolerances,
    sigma_spread: Option<f64>,
) -> Result<EigenmapVerdict> {
    if let Some(spread) = sigma_spread {
        if spread > tol.constancy {
            return Err(Error::Refused(format!(
                "spectrum is not constant over the grid (spread {spread:e} > {:e})",
                tol.constancy
            )));
        }
    }
    let coeffs = &spectrum.vectors[j];
    let eta = combined_normal(hints, coeffs)?;
    let field = gauss_field(chart, eta, format!("eigen:{j}"))?;
    let laps = laplacian_grid(chart, &field.eta, h)?;
    let weights = node_weights(chart);
    let lambda = (7 - chart.codim()) as f64 + spectrum.sigma[j];
    Ok(aggregate_eigenmap(&field, &laps, &weights, lambda, tol))
}

/// Harmonicity defect over a cached grid of values and Laplacians:
/// quadrature-weighted L² (the pass criterion — pointwise FD truncation grows
/// near chart poles, where the weight vanishes) and the pointwise maximum.
pub fn harmonicity_from_cache(
    values: &[[f64; 8]],
    laplacians: &[Option<[f64; 8]>],
    weights: &[f64],
) -> (f64, f64) {
    let mut worst = 0.0f64;
    let mut wsum = 0.0;
    let mut wdef = 0.0;
    for ((g, lap), &w) in values.iter().zip(laplacians).zip(weights) {
        let Some(lap) = lap else { continue };
        let radial = dot8(lap, g) / dot8(g, g);
        let mut perp = *lap;
        for c in 0..8 {
            perp[c] -= radial * g[c];
        }
        let n = norm8(&perp);
        worst = worst.max(n);
        wsum += w;
        wdef += w * n * n;
    }
    let l2 = if wsum > 0.0 {
        (wdef / wsum).sqrt()
    } else {
        f64::INFINITY
    };
    (l2, worst)
}

/// Norm of the component of Δγ orthogonal to γ at one point; zero exactly when
/// the map is harmonic there (Δγ parallel to γ).
pub fn harmonicity_defect(chart: &Chart, eta: &NormalField, u: &[f64], h: f64) -> Result<f64> {
    let x = chart.position(u);
    let g = oct_mul(&oct_conj(&x), &eta.value(chart, u));
    let lap = gauss_laplacian(chart, eta, u, h)?;
    let gg = dot8(&g, &g);
    let radial = dot8(&lap, &g) / gg;
    let mut perp = lap;
    for c in 0..8 {
        perp[c] -= radial * g[c];
    }
    Ok(norm8(&perp))
}

/// Pointwise residual of the Laplacian identity for `f = ⟨γ_η, v⟩`:
/// `Δf + Σ_k (⟨S_η, S_{η_k}⟩ + d·δ_{1k})·⟨γ_{η_k}, v⟩`, where the hint frame is
/// reordered so the tested section comes first.
pub fn lemma_residual(
    chart: &Chart,
    hints: &NormalHintSet,
    tested: usize,
    v: &[f64; 8],
    u: &[f64],
    h: f64,
) -> Result<f64> {
    if tested >= hints.hints.len() {
        return Err(Error::Domain(format!(
            "tested section index {tested} out of range ({} hints)",
            hints.hints.len()
        )));
    }
    let mut order: Vec<usize> = vec![tested];
    order.extend((0..hints.hints.len()).filter(|&i| i != tested));
    let reordered = NormalHintSet {
        hints: order.iter().map(|&i| hints.hints[i].clone()).collect(),
    };

    let frames = frames_at(chart, u, Some(&reordered))?;
    let ops = hint_shape_operators(chart, &frames, &reordered, h)?;
    let spectrum = gram_from_ops(&ops)?;
    let d = chart.dim() as f64;

    let x = chart.position(u);
    let cx = oct_conj(&x);
    let lap = gauss_laplacian(chart, &reordered.hints[0].field, u, h)?;
    let lhs = dot8(&lap, v);

    let mut rhs = 0.0;
    for (k, hint) in reordered.hints.iter().enumerate() {
        let gamma_k = oct_mul(&cx, &hint.field.value(chart, u));
        let coef = spectrum.gram[0][k] + if k == 0 { d } else { 0.0 };
        rhs -= coef * dot8(&gamma_k, v);
    }
    Ok((lhs - rhs).abs())
}

/// Laplacian-identity residual over all interior nodes and a sweep of
/// directions v, reusing a precomputed Laplacian grid of the tested section.
/// Returns the quadrature-weighted L² residual (worst direction) and the
/// pointwise maximum.
pub fn lemma_scan(
    chart: &Chart,
    hints: &NormalHintSet,
    tested: usize,
    directions: &[[f64; 8]],
    laplacians: &[Option<[f64; 8]>],
    weights: &[f64],
    h: f64,
) -> Result<(f64, f64)> {
    let mut order: Vec<usize> = vec![tested];
    order.extend((0..hints.hints.len()).filter(|&i| i != tested));
    let reordered = NormalHintSet {
        hints: order.iter().map(|&i| hints.hints[i].clone()).collect(),
    };
    let d = chart.dim() as f64;
    let nv = directions.len();

    // per node: squared residual per direction plus the pointwise worst
    let per_node = map_nodes(chart, |idx, u| -> Result<Option<Vec<f64>>> {
        let Some(lap) = laplacians[idx] else {
            return Ok(None);
        };
        let frames = frames_at(chart, u, Some(&reordered))?;
        let ops = hint_shape_operators(chart, &frames, &reordered, h)?;
        let spectrum = gram_from_ops(&ops)?;
        let x = chart.position(u);
        let cx = oct_conj(&x);
        let gammas: Vec<[f64; 8]> = reordered
            .hints
            .iter()
            .map(|hint| oct_mul(&cx, &hint.field.value(chart, u)))
            .collect();
        let mut residuals = Vec::with_capacity(nv);
        for v in directions {
            let lhs = dot8(&lap, v);
            let mut rhs = 0.0;
            for (k, gamma_k) in gammas.iter().enumerate() {
                let coef = spectrum.gram[0][k] + if k == 0 { d } else { 0.0 };
                rhs -= coef * dot8(gamma_k, v);
            }
            residuals.push((lhs - rhs).abs());
        }
        Ok(Some(residuals))
    });

    let mut worst = 0.0f64;
    let mut wsum = 0.0;
    let mut wres = vec![0.0f64; nv];
    for (r, &w) in per_node.into_iter().zip(weights) {
        let Some(residuals) = r? else { continue };
        wsum += w;
        for (acc, res) in wres.iter_mut().zip(&residuals) {
            *acc += w * res * res;
            worst = worst.max(*res);
        }
    }
    let l2 = if wsum > 0.0 {
        wres.iter()
            .map(|acc| (acc / wsum).sqrt())
            .fold(0.0f64, f64::max)
    } else {
        f64::INFINITY
    };
    Ok((l2, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{cd_multiply, CDElement};
    use crate::catalog::{build_chart, parse_spec};
    use crate::spectra::gram_spectrum;

    fn setup(spec_text: &str, grid: &[usize]) -> (Chart, NormalHintSet) {
        let spec = parse_spec(spec_text).unwrap();
        build_chart(&spec, grid).unwrap()
    }

    #[test]
    fn gauss_map_formula_at_basis_point() {
        // At x = e₁ of the great sphere {x₈ = 0} with η = e₈:
        // γ = conj(e₁)·e₈ = −e₁·e₈, cross-checked through the recursion.
        let e1 = CDElement::basis(3, 1);
        let e8 = CDElement::basis(3, 7);
        let expect = cd_multiply(&e1, &e8).unwrap().scale(-1.0);

        let mut x = [0.0; 8];
        x[1] = 1.0;
        let mut eta = [0.0; 8];
        eta[7] = 1.0;
        let got = oct_mul(&oct_conj(&x), &eta);
        for c in 0..8 {
            assert!((got[c] - expect.coords()[c]).abs() < 1e-15);
        }
    }

    #[test]
    fn gauss_image_invariants_on_grid() {
        let (chart, hints) = setup("product:1,1,3", &[8, 8, 4, 4, 8]);
        for hint in &hints.hints {
            let field = gauss_field(&chart, hint.field.clone(), hint.label.clone()).unwrap();
            for g in &field.values {
                assert!((norm8(g) - 1.0).abs() < 1e-12);
                assert!(g[0].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gauss_map_rejects_non_normal_sections() {
        // e₈ is not normal to the full product S³×S³ (it has a tangent part)
        let (chart, _) = setup("product:3,3", &[4, 4, 6, 4, 4, 6]);
        let mut e8 = [0.0; 8];
        e8[7] = 1.0;
        let eta = NormalField::constant(e8);
        let u = chart.node_u(10);
        let err = gauss_map(&chart, &eta, &u, 1e-8).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("⟨η,"), "unexpected message: {msg}");
    }

    #[test]
    fn constant_gauss_field_has_zero_laplacian() {
        // degenerate control field: η(x) = x·γ₀ gives γ ≡ γ₀ by alternativity,
        // so the componentwise Laplacian must vanish
        use crate::algebra::{CDElement, TranslationMatrix};
        let gamma0 = CDElement::from_coords(vec![0.0, 0.6, 0.0, 0.8, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let right = TranslationMatrix::right(&gamma0).unwrap();
        let eta = NormalField::linear(right.entries);

        let (chart, _) = setup("compose:great:3/product:1,1", &[16, 16]);
        for idx in [3, 77, 200] {
            let u = chart.node_u(idx);
            let x = chart.position(&u);
            let g = oct_mul(&oct_conj(&x), &eta.value(&chart, &u));
            for (c, expect) in g.iter().zip(gamma0.coords()) {
                assert!((c - expect).abs() < 1e-14);
            }
            let lap = gauss_laplacian(&chart, &eta, &u, 1e-3).unwrap();
            for c in lap {
                assert!(c.abs() < 1e-9, "laplacian component {c}");
            }
        }
    }

    /// Node whose polar angles all sit near π/2, away from the chart poles
    /// where the FD truncation constant grows.
    fn central_node(chart: &Chart) -> usize {
        let mut best = 0;
        let mut best_score = f64::INFINITY;
        for idx in 0..chart.node_count() {
            let u = chart.node_u(idx);
            let score: f64 = chart
                .axes()
                .iter()
                .zip(&u)
                .map(|(ax, &c)| {
                    if ax.periodic {
                        0.0
                    } else {
                        (c - std::f64::consts::FRAC_PI_2).abs()
                    }
                })
                .sum();
            if score < best_score {
                best_score = score;
                best = idx;
            }
        }
        best
    }

    #[test]
    fn great_sphere_laplacian_is_minus_six_gamma() {
        let (chart, hints) = setup("great:6", &[4, 4, 4, 4, 4, 6]);
        let eta = &hints.hints[0].field;
        for idx in [central_node(&chart), central_node(&chart) + 1] {
            let u = chart.node_u(idx);
            let g = gauss_map(&chart, eta, &u, 1e-8).unwrap();
            let lap = gauss_laplacian(&chart, eta, &u, 1e-3).unwrap();
            for c in 0..8 {
                assert!(
                    (lap[c] + 6.0 * g[c]).abs() < 1e-5,
                    "component {c}: {} vs {}",
                    lap[c],
                    -6.0 * g[c]
                );
            }
        }
    }

    #[test]
    fn clifford_laplacian_is_minus_twelve_gamma() {
        let (chart, hints) = setup("product:3,3", &[4, 4, 6, 4, 4, 6]);
        let eta = &hints.hints[0].field;
        let u = chart.node_u(123);
        let g = gauss_map(&chart, eta, &u, 1e-8).unwrap();
        let lap = gauss_laplacian(&chart, eta, &u, 1e-3).unwrap();
        for c in 0..8 {
            assert!((lap[c] + 12.0 * g[c]).abs() < 1e-4);
        }
    }

    #[test]
    fn compose_eigenmaps_all_verify() {
        let (chart, hints) = setup("compose:great:3/product:1,1", &[24, 24]);
        let u0 = chart.node_u(0);
        let frames = frames_at(&chart, &u0, Some(&hints)).unwrap();
        let spectrum = gram_spectrum(&chart, &frames, &hints, 1e-3).unwrap();
        let tol = Tolerances::default();
        let expected_lambda = [2.0, 2.0, 2.0, 2.0, 4.0];
        for j in 0..5 {
            let verdict =
                eigenmap_verify(&chart, &hints, &spectrum, j, 1e-3, &tol, Some(0.0)).unwrap();
            assert!((verdict.lambda - expected_lambda[j]).abs() < 1e-9);
            assert!(
                verdict.pass,
                "direction {j}: residual {}",
                verdict.residual_l2
            );
            assert!(verdict.residual_l2 < 1e-4);
        }

        // non-constant spectrum is refused
        let err = eigenmap_verify(&chart, &hints, &spectrum, 0, 1e-3, &tol, Some(1.0)).unwrap_err();
        assert!(matches!(err, Error::Refused(_)));
    }

    #[test]
    fn lemma_residual_great_sphere() {
        let (chart, hints) = setup("great:6", &[4, 4, 4, 4, 4, 6]);
        let mut v = [0.0; 8];
        v[3] = 0.6;
        v[5] = 0.8;
        for idx in [central_node(&chart), central_node(&chart) + 2] {
            let u = chart.node_u(idx);
            let r = lemma_residual(&chart, &hints, 0, &v, &u, 1e-3).unwrap();
            assert!(r < 1e-5, "residual {r}");
        }
    }

    #[test]
    fn lemma_rhs_coefficient_is_ten_on_codim2_product() {
        // G = 5·I and d = 5, so the identity reduces to Δf = −10 f
        let (chart, hints) = setup("product:1,1,3", &[8, 8, 4, 4, 8]);
        let u = chart.node_u(99);
        let frames = frames_at(&chart, &u, Some(&hints)).unwrap();
        let spectrum = gram_spectrum(&chart, &frames, &hints, 1e-3).unwrap();
        assert!((spectrum.gram[0][0] + 5.0 - 10.0).abs() < 1e-10);
        assert!(spectrum.gram[0][1].abs() < 1e-10);

        let mut v = [0.0; 8];
        v[2] = 1.0;
        let r = lemma_residual(&chart, &hints, 0, &v, &u, 1e-3).unwrap();
        assert!(r < 1e-4, "residual {r}");

        let x = chart.position(&u);
        let f = dot8(
            &oct_mul(&oct_conj(&x), &hints.hints[0].field.value(&chart, &u)),
            &v,
        );
        let lap = gauss_laplacian(&chart, &hints.hints[0].field, &u, 1e-3).unwrap();
        assert!((dot8(&lap, &v) + 10.0 * f).abs() < 1e-4);
    }

    #[test]
    fn mixed_direction_has_unit_harmonicity_defect() {
        // mixture of a σ=0 and the σ=2 eigen-direction at 45°: the defect is
        // exactly 1 since the two Gauss maps stay orthonormal pointwise
        let (chart, hints) = setup("compose:great:3/product:1,1", &[24, 24]);
        let u0 = chart.node_u(0);
        let frames = frames_at(&chart, &u0, Some(&hints)).unwrap();
        let spectrum = gram_spectrum(&chart, &frames, &hints, 1e-3).unwrap();
        let mut mix = vec![0.0; 5];
        for i in 0..5 {
            mix[i] = (spectrum.vectors[0][i] + spectrum.vectors[4][i]) / 2.0f64.sqrt();
        }
        let eta = combined_normal(&hints, &mix).unwrap();
        for idx in [0, 100, 399] {
            let u = chart.node_u(idx);
            let defect = harmonicity_defect(&chart, &eta, &u, 1e-3).unwrap();
            assert!((defect - 1.0).abs() < 1e-2, "defect {defect}");
            assert!(defect > 0.1);
        }

        // eigen-directions themselves are harmonic
        let eta0 = combined_normal(&hints, &spectrum.vectors[4]).unwrap();
        let defect = harmonicity_defect(&chart, &eta0, &chart.node_u(7), 1e-3).unwrap();
        assert!(defect < 1e-4);
    }

    #[test]
    fn eigenmap_residual_shrinks_at_second_order() {
        let (chart, hints) = setup("compose:great:3/product:1,1", &[24, 24]);
        let u0 = chart.node_u(0);
        let frames = frames_at(&chart, &u0, Some(&hints)).unwrap();
        let spectrum = gram_spectrum(&chart, &frames, &hints, 1e-3).unwrap();
        let tol = Tolerances::default();
        let r1 = eigenmap_verify(&chart, &hints, &spectrum, 4, 2e-3, &tol, None)
            .unwrap()
            .residual_l2;
        let r2 = eigenmap_verify(&chart, &hints, &spectrum, 4, 1e-3, &tol, None)
            .unwrap()
            .residual_l2;
        let ratio = r1 / r2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}
