//! Hemisphere obstruction scan: search for a direction v whose open hemisphere
//! contains the sampled Gauss image. For compact minimal entries and
//! eigen-directions no such v may exist; the scan reports the best margin
//! `max_v min_x ⟨γ(x), v⟩` over a deterministic candidate set.
//!
//! A sampled scan can only certify "no hemisphere among the candidates", so the
//! verdict field is worded as consistency with the obstruction and the report
//! records the candidate budget and generator.

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::Chart;
use crate::linalg::{dot8, norm8};
use crate::{Error, Result};

/// Candidate directions drawn from the sample set are capped at this count
/// (deterministic stride subsample); margins are still minima over every
/// sample.
const SAMPLE_CANDIDATE_CAP: usize = 1000;

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorInfo {
    pub kind: &'static str,
    pub seed: u64,
    pub budget: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HemisphereReport {
    pub label: String,
    pub samples: usize,
    pub candidates: usize,
    pub mean_vector: [f64; 8],
    pub mean_norm: f64,
    pub best_margin: f64,
    pub best_direction: [f64; 8],
    /// best_margin ≤ tolerance: no candidate hemisphere contains the image
    pub consistent: bool,
    pub generator: GeneratorInfo,
}

/// Quasi-random points in [0,1)^8: additive Kronecker sequence based on the
/// generalized golden ratio (the root of x⁹ = x + 1). The seed offsets the
/// sequence start.
fn r_sequence_point(index: u64, alphas: &[f64; 8]) -> [f64; 8] {
    let mut u = [0.0; 8];
    for (i, a) in alphas.iter().enumerate() {
        u[i] = (0.5 + (index as f64 + 1.0) * a).fract();
    }
    u
}

fn r_sequence_alphas() -> [f64; 8] {
    // root of x^(d+1) = x + 1 for d = 8, by fixed-point iteration
    let mut phi: f64 = 1.5;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / 9.0);
    }
    let mut alphas = [0.0; 8];
    let mut p = 1.0;
    for a in alphas.iter_mut() {
        p /= phi;
        *a = p;
    }
    alphas
}

/// Deterministic low-discrepancy directions on the unit sphere of the purely
/// imaginary octonions: Box-Muller over the Kronecker sequence, first
/// coordinate zeroed, normalized.
pub fn unit_directions(count: usize, seed: u64) -> Vec<[f64; 8]> {
    let alphas = r_sequence_alphas();
    let mut out = Vec::with_capacity(count);
    let mut index = seed;
    while out.len() < count {
        let u = r_sequence_point(index, &alphas);
        index += 1;
        let mut z = [0.0; 8];
        for p in 0..4 {
            let u1 = u[2 * p].max(1e-16);
            let u2 = u[2 * p + 1];
            let r = (-2.0 * u1.ln()).sqrt();
            let t = std::f64::consts::TAU * u2;
            z[2 * p] = r * t.cos();
            z[2 * p + 1] = r * t.sin();
        }
        z[0] = 0.0;
        let n = norm8(&z);
        if n < 1e-8 {
            continue;
        }
        for c in z.iter_mut() {
            *c /= n;
        }
        out.push(z);
    }
    out
}

/// Quadrature mean of the sampled field divided by the volume: vanishes for
/// eigen-directions of positive eigenvalue on compact entries.
pub fn mean_zero_check(values: &[[f64; 8]], weights: &[f64]) -> f64 {
    let (sum, vol) = weighted_mean(values, weights);
    norm8(&sum) / vol
}

fn weighted_mean(values: &[[f64; 8]], weights: &[f64]) -> ([f64; 8], f64) {
    let mut sum = [0.0; 8];
    let mut vol = 0.0;
    for (v, &w) in values.iter().zip(weights) {
        for c in 0..8 {
            sum[c] += w * v[c];
        }
        vol += w;
    }
    (sum, vol)
}

/// Margin of one candidate direction: the minimum of ⟨γ, v⟩ over all samples.
pub fn margin(values: &[[f64; 8]], v: &[f64; 8]) -> f64 {
    values
        .iter()
        .map(|g| dot8(g, v))
        .fold(f64::INFINITY, f64::min)
}

/// Scan for a hemisphere containing the sampled image.
///
/// Candidates: the normalized quadrature mean (when nonzero), a deterministic
/// stride subsample of the sampled values and their negations, and `budget`
/// low-discrepancy directions. Refused for codimension 6, which the
/// obstruction's hypotheses exclude.
pub fn hemisphere_scan(
    chart: &Chart,
    label: &str,
    values: &[[f64; 8]],
    weights: &[f64],
    budget: usize,
    seed: u64,
    margin_tol: f64,
) -> Result<HemisphereReport> {
    let k = chart.codim();
    if k == 6 {
        return Err(Error::Refused(
            "hemisphere obstruction is stated for codimension 1..=5; k = 6 is outside its hypotheses"
                .into(),
        ));
    }
    if values.len() != weights.len() || values.is_empty() {
        return Err(Error::Domain(format!(
            "{} samples against {} weights",
            values.len(),
            weights.len()
        )));
    }

    let (sum, vol) = weighted_mean(values, weights);
    let mean_vector = {
        let mut m = sum;
        for c in m.iter_mut() {
            *c /= vol;
        }
        m
    };
    let mean_norm = norm8(&mean_vector);

    let mut candidates: Vec<[f64; 8]> = Vec::new();
    if mean_norm > 1e-12 {
        let mut m = mean_vector;
        for c in m.iter_mut() {
            *c /= mean_norm;
        }
        candidates.push(m);
    }
    let stride = values.len().div_ceil(SAMPLE_CANDIDATE_CAP);
    for g in values.iter().step_by(stride) {
        candidates.push(*g);
    }
    for g in values.iter().step_by(stride) {
        let mut neg = *g;
        for c in neg.iter_mut() {
            *c = -*c;
        }
        candidates.push(neg);
    }
    candidates.extend(unit_directions(budget, seed));

    let margins: Vec<f64> = candidates.par_iter().map(|v| margin(values, v)).collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (i, &m) in margins.iter().enumerate() {
        if m > best {
            best = m;
            best_idx = i;
        }
    }

    Ok(HemisphereReport {
        label: label.to_string(),
        samples: values.len(),
        candidates: candidates.len(),
        mean_vector,
        mean_norm,
        best_margin: best,
        best_direction: candidates[best_idx],
        consistent: best <= margin_tol,
        generator: GeneratorInfo {
            kind: "kronecker-box-muller",
            seed,
            budget,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_chart, parse_spec};
    use crate::gauss::{gauss_field, node_weights};

    fn field_and_weights(
        spec_text: &str,
        grid: &[usize],
        hint: usize,
    ) -> (Chart, Vec<[f64; 8]>, Vec<f64>) {
        let spec = parse_spec(spec_text).unwrap();
        let (chart, hints) = build_chart(&spec, grid).unwrap();
        let f = gauss_field(&chart, hints.hints[hint].field.clone(), "t").unwrap();
        let w = node_weights(&chart);
        (chart, f.values, w)
    }

    #[test]
    fn directions_are_unit_and_imaginary() {
        let dirs = unit_directions(64, 7);
        assert_eq!(dirs.len(), 64);
        for v in &dirs {
            assert!((norm8(v) - 1.0).abs() < 1e-12);
            assert_eq!(v[0], 0.0);
        }
        // deterministic given the seed
        assert_eq!(unit_directions(8, 7), dirs[..8].to_vec());
        assert_ne!(unit_directions(8, 8)[0], dirs[0]);
    }

    #[test]
    fn great_sphere_image_admits_no_hemisphere() {
        // the image is antipodally symmetric, so every margin is ≤ 0
        let (chart, values, weights) = field_and_weights("great:2", &[16, 16], 0);
        let report =
            hemisphere_scan(&chart, "great:2/e4", &values, &weights, 128, 1, 1e-3).unwrap();
        assert!(report.best_margin <= 1e-12, "margin {}", report.best_margin);
        assert!(report.consistent);
        assert!(report.mean_norm < 1e-10);
    }

    #[test]
    fn constant_map_is_detected_as_hemisphere_contained() {
        let (chart, values, weights) = field_and_weights("great:2", &[16, 16], 0);
        let mut e1 = [0.0; 8];
        e1[1] = 1.0;
        let constant: Vec<[f64; 8]> = vec![e1; values.len()];
        let report = hemisphere_scan(&chart, "constant", &constant, &weights, 64, 1, 1e-3).unwrap();
        assert!((report.best_margin - 1.0).abs() < 1e-12);
        assert!(!report.consistent);
        assert!((report.best_direction[1] - 1.0).abs() < 1e-12);
        assert!((mean_zero_check(&constant, &weights) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_zero_on_eigen_directions() {
        let (_, values, weights) = field_and_weights("product:1,1,3", &[8, 8, 4, 4, 8], 0);
        assert!(mean_zero_check(&values, &weights) < 1e-12);
        let (_, values, weights) = field_and_weights("product:1,1,3", &[8, 8, 4, 4, 8], 1);
        assert!(mean_zero_check(&values, &weights) < 1e-12);
    }

    #[test]
    fn codimension_six_is_refused() {
        let spec = parse_spec("great:1").unwrap();
        let (chart, hints) = build_chart(&spec, &[16]).unwrap();
        let f = gauss_field(&chart, hints.hints[0].field.clone(), "t").unwrap();
        let w = node_weights(&chart);
        let err = hemisphere_scan(&chart, "great:1", &f.values, &w, 16, 1, 1e-3).unwrap_err();
        assert!(matches!(err, Error::Refused(_)));
    }

    #[test]
    fn refining_the_sample_set_never_raises_a_margin() {
        // adding samples can only lower a minimum: evaluate a fixed candidate
        // set on the coarse sample set and on its union with a finer one
        let (_, coarse, _) = field_and_weights("great:2", &[12, 12], 0);
        let (_, fine, _) = field_and_weights("great:2", &[20, 20], 0);
        let mut union = coarse.clone();
        union.extend_from_slice(&fine);

        let mut candidates = unit_directions(64, 3);
        candidates.extend(coarse.iter().take(32).copied());
        for v in &candidates {
            let m_coarse = margin(&coarse, v);
            let m_union = margin(&union, v);
            assert!(m_union <= m_coarse + 1e-6);
        }
    }
}
