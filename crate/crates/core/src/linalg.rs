//! Small dense linear algebra: the matrices here are at most 8×8, so everything
//! is written directly on row-major `&[f64]` slices.

use crate::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot8(a: &[f64; 8], b: &[f64; 8]) -> f64 {
    let mut s = 0.0;
    for i in 0..8 {
        s += a[i] * b[i];
    }
    s
}

pub fn norm8(a: &[f64; 8]) -> f64 {
    dot8(a, a).sqrt()
}

pub fn axpy8(y: &mut [f64; 8], alpha: f64, x: &[f64; 8]) {
    for i in 0..8 {
        y[i] += alpha * x[i];
    }
}

pub fn scale8(x: &[f64; 8], alpha: f64) -> [f64; 8] {
    let mut y = *x;
    for v in &mut y {
        *v *= alpha;
    }
    y
}

pub fn sub8(a: &[f64; 8], b: &[f64; 8]) -> [f64; 8] {
    let mut y = [0.0; 8];
    for i in 0..8 {
        y[i] = a[i] - b[i];
    }
    y
}

/// Cholesky factorization of a symmetric positive definite matrix (row-major).
/// Returns the lower factor L with `A = L Lᵀ`, or `None` if a pivot fails.
pub fn cholesky(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Inverse and determinant of an SPD matrix via its Cholesky factor.
pub fn spd_inverse(n: usize, a: &[f64]) -> Option<(Vec<f64>, f64)> {
    let l = cholesky(n, a)?;
    let mut det = 1.0;
    for i in 0..n {
        det *= l[i * n + i] * l[i * n + i];
    }
    // Solve A X = I column by column: forward then backward substitution.
    let mut inv = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for rhs in 0..n {
        for i in 0..n {
            let mut s = if i == rhs { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i * n + k] * col[k];
            }
            col[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * col[k];
            }
            col[i] = s / l[i * n + i];
            inv[i * n + rhs] = col[i];
        }
    }
    Some((inv, det))
}

/// Largest chart dimension (a proper submanifold of the 7-sphere).
pub const MAX_DIM: usize = 6;

/// Stack-allocated inverse and determinant of a small SPD matrix, for the hot
/// per-stencil-point path.
#[derive(Debug, Clone, Copy)]
pub struct SmallSpd {
    pub d: usize,
    pub g: [[f64; MAX_DIM]; MAX_DIM],
    pub inv: [[f64; MAX_DIM]; MAX_DIM],
    pub sqrt_det: f64,
}

pub fn small_spd(d: usize, g: &[[f64; MAX_DIM]; MAX_DIM]) -> Option<SmallSpd> {
    debug_assert!(d <= MAX_DIM);
    let mut l = [[0.0f64; MAX_DIM]; MAX_DIM];
    let mut det = 1.0;
    for i in 0..d {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
                det *= s;
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut inv = [[0.0f64; MAX_DIM]; MAX_DIM];
    let mut col = [0.0f64; MAX_DIM];
    for rhs in 0..d {
        for i in 0..d {
            let mut s = if i == rhs { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i][k] * col[k];
            }
            col[i] = s / l[i][i];
        }
        for i in (0..d).rev() {
            let mut s = col[i];
            for k in (i + 1)..d {
                s -= l[k][i] * col[k];
            }
            col[i] = s / l[i][i];
            inv[i][rhs] = col[i];
        }
    }
    Some(SmallSpd {
        d,
        g: *g,
        inv,
        sqrt_det: det.sqrt(),
    })
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweep order is p < q lexicographic and the rotation formulas are branch-fixed,
/// so the output is bit-reproducible. Eigenvalues are returned sorted ascending
/// with matching eigenvector columns (row-major `vectors[i*n+j]` = component i of
/// eigenvector j); each column is sign-normalized so its entry of largest
/// magnitude is positive.
pub fn jacobi_eigen(n: usize, matrix: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    const THRESHOLD: f64 = 1e-14;
    const MAX_SWEEPS: usize = 100;

    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= THRESHOLD * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= THRESHOLD * scale {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::JacobiNonConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut values = vec![0.0; n];
    let mut vectors = vec![0.0; n * n];
    for (jnew, &jold) in order.iter().enumerate() {
        values[jnew] = a[jold * n + jold];
        // Sign convention: largest-magnitude component positive.
        let mut best = 0;
        for i in 1..n {
            if v[i * n + jold].abs() > v[best * n + jold].abs() {
                best = i;
            }
        }
        let sign = if v[best * n + jold] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[i * n + jnew] = sign * v[i * n + jold];
        }
    }
    Ok((values, vectors))
}

/// Project `v` orthogonally to the span of `basis` (assumed orthonormal) and
/// normalize; `None` when the residual drops below `eps`. Two projection passes
/// keep the result orthogonal to working precision.
pub fn orthonormalize_against(basis: &[[f64; 8]], v: &[f64; 8], eps: f64) -> Option<[f64; 8]> {
    let mut w = *v;
    for _ in 0..2 {
        for b in basis {
            let c = dot8(&w, b);
            axpy8(&mut w, -c, b);
        }
    }
    let n = norm8(&w);
    if n < eps {
        None
    } else {
        Some(scale8(&w, 1.0 / n))
    }
}
