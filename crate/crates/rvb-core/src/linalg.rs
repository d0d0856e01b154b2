//! Symmetric eigenvalue routines.
//!
//! Density-matrix spectra drive every GGM evaluation, and the reduced
//! matrices here are sparse with heavily degenerate spectra; nalgebra's
//! symmetric eigensolver returns NaNs on exactly such inputs. These are the
//! classic EISPACK routines (tred1/tql) with relative off-diagonal
//! deflation, which handle them without trouble.

use nalgebra::{DMatrix, DVector};

use crate::error::{LadderError, Result};

const QL_MAX_SWEEPS: usize = 64;

/// Householder reduction of a symmetric matrix to tridiagonal form,
/// eigenvalues only (no transform accumulation).
pub fn householder_tridiagonal(mat: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = mat.nrows();
    assert_eq!(n, mat.ncols());
    let mut a = mat.clone();
    let mut d = vec![0.0; n]; // diagonal
    let mut e = vec![0.0; n]; // off-diagonal, e[0] unused

    for i in (1..n).rev() {
        let l = i; // eliminate row i against columns 0..l
        let mut scale = 0.0;
        for k in 0..l {
            scale += a[(i, k)].abs();
        }
        if scale == 0.0 || l == 1 {
            e[i] = a[(i, l - 1)];
            d[i] = 0.0;
            continue;
        }
        let mut h = 0.0;
        for k in 0..l {
            a[(i, k)] /= scale;
            h += a[(i, k)] * a[(i, k)];
        }
        let mut f = a[(i, l - 1)];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        a[(i, l - 1)] = f - g;
        f = 0.0;
        for j in 0..l {
            let mut g = 0.0;
            for k in 0..=j {
                g += a[(j, k)] * a[(i, k)];
            }
            for k in (j + 1)..l {
                g += a[(k, j)] * a[(i, k)];
            }
            e[j] = g / h;
            f += e[j] * a[(i, j)];
        }
        let hh = f / (h + h);
        for j in 0..l {
            let f = a[(i, j)];
            let g = e[j] - hh * f;
            e[j] = g;
            for k in 0..=j {
                a[(j, k)] -= f * e[k] + g * a[(i, k)];
            }
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[(i, i)];
    }
    // shift e down so that e[i] couples d[i] and d[i+1]
    let mut off = vec![0.0; n.saturating_sub(1)];
    for i in 1..n {
        off[i - 1] = e[i];
    }
    (d, off)
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix; ascending
/// eigenvalues. `z` optionally accumulates eigenvectors (pass an identity
/// to get the eigenvectors of the tridiagonal itself).
pub fn tridiagonal_ql(
    diag: &[f64],
    off: &[f64],
    mut z: Option<&mut DMatrix<f64>>,
) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n.saturating_sub(1)]);

    // Absolute deflation floor: off-diagonals below the matrix scale times
    // machine epsilon cannot move any eigenvalue at f64 resolution. Without
    // it, zero-scale rows (common in sparse density matrices) stall the
    // relative test.
    let anorm = d
        .iter()
        .chain(e.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let floor = f64::EPSILON * anorm;

    for l in 0..n {
        let mut iter = 0;
        loop {
            // find the deflation point
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd + floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_SWEEPS {
                return Err(LadderError::NonConvergence(QL_MAX_SWEEPS));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // recover from underflow and restart the sweep
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(zm) = z.as_deref_mut() {
                    for k in 0..n {
                        f = zm[(k, i + 1)];
                        zm[(k, i + 1)] = s * zm[(k, i)] + c * f;
                        zm[(k, i)] = c * zm[(k, i)] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    // sort ascending, permuting vectors alongside
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
    let sorted: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    if let Some(zm) = z {
        let zc = zm.clone();
        for (new, &old) in order.iter().enumerate() {
            zm.set_column(new, &zc.column(old));
        }
    }
    Ok(sorted)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(mat: &DMatrix<f64>) -> Vec<f64> {
    let n = mat.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![mat[(0, 0)]];
    }
    let (d, e) = householder_tridiagonal(mat);
    tridiagonal_ql(&d, &e, None).expect("QL convergence on tridiagonal form")
}

/// Lowest eigenpair of a symmetric matrix: eigenvalues by QL, eigenvector by
/// inverse iteration with an LU solve. Dense reference path for the sparse
/// solvers.
pub fn ground_state_dense(mat: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = mat.nrows();
    if n == 1 {
        return Ok((mat[(0, 0)], DVector::from_element(1, 1.0)));
    }
    let eigs = sym_eigenvalues(mat);
    let e0 = eigs[0];
    let gap = eigs
        .iter()
        .skip(1)
        .map(|&e| (e - e0).abs())
        .fold(f64::INFINITY, f64::min);
    let scale = eigs.last().unwrap().abs().max(e0.abs()).max(1.0);
    // Shift slightly off the eigenvalue so the solve stays well posed.
    let sigma = e0 - (gap.max(1e-8 * scale)) * 1e-4;
    let shifted = mat - DMatrix::identity(n, n) * sigma;
    let lu = shifted.lu();
    let mut v = DVector::from_fn(n, |i, _| {
        ((i as f64 + 1.0) * 0.618033988749895).fract() - 0.5
    });
    v /= v.norm();
    for _ in 0..50 {
        let mut w = lu
            .solve(&v)
            .ok_or_else(|| LadderError::NonConvergence(50))?;
        w /= w.norm();
        let residual = (mat * &w - &w * e0).norm();
        v = w;
        if residual < 1e-11 * scale {
            break;
        }
    }
    Ok((e0, v))
}
