//! Genuine multipartite entanglement via the generalized geometric measure,
//! plus the canonical forms of RVB marginals and the mixedness checks behind
//! the entanglement theorem.
//!
//! The GGM of a pure state is 1 minus the largest reduced-density eigenvalue
//! over all bipartitions. For the 4-site reduced block the same maximum is
//! taken over the block's marginals together with the block spectrum itself,
//! which is sufficient to recover the global value for RVB ladders (gated
//! against exhaustive scans at small sizes).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::coverings::build_rvb_state;
use crate::error::{LadderError, Result};
use crate::lattice::LadderSpec;
use crate::statevec::{self, digit, DensityMatrix, SparseState};

/// Exact ceiling for exhaustive bipartition scans.
pub const GGM_SITE_CEILING: usize = 14;
/// Reduced blocks at or above this dimension use power iteration.
const DENSE_EIG_LIMIT: usize = 729;
const POWER_TOL: f64 = 1e-12;
const POWER_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GGMResult {
    /// 1 - lambda_max_sq.
    pub ggm: f64,
    /// Largest reduced eigenvalue over the scanned bipartitions.
    pub lambda_max_sq: f64,
    /// Site subset achieving the maximum (lexicographically smallest on ties).
    pub argmax_bipartition: Vec<usize>,
}

impl GGMResult {
    fn from_candidates(candidates: Vec<(f64, Vec<usize>)>) -> Self {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for (val, sites) in candidates {
            let replace = match &best {
                None => true,
                Some((bv, bs)) => val > *bv || (val == *bv && sites < *bs),
            };
            if replace {
                best = Some((val, sites));
            }
        }
        let (lambda_max_sq, argmax_bipartition) = best.expect("at least one bipartition");
        GGMResult {
            ggm: 1.0 - lambda_max_sq,
            lambda_max_sq,
            argmax_bipartition,
        }
    }
}

fn mask_sites(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&s| mask & (1 << s) != 0).collect()
}

/// Largest eigenvalue of the normalized reduced state on `sites_a`.
fn lambda_max_bipartition(state: &SparseState, sites_a: &[usize], norm_sqr: f64) -> Result<f64> {
    let n = state.n_sites();
    let dim_a = 3usize.pow(sites_a.len() as u32);
    if dim_a < DENSE_EIG_LIMIT {
        let rho = statevec::reduce(state, sites_a)?;
        Ok(rho.lambda_max())
    } else {
        let sites_b: Vec<usize> = (0..n).filter(|s| !sites_a.contains(s)).collect();
        let dim_b = 3usize.pow(sites_b.len() as u32);
        let mut triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(state.len());
        for (&key, &amp) in state.iter() {
            let mut row = 0u32;
            for &s in sites_a {
                row = row * 3 + digit(key, n, s) as u32;
            }
            let mut col = 0u32;
            for &s in &sites_b {
                col = col * 3 + digit(key, n, s) as u32;
            }
            triplets.push((row, col, amp));
        }
        let apply = |v: &[f64], out: &mut [f64]| {
            let mut t = vec![0.0; dim_b];
            for &(r, c, a) in &triplets {
                t[c as usize] += a * v[r as usize];
            }
            out.iter_mut().for_each(|x| *x = 0.0);
            for &(r, c, a) in &triplets {
                out[r as usize] += a * t[c as usize];
            }
        };
        let lam = shifted_power_iteration(apply, dim_a, 0.0, POWER_TOL, POWER_CAP)?;
        Ok(lam / norm_sqr)
    }
}

/// Power iteration for the largest eigenvalue of a symmetric PSD operator,
/// with an optional positive shift for operators that are not sign-definite.
pub fn shifted_power_iteration(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    dim: usize,
    shift: f64,
    tol: f64,
    cap: usize,
) -> Result<f64> {
    // Deterministic generic start vector.
    let mut v: Vec<f64> = (0..dim)
        .map(|i| ((i as f64 + 1.0) * 0.618033988749895).fract() - 0.5)
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut w = vec![0.0; dim];
    let mut prev = f64::MAX;
    let mut settled = 0;
    for _ in 0..cap {
        apply(&v, &mut w);
        if shift != 0.0 {
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi += shift * vi;
            }
        }
        let lam: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let wnorm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wnorm == 0.0 {
            return Ok(0.0); // zero operator
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wnorm;
        }
        if (lam - prev).abs() <= tol * lam.abs().max(1.0) {
            settled += 1;
            if settled >= 3 {
                return Ok(lam - shift);
            }
        } else {
            settled = 0;
        }
        prev = lam;
    }
    Err(LadderError::NonConvergence(cap))
}

/// GGM of a pure state by exhaustive bipartition scan, |A| <= n/2.
/// Deterministic tie-break: lexicographically smallest subset.
pub fn ggm_pure(state: &SparseState) -> Result<GGMResult> {
    let n = state.n_sites();
    if n > GGM_SITE_CEILING {
        return Err(LadderError::SizeCeiling(n, GGM_SITE_CEILING));
    }
    if n < 2 {
        return Err(LadderError::BadKeepList(
            "GGM needs at least 2 sites".into(),
        ));
    }
    let norm_sqr = state.norm_sqr();
    if norm_sqr <= 1e-28 {
        return Err(LadderError::ZeroNorm);
    }
    let half = n / 2;
    let masks: Vec<u32> = (1u32..(1 << n))
        .filter(|m| (m.count_ones() as usize) <= half)
        .collect();
    let candidates: Vec<(f64, Vec<usize>)> = masks
        .par_iter()
        .map(|&mask| {
            let sites = mask_sites(mask, n);
            let lam = lambda_max_bipartition(state, &sites, norm_sqr)?;
            Ok((lam, sites))
        })
        .collect::<Result<_>>()?;
    Ok(GGMResult::from_candidates(candidates))
}

/// GGM from a 4-site reduced block of a globally pure state: maximizes the
/// largest eigenvalue over every marginal of the block and over the block
/// spectrum itself (the block:rest cut).
pub fn ggm_from_block(rho: &DensityMatrix) -> Result<GGMResult> {
    if rho.sites.len() != 4 {
        return Err(LadderError::DimensionMismatch {
            expected: 4,
            got: rho.sites.len(),
        });
    }
    rho.validate()?;
    let mut candidates = Vec::with_capacity(15);
    for mask in 1u32..15 {
        let positions = mask_sites(mask, 4);
        let marg = rho.partial_trace(&positions);
        candidates.push((marg.lambda_max(), marg.sites.clone()));
    }
    // The block's own spectrum is the block:rest cut. A pure block means
    // nothing was traced (the block is the whole system), so that cut does
    // not exist as a bipartition and is skipped.
    let block_lambda = rho.lambda_max();
    if block_lambda < 1.0 - 1e-12 {
        candidates.push((block_lambda, rho.sites.clone()));
    }
    Ok(GGMResult::from_candidates(candidates))
}

/// Fits a single-site marginal to p|2><2| + (1-p)/2 (|0><0| + |1><1|) and
/// returns p. Errors if the residual exceeds 1e-9.
pub fn single_site_form(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 3 {
        return Err(LadderError::DimensionMismatch {
            expected: 3,
            got: rho.dim(),
        });
    }
    let p = rho.mat[(2, 2)];
    let half = (1.0 - p) / 2.0;
    let canonical = DMatrix::from_diagonal(&DVector::from_vec(vec![half, half, p]));
    let residual = (&rho.mat - &canonical).abs().max();
    if residual > 1e-9 {
        return Err(LadderError::FormViolation(format!(
            "single-site residual {residual:.3e}"
        )));
    }
    Ok(p)
}

/// The invariant form of a nearest-neighbor two-site RVB marginal:
/// p1 |22><22| + p2/9 I9 + p3 W2(q), with W2 the Werner state on the
/// projected two-qubit spin block.
#[derive(Debug, Clone, PartialEq)]
pub struct WernerForm {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub q: f64,
    pub residual: f64,
}

impl WernerForm {
    /// Reconstructs the 9x9 matrix of the fitted form.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(9, 9);
        m[(8, 8)] += self.p1;
        for i in 0..9 {
            m[(i, i)] += self.p2 / 9.0;
        }
        let spin = [0usize, 1, 3, 4];
        for &i in &spin {
            m[(i, i)] += self.p3 * (1.0 - self.q) / 4.0;
        }
        // psi-minus projector on indices 1 = |01>, 3 = |10>
        m[(1, 1)] += self.p3 * self.q / 2.0;
        m[(3, 3)] += self.p3 * self.q / 2.0;
        m[(1, 3)] -= self.p3 * self.q / 2.0;
        m[(3, 1)] -= self.p3 * self.q / 2.0;
        m
    }
}

/// Least-squares fit of a 9x9 marginal to the invariant form. Errors when
/// the residual exceeds 1e-6 (the input is not of the RVB marginal form).
pub fn werner_decompose(rho: &DensityMatrix) -> Result<WernerForm> {
    if rho.dim() != 9 {
        return Err(LadderError::DimensionMismatch {
            expected: 9,
            got: rho.dim(),
        });
    }
    // Basis: B1 = |22><22|, B2 = I9/9, B3 = psi-minus projector, B4 = I4/4.
    let mut b = vec![DMatrix::<f64>::zeros(9, 9); 4];
    b[0][(8, 8)] = 1.0;
    for i in 0..9 {
        b[1][(i, i)] = 1.0 / 9.0;
    }
    b[2][(1, 1)] = 0.5;
    b[2][(3, 3)] = 0.5;
    b[2][(1, 3)] = -0.5;
    b[2][(3, 1)] = -0.5;
    for &i in &[0usize, 1, 3, 4] {
        b[3][(i, i)] = 0.25;
    }
    let mut gram = DMatrix::zeros(4, 4);
    let mut rhs = DVector::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            gram[(i, j)] = (&b[i] * &b[j]).trace();
        }
        rhs[i] = (&b[i] * &rho.mat).trace();
    }
    let coeffs = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| LadderError::FormViolation("singular Werner fit".into()))?;
    let (p1, p2, alpha, beta) = (coeffs[0], coeffs[1], coeffs[2], coeffs[3]);
    let p3 = alpha + beta;
    let q = if p3.abs() > 1e-12 { alpha / p3 } else { 0.0 };
    let clamp = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    let form = WernerForm {
        p1: clamp(p1),
        p2: clamp(p2),
        p3: clamp(p3),
        q: clamp(q),
        residual: 0.0,
    };
    let residual = (&rho.mat - form.reconstruct()).norm();
    if residual > 1e-6 {
        return Err(LadderError::FormViolation(format!(
            "Werner-form residual {residual:.3e}"
        )));
    }
    Ok(WernerForm { residual, ..form })
}

/// Partial transpose over the second site of a two-qutrit matrix.
pub fn partial_transpose_second(rho: &DensityMatrix) -> DMatrix<f64> {
    assert_eq!(rho.dim(), 9);
    let mut out = DMatrix::zeros(9, 9);
    for i1 in 0..3 {
        for i2 in 0..3 {
            for j1 in 0..3 {
                for j2 in 0..3 {
                    out[(i1 * 3 + i2, j1 * 3 + j2)] = rho.mat[(i1 * 3 + j2, j1 * 3 + i2)];
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanStatus {
    /// k = 0 falls outside the theorem premise; nothing is scanned.
    PremiseExcluded,
    Completed,
}

#[derive(Debug, Clone)]
pub struct MixednessEntry {
    pub label: String,
    pub value: f64,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct MixednessReport {
    pub status: ScanStatus,
    pub entries: Vec<MixednessEntry>,
}

impl MixednessReport {
    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }
}

/// Purity bound certifying a mixed marginal.
pub const MIXEDNESS_PURITY_BOUND: f64 = 1.0 - 1e-6;
/// A partial transpose eigenvalue below this witnesses entanglement.
pub const NPT_THRESHOLD: f64 = -1e-10;

/// Verifies, on the oracle state, that every single-site and NN two-site
/// marginal is mixed, that single-site marginals take the canonical form,
/// and that every rung pair is NPT-entangled. Report-only: violations are
/// flagged, not raised.
pub fn theorem_mixedness_scan(spec: &LadderSpec, k: usize) -> Result<MixednessReport> {
    if k == 0 {
        return Ok(MixednessReport {
            status: ScanStatus::PremiseExcluded,
            entries: Vec::new(),
        });
    }
    if spec.rungs > 7 {
        return Err(LadderError::SizeCeiling(spec.rungs, 7));
    }
    let state = build_rvb_state(spec, k)?;
    let mut entries = Vec::new();
    for site in 0..spec.n_sites() {
        let rho = statevec::reduce(&state, &[site])?;
        let purity = statevec::purity(&rho);
        entries.push(MixednessEntry {
            label: format!("purity-site-{site}"),
            value: purity,
            ok: purity <= MIXEDNESS_PURITY_BOUND,
        });
        let form = single_site_form(&rho);
        entries.push(MixednessEntry {
            label: format!("canonical-form-site-{site}"),
            value: form.as_ref().map(|&p| p).unwrap_or(f64::NAN),
            ok: form.is_ok(),
        });
    }
    for &(a, b) in &spec.edges {
        let keep = [a.min(b) as usize, a.max(b) as usize];
        let rho = statevec::reduce(&state, &keep)?;
        let purity = statevec::purity(&rho);
        entries.push(MixednessEntry {
            label: format!("purity-pair-{}-{}", keep[0], keep[1]),
            value: purity,
            ok: purity <= MIXEDNESS_PURITY_BOUND,
        });
    }
    for r in 0..spec.rungs {
        let keep = [2 * r, 2 * r + 1];
        let rho = statevec::reduce(&state, &keep)?;
        let pt = partial_transpose_second(&rho);
        let sym = (&pt + pt.transpose()) * 0.5;
        let min_eig = crate::linalg::sym_eigenvalues(&sym)[0];
        entries.push(MixednessEntry {
            label: format!("npt-rung-{r}"),
            value: min_eig,
            ok: min_eig < NPT_THRESHOLD,
        });
    }
    Ok(MixednessReport {
        status: ScanStatus::Completed,
        entries,
    })
}
