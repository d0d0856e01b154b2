//! Exact diagonalization of the t-J ladder Hamiltonian in conserved
//! (n_up, n_down) sectors.
//!
//! H = -t sum_{<i,j>,sigma} P_G (c+_{i sigma} c_{j sigma} + h.c.) P_G
//!     + J sum_{<i,j>} S_i . S_j
//!
//! The Gutzwiller projection is structural: the sector basis simply has no
//! doubly occupied configurations. The matrix is never stored; Lanczos with
//! full reorthogonalization works from the matrix-free product, and a dense
//! route (explicit matrix + QL + inverse iteration) serves as the
//! independent reference at small sizes. Fermion signs come from a
//! Jordan-Wigner string along a configurable site ordering; energies are
//! gauge independent, which is asserted in tests by comparing orderings.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nalgebra::DMatrix;

use crate::error::{LadderError, Result};
use crate::lattice::LadderSpec;
use crate::linalg;
use crate::statevec::SparseState;

/// Largest system the exact solvers accept.
pub const TJ_SITE_CEILING: usize = 14;
/// Lanczos iteration cap.
pub const LANCZOS_MAX_ITER: usize = 2000;
/// Ritz gaps below this flag a (near-)degenerate ground level.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TJParams {
    /// Hopping energy, > 0.
    pub t: f64,
    /// Heisenberg exchange, >= 0.
    pub j: f64,
}

impl TJParams {
    pub fn new(t: f64, j: f64) -> Self {
        assert!(t > 0.0 && j >= 0.0, "t must be positive, J nonnegative");
        TJParams { t, j }
    }
}

/// Occupation basis of one (n_up, n_down) block, lexicographically ordered.
/// No double occupancy exists by construction.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub spec: LadderSpec,
    pub n_up: usize,
    pub n_down: usize,
    states: Vec<u32>,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, idx: usize) -> u32 {
        self.states[idx]
    }

    pub fn index_of(&self, code: u32) -> Option<usize> {
        self.states.binary_search(&code).ok()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }
}

/// Enumerates the sector basis in lexicographic (= numeric) order.
pub fn sector_basis(spec: &LadderSpec, n_up: usize, n_down: usize) -> Result<SectorBasis> {
    let n = spec.n_sites();
    if n > TJ_SITE_CEILING {
        return Err(LadderError::SizeCeiling(n, TJ_SITE_CEILING));
    }
    if n_up + n_down > n {
        return Err(LadderError::BadSector {
            n_up,
            n_down,
            sites: n,
        });
    }
    let mut states = Vec::new();
    let mut digits = vec![2u8; n];
    fn rec(
        site: usize,
        ups_left: usize,
        downs_left: usize,
        n: usize,
        code: u32,
        digits: &mut [u8],
        out: &mut Vec<u32>,
    ) {
        let remaining = n - site;
        if ups_left + downs_left > remaining {
            return;
        }
        if site == n {
            out.push(code);
            return;
        }
        // digit order 0 < 1 < 2 keeps codes ascending
        if ups_left > 0 {
            digits[site] = 0;
            rec(site + 1, ups_left - 1, downs_left, n, code * 3, digits, out);
        }
        if downs_left > 0 {
            digits[site] = 1;
            rec(site + 1, ups_left, downs_left - 1, n, code * 3 + 1, digits, out);
        }
        digits[site] = 2;
        rec(site + 1, ups_left, downs_left, n, code * 3 + 2, digits, out);
    }
    rec(0, n_up, n_down, n, 0, &mut digits, &mut states);
    // the hole branch runs last, so codes end up sorted only after this
    states.sort_unstable();
    Ok(SectorBasis {
        spec: spec.clone(),
        n_up,
        n_down,
        states,
    })
}

#[inline]
fn decode(code: u32, n: usize, digits: &mut [u8]) {
    let mut c = code;
    for site in (0..n).rev() {
        digits[site] = (c % 3) as u8;
        c /= 3;
    }
}

#[inline]
fn recode(digits: &[u8]) -> u32 {
    digits.iter().fold(0u32, |acc, &d| acc * 3 + d as u32)
}

/// Matrix-free H|v> with Jordan-Wigner strings along the canonical
/// rung-major site order.
pub fn apply_hamiltonian(params: &TJParams, basis: &SectorBasis, v: &[f64]) -> Result<Vec<f64>> {
    let order: Vec<u16> = (0..basis.spec.n_sites() as u16).collect();
    apply_hamiltonian_with_order(params, basis, &order, v)
}

/// Matrix-free H|v> with Jordan-Wigner strings along an arbitrary site
/// ordering (a gauge choice; the spectrum does not depend on it).
pub fn apply_hamiltonian_with_order(
    params: &TJParams,
    basis: &SectorBasis,
    order: &[u16],
    v: &[f64],
) -> Result<Vec<f64>> {
    let n = basis.spec.n_sites();
    if v.len() != basis.dim() {
        return Err(LadderError::DimensionMismatch {
            expected: basis.dim(),
            got: v.len(),
        });
    }
    if order.len() != n {
        return Err(LadderError::DimensionMismatch {
            expected: n,
            got: order.len(),
        });
    }
    let mut pos = vec![0usize; n];
    for (p, &s) in order.iter().enumerate() {
        pos[s as usize] = p;
    }
    let edges = &basis.spec.edges;
    let mut out = vec![0.0; basis.dim()];
    let mut digits = vec![0u8; n];
    let mut scratch = vec![0u8; n];
    for (idx, &code) in basis.states.iter().enumerate() {
        decode(code, n, &mut digits);
        let mut acc = 0.0;
        let mut diag = 0.0;
        for &(a, b) in edges {
            let (a, b) = (a as usize, b as usize);
            let (da, db) = (digits[a], digits[b]);
            match (da, db) {
                (2, 2) => {}
                (2, s) | (s, 2) => {
                    // hop the electron into the hole; the string counts
                    // electrons whose mode position lies strictly between
                    let (from, to) = if da == 2 { (b, a) } else { (a, b) };
                    let (lo, hi) = {
                        let (pa, pb) = (pos[from], pos[to]);
                        (pa.min(pb), pa.max(pb))
                    };
                    let mut crossings = 0usize;
                    for site in 0..n {
                        let p = pos[site];
                        if p > lo && p < hi && digits[site] != 2 {
                            crossings += 1;
                        }
                    }
                    let sign = if crossings % 2 == 0 { 1.0 } else { -1.0 };
                    scratch.copy_from_slice(&digits);
                    scratch[from] = 2;
                    scratch[to] = s;
                    let target = basis
                        .index_of(recode(&scratch))
                        .expect("hopping conserves the sector");
                    acc += -params.t * sign * v[target];
                }
                (sa, sb) => {
                    // S.S on an occupied pair
                    diag += params.j * if sa == sb { 0.25 } else { -0.25 };
                    if sa != sb {
                        scratch.copy_from_slice(&digits);
                        scratch[a] = sb;
                        scratch[b] = sa;
                        let target = basis
                            .index_of(recode(&scratch))
                            .expect("spin exchange conserves the sector");
                        acc += 0.5 * params.j * v[target];
                    }
                }
            }
        }
        out[idx] = acc + diag * v[idx];
    }
    Ok(out)
}

/// Lowest eigenpair of a sector.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// Ground vector re-expressed over occupation strings.
    pub vector: SparseState,
    /// ||Hv - Ev||.
    pub residual: f64,
    /// Distance to the next Ritz value; near-zero means the level is
    /// (numerically) degenerate and the vector is seed dependent.
    pub gap: f64,
}

impl GroundState {
    pub fn is_degenerate(&self) -> bool {
        self.gap < DEGENERACY_GAP
    }
}

fn to_sparse(basis: &SectorBasis, v: &[f64]) -> SparseState {
    let mut s = SparseState::new(basis.spec.n_sites());
    for (i, &amp) in v.iter().enumerate() {
        if amp.abs() > 1e-14 {
            s.add_amplitude(basis.state(i) as u64, amp);
        }
    }
    s
}

/// Lanczos with full reorthogonalization and a seeded start vector.
/// Deterministic for a fixed seed; non-convergence within the iteration cap
/// is an error, not a silent result.
pub fn lanczos_ground_state(
    params: &TJParams,
    basis: &SectorBasis,
    tol: f64,
    seed: u64,
) -> Result<GroundState> {
    assert!(tol > 0.0);
    let dim = basis.dim();
    if dim == 0 {
        return Err(LadderError::BadSector {
            n_up: basis.n_up,
            n_down: basis.n_down,
            sites: basis.spec.n_sites(),
        });
    }
    if dim == 1 {
        let e = apply_hamiltonian(params, basis, &[1.0])?[0];
        return Ok(GroundState {
            energy: e,
            vector: to_sparse(basis, &[1.0]),
            residual: 0.0,
            gap: f64::INFINITY,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    q.iter_mut().for_each(|x| *x /= norm);

    let mut krylov: Vec<Vec<f64>> = vec![q.clone()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let scale = params.t.abs().max(params.j.abs()) * basis.spec.edges.len() as f64;

    let ritz = |alpha: &[f64], beta: &[f64], krylov: &[Vec<f64>]| -> (f64, f64, Vec<f64>) {
        let m = alpha.len();
        let mut z = DMatrix::identity(m, m);
        let vals =
            linalg::tridiagonal_ql(alpha, beta, Some(&mut z)).expect("tridiagonal QL converges");
        let gap = if m > 1 {
            vals[1] - vals[0]
        } else {
            f64::INFINITY
        };
        let mut x = vec![0.0; dim];
        for j in 0..m {
            let c = z[(j, 0)];
            for (xi, kj) in x.iter_mut().zip(&krylov[j]) {
                *xi += c * kj;
            }
        }
        let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nrm);
        (vals[0], gap, x)
    };

    let mut converged: Option<(f64, f64, Vec<f64>, f64)> = None;
    let mut prev_e0 = f64::MAX;
    for it in 0..LANCZOS_MAX_ITER.min(dim) {
        let mut w = apply_hamiltonian(params, basis, &krylov[it])?;
        let a: f64 = krylov[it].iter().zip(&w).map(|(x, y)| x * y).sum();
        alpha.push(a);
        for (wi, qi) in w.iter_mut().zip(&krylov[it]) {
            *wi -= a * qi;
        }
        if it > 0 {
            let b = beta[it - 1];
            for (wi, qi) in w.iter_mut().zip(&krylov[it - 1]) {
                *wi -= b * qi;
            }
        }
        // full reorthogonalization against the stored Krylov vectors
        for qv in &krylov {
            let overlap: f64 = qv.iter().zip(&w).map(|(x, y)| x * y).sum();
            for (wi, qi) in w.iter_mut().zip(qv) {
                *wi -= overlap * qi;
            }
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();

        let exhausted = b < 1e-13 * scale.max(1.0) || it + 1 == LANCZOS_MAX_ITER.min(dim);
        let check = exhausted || (it >= 4 && it % 5 == 0);
        if check {
            let t_vals = linalg::tridiagonal_ql(&alpha, &beta, None)?;
            let stable = (t_vals[0] - prev_e0).abs() <= 0.1 * tol * scale.max(1.0);
            prev_e0 = t_vals[0];
            if stable || exhausted {
                let (e0, gap, x) = ritz(&alpha, &beta, &krylov);
                let hx = apply_hamiltonian(params, basis, &x)?;
                let residual = hx
                    .iter()
                    .zip(&x)
                    .map(|(h, xi)| (h - e0 * xi) * (h - e0 * xi))
                    .sum::<f64>()
                    .sqrt();
                if residual < tol * scale.max(1.0) || exhausted {
                    converged = Some((e0, gap, x, residual));
                    break;
                }
            }
        }
        if b < 1e-13 * scale.max(1.0) {
            break;
        }
        beta.push(b);
        let mut next = w;
        next.iter_mut().for_each(|x| *x /= b);
        krylov.push(next);
    }

    let (energy, gap, x, residual) =
        converged.ok_or(LadderError::NonConvergence(LANCZOS_MAX_ITER))?;
    if residual > tol * scale.max(1.0) {
        return Err(LadderError::NonConvergence(LANCZOS_MAX_ITER));
    }
    Ok(GroundState {
        energy,
        vector: to_sparse(basis, &x),
        residual,
        gap,
    })
}

/// Dense reference route: explicit matrix, QL eigenvalues, inverse
/// iteration. Independent of the Lanczos path.
pub fn dense_ground_state(params: &TJParams, basis: &SectorBasis) -> Result<(f64, Vec<f64>)> {
    let dim = basis.dim();
    if dim > 3000 {
        return Err(LadderError::SizeCeiling(dim, 3000));
    }
    let mut h = DMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    for col in 0..dim {
        e[col] = 1.0;
        let he = apply_hamiltonian(params, basis, &e)?;
        for (row, &val) in he.iter().enumerate() {
            h[(row, col)] = val;
        }
        e[col] = 0.0;
    }
    let (energy, vector) = linalg::ground_state_dense(&h)?;
    Ok((energy, vector.iter().copied().collect()))
}

/// Ground state in the S^z = 0 sector at electron density n_el (paired
/// up/down spins). The sector is fixed, not minimized over.
pub fn ground_state_at_density(
    params: &TJParams,
    spec: &LadderSpec,
    n_el: f64,
    tol: f64,
    seed: u64,
) -> Result<GroundState> {
    let electrons_f = n_el * spec.n_sites() as f64;
    let electrons = electrons_f.round() as usize;
    if (electrons_f - electrons as f64).abs() > 1e-9 || electrons % 2 != 0 {
        return Err(LadderError::BadDensity(n_el));
    }
    let basis = sector_basis(spec, electrons / 2, electrons / 2)?;
    lanczos_ground_state(params, &basis, tol, seed)
}
