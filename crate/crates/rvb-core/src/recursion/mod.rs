//! Analytical recursion for doped RVB ladders.
//!
//! Norms Z and 4-site reduced density matrices of the equal-weight covering
//! superposition are computed by propagating rung-frontier configurations
//! with graded scalar weights (see [`transfer`]). One pass over the ladder
//! costs O(N) and yields every dimer count k at once, which is what makes
//! 300-site sweeps cheap. Correctness is gated elementwise against the
//! brute-force covering oracle at small N.

mod transfer;

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::coverings::{covering_ket, Covering};
use crate::error::{LadderError, Result};
use crate::lattice::{build_ladder, Boundary};
use crate::statevec::{DensityMatrix, SparseState};

use transfer::{
    block_entries, open_entries, traced_entries, BlockEntry, Frontier, TracedEntry, EMPTY_PAIR,
    N_PAIR,
};

/// Integer sequence D_x = D_{x-1} + 2 D_{x-2}, D_0 = D_1 = 1, computed
/// exactly. Overflows u128 past x = 127.
pub fn d_sequence(x: u32) -> Result<u128> {
    let (mut prev, mut cur) = (1u128, 1u128);
    if x <= 1 {
        return Ok(1);
    }
    for i in 2..=x {
        let next = cur
            .checked_add(prev.checked_mul(2).ok_or(LadderError::DSequenceOverflow(i))?)
            .ok_or(LadderError::DSequenceOverflow(i))?;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Memoized norms Z(N-k, k) = <N-k,k | N-k,k> for one ladder, plus the D_x
/// sequence entering the recursion coefficients.
#[derive(Debug, Clone)]
pub struct NormTable {
    pub rungs: usize,
    pub boundary: Boundary,
    z: Vec<f64>,
    d: Vec<u128>,
}

impl NormTable {
    /// Z for k dimers (and therefore N - k hole pairs).
    pub fn z_dimers(&self, k: usize) -> Option<f64> {
        self.z.get(k).copied()
    }

    /// Z indexed the way the symbols are written: (hole pairs, dimers).
    pub fn z(&self, n_minus_k: usize, k: usize) -> Result<f64> {
        if n_minus_k + k != self.rungs {
            return Err(LadderError::KOutOfRange {
                k,
                rungs: self.rungs,
            });
        }
        Ok(self.z[k])
    }

    /// D_x, exact; available up to x = 127 or rungs + 1, whichever is less.
    pub fn d(&self, x: usize) -> Option<u128> {
        self.d.get(x).copied()
    }
}

fn cached_traced(rungs: usize, boundary: Boundary) -> Vec<Vec<TracedEntry>> {
    (0..rungs)
        .map(|r| {
            let has_out = boundary == Boundary::Periodic || r + 1 < rungs;
            traced_entries(r, has_out)
        })
        .collect()
}

fn z_values(rungs: usize, boundary: Boundary) -> Vec<f64> {
    let entries = cached_traced(rungs, boundary);
    match boundary {
        Boundary::Open => {
            let mut f = Frontier::delta(rungs, EMPTY_PAIR);
            for e in &entries {
                f = f.apply(e);
            }
            (0..=rungs).map(|k| f.get(EMPTY_PAIR, k, 0)).collect()
        }
        Boundary::Periodic => {
            // Trace over the seam frontier pair.
            let per_seam: Vec<Vec<f64>> = (0..N_PAIR)
                .into_par_iter()
                .map(|beta| {
                    let mut f = Frontier::delta(rungs, beta);
                    for e in &entries {
                        f = f.apply(e);
                    }
                    (0..=rungs).map(|k| f.get(beta, k, 0)).collect()
                })
                .collect();
            let mut z = vec![0.0; rungs + 1];
            for row in per_seam {
                for (k, v) in row.into_iter().enumerate() {
                    z[k] += v;
                }
            }
            z
        }
    }
}

/// Norm table for all 0 <= k <= N, one transfer pass per boundary.
pub fn z_table(rungs: usize, boundary: Boundary) -> Result<NormTable> {
    // Validate geometry the same way the lattice does.
    build_ladder(rungs, boundary)?;
    let z = z_values(rungs, boundary);
    let mut d = Vec::new();
    for x in 0..=(rungs + 1).min(127) {
        d.push(d_sequence(x as u32).expect("within overflow bound"));
    }
    Ok(NormTable {
        rungs,
        boundary,
        z,
        d,
    })
}

fn block_sites(m1: usize) -> Vec<usize> {
    vec![2 * m1, 2 * m1 + 1, 2 * m1 + 2, 2 * m1 + 3]
}

/// Shared assembly: joins prefix/suffix grading polynomials with the open
/// block transfer and extracts one unnormalized 81x81 matrix per k.
fn assemble(
    rungs: usize,
    blocks: &[BlockEntry],
    mut joined: impl FnMut(u8, u8) -> Vec<f64>,
) -> Vec<DMatrix<f64>> {
    let mut memo: HashMap<(u8, u8), Vec<f64>> = HashMap::new();
    let mut rho_u = vec![DMatrix::zeros(81, 81); rungs + 1];
    for be in blocks {
        let joined = memo
            .entry((be.pin, be.pout))
            .or_insert_with(|| joined(be.pin, be.pout));
        let d_block = be.da as isize - be.db as isize;
        let slot = -d_block + transfer::D_OFF;
        if !(0..transfer::D_WIN as isize).contains(&slot) {
            continue;
        }
        for k in be.da as usize..=rungs {
            let w = joined[(k - be.da as usize) * transfer::D_WIN + slot as usize];
            if w != 0.0 {
                rho_u[k][(be.kidx as usize, be.bidx as usize)] += be.amp * w;
            }
        }
    }
    rho_u
}

fn normalize_sweep(m1: usize, rho_u: Vec<DMatrix<f64>>) -> Result<Vec<DensityMatrix>> {
    rho_u
        .into_iter()
        .map(|mat| {
            let tr = mat.trace();
            if !(tr > 0.0) {
                return Err(LadderError::ZeroNorm);
            }
            Ok(DensityMatrix::new(block_sites(m1), mat / tr))
        })
        .collect()
}

fn open_sweep_raw(rungs: usize, rung_pair: (usize, usize)) -> Result<Vec<DMatrix<f64>>> {
    let (m1, m) = rung_pair;
    if m != m1 + 1 || m >= rungs {
        return Err(LadderError::BadRungPair(m1, m));
    }
    let mut prefix = Frontier::delta(rungs, EMPTY_PAIR);
    for r in 0..m1 {
        prefix = prefix.apply(&traced_entries(r, true));
    }
    let mut suffix = Frontier::delta(rungs, EMPTY_PAIR);
    for r in (m + 1..rungs).rev() {
        suffix = suffix.pull(&traced_entries(r, r + 1 < rungs));
    }
    let blocks = block_entries(
        &open_entries(m1, true),
        &open_entries(m, m + 1 < rungs),
    );
    Ok(assemble(rungs, &blocks, |pin, pout| {
        prefix.convolve_pair(pin as usize, &suffix, pout as usize)
    }))
}

/// Normalized 4-site reduced states of the open ladder at rungs
/// (m-1, m), for every dimer count k at once.
pub fn rho_red_open_sweep(rungs: usize, rung_pair: (usize, usize)) -> Result<Vec<DensityMatrix>> {
    let rho_u = open_sweep_raw(rungs, rung_pair)?;
    normalize_sweep(rung_pair.0, rho_u)
}

/// Normalized 4-site reduced state of the open ladder at rungs (m-1, m).
pub fn rho_red_open(rungs: usize, k: usize, rung_pair: (usize, usize)) -> Result<DensityMatrix> {
    if k > rungs {
        return Err(LadderError::KOutOfRange { k, rungs });
    }
    Ok(rho_red_open_sweep(rungs, rung_pair)?.swap_remove(k))
}

fn periodic_sweep_raw(rungs: usize) -> Result<Vec<DMatrix<f64>>> {
    build_ladder(rungs, Boundary::Periodic)?;
    // Block fixed at rungs (0, 1); translation invariance covers the rest.
    let blocks = block_entries(&open_entries(0, true), &open_entries(1, true));
    let entries: Vec<Vec<TracedEntry>> = (2..rungs).map(|r| traced_entries(r, true)).collect();
    let mut starts: Vec<u8> = blocks.iter().map(|b| b.pout).collect();
    starts.sort_unstable();
    starts.dedup();
    let suffix_from: HashMap<u8, Frontier> = starts
        .par_iter()
        .map(|&beta| {
            let mut f = Frontier::delta(rungs, beta as usize);
            for e in &entries {
                f = f.apply(e);
            }
            (beta, f)
        })
        .collect();
    let mut rho_u = vec![DMatrix::zeros(81, 81); rungs + 1];
    for be in &blocks {
        let m = &suffix_from[&be.pout];
        let d_block = be.da as isize - be.db as isize;
        for k in be.da as usize..=rungs {
            let w = m.get(be.pin as usize, k - be.da as usize, -d_block);
            if w != 0.0 {
                rho_u[k][(be.kidx as usize, be.bidx as usize)] += be.amp * w;
            }
        }
    }
    Ok(rho_u)
}

/// Normalized 4-site reduced states of the periodic ladder, every k at once.
pub fn rho_red_periodic_sweep(rungs: usize) -> Result<Vec<DensityMatrix>> {
    let rho_u = periodic_sweep_raw(rungs)?;
    normalize_sweep(0, rho_u)
}

/// Normalized 4-site reduced state of the periodic ladder.
pub fn rho_red_periodic(rungs: usize, k: usize) -> Result<DensityMatrix> {
    if k > rungs {
        return Err(LadderError::KOutOfRange { k, rungs });
    }
    Ok(rho_red_periodic_sweep(rungs)?.swap_remove(k))
}

/// Window states entering the junction bookkeeping of the reduced-state
/// recursion. `Chi(k)` grows one rung per step; the remaining labels are
/// the fixed boundary windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JunctionLabel {
    Chi(usize),
    TwoBar,
    Xi,
    Gamma1,
    Gamma2,
    Zeta,
}

#[derive(Debug, Clone)]
pub struct JunctionState {
    pub label: JunctionLabel,
    /// Explicit state on the window sites, rung-major local indexing.
    pub window: SparseState,
}

fn local_ket(rungs: usize, dimers: Vec<(u16, u16)>) -> SparseState {
    let spec = build_ladder(rungs, Boundary::Open).expect("window geometry");
    let mut used = vec![false; spec.n_sites()];
    for &(a, b) in &dimers {
        used[a as usize] = true;
        used[b as usize] = true;
    }
    let holes = (0..spec.n_sites() as u16)
        .filter(|&s| !used[s as usize])
        .collect();
    covering_ket(&spec, &Covering { dimers, holes })
}

/// Staircase of k-1 horizontal dimers on a k-rung window, alternating legs
/// starting from `leg0`.
fn zigzag(rungs: usize, leg0: usize) -> Vec<(u16, u16)> {
    (0..rungs - 1)
        .map(|j| {
            let leg = ((leg0 + j) % 2) as u16;
            (2 * j as u16 + leg, 2 * j as u16 + 2 + leg)
        })
        .collect()
}

pub fn junction_state(label: JunctionLabel) -> Result<JunctionState> {
    let window = match label {
        JunctionLabel::Chi(k) => {
            if k < 2 {
                return Err(LadderError::BadJunction(format!(
                    "chi is defined for k >= 2, got {k}"
                )));
            }
            let mut s = local_ket(k, zigzag(k, 0));
            s.add_state(&local_ket(k, zigzag(k, 1)), 1.0);
            s
        }
        JunctionLabel::TwoBar => {
            // |0,2> - |0,1>|1,0> on the 4-site window.
            let full = crate::coverings::build_rvb_state(
                &build_ladder(2, Boundary::Open).expect("window"),
                2,
            )?;
            let mut s = full;
            s.add_state(&local_ket(2, vec![(0, 1)]), -1.0);
            s.prune();
            s
        }
        JunctionLabel::Gamma1 => local_ket(2, vec![(0, 2)]),
        JunctionLabel::Gamma2 => local_ket(2, vec![(1, 3)]),
        JunctionLabel::Xi => {
            let mut s = local_ket(2, vec![(0, 2)]);
            s.add_state(&local_ket(2, vec![(1, 3)]), 1.0);
            s
        }
        JunctionLabel::Zeta => local_ket(2, vec![(0, 2), (1, 3)]),
    };
    Ok(JunctionState { label, window })
}
