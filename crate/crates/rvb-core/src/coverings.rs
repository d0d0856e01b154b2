//! Brute-force dimer-covering oracle.
//!
//! Enumerates every way to place `k` vertex-disjoint dimers on the ladder
//! (all other sites holes), assembles the equal-weight RVB superposition,
//! and reduces it exactly. This is the ground truth the transfer recursion
//! is gated against; it is practical up to 7 rungs.

use std::collections::BTreeMap;

use crate::error::{LadderError, Result};
use crate::lattice::{Boundary, LadderSpec};
use crate::statevec::{self, key_from_digits, DensityMatrix, SparseState};

/// One monomer-dimer covering: `k` disjoint edges plus the untouched sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Covering {
    /// Dimer edges as (low site, high site), sorted.
    pub dimers: Vec<(u16, u16)>,
    /// Hole sites, ascending.
    pub holes: Vec<u16>,
}

impl std::fmt::Display for Covering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, (a, b)) in self.dimers.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{a}-{b}")?;
        }
        write!(f, " |")?;
        for h in &self.holes {
            write!(f, " {h}")?;
        }
        Ok(())
    }
}

struct Enumerator<'a> {
    spec: &'a LadderSpec,
    k: usize,
    wrap_top: bool,
    wrap_bot: bool,
    out: Vec<Covering>,
}

impl<'a> Enumerator<'a> {
    /// Extends the covering rung by rung. `matched_*` say whether the
    /// current rung's sites are already taken by a leg dimer from the left
    /// (or by a wrap dimer for rung 0).
    fn extend(&mut self, rung: usize, matched_top: bool, matched_bot: bool, dimers: &mut Vec<(u16, u16)>) {
        let n = self.spec.rungs;
        // Upper bound on dimers that still fit: half the unmatched sites.
        let free = 2 * (n - rung) - matched_top as usize - matched_bot as usize;
        if dimers.len() + free / 2 < self.k || dimers.len() > self.k {
            return;
        }
        if rung == n {
            if dimers.len() == self.k {
                self.out.push(self.finish(dimers));
            }
            return;
        }
        let last = rung == n - 1;
        let t = 2 * rung as u16;
        let b = t + 1;
        // Wrap dimers reserve the sites of the final rung.
        let top_reserved = last && self.wrap_top;
        let bot_reserved = last && self.wrap_bot;
        if (top_reserved && matched_top) || (bot_reserved && matched_bot) {
            return; // leg dimer collides with a wrap dimer
        }

        // Rung dimer.
        if !matched_top && !matched_bot && !top_reserved && !bot_reserved {
            dimers.push((t, b));
            self.extend(rung + 1, false, false, dimers);
            dimers.pop();
        }
        // Independent per-leg choices: hole or outgoing leg dimer.
        let top_opts: &[bool] = if matched_top || top_reserved {
            &[false]
        } else if last {
            &[false]
        } else {
            &[false, true]
        };
        for &top_leg in top_opts {
            let bot_opts: &[bool] = if matched_bot || bot_reserved {
                &[false]
            } else if last {
                &[false]
            } else {
                &[false, true]
            };
            for &bot_leg in bot_opts {
                let mut added = 0;
                if top_leg {
                    dimers.push((t, t + 2));
                    added += 1;
                }
                if bot_leg {
                    dimers.push((b, b + 2));
                    added += 1;
                }
                self.extend(rung + 1, top_leg, bot_leg, dimers);
                for _ in 0..added {
                    dimers.pop();
                }
            }
        }
    }

    fn finish(&self, dimers: &[(u16, u16)]) -> Covering {
        let mut all = dimers.to_vec();
        let n = self.spec.rungs as u16;
        if self.wrap_top {
            all.push((0, 2 * (n - 1)));
        }
        if self.wrap_bot {
            all.push((1, 2 * (n - 1) + 1));
        }
        let mut used = vec![false; self.spec.n_sites()];
        for &(a, b) in &all {
            used[a as usize] = true;
            used[b as usize] = true;
        }
        let holes = (0..self.spec.n_sites() as u16)
            .filter(|&s| !used[s as usize])
            .collect();
        all.sort_unstable();
        Covering { dimers: all, holes }
    }
}

/// All coverings with exactly `k` dimers, lexicographically ordered on
/// their sorted edge lists.
pub fn enumerate_coverings(spec: &LadderSpec, k: usize) -> Result<Vec<Covering>> {
    if k > spec.rungs {
        return Err(LadderError::KOutOfRange { k, rungs: spec.rungs });
    }
    let wrap_choices: &[(bool, bool)] = if spec.boundary == Boundary::Periodic {
        &[(false, false), (true, false), (false, true), (true, true)]
    } else {
        &[(false, false)]
    };
    let mut out = Vec::new();
    for &(wrap_top, wrap_bot) in wrap_choices {
        let pre = wrap_top as usize + wrap_bot as usize;
        if pre > k {
            continue;
        }
        // The scan places only the k - pre interior dimers; wrap dimers are
        // accounted by pre-matching rung 0 and reserving the last rung.
        let mut e = Enumerator {
            spec,
            k: k - pre,
            wrap_top,
            wrap_bot,
            out: Vec::new(),
        };
        let mut dimers = Vec::with_capacity(k);
        e.extend(0, wrap_top, wrap_bot, &mut dimers);
        out.extend(e.out);
    }
    out.sort_by(|a, b| a.dimers.cmp(&b.dimers));
    out.dedup();
    Ok(out)
}

/// The singlet ket of one covering: the A-sublattice site of every dimer
/// takes the first slot of (|01> - |10>)/sqrt(2), holes are |2>.
pub fn covering_ket(spec: &LadderSpec, covering: &Covering) -> SparseState {
    let n = spec.n_sites();
    let mut digits = vec![2u8; n];
    for &h in &covering.holes {
        digits[h as usize] = 2;
    }
    // Expand the product of singlets over all 2^k sign branches.
    let mut terms: Vec<(Vec<u8>, f64)> = vec![(digits, 1.0)];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for &(a, b) in &covering.dimers {
        let (a_site, b_site) = if spec.is_sublattice_a(a as usize) {
            (a as usize, b as usize)
        } else {
            (b as usize, a as usize)
        };
        let mut next = Vec::with_capacity(terms.len() * 2);
        for (d, amp) in terms {
            let mut up = d.clone();
            up[a_site] = 0;
            up[b_site] = 1;
            next.push((up, amp * r));
            let mut down = d;
            down[a_site] = 1;
            down[b_site] = 0;
            next.push((down, amp * (-r)));
        }
        terms = next;
    }
    let mut amps = BTreeMap::new();
    for (d, amp) in terms {
        *amps.entry(key_from_digits(&d)).or_insert(0.0) += amp;
    }
    SparseState::from_amplitudes(n, amps)
}

/// Unnormalized equal-weight superposition over all `k`-dimer coverings.
pub fn build_rvb_state(spec: &LadderSpec, k: usize) -> Result<SparseState> {
    let coverings = enumerate_coverings(spec, k)?;
    let mut state = SparseState::new(spec.n_sites());
    for c in &coverings {
        state.add_state(&covering_ket(spec, c), 1.0);
    }
    state.prune();
    Ok(state)
}

/// Exact normalized 4-site reduced state on rungs (m-1, m); ground truth
/// for the transfer recursion.
pub fn oracle_rho_red(spec: &LadderSpec, k: usize, rung_pair: (usize, usize)) -> Result<DensityMatrix> {
    let (m1, m) = rung_pair;
    if m != m1 + 1 || m >= spec.rungs {
        return Err(LadderError::BadRungPair(m1, m));
    }
    let state = build_rvb_state(spec, k)?;
    let keep = [2 * m1, 2 * m1 + 1, 2 * m, 2 * m + 1];
    statevec::reduce(&state, &keep)
}
