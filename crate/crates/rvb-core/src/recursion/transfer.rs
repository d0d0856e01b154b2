//! Rung-frontier transfer machinery.
//!
//! A covering of the ladder is scanned rung by rung. The frontier at a cut
//! records, per leg, whether a leg dimer crosses the cut and which spin the
//! site on the right must emit (status 0 = no dimer, 1 + s = dimer whose
//! right end emits spin s). The full singlet amplitude, sign included, is
//! assigned where the dimer is created, so consuming a strand is amplitude
//! free.
//!
//! Reduced density matrices need a ket covering against a bra covering, so
//! the working state is a pair of frontiers (81 combinations). Contracting
//! the physical qutrit indices of a traced rung turns the double covering
//! sum into a sparse linear map on frontier pairs; the two rungs of the
//! reduced block keep their physical indices open instead. Weights are
//! graded by the number of ket dimers placed so far (`a`) and the running
//! ket-minus-bra dimer difference (`d`), so one pass yields every dimer
//! count at once.

use std::collections::HashMap;

/// Per-leg strand statuses per frontier.
pub const N_BOND: usize = 9;
/// Ket frontier times bra frontier.
pub const N_PAIR: usize = N_BOND * N_BOND;
/// Both frontiers empty.
pub const EMPTY_PAIR: usize = 0;

/// Window of the ket-minus-bra dimer difference. Matched occupancy on
/// traced sites pins |d| to at most 2 (one per crossing strand pair).
pub const D_WIN: usize = 5;
pub const D_OFF: isize = 2;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// One ket-layer transition of a single rung.
#[derive(Debug, Clone, Copy)]
pub struct KetMove {
    pub bond_in: u8,
    pub bond_out: u8,
    /// x_top * 3 + x_bot over {0 = up, 1 = down, 2 = hole}.
    pub phys: u8,
    pub amp: f64,
    /// Dimers created at this rung (rung dimer or outgoing legs).
    pub dimers: u8,
}

/// Site (rung, leg) is on sublattice A iff rung + leg is even; the A site
/// takes the first slot of (|01> - |10>)/sqrt(2).
#[inline]
fn is_a_site(rung: usize, leg: usize) -> bool {
    (rung + leg) % 2 == 0
}

/// Options for creating a leg dimer out of site (rung, leg): the emitted
/// spin, the strand status for the partner site, and the amplitude.
fn leg_creation(rung: usize, leg: usize) -> [(u8, u8, f64); 2] {
    if is_a_site(rung, leg) {
        [(0, 2, SQRT_HALF), (1, 1, -SQRT_HALF)]
    } else {
        [(0, 2, -SQRT_HALF), (1, 1, SQRT_HALF)]
    }
}

/// Per-site choice during a rung step.
#[derive(Clone, Copy)]
struct SiteChoice {
    x: u8,
    out_status: u8,
    amp: f64,
    dimers: u8,
}

fn site_choices(rung: usize, leg: usize, status_in: u8, has_out: bool) -> Vec<SiteChoice> {
    if status_in != 0 {
        // Committed by the strand from the left; emits the committed spin.
        return vec![SiteChoice {
            x: status_in - 1,
            out_status: 0,
            amp: 1.0,
            dimers: 0,
        }];
    }
    let mut v = vec![SiteChoice {
        x: 2,
        out_status: 0,
        amp: 1.0,
        dimers: 0,
    }];
    if has_out {
        for (x, status, amp) in leg_creation(rung, leg) {
            v.push(SiteChoice {
                x,
                out_status: status,
                amp,
                dimers: 1,
            });
        }
    }
    v
}

/// All ket-layer moves of rung `rung`. `has_out` is false only for the last
/// rung of an open ladder; for periodic ladders the outgoing legs of the
/// final rung are the wrap edges.
pub fn ket_moves(rung: usize, has_out: bool) -> Vec<KetMove> {
    let mut moves = Vec::new();
    for bond_in in 0..N_BOND as u8 {
        let (st, sb) = (bond_in / 3, bond_in % 3);
        for t in site_choices(rung, 0, st, has_out) {
            for b in site_choices(rung, 1, sb, has_out) {
                moves.push(KetMove {
                    bond_in,
                    bond_out: t.out_status * 3 + b.out_status,
                    phys: t.x * 3 + b.x,
                    amp: t.amp * b.amp,
                    dimers: t.dimers + b.dimers,
                });
            }
        }
        if st == 0 && sb == 0 {
            // Rung dimer occupies both sites at once.
            let (up, down) = if is_a_site(rung, 0) {
                ((0u8, 1u8, SQRT_HALF), (1u8, 0u8, -SQRT_HALF))
            } else {
                ((1u8, 0u8, SQRT_HALF), (0u8, 1u8, -SQRT_HALF))
            };
            for (xt, xb, amp) in [up, down] {
                moves.push(KetMove {
                    bond_in,
                    bond_out: 0,
                    phys: xt * 3 + xb,
                    amp,
                    dimers: 1,
                });
            }
        }
    }
    moves
}

/// Transfer entry of a traced rung: physical indices contracted between the
/// ket and bra layers.
#[derive(Debug, Clone, Copy)]
pub struct TracedEntry {
    pub pin: u8,
    pub pout: u8,
    pub amp: f64,
    pub da: u8,
    pub db: u8,
}

pub fn traced_entries(rung: usize, has_out: bool) -> Vec<TracedEntry> {
    let moves = ket_moves(rung, has_out);
    let mut acc: HashMap<(u8, u8, u8, u8), f64> = HashMap::new();
    for k in &moves {
        for b in &moves {
            if k.phys != b.phys {
                continue;
            }
            let pin = k.bond_in * N_BOND as u8 + b.bond_in;
            let pout = k.bond_out * N_BOND as u8 + b.bond_out;
            *acc.entry((pin, pout, k.dimers, b.dimers)).or_insert(0.0) += k.amp * b.amp;
        }
    }
    let mut out: Vec<TracedEntry> = acc
        .into_iter()
        .filter(|&(_, amp)| amp != 0.0)
        .map(|((pin, pout, da, db), amp)| TracedEntry {
            pin,
            pout,
            amp,
            da,
            db,
        })
        .collect();
    out.sort_by_key(|e| (e.pin, e.pout, e.da, e.db));
    out
}

/// Transfer entry of a block rung: ket and bra physical indices stay open.
#[derive(Debug, Clone, Copy)]
pub struct OpenEntry {
    pub pin: u8,
    pub pout: u8,
    pub kphys: u8,
    pub bphys: u8,
    pub amp: f64,
    pub da: u8,
    pub db: u8,
}

pub fn open_entries(rung: usize, has_out: bool) -> Vec<OpenEntry> {
    let moves = ket_moves(rung, has_out);
    let mut out = Vec::new();
    for k in &moves {
        for b in &moves {
            out.push(OpenEntry {
                pin: k.bond_in * N_BOND as u8 + b.bond_in,
                pout: k.bond_out * N_BOND as u8 + b.bond_out,
                kphys: k.phys,
                bphys: b.phys,
                amp: k.amp * b.amp,
                da: k.dimers,
                db: b.dimers,
            });
        }
    }
    out
}

/// Composite transfer of the two block rungs, physical indices open on all
/// four sites. `kidx`/`bidx` run over the 81 block occupation strings in
/// rung-major order.
#[derive(Debug, Clone, Copy)]
pub struct BlockEntry {
    pub pin: u8,
    pub pout: u8,
    pub kidx: u8,
    pub bidx: u8,
    pub amp: f64,
    pub da: u8,
    pub db: u8,
}

pub fn block_entries(first: &[OpenEntry], second: &[OpenEntry]) -> Vec<BlockEntry> {
    let mut by_pin: Vec<Vec<&OpenEntry>> = vec![Vec::new(); N_PAIR];
    for e in second {
        by_pin[e.pin as usize].push(e);
    }
    let mut acc: HashMap<(u8, u8, u8, u8, u8, u8), f64> = HashMap::new();
    for e1 in first {
        for e2 in &by_pin[e1.pout as usize] {
            let key = (
                e1.pin,
                e2.pout,
                e1.kphys * 9 + e2.kphys,
                e1.bphys * 9 + e2.bphys,
                e1.da + e2.da,
                e1.db + e2.db,
            );
            *acc.entry(key).or_insert(0.0) += e1.amp * e2.amp;
        }
    }
    let mut out: Vec<BlockEntry> = acc
        .into_iter()
        .filter(|&(_, amp)| amp != 0.0)
        .map(|((pin, pout, kidx, bidx, da, db), amp)| BlockEntry {
            pin,
            pout,
            kidx,
            bidx,
            amp,
            da,
            db,
        })
        .collect();
    out.sort_by_key(|e| (e.pin, e.pout, e.kidx, e.bidx));
    out
}

/// Frontier-pair weights graded by (ket dimers `a`, difference `d`).
#[derive(Debug, Clone)]
pub struct Frontier {
    pub a_max: usize,
    data: Vec<f64>,
}

impl Frontier {
    pub fn delta(a_max: usize, pair: usize) -> Self {
        let mut f = Frontier {
            a_max,
            data: vec![0.0; N_PAIR * (a_max + 1) * D_WIN],
        };
        let i = f.idx(pair, 0, D_OFF);
        f.data[i] = 1.0;
        f
    }

    #[inline]
    fn idx(&self, pair: usize, a: usize, dslot: isize) -> usize {
        (pair * (self.a_max + 1) + a) * D_WIN + dslot as usize
    }

    #[inline]
    pub fn get(&self, pair: usize, a: usize, d: isize) -> f64 {
        let slot = d + D_OFF;
        if a > self.a_max || !(0..D_WIN as isize).contains(&slot) {
            return 0.0;
        }
        self.data[self.idx(pair, a, slot)]
    }

    /// One traced rung applied on the right: new = T * old.
    pub fn apply(&self, entries: &[TracedEntry]) -> Frontier {
        let mut next = Frontier {
            a_max: self.a_max,
            data: vec![0.0; self.data.len()],
        };
        for e in entries {
            let dd = e.da as isize - e.db as isize;
            for a in 0..=self.a_max.saturating_sub(e.da as usize) {
                for slot in 0..D_WIN as isize {
                    let w = self.data[self.idx(e.pin as usize, a, slot)];
                    if w == 0.0 {
                        continue;
                    }
                    let ns = slot + dd;
                    assert!(
                        (0..D_WIN as isize).contains(&ns),
                        "dimer-difference window exceeded"
                    );
                    let di = next.idx(e.pout as usize, a + e.da as usize, ns);
                    next.data[di] += e.amp * w;
                }
            }
        }
        next
    }

    /// One traced rung absorbed from the left: new(pin) sums T(pin -> pout)
    /// against old(pout), shifting the grading down. Used for suffix passes.
    pub fn pull(&self, entries: &[TracedEntry]) -> Frontier {
        let mut prev = Frontier {
            a_max: self.a_max,
            data: vec![0.0; self.data.len()],
        };
        for e in entries {
            let dd = e.da as isize - e.db as isize;
            for a in e.da as usize..=self.a_max {
                for slot in 0..D_WIN as isize {
                    let w = self.data[self.idx(e.pout as usize, a - e.da as usize, slot)];
                    if w == 0.0 {
                        continue;
                    }
                    let ns = slot + dd;
                    assert!(
                        (0..D_WIN as isize).contains(&ns),
                        "dimer-difference window exceeded"
                    );
                    let di = prev.idx(e.pin as usize, a, ns);
                    prev.data[di] += e.amp * w;
                }
            }
        }
        prev
    }

    /// Convolution (self * other)(a, d) over the grading, clipped to the
    /// window. Used to join a prefix and a suffix pass at the block.
    pub fn convolve_pair(&self, pin: usize, other: &Frontier, pout: usize) -> Vec<f64> {
        let a_max = self.a_max;
        let mut out = vec![0.0; (a_max + 1) * D_WIN];
        for af in 0..=a_max {
            for sf in 0..D_WIN as isize {
                let wf = self.data[self.idx(pin, af, sf)];
                if wf == 0.0 {
                    continue;
                }
                for ag in 0..=(a_max - af) {
                    for sg in 0..D_WIN as isize {
                        let wg = other.data[other.idx(pout, ag, sg)];
                        if wg == 0.0 {
                            continue;
                        }
                        let s = sf + sg - D_OFF;
                        if (0..D_WIN as isize).contains(&s) {
                            out[(af + ag) * D_WIN + s as usize] += wf * wg;
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_rung_traced_norms() {
        // One open rung, no outgoing legs: |2,2> contributes weight 1 at
        // (a, b) = (0, 0) and the rung singlet weight 1 at (1, 1).
        let f = Frontier::delta(1, EMPTY_PAIR).apply(&traced_entries(0, false));
        assert!((f.get(EMPTY_PAIR, 0, 0) - 1.0).abs() < 1e-15);
        assert!((f.get(EMPTY_PAIR, 1, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ket_moves_are_bounded() {
        for rung in [0, 1] {
            for has_out in [false, true] {
                let moves = ket_moves(rung, has_out);
                for m in &moves {
                    assert!(m.dimers <= 2);
                    assert!(m.amp != 0.0);
                }
            }
        }
    }

    #[test]
    fn traced_entries_conserve_strand_parity() {
        // Ket and bra crossing counts stay congruent mod 2 whenever the
        // traced contraction is nonzero.
        let strands = |bond: u8| -> u8 { (bond / 3 != 0) as u8 + (bond % 3 != 0) as u8 };
        for e in traced_entries(0, true) {
            let (kin, bin) = (e.pin / 9, e.pin % 9);
            let (kout, bout) = (e.pout / 9, e.pout % 9);
            let ket_parity = (strands(kin) + strands(kout)) % 2;
            let bra_parity = (strands(bin) + strands(bout)) % 2;
            assert_eq!(ket_parity, bra_parity, "entry {e:?}");
        }
    }
}
