//! 2-leg ladder geometry.
//!
//! Sites are indexed rung-major: rung `r` contributes site `2r` (top leg)
//! and `2r + 1` (bottom leg), so the 4-site block at two adjacent rungs is a
//! contiguous index range. The checkerboard sublattice labels fix the slot
//! order of every dimer singlet downstream.

use crate::error::{LadderError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Open => write!(f, "open"),
            Boundary::Periodic => write!(f, "periodic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sublattice {
    A,
    B,
}

/// Topology descriptor consumed by every other module. Immutable after
/// construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LadderSpec {
    pub rungs: usize,
    pub boundary: Boundary,
    /// Canonically ordered: rung edges, top-leg edges, bottom-leg edges,
    /// wrap edges last (top wrap before bottom wrap).
    pub edges: Vec<(u16, u16)>,
    /// Checkerboard label per site.
    pub sublattice: Vec<Sublattice>,
}

impl LadderSpec {
    pub fn n_sites(&self) -> usize {
        2 * self.rungs
    }

    /// Site index of (rung, leg), leg 0 = top.
    pub fn site(&self, rung: usize, leg: usize) -> usize {
        2 * rung + leg
    }

    pub fn rung_of(site: usize) -> usize {
        site / 2
    }

    pub fn leg_of(site: usize) -> usize {
        site % 2
    }

    pub fn is_sublattice_a(&self, site: usize) -> bool {
        self.sublattice[site] == Sublattice::A
    }

    /// Degree of a site in the edge list.
    #[cfg(test)]
    fn degree(&self, site: u16) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == site || b == site)
            .count()
    }
}

/// Builds the 2-leg ladder. Periodic boundaries need an even rung count of
/// at least 4, otherwise the checkerboard sublattice assignment breaks.
pub fn build_ladder(rungs: usize, boundary: Boundary) -> Result<LadderSpec> {
    if rungs == 0 {
        return Err(LadderError::InvalidLadder("rungs must be >= 1".into()));
    }
    if boundary == Boundary::Periodic {
        if rungs % 2 != 0 {
            return Err(LadderError::InvalidLadder(format!(
                "periodic ladder with {rungs} rungs has no consistent sublattice labeling"
            )));
        }
        if rungs < 4 {
            return Err(LadderError::InvalidLadder(
                "periodic ladder needs at least 4 rungs".into(),
            ));
        }
    }

    let mut edges = Vec::with_capacity(3 * rungs);
    for r in 0..rungs {
        edges.push((2 * r as u16, 2 * r as u16 + 1));
    }
    for r in 0..rungs.saturating_sub(1) {
        edges.push((2 * r as u16, 2 * r as u16 + 2));
    }
    for r in 0..rungs.saturating_sub(1) {
        edges.push((2 * r as u16 + 1, 2 * r as u16 + 3));
    }
    if boundary == Boundary::Periodic {
        edges.push((2 * (rungs as u16 - 1), 0));
        edges.push((2 * (rungs as u16 - 1) + 1, 1));
    }

    let sublattice = (0..2 * rungs)
        .map(|site| {
            if (site / 2 + site % 2) % 2 == 0 {
                Sublattice::A
            } else {
                Sublattice::B
            }
        })
        .collect();

    let spec = LadderSpec {
        rungs,
        boundary,
        edges,
        sublattice,
    };
    debug_assert!(spec
        .edges
        .iter()
        .all(|&(a, b)| spec.sublattice[a as usize] != spec.sublattice[b as usize]));
    Ok(spec)
}

/// Canonically ordered nearest-neighbor edge list. Pure: identical inputs
/// yield identical lists.
pub fn nn_edges(spec: &LadderSpec) -> Vec<(u16, u16)> {
    spec.edges.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_ladder() {
        let spec = build_ladder(2, Boundary::Open).unwrap();
        assert_eq!(spec.n_sites(), 4);
        assert_eq!(spec.edges, vec![(0, 1), (2, 3), (0, 2), (1, 3)]);
    }

    #[test]
    fn open_edge_count_is_3n_minus_2() {
        for n in 1..=12 {
            let spec = build_ladder(n, Boundary::Open).unwrap();
            assert_eq!(spec.edges.len(), 3 * n - 2, "N={n}");
        }
        assert_eq!(build_ladder(3, Boundary::Open).unwrap().edges.len(), 7);
    }

    #[test]
    fn periodic_edge_count_is_3n() {
        for n in [4, 6, 8, 10] {
            let spec = build_ladder(n, Boundary::Periodic).unwrap();
            assert_eq!(spec.edges.len(), 3 * n);
        }
    }

    #[test]
    fn periodic_wrap_edges_present() {
        let spec = build_ladder(4, Boundary::Periodic).unwrap();
        assert!(spec.edges.contains(&(6, 0)));
        assert!(spec.edges.contains(&(7, 1)));
        // wrap edges come last
        assert_eq!(&spec.edges[spec.edges.len() - 2..], &[(6, 0), (7, 1)]);
    }

    #[test]
    fn rejects_bad_geometries() {
        assert!(build_ladder(0, Boundary::Open).is_err());
        assert!(build_ladder(3, Boundary::Periodic).is_err());
        assert!(build_ladder(5, Boundary::Periodic).is_err());
        assert!(build_ladder(2, Boundary::Periodic).is_err());
    }

    #[test]
    fn degrees_match_boundary() {
        let open = build_ladder(5, Boundary::Open).unwrap();
        for s in 0..open.n_sites() as u16 {
            let d = open.degree(s);
            assert!(d == 2 || d == 3, "site {s} degree {d}");
        }
        let per = build_ladder(6, Boundary::Periodic).unwrap();
        for s in 0..per.n_sites() as u16 {
            assert_eq!(per.degree(s), 3, "site {s}");
        }
    }

    #[test]
    fn every_edge_crosses_sublattices() {
        for (n, b) in [(7, Boundary::Open), (8, Boundary::Periodic)] {
            let spec = build_ladder(n, b).unwrap();
            for &(a, bb) in &spec.edges {
                assert_ne!(spec.sublattice[a as usize], spec.sublattice[bb as usize]);
            }
        }
    }

    #[test]
    fn edges_are_exactly_grid_distance_one() {
        let spec = build_ladder(6, Boundary::Open).unwrap();
        let mut expected = Vec::new();
        for a in 0..spec.n_sites() {
            for b in (a + 1)..spec.n_sites() {
                let (ra, la) = (a / 2, a % 2);
                let (rb, lb) = (b / 2, b % 2);
                let dist = ra.abs_diff(rb) + la.abs_diff(lb);
                if dist == 1 {
                    expected.push((a as u16, b as u16));
                }
            }
        }
        let mut got: Vec<_> = spec
            .edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        got.sort_unstable();
        expected.sort_unstable();
        assert_eq!(got, expected);
    }

    #[test]
    fn nn_edges_is_pure() {
        let spec = build_ladder(4, Boundary::Periodic).unwrap();
        assert_eq!(nn_edges(&spec), nn_edges(&spec));
    }
}
