use rvb_core::coverings::enumerate_coverings;
use rvb_core::lattice::{build_ladder, Boundary, LadderSpec, Sublattice};

fn periodic_odd(rungs: usize) -> LadderSpec {
    let mut edges = Vec::new();
    for r in 0..rungs {
        edges.push((2 * r as u16, 2 * r as u16 + 1));
    }
    for r in 0..rungs - 1 {
        edges.push((2 * r as u16, 2 * r as u16 + 2));
        edges.push((2 * r as u16 + 1, 2 * r as u16 + 3));
    }
    edges.push((2 * (rungs as u16 - 1), 0));
    edges.push((2 * (rungs as u16 - 1) + 1, 1));
    LadderSpec {
        rungs,
        boundary: Boundary::Periodic,
        edges,
        sublattice: (0..2 * rungs)
            .map(|s| if (s / 2 + s % 2) % 2 == 0 { Sublattice::A } else { Sublattice::B })
            .collect(),
    }
}

fn main() {
    let p5 = periodic_odd(5);
    let counts: Vec<usize> = (0..=5).map(|k| enumerate_coverings(&p5, k).unwrap().len()).collect();
    println!("periodic 5-rung counts: {counts:?}  total={}", counts.iter().sum::<usize>());
    for n in [6usize, 7] {
        let spec = build_ladder(n, Boundary::Open).unwrap();
        let counts: Vec<usize> = (0..=n).map(|k| enumerate_coverings(&spec, k).unwrap().len()).collect();
        println!("open {n}-rung counts: {counts:?}");
    }
    let p6 = build_ladder(6, Boundary::Periodic).unwrap();
    let counts: Vec<usize> = (0..=6).map(|k| enumerate_coverings(&p6, k).unwrap().len()).collect();
    println!("periodic 6-rung counts: {counts:?}");
}
