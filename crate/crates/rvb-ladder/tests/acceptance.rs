//! Acceptance suite: one test per headline criterion, each printing a
//! single PASS/FAIL line (run with `--nocapture` to see them on success).
//!
//! Criteria 2, 3 and 6 contain sub-checks that the exact computation
//! genuinely contradicts; those tests fail honestly with the counterexample
//! in the message rather than loosening the stated tolerance.

use std::time::Instant;

use rvb_core::coverings::{build_rvb_state, oracle_rho_red};
use rvb_core::entanglement::{ggm_from_block, ggm_pure, theorem_mixedness_scan, ScanStatus};
use rvb_core::lattice::{build_ladder, Boundary};
use rvb_core::recursion::{rho_red_open_sweep, rho_red_periodic_sweep, z_table};
use rvb_core::statevec::inner;
use rvb_core::tjmodel::{
    apply_hamiltonian, apply_hamiltonian_with_order, dense_ground_state, ground_state_at_density,
    lanczos_ground_state, sector_basis, TJParams,
};

const RHO_TOL: f64 = 1e-10;
const Z_REL_TOL: f64 = 1e-9;
const SUFFICIENCY_TOL: f64 = 1e-9;

fn criterion_instances() -> Vec<(usize, Boundary)> {
    vec![
        (2, Boundary::Open),
        (3, Boundary::Open),
        (4, Boundary::Open),
        (5, Boundary::Open),
        (4, Boundary::Periodic),
    ]
}

fn verdict(criterion: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("[PASS] {criterion}");
    } else {
        println!("[FAIL] {criterion}");
        for f in failures {
            println!("       {f}");
        }
    }
    assert!(failures.is_empty(), "{criterion}: {failures:?}");
}

#[test]
fn criterion_1_oracle_equivalence() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (n, boundary) in criterion_instances() {
        let spec = build_ladder(n, boundary).unwrap();
        let table = z_table(n, boundary).unwrap();
        let sweep = match boundary {
            Boundary::Open => rho_red_open_sweep(n, (n - 2, n - 1)),
            Boundary::Periodic => rho_red_periodic_sweep(n),
        }
        .unwrap();
        for k in 0..=n {
            let oracle = oracle_rho_red(&spec, k, (n - 2, n - 1)).unwrap();
            let dev = (&sweep[k].mat - &oracle.mat).abs().max();
            if dev > RHO_TOL {
                failures.push(format!("rho N={n} {boundary} k={k}: dev {dev:.3e}"));
            }
            let state = build_rvb_state(&spec, k).unwrap();
            let z_oracle = inner(&state, &state).unwrap();
            let z_dev = (table.z_dimers(k).unwrap() - z_oracle).abs() / z_oracle.max(1.0);
            if z_dev > Z_REL_TOL {
                failures.push(format!("z N={n} {boundary} k={k}: rel dev {z_dev:.3e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() > 120.0 {
        failures.push(format!("runtime budget exceeded: {elapsed:?} > 2 min"));
    }
    verdict(
        "criterion 1: recursion matches oracle (rho 1e-10, Z 1e-9 rel) on N=2..5 open and N=4 periodic",
        &failures,
    );
}

#[test]
fn criterion_2_block_sufficiency() {
    let mut failures = Vec::new();
    for (n, boundary) in criterion_instances() {
        let spec = build_ladder(n, boundary).unwrap();
        for k in 1..=n {
            let state = build_rvb_state(&spec, k).unwrap();
            let full = ggm_pure(&state).unwrap();
            let rho = oracle_rho_red(&spec, k, (n - 2, n - 1)).unwrap();
            let block = ggm_from_block(&rho).unwrap();
            let diff = (full.ggm - block.ggm).abs();
            if diff > SUFFICIENCY_TOL {
                failures.push(format!(
                    "N={n} {boundary} k={k}: ggm_pure {:.9} (argmax {:?}) vs block {:.9}, diff {diff:.3e}",
                    full.ggm, full.argmax_bipartition, block.ggm
                ));
            }
        }
    }
    verdict(
        "criterion 2: 4-site block GGM equals exhaustive pure-state GGM (1e-9) on all oracle instances",
        &failures,
    );
}

#[test]
fn criterion_3_rvb_curve_and_nc_scan() {
    let start = Instant::now();
    let mut failures = Vec::new();

    // 2N = 40 periodic sweep: G(0) = 0, single interior maximum, grid
    // maximum located in [0.50, 0.65].
    let rungs = 20;
    let sweep = rho_red_periodic_sweep(rungs).unwrap();
    let curve: Vec<f64> = sweep
        .iter()
        .map(|rho| ggm_from_block(rho).unwrap().ggm)
        .collect();
    if curve[0].abs() > 1e-12 {
        failures.push(format!("G(0) = {} is not 0", curve[0]));
    }
    let argmax = (0..curve.len())
        .max_by(|&a, &b| curve[a].partial_cmp(&curve[b]).unwrap())
        .unwrap();
    if argmax == 0 || argmax == curve.len() - 1 {
        failures.push("maximum sits on the grid edge".into());
    }
    for i in 0..argmax {
        if curve[i + 1] < curve[i] - 1e-12 {
            failures.push(format!("curve not increasing before max at k={i}"));
        }
    }
    for i in argmax..curve.len() - 1 {
        if curve[i + 1] > curve[i] + 1e-12 {
            failures.push(format!("curve not decreasing after max at k={i}"));
        }
    }
    let loc = argmax as f64 / rungs as f64;
    if !(0.50..=0.65).contains(&loc) {
        failures.push(format!("2N=40 maximum at n_el={loc}, outside [0.50, 0.65]"));
    }

    // nc-scan up to 300 sites with parabolic refinement; the spec pins
    // n_c(300) = 0.56 +/- 0.02.
    let mut nc300 = f64::NAN;
    let mut ncs = Vec::new();
    for sites in [20usize, 40, 100, 200, 300] {
        let r = sites / 2;
        let sweep = rho_red_periodic_sweep(r).unwrap();
        let curve: Vec<(f64, f64)> = sweep
            .iter()
            .enumerate()
            .map(|(k, rho)| (k as f64 / r as f64, ggm_from_block(rho).unwrap().ggm))
            .collect();
        let bi = (0..curve.len())
            .max_by(|&a, &b| curve[a].1.partial_cmp(&curve[b].1).unwrap())
            .unwrap();
        let (x0, y0) = curve[bi - 1];
        let (x1, y1) = curve[bi];
        let (x2, y2) = curve[bi + 1];
        let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
        let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
        let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
        let nc = -b / (2.0 * a);
        ncs.push(nc);
        if sites == 300 {
            nc300 = nc;
        }
    }
    // convergence diagnostic from the scan itself
    if (ncs[4] - ncs[3]).abs() >= (ncs[1] - ncs[0]).abs() {
        failures.push("n_c sequence is not tightening with size".into());
    }
    if (nc300 - 0.56).abs() > 0.02 {
        failures.push(format!(
            "n_c(300 sites) = {nc300:.4}, outside 0.56 +/- 0.02 (exact computation; see ledger)"
        ));
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() > 600.0 {
        failures.push(format!("runtime budget exceeded: {elapsed:?} > 10 min"));
    }
    verdict(
        "criterion 3: 2N=40 curve shape and n_c(300) = 0.56 +/- 0.02",
        &failures,
    );
}

#[test]
fn criterion_4_theorem_property_suite() {
    let mut failures = Vec::new();
    let mut instances = criterion_instances();
    instances.push((6, Boundary::Periodic));
    for (n, boundary) in instances {
        let spec = build_ladder(n, boundary).unwrap();
        for k in 1..=n {
            let state = build_rvb_state(&spec, k).unwrap();
            let g = ggm_pure(&state).unwrap();
            if g.ggm <= 1e-6 {
                failures.push(format!("N={n} {boundary} k={k}: ggm {:.3e} <= 1e-6", g.ggm));
            }
            let report = theorem_mixedness_scan(&spec, k).unwrap();
            assert_eq!(report.status, ScanStatus::Completed);
            for e in report.entries.iter().filter(|e| !e.ok) {
                failures.push(format!(
                    "N={n} {boundary} k={k}: {} value {:.3e}",
                    e.label, e.value
                ));
            }
        }
    }
    verdict(
        "criterion 4: doped RVB states are genuinely multipartite entangled (mixed marginals, NPT rungs, canonical forms)",
        &failures,
    );
}

#[test]
fn criterion_5_tj_small_system_correctness() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let params = TJParams::new(1.0, 0.66);

    // Lanczos vs dense: every 2x2 sector, then 2x3 S^z = 0 sectors.
    let spec2 = build_ladder(2, Boundary::Open).unwrap();
    for n_up in 0..=4usize {
        for n_down in 0..=(4 - n_up) {
            let basis = sector_basis(&spec2, n_up, n_down).unwrap();
            let (e_dense, _) = dense_ground_state(&params, &basis).unwrap();
            let gs = lanczos_ground_state(&params, &basis, 1e-10, 42).unwrap();
            if (gs.energy - e_dense).abs() > 1e-9 {
                failures.push(format!(
                    "2x2 ({n_up},{n_down}): lanczos {} vs dense {e_dense}",
                    gs.energy
                ));
            }
        }
    }
    let spec3 = build_ladder(3, Boundary::Open).unwrap();
    for q in 0..=3usize {
        let basis = sector_basis(&spec3, q, q).unwrap();
        let (e_dense, _) = dense_ground_state(&params, &basis).unwrap();
        let gs = lanczos_ground_state(&params, &basis, 1e-10, 42).unwrap();
        if (gs.energy - e_dense).abs() > 1e-9 {
            failures.push(format!(
                "2x3 ({q},{q}): lanczos {} vs dense {e_dense}",
                gs.energy
            ));
        }
    }

    // Hermiticity on deterministic vectors.
    let basis = sector_basis(&spec3, 2, 2).unwrap();
    let dim = basis.dim();
    let u: Vec<f64> = (0..dim).map(|i| ((i as f64 + 1.0) * 0.37).sin()).collect();
    let v: Vec<f64> = (0..dim).map(|i| ((i as f64 + 2.0) * 0.73).cos()).collect();
    let hu = apply_hamiltonian(&params, &basis, &u).unwrap();
    let hv = apply_hamiltonian(&params, &basis, &v).unwrap();
    let uhv: f64 = u.iter().zip(&hv).map(|(a, b)| a * b).sum();
    let huv: f64 = hu.iter().zip(&v).map(|(a, b)| a * b).sum();
    if (uhv - huv).abs() > 1e-12 * uhv.abs().max(1.0) {
        failures.push(format!("hermiticity residual {:.3e}", (uhv - huv).abs()));
    }

    // Energy invariance under an alternative Jordan-Wigner ordering.
    let n = spec3.n_sites();
    let order: Vec<u16> = (0..n as u16)
        .map(|p| if (p as usize) < n / 2 { 2 * p } else { 2 * (p - n as u16 / 2) + 1 })
        .collect();
    for q in 1..=2usize {
        let basis = sector_basis(&spec3, q, q).unwrap();
        let dim = basis.dim();
        let mut h1 = nalgebra::DMatrix::zeros(dim, dim);
        let mut h2 = nalgebra::DMatrix::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        for col in 0..dim {
            e[col] = 1.0;
            let a = apply_hamiltonian(&params, &basis, &e).unwrap();
            let b = apply_hamiltonian_with_order(&params, &basis, &order, &e).unwrap();
            for row in 0..dim {
                h1[(row, col)] = a[row];
                h2[(row, col)] = b[row];
            }
            e[col] = 0.0;
        }
        let e1 = rvb_core::linalg::sym_eigenvalues(&h1);
        let e2 = rvb_core::linalg::sym_eigenvalues(&h2);
        let dev = e1
            .iter()
            .zip(&e2)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if dev > 1e-10 {
            failures.push(format!("JW ordering changed the 2x3 ({q},{q}) spectrum by {dev:.3e}"));
        }
    }

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() > 60.0 {
        failures.push(format!("runtime budget exceeded: {elapsed:?} > 1 min"));
    }
    verdict(
        "criterion 5: Lanczos matches dense diagonalization (1e-9); Hermitian; JW-gauge invariant",
        &failures,
    );
}

fn tj_curve(rungs: usize, boundary: Boundary) -> Vec<(f64, f64)> {
    let params = TJParams::new(1.0, 0.66);
    let spec = build_ladder(rungs, boundary).unwrap();
    let sites = spec.n_sites();
    (0..=rungs)
        .map(|pairs| {
            let nel = 2.0 * pairs as f64 / sites as f64;
            let gs = ground_state_at_density(&params, &spec, nel, 1e-10, 42).unwrap();
            let g = ggm_pure(&gs.vector).unwrap();
            (nel, g.ggm)
        })
        .collect()
}

#[test]
fn criterion_6_tj_curve_reproduction() {
    let start = Instant::now();
    let mut failures = Vec::new();
    // 10 sites: a periodic 5-rung ladder is not bipartite, so the only
    // constructible 10-site ladder is open (see ledger); 12 sites runs
    // periodic as in the source material.
    for (rungs, boundary) in [(5usize, Boundary::Open), (6, Boundary::Periodic)] {
        let sites = 2 * rungs;
        let curve = tj_curve(rungs, boundary);
        let argmax = (0..curve.len())
            .max_by(|&a, &b| curve[a].1.partial_cmp(&curve[b].1).unwrap())
            .unwrap();
        // linearity below the maximum
        for &(nel, g) in curve.iter().take(argmax) {
            if (g - nel).abs() > 1e-3 {
                failures.push(format!(
                    "{sites} sites {boundary}: G({nel:.4}) = {g:.6}, |G - n_el| = {:.2e} > 1e-3",
                    (g - nel).abs()
                ));
            }
        }
        // maximum at the grid point nearest 0.65
        let nearest = (0..curve.len())
            .min_by(|&a, &b| {
                (curve[a].0 - 0.65)
                    .abs()
                    .partial_cmp(&(curve[b].0 - 0.65).abs())
                    .unwrap()
            })
            .unwrap();
        if argmax != nearest {
            failures.push(format!(
                "{sites} sites {boundary}: maximum at n_el={:.4}, expected grid point {:.4}",
                curve[argmax].0, curve[nearest].0
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() > 900.0 {
        failures.push(format!("runtime budget exceeded: {elapsed:?} > 15 min"));
    }
    verdict(
        "criterion 6: t-J GGM linear below the maximum (1e-3) with maximum nearest 0.65, 10 and 12 sites",
        &failures,
    );
}

/// The 14-site run is optional and slow; run explicitly with
/// `cargo test -p rvb-ladder --test acceptance -- --ignored`.
#[test]
#[ignore]
fn criterion_6_extension_14_sites() {
    let curve = tj_curve(7, Boundary::Open);
    for (nel, g) in curve {
        println!("14 sites open: n_el={nel:.4} G={g:.6}");
    }
}

#[test]
fn criterion_7_deterministic_output() {
    let mut failures = Vec::new();
    let bin = env!("CARGO_BIN_EXE_rvb-ladder");
    let dir = std::env::temp_dir();
    let mk = |name: &str| dir.join(format!("rvb-acc-{}-{name}", std::process::id()));
    let cases: Vec<(Vec<String>, &str)> = vec![
        (
            ["rvb-ggm", "--rungs", "12", "--boundary", "periodic"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            "rvb",
        ),
        (
            [
                "tj-ggm", "--rungs", "4", "--boundary", "periodic", "--seed", "7",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            "tj",
        ),
    ];
    for (args, tag) in cases {
        let mut bytes = Vec::new();
        for (i, threads) in ["1", "3", "3"].iter().enumerate() {
            let out = mk(&format!("{tag}{i}.csv"));
            let status = std::process::Command::new(bin)
                .args(&args)
                .args(["--out", out.to_str().unwrap(), "--threads", threads])
                .status()
                .unwrap();
            if !status.success() {
                failures.push(format!("{tag} run {i} failed"));
                continue;
            }
            bytes.push(std::fs::read(&out).unwrap());
            let _ = std::fs::remove_file(&out);
        }
        if bytes.len() == 3 && (bytes[0] != bytes[1] || bytes[1] != bytes[2]) {
            failures.push(format!("{tag}: output bytes differ across runs/threads"));
        }
    }
    verdict(
        "criterion 7: byte-identical CSVs across repeated runs and thread counts",
        &failures,
    );
}
