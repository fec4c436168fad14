//! Acceptance criteria, one test each. Every test prints a single
//! `criterion <id>: PASS|FAIL <detail>` line before asserting.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use jjarray::code::build_code;
use jjarray::gates::{cnot_schedule, cnot_sign_table, operator_distance, single_qubit_rotation};
use jjarray::hamiltonian::{build_bulk, dense_matrix, release_along, BasisSector, SectorOperator, SpinHamiltonian};
use jjarray::lanczos::{lanczos_lowest, LanczosConfig};
use jjarray::lattice::{Face, PathKind};
use jjarray::pauli::PauliOp;
use jjarray::presets::Preset;
use jjarray::rhombus::{find_minima_and_gap, gap_slope_at_zero, vortex_energy, PhysicalParams};
use jjarray::spectra::{
    charge_model, charge_pair_energy, degeneracy_of, diagonalize, excitation_energy, max_first_order_element, predicted_splitting,
    vortex_model, Method, PerturbationKind, SolveOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: &str, ok: bool, detail: String) {
    println!("criterion {id}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

#[test]
fn c01_topological_degeneracy() {
    let mut ok = true;
    let mut detail = Vec::new();
    for preset in [Preset::Patch, Preset::Star, Preset::DoubleStar] {
        let start = Instant::now();
        let code = build_code(&preset.build()).unwrap();
        let h = build_bulk(&code, 1.0, 4.0).unwrap();
        let sector = h.sector(1 << 20).unwrap();
        let want = 1usize << code.k();
        let spec = diagonalize(&h, &sector, (want + 2).min(sector.dim()), &SolveOptions::default()).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let gf2 = 1usize << (code.n() - code.rank());
        ok &= spec.degeneracy == want && gf2 == want && secs < 60.0;
        detail.push(format!("{}(n={} K={} ED={} GF2={} {:.2}s)", preset.name(), code.n(), code.k(), spec.degeneracy, gf2, secs));
    }
    verdict("1", ok, detail.join(" "));
}

#[test]
fn c02_charge_energetics() {
    let code = build_code(&Preset::ExtendedStar.build()).unwrap();
    let lat = code.lattice();
    let r = 0.7;
    let h = build_bulk(&code, r, 4.0).unwrap();
    let sector = h.sector(1 << 20).unwrap();
    let ground = diagonalize(&h, &sector, 1, &SolveOptions::default()).unwrap();
    let bulk: Vec<usize> = (0..lat.n_edges())
        .filter(|&e| lat.edge_triangles(e).len() == 2)
        .collect();
    let mut worst = 0.0f64;
    for &e in &bulk {
        let path = lat.open_string(vec![e]).unwrap();
        assert!(matches!(path.kind, PathKind::OpenString { .. }));
        let ex = charge_pair_energy(&h, &sector, &path, &ground).unwrap();
        assert!(!ex.boundary_terminated);
        worst = worst.max((ex.energy - 4.0 * r).abs() / r);
    }
    verdict("2", !bulk.is_empty() && worst < 1e-10, format!("{} interior edges, max |ΔE−4r|/r = {worst:.1e}", bulk.len()));
}

#[test]
fn c03_vortex_energetics() {
    let code = build_code(&Preset::ExtendedStar.build()).unwrap();
    let e_g = 2.5;
    let mut worst = 0.0f64;
    let lat = code.lattice();
    for e in [0, lat.n_edges() / 2, lat.n_edges() - 1] {
        let path = lat.open_string(vec![e]).unwrap();
        let h = release_along(build_bulk(&code, 1.0, e_g).unwrap(), &code, &path).unwrap();
        let sector = h.sector(1 << 20).unwrap();
        let ground = diagonalize(&h, &sector, 1, &SolveOptions::default()).unwrap();
        let x = PauliOp::x_string(code.n(), &[e]).unwrap();
        let (energy, _) = excitation_energy(&h, &sector, &x, &ground).unwrap();
        worst = worst.max((energy - 2.0 * e_g).abs() / e_g);
    }
    verdict("3", worst < 1e-10, format!("max |ΔE−2E_g|/E_g = {worst:.1e}"));
}

fn charge_path(n: usize) -> jjarray::lattice::EdgePath {
    let lat = Preset::ExtendedStar.build();
    lat.strings_of_length(Face::Hole(0), Face::Outer, n, 1).unwrap().remove(0)
}

fn star_loop(n: usize) -> jjarray::lattice::EdgePath {
    Preset::Star.build().loops_around_hole(0, n, n).unwrap().remove(0)
}

#[test]
fn c04_charge_splitting_formula() {
    let code = build_code(&Preset::ExtendedStar.build()).unwrap();
    let (r, de) = (1.0, 0.02);
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [2, 3] {
        let m = charge_model(&code, r, 4.0, &charge_path(n), de, &SolveOptions::default()).unwrap().measured().unwrap();
        let pred = predicted_splitting(PerturbationKind::Charge, de, r, n).unwrap().abs();
        let rel = (m.abs() - pred) / pred;
        ok &= rel.abs() <= 0.2;
        detail.push(format!("N={n} measured={m:.4e} formula={pred:.4e} rel={rel:.3}"));
    }
    verdict("4", ok, detail.join("; "));
}

#[test]
fn c04_charge_log_slope() {
    let code = build_code(&Preset::ExtendedStar.build()).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [2, 3] {
        let m = |de: f64| charge_model(&code, 1.0, 4.0, &charge_path(n), de, &SolveOptions::default()).unwrap().measured().unwrap();
        let slope = (m(0.04) / m(0.02)).abs().ln() / 2f64.ln();
        ok &= ((slope - n as f64) / n as f64).abs() <= 0.05;
        detail.push(format!("N={n} slope={slope:.4}"));
    }
    verdict("4-slope", ok, detail.join("; "));
}

#[test]
fn c04_charge_exact_leading_order() {
    let code = build_code(&Preset::ExtendedStar.build()).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [2, 3, 4] {
        let model = charge_model(&code, 1.0, 4.0, &charge_path(n), 0.02, &SolveOptions::default()).unwrap();
        let (m, lead) = (model.measured().unwrap(), model.leading_order().unwrap());
        let rel = (m - lead) / lead;
        ok &= rel.abs() <= 0.01;
        detail.push(format!("N={n} measured={m:.5e} ordering-sum={lead:.5e} rel={rel:.1e}"));
    }
    verdict("4-exact", ok, detail.join("; "));
}

#[test]
fn c05_vortex_splitting_formula() {
    let code = build_code(&Preset::Star.build()).unwrap();
    let (e_g, t) = (1.0, 0.05);
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [6, 7] {
        let m = vortex_model(&code, 1.0, e_g, &star_loop(n), t, &SolveOptions::default()).unwrap().measured().unwrap();
        let pred = predicted_splitting(PerturbationKind::Vortex, t, e_g, n).unwrap().abs();
        let rel = (m.abs() - pred) / pred;
        ok &= rel.abs() <= 0.2;
        detail.push(format!("N={n} measured={m:.4e} formula={pred:.4e} rel={rel:.3}"));
    }
    verdict("5", ok, detail.join("; "));
}

#[test]
fn c05_vortex_log_slope() {
    let code = build_code(&Preset::Star.build()).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [6, 7] {
        let m = |t: f64| vortex_model(&code, 1.0, 1.0, &star_loop(n), t, &SolveOptions::default()).unwrap().measured().unwrap();
        let slope = (m(0.05) / m(0.025)).abs().ln() / 2f64.ln();
        ok &= ((slope - n as f64) / n as f64).abs() <= 0.05;
        detail.push(format!("N={n} slope={slope:.4}"));
    }
    verdict("5-slope", ok, detail.join("; "));
}

#[test]
fn c05_vortex_exact_leading_order() {
    let code = build_code(&Preset::Star.build()).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [6, 7] {
        let model = vortex_model(&code, 1.0, 1.0, &star_loop(n), 0.05, &SolveOptions::default()).unwrap();
        let (m, lead) = (model.measured().unwrap(), model.leading_order().unwrap());
        let rel = (m - lead) / lead;
        ok &= rel.abs() <= 0.05;
        detail.push(format!("N={n} measured={m:.5e} ordering-sum={lead:.5e} rel={rel:.1e}"));
    }
    verdict("5-exact", ok, detail.join("; "));
}

#[test]
fn c06_first_order_protection() {
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for preset in [Preset::Star, Preset::ExtendedStar, Preset::Annulus, Preset::DoubleStar] {
        let code = build_code(&preset.build()).unwrap();
        let h = build_bulk(&code, 1.0, 4.0).unwrap();
        let sector = h.sector(1 << 20).unwrap();
        let d = 1usize << code.k();
        let spec = diagonalize(&h, &sector, d, &SolveOptions::default()).unwrap();
        let edges: Vec<usize> = (0..code.n()).collect();
        let m = max_first_order_element(&sector, &spec.eigenvectors, &edges).unwrap();
        detail.push(format!("{}={m:.1e}", preset.name()));
        worst = worst.max(m);
    }
    verdict("6", worst < 1e-10, format!("max |<G|σᶻ|G'>| {}", detail.join(" ")));
}

#[test]
fn c07_rhombus_model() {
    let p = PhysicalParams::default();
    let s = find_minima_and_gap(0.0, &p).unwrap();
    let min_err = (s.minima[0] + PI / 2.0).abs().max((s.minima[1] - PI / 2.0).abs());
    let slope = gap_slope_at_zero(&p).unwrap();
    let want = 2.0 * SQRT_2 * PI * p.e_j / p.phi0;
    let rel = ((slope.abs() - want) / want).abs();
    verdict("7", min_err < 1e-8 && rel < 1e-6, format!("minima error {min_err:.1e} rad, slope {slope:.10} vs {want:.10} (rel {rel:.1e})"));
}

#[test]
fn c08_vortex_energy_formula() {
    let sets = [(1.0, 1.0, 1.0, 0.01), (2.5, 1.0, 1.0, 0.02), (0.3, 2.0, 1.5, 0.005), (10.0, 0.5, 0.1, 1e-3), (1.7, 3.0, 4.0, 0.05)];
    let mut worst = 0.0f64;
    for (e_j, phi0, mu0, xi) in sets {
        let p = PhysicalParams { e_j, phi0, mu0, xi, ..PhysicalParams::default() };
        let got = vortex_energy(&p).unwrap().e_g;
        // λ² substituted: Φ₀²/(4πμ₀λ²) = 9πE_J/4
        let want = 9.0 * PI * e_j / 8.0 * (phi0 * phi0 / (9.0 * PI * PI * mu0 * e_j * xi * xi)).ln();
        worst = worst.max(((got - want) / want).abs());
    }
    verdict("8", worst < 1e-12, format!("5 parameter sets, max rel error {worst:.1e}"));
}

#[test]
fn c09_cnot() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 1.0f64;
    for _ in 0..100 {
        let g: [f64; 3] = std::array::from_fn(|_| {
            let mag = 10f64.powf(rng.gen_range(-3.0..1.0));
            if rng.gen_bool(0.5) { mag } else { -mag }
        });
        let r = cnot_schedule(g[0], g[1], g[2]).unwrap();
        assert!(r.solver.steps.iter().all(|s| s.duration >= 0.0));
        worst = worst.min(r.solver.achieved_fidelity);
    }
    for case in cnot_sign_table([1.0, 1.0, 1.0]).unwrap() {
        println!(
            "  signs {:?}: literal fidelity {:.6}{} solver {:.12}",
            case.signs,
            case.literal_fidelity,
            if case.literal_has_negative_time { " (negative time)" } else { "" },
            case.solver_fidelity
        );
    }
    verdict("9", worst > 1.0 - 1e-10, format!("100 random γ draws, min solver fidelity 1−{:.1e}", 1.0 - worst));
}

#[test]
fn c10_single_qubit_universality() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let [theta, phi, gamma] = std::array::from_fn(|_| rng.gen_range(-PI..PI));
        let sign = |x: f64, b: bool| if b { x } else { -x };
        let d_eps = sign(10f64.powf(rng.gen_range(-4.0..0.0)), rng.gen_bool(0.5));
        let d_e = sign(10f64.powf(rng.gen_range(-4.0..0.0)), rng.gen_bool(0.5));
        let s = single_qubit_rotation(theta, phi, gamma, 0, 1, d_eps, d_e).unwrap();
        worst = worst.max(operator_distance(&s.unitary(), &s.target).unwrap());
    }
    verdict("10", worst < 1e-9, format!("20 random targets, max operator distance {worst:.1e}"));
}

fn random_hamiltonian(rng: &mut ChaCha8Rng, n: usize) -> SpinHamiltonian {
    let mut h = SpinHamiltonian::new(n);
    for _ in 0..(2 * n) {
        let x: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
        let mut z: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
        // X^x Z^z is real; it is symmetric iff the overlap is even
        if let Some(q) = z.iter().copied().filter(|q| x.contains(q)).nth(0) {
            if z.iter().filter(|q| x.contains(q)).count() % 2 == 1 {
                z.retain(|&v| v != q);
            }
        }
        let op = PauliOp::from_supports(n, &x, &z, 0).unwrap();
        h.add_term(rng.gen_range(-1.0..1.0), op).unwrap();
    }
    h
}

#[test]
fn c11_cross_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_apply = 0.0f64;
    let mut cases = 0;
    for n in 2..=12 {
        for _ in 0..3 {
            let h = random_hamiltonian(&mut rng, n);
            let sector = h.sector(1 << n).unwrap();
            let dense = dense_matrix(&h, &sector).unwrap();
            let op = SectorOperator::from_hamiltonian(&h, &sector).unwrap();
            let v: Vec<f64> = (0..sector.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let got = op.apply(&v).unwrap();
            let want = &dense * nalgebra::DVector::from_vec(v);
            worst_apply = got.iter().zip(want.iter()).fold(worst_apply, |w, (a, b)| w.max((a - b).abs()));
            cases += 1;
        }
    }
    let mut worst_eig = 0.0f64;
    for preset in [Preset::Patch, Preset::Star, Preset::ExtendedStar] {
        let code = build_code(&preset.build()).unwrap();
        let h = build_bulk(&code, 1.0, 3.0).unwrap();
        let sector: BasisSector = h.sector(1 << 20).unwrap();
        let k = 6.min(sector.dim());
        let dense = diagonalize(&h, &sector, k, &SolveOptions { method: Method::Dense, ..SolveOptions::default() }).unwrap();
        let op = SectorOperator::from_hamiltonian(&h, &sector).unwrap();
        let iter = lanczos_lowest(&op, k, &LanczosConfig::default()).unwrap();
        worst_eig = dense.eigenvalues.iter().zip(&iter.values).fold(worst_eig, |w, (a, b)| w.max((a - b).abs()));
        assert_eq!(degeneracy_of(&dense.eigenvalues), degeneracy_of(&iter.values));
    }
    verdict(
        "11",
        worst_apply < 1e-12 && worst_eig < 1e-9,
        format!("{cases} random Hamiltonians max |apply−dense| {worst_apply:.1e}; eigenvalue agreement {worst_eig:.1e}"),
    );
}
