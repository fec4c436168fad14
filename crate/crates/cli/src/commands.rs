use anyhow::{bail, Context, Result};
use jjarray::code::{build_code, ArrayCode};
use jjarray::gates::{cnot_schedule, end_to_end_gate, single_qubit_rotation, CoefficientSource, GateSchedule};
use jjarray::hamiltonian::{build_bulk, release_along, HamiltonianFile, SpinHamiltonian};
use jjarray::lanczos::LanczosConfig;
use jjarray::lattice::{build_punctured_patch, Lattice, LatticeFile};
use jjarray::presets::Preset;
use jjarray::rhombus::{find_minima_and_gap, vortex_energy, PhysicalParams};
use jjarray::spectra::{
    diagonalize, measure_charge_splitting, measure_vortex_splitting, splitting_sweep, Method, PerturbationKind, SolveOptions, SweepRow,
};
use serde::Serialize;

use crate::output::{read, write, Reporter};
use crate::specs::{parse_holes, parse_path, parse_sweep, PathRole};
use crate::*;

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Lattice(LatticeCmd::Build(a)) => lattice_build(g, a),
        Command::Lattice(LatticeCmd::Validate(a)) => lattice_validate(g, a),
        Command::Code(CodeCmd::Analyze(a)) => code_analyze(g, a),
        Command::Rhombus(RhombusCmd::Spectrum(a)) => rhombus_spectrum(g, a),
        Command::Rhombus(RhombusCmd::Vortex(a)) => rhombus_vortex(g, a),
        Command::Ham(HamCmd::Build(a)) => ham_build(g, a),
        Command::Spectra(SpectraCmd::Run(a)) => spectra_run(g, a),
        Command::Spectra(SpectraCmd::Splitting(a)) => spectra_splitting(g, a),
        Command::Gates(GatesCmd::Cnot(a)) => gates_cnot(g, a),
        Command::Gates(GatesCmd::Rotate(a)) => gates_rotate(g, a),
        Command::Pipeline(PipelineCmd::DemoK1(a)) => demo_k1(g, a),
    }
}

fn solve_options(g: &Global) -> SolveOptions {
    SolveOptions { lanczos: LanczosConfig { seed: g.seed, ..LanczosConfig::default() }, ..SolveOptions::default() }
}

fn load_lattice(path: &std::path::Path) -> Result<Lattice> {
    let text = read(path)?;
    let file: LatticeFile = serde_json::from_str(&text).with_context(|| format!("parsing lattice {}", path.display()))?;
    Lattice::from_file(file).with_context(|| format!("invalid lattice {}", path.display()))
}

fn load_code(path: &std::path::Path) -> Result<ArrayCode> {
    Ok(build_code(&load_lattice(path)?)?)
}

#[derive(Serialize)]
struct Counts {
    n_vertices: usize,
    n_edges: usize,
    n_triangles: usize,
    n_holes: usize,
}

fn counts(lat: &Lattice) -> Counts {
    Counts { n_vertices: lat.n_vertices(), n_edges: lat.n_edges(), n_triangles: lat.n_triangles(), n_holes: lat.n_holes() }
}

fn lattice_build(g: &Global, a: &LatticeBuild) -> Result<()> {
    let lat = match (&a.preset, a.radius) {
        (Some(name), _) => name.parse::<Preset>()?.build(),
        (None, Some(radius)) => build_punctured_patch(radius, &parse_holes(&a.holes)?)?,
        (None, None) => bail!("either --radius or --preset is required"),
    };
    let rep = Reporter::new(g, "lattice build", a)?;
    if let Some(out) = &g.out {
        write(out, &rep.artifact(&lat.to_file())?)?;
    }
    if g.json || g.out.is_none() {
        print!("{}", rep.artifact(&lat.to_file())?);
    } else {
        eprintln!("wrote {}", g.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
    }
    Ok(())
}

fn lattice_validate(g: &Global, a: &FileArg) -> Result<()> {
    let lat = load_lattice(&a.file)?;
    lat.check()?;
    #[derive(Serialize)]
    struct Valid {
        valid: bool,
        #[serde(flatten)]
        counts: Counts,
        separation: jjarray::lattice::SeparationReport,
    }
    let res = Valid { valid: true, counts: counts(&lat), separation: lat.separation_report() };
    Reporter::new(g, "lattice validate", a)?.report("validate", &res)
}

fn code_analyze(g: &Global, a: &CodeAnalyze) -> Result<()> {
    let code = load_code(&a.file)?;
    Reporter::new(g, "code analyze", a)?.report("code", &code.summary(a.max_weight)?)
}

fn rhombus_spectrum(g: &Global, a: &RhombusSpectrumArgs) -> Result<()> {
    let p = PhysicalParams { e_j: a.ej, e_c: a.ec, phi0: a.phi0, ..PhysicalParams::default() }.validated()?;
    let mut s = find_minima_and_gap(a.dflux, &p)?;
    if g.units == Units::Ej {
        s.energies = s.energies.map(|e| e / p.e_j);
        s.gap /= p.e_j;
        s.t_tunnel /= p.e_j;
    }
    Reporter::new(g, "rhombus spectrum", a)?.report("rhombus_spectrum", &s)
}

fn rhombus_vortex(g: &Global, a: &RhombusVortexArgs) -> Result<()> {
    let p = PhysicalParams { e_j: a.ej, phi0: a.phi0, mu0: a.mu0, xi: a.xi, ..PhysicalParams::default() }.validated()?;
    let mut v = vortex_energy(&p)?;
    if g.units == Units::Ej {
        v.e_g /= p.e_j;
    }
    Reporter::new(g, "rhombus vortex", a)?.report("rhombus_vortex", &v)
}

fn ham_build(g: &Global, a: &HamBuild) -> Result<()> {
    let code = load_code(&a.file)?;
    let mut h = build_bulk(&code, a.r, a.eg)?;
    if let (Some(spec), Some(de)) = (&a.charge_path, a.de) {
        h = h.add_charge_perturbation(&parse_path(&code, spec, PathRole::Charge)?, de)?;
    }
    if let (Some(spec), Some(tt)) = (&a.vortex_loop, a.tt) {
        let path = parse_path(&code, spec, PathRole::Vortex)?;
        h = release_along(h, &code, &path)?.add_vortex_perturbation(&path, tt)?;
    }
    let rep = Reporter::new(g, "ham build", a)?;
    let text = rep.artifact(&h.to_file())?;
    match &g.out {
        Some(out) => write(out, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn spectra_run(g: &Global, a: &SpectraRun) -> Result<()> {
    let text = read(&a.file)?;
    let file: HamiltonianFile = serde_json::from_str(&text).with_context(|| format!("parsing Hamiltonian {}", a.file.display()))?;
    let h = SpinHamiltonian::from_file(&file)?;
    let method = match a.method.as_str() {
        "auto" => Method::Auto,
        "dense" => Method::Dense,
        "iterative" | "lanczos" => Method::Iterative,
        m => bail!("unknown method {m:?} (auto, dense, iterative)"),
    };
    let opts = SolveOptions { method, ..solve_options(g) };
    let sector = h.sector(opts.dim_cap)?;
    let spec = diagonalize(&h, &sector, a.k.min(sector.dim()), &opts)?;
    Reporter::new(g, "spectra run", a)?.report("spectra", &spec)
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let f = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let mut out = String::from("N,amp,measured,predicted,ratio,leading_order,note\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:e},{},{},{},{},{}\n",
            r.n,
            r.amp,
            f(r.measured),
            f(r.predicted),
            f(r.ratio),
            f(r.leading_order),
            r.note.clone().unwrap_or_default()
        ));
    }
    out
}

fn spectra_splitting(g: &Global, a: &SpectraSplitting) -> Result<()> {
    let code = load_code(&a.file)?;
    let kind: PerturbationKind = a.kind.parse()?;
    let opts = solve_options(g);
    let amp = if kind == PerturbationKind::Charge { a.de } else { a.tt };
    let rep = Reporter::new(g, "spectra splitting", a)?;
    if let Some(sweep) = &a.sweep {
        if a.hole >= code.k() {
            bail!(jjarray::Error::UnknownHole { hole: a.hole, count: code.k() });
        }
        let rows = splitting_sweep(&code, kind, amp, a.r, a.eg, &parse_sweep(sweep)?, &opts)?;
        let csv = sweep_csv(&rows);
        rep.write_in_dir("splitting.csv", &csv)?;
        rep.write_in_dir("splitting.json", &rep.envelope(&rows)?)?;
        if g.json {
            print!("{}", rep.envelope(&rows)?);
        } else {
            print!("{csv}");
        }
        return Ok(());
    }
    let report = match kind {
        PerturbationKind::Charge => measure_charge_splitting(&code, a.r, a.eg, &parse_path(&code, &a.path, PathRole::Charge)?, a.de, &opts)?,
        PerturbationKind::Vortex => measure_vortex_splitting(&code, a.r, a.eg, &parse_path(&code, &a.path, PathRole::Vortex)?, a.tt, &opts)?,
    };
    rep.report("splitting", &report)
}

fn emit_schedule(rep: &Reporter, stem: &str, sched: &GateSchedule, grid: Option<f64>) -> Result<Option<f64>> {
    rep.write_in_dir(&format!("{stem}_pulses.csv"), &sched.to_csv())?;
    match grid {
        Some(grid) => {
            let q = sched.quantized(grid)?;
            rep.write_in_dir(&format!("{stem}_pulses_quantized.csv"), &q.schedule.to_csv())?;
            Ok(Some(q.fidelity_loss))
        }
        None => Ok(None),
    }
}

fn gates_cnot(g: &Global, a: &GatesCnot) -> Result<()> {
    let r = cnot_schedule(a.g1, a.g2, a.g3)?;
    let rep = Reporter::new(g, "gates cnot", a)?;
    let loss = emit_schedule(&rep, "cnot", &r.solver, a.grid)?;
    #[derive(Serialize)]
    struct Out {
        schedule: &'static str,
        times: [f64; 3],
        fidelity: f64,
        target_phase: f64,
        solver_times: [f64; 3],
        solver_fidelity: f64,
        paper_times: [f64; 3],
        paper_fidelity: f64,
        paper_has_negative_time: bool,
        quantized_fidelity_loss: Option<f64>,
    }
    let solver_times = [0, 1, 2].map(|i| r.solver.steps[i].duration);
    let (label, times, fidelity) = if a.paper_times {
        ("paper", r.literal.times, r.literal.fidelity)
    } else {
        ("solver", solver_times, r.solver.achieved_fidelity)
    };
    let out = Out {
        schedule: label,
        times,
        fidelity,
        target_phase: r.target_phase,
        solver_times,
        solver_fidelity: r.solver.achieved_fidelity,
        paper_times: r.literal.times,
        paper_fidelity: r.literal.fidelity,
        paper_has_negative_time: r.literal.has_negative_time,
        quantized_fidelity_loss: loss,
    };
    rep.report("cnot", &out)
}

fn gates_rotate(g: &Global, a: &GatesRotate) -> Result<()> {
    let k = a.qubits.unwrap_or(a.hole + 1);
    if a.hole >= k {
        bail!(jjarray::Error::UnknownHole { hole: a.hole, count: k });
    }
    let sched = single_qubit_rotation(a.theta, a.phi, a.gamma, a.hole, k, a.d_eps, a.d_e)?;
    let rep = Reporter::new(g, "gates rotate", a)?;
    let loss = emit_schedule(&rep, "rotate", &sched, a.grid)?;
    #[derive(Serialize)]
    struct Out<'a> {
        schedule: &'a GateSchedule,
        quantized_fidelity_loss: Option<f64>,
    }
    rep.report("rotate", &Out { schedule: &sched, quantized_fidelity_loss: loss })
}

fn demo_k1(g: &Global, a: &DemoK1) -> Result<()> {
    let lat = build_punctured_patch(a.radius, &[jjarray::lattice::HoleSpec::single(0, 0)])?;
    let code = build_code(&lat)?;
    let opts = solve_options(g);
    let h = build_bulk(&code, a.r, a.eg)?;
    let sector = h.sector(opts.dim_cap)?;
    let spec = diagonalize(&h, &sector, 4.min(sector.dim()), &opts)?;
    if spec.degeneracy != 2 {
        bail!("ground-space degeneracy {} instead of 2", spec.degeneracy);
    }
    let rows = splitting_sweep(&code, PerturbationKind::Charge, a.de, a.r, a.eg, &parse_sweep(&a.sweep)?, &opts)?;
    let rep = Reporter::new(g, "pipeline demo-k1", a)?;
    rep.write_in_dir("demo_k1_sweep.csv", &sweep_csv(&rows))?;
    let flip = jjarray::gates::GateRequest::Rotation { hole: 0, theta: 0.0, phi: std::f64::consts::FRAC_PI_2, gamma: 0.0 };
    let params = jjarray::gates::TuningParams { r: a.r, e_g: a.eg, delta_e: a.de, t_tunnel: a.de };
    let gate = end_to_end_gate(&code, &params, flip, CoefficientSource::Formula, &opts)?;
    #[derive(Serialize)]
    struct Out {
        lattice: Counts,
        code: jjarray::code::CodeSummary,
        ground_energies: Vec<f64>,
        degeneracy: usize,
        sector_dim: usize,
        sweep: Vec<SweepRow>,
        x_flip_duration: f64,
    }
    let out = Out {
        lattice: counts(&lat),
        code: code.summary(3)?,
        ground_energies: spec.eigenvalues.clone(),
        degeneracy: spec.degeneracy,
        sector_dim: spec.dim,
        sweep: rows,
        x_flip_duration: gate.schedule.total_duration(),
    };
    rep.report("demo_k1", &out)
}
