//! Low-lying spectra, ground-space construction and tunneling splittings.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::code::ArrayCode;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_bulk, dense_matrix, release_along, BasisSector, SectorOperator, SpinHamiltonian, Term, DEFAULT_DIM_CAP};
use crate::lanczos::{dense_lowest, lanczos_lowest, Eigenpairs, LanczosConfig};
use crate::lattice::{Anchor, EdgePath, Face, PathKind};
use crate::pauli::PauliOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Dense up to `dense_auto_max`, iterative above.
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: Method,
    pub lanczos: LanczosConfig,
    pub dense_auto_max: usize,
    pub dense_max: usize,
    pub dim_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            lanczos: LanczosConfig::default(),
            dense_auto_max: 512,
            dense_max: 4096,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub degeneracy: usize,
    pub residuals: Vec<f64>,
    pub method: Method,
    pub dim: usize,
}

/// Eigenvalues within `1e−9·max(1, |E₀|)` of the lowest.
pub fn degeneracy_of(values: &[f64]) -> usize {
    let Some(&e0) = values.first() else { return 0 };
    let tol = 1e-9 * e0.abs().max(1.0);
    values.iter().filter(|&&e| (e - e0).abs() <= tol).count()
}

/// The `k` lowest eigenpairs of `h` on `sector`.
pub fn diagonalize(h: &SpinHamiltonian, sector: &BasisSector, k: usize, opts: &SolveOptions) -> Result<SpectralResult> {
    let dim = sector.dim();
    if k > dim {
        return Err(Error::DimensionMismatch { expected: k, got: dim });
    }
    let method = match opts.method {
        Method::Auto if dim <= opts.dense_auto_max => Method::Dense,
        Method::Auto => Method::Iterative,
        m => m,
    };
    let pairs: Eigenpairs = match method {
        Method::Dense => {
            if dim > opts.dense_max {
                return Err(Error::ResourceLimit { dim, cap: opts.dense_max });
            }
            dense_lowest(&dense_matrix(h, sector)?, k)?
        }
        _ => {
            let op = SectorOperator::from_hamiltonian(h, sector)?;
            lanczos_lowest(&op, k, &opts.lanczos)?
        }
    };
    Ok(SpectralResult {
        degeneracy: degeneracy_of(&pairs.values),
        eigenvalues: pairs.values,
        eigenvectors: pairs.vectors,
        residuals: pairs.residuals,
        method,
        dim,
    })
}

/// `2^K` ground states labelled by the loop eigenvalue of each hole.
///
/// `states[m]` has hole `k` flipped iff bit `K−1−k` of `m` is set, so hole
/// 0 is the most significant logical bit.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundBasis {
    pub states: Vec<Vec<f64>>,
    /// Loop eigenvalue (±1) per state and hole.
    pub labels: Vec<Vec<i8>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn apply_pauli(op: &PauliOp, sector: &BasisSector, v: &[f64]) -> Result<Vec<f64>> {
    SectorOperator::from_pauli(op, sector)?.apply(v)
}

/// Ground states from the constraint projector applied to `⊗|+⟩`.
///
/// The projected state is invariant under every loop operator, so it is
/// the all-`+1` state; the others follow by applying the hole strings.
pub fn construct_ground_basis(code: &ArrayCode, sector: &BasisSector) -> Result<GroundBasis> {
    let masks: Vec<u64> = code
        .constraints()
        .iter()
        .map(|p| p.masks_u64().map(|m| m.1).ok_or(Error::ResourceLimit { dim: p.n(), cap: 64 }))
        .collect::<Result<_>>()?;
    // ∏(1 + P_a)/2 keeps the configurations with every P_a = +1
    let mut psi: Vec<f64> = sector
        .states()
        .iter()
        .map(|&s| if masks.iter().all(|m| (m & s).count_ones() % 2 == 0) { 1.0 } else { 0.0 })
        .collect();
    if normalize(&mut psi) == 0.0 {
        return Err(Error::ZeroNorm("no configuration satisfies every constraint".into()));
    }
    let k = code.k();
    for (hole, t) in code.logical_z().iter().enumerate() {
        // (1 + T)/2 leaves psi unchanged; (1 − T)/2 annihilates it
        let tpsi = apply_pauli(t, sector, &psi)?;
        let mut plus: Vec<f64> = psi.iter().zip(&tpsi).map(|(a, b)| 0.5 * (a + b)).collect();
        let minus: f64 = psi.iter().zip(&tpsi).map(|(a, b)| 0.5 * (a - b)).map(|x| x * x).sum::<f64>().sqrt();
        if minus > 1e-12 {
            return Err(Error::CodeInvariant {
                first: format!("Zbar_{hole}"),
                second: "projected state".into(),
                reason: "projected product state is not a loop eigenstate".into(),
            });
        }
        if normalize(&mut plus) == 0.0 {
            return Err(Error::ZeroNorm(format!("(1 + T_{hole}) projection vanished")));
        }
        psi = plus;
    }
    let mut states = Vec::with_capacity(1 << k);
    let mut labels = Vec::with_capacity(1 << k);
    for m in 0..(1usize << k) {
        let mut v = psi.clone();
        let mut lab = vec![1i8; k];
        for (hole, l) in lab.iter_mut().enumerate() {
            if m >> (k - 1 - hole) & 1 == 1 {
                v = apply_pauli(&code.logical_x()[hole], sector, &v)?;
                *l = -1;
            }
        }
        states.push(v);
        labels.push(lab);
    }
    let basis = GroundBasis { states, labels };
    verify_ground_basis(code, sector, &basis)?;
    Ok(basis)
}

fn verify_ground_basis(code: &ArrayCode, sector: &BasisSector, basis: &GroundBasis) -> Result<()> {
    for (m, v) in basis.states.iter().enumerate() {
        for (t, q) in code.flips().iter().enumerate() {
            let e = dot(v, &apply_pauli(q, sector, v)?);
            if (e - 1.0).abs() > 1e-10 {
                return Err(Error::CodeInvariant {
                    first: format!("ground state {m}"),
                    second: format!("Q_{t}"),
                    reason: format!("flip expectation {e} instead of 1"),
                });
            }
        }
        for (hole, t) in code.logical_z().iter().enumerate() {
            let e = dot(v, &apply_pauli(t, sector, v)?);
            if (e - basis.labels[m][hole] as f64).abs() > 1e-10 {
                return Err(Error::CodeInvariant {
                    first: format!("ground state {m}"),
                    second: format!("Zbar_{hole}"),
                    reason: format!("loop expectation {e}"),
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitationEnergy {
    /// `⟨v|H|v⟩ − E₀` for `v = O|G⟩`.
    pub energy: f64,
    /// `‖Hv − (E₀ + energy)v‖`; zero when `v` is an eigenstate.
    pub residual: f64,
    /// Both string ends on a hole or the outer boundary.
    pub boundary_terminated: bool,
}

/// Energy of `op|G⟩` above the ground energy.
pub fn excitation_energy(h: &SpinHamiltonian, sector: &BasisSector, op: &PauliOp, ground: &SpectralResult) -> Result<(f64, f64)> {
    let g = ground
        .eigenvectors
        .first()
        .ok_or_else(|| Error::ZeroNorm("no ground state".into()))?;
    let mut v = apply_pauli(op, sector, g)?;
    normalize(&mut v);
    let hv = SectorOperator::from_hamiltonian(h, sector)?.apply(&v)?;
    let e = dot(&v, &hv);
    let res = hv.iter().zip(&v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
    Ok((e - ground.eigenvalues[0], res))
}

/// Energy of the σᶻ string `path` applied to the ground state. Interior
/// ends each carry a charge; strings ending on boundaries are logical and
/// cost nothing.
pub fn charge_pair_energy(
    h: &SpinHamiltonian,
    sector: &BasisSector,
    path: &EdgePath,
    ground: &SpectralResult,
) -> Result<ExcitationEnergy> {
    let PathKind::OpenString { start, end } = path.kind else {
        return Err(Error::WrongPerturbation("charge pairs come from open strings".into()));
    };
    let op = PauliOp::z_string(h.n(), &path.edges)?;
    let (energy, residual) = excitation_energy(h, sector, &op, ground)?;
    Ok(ExcitationEnergy {
        energy,
        residual,
        boundary_terminated: start.is_boundary() && end.is_boundary() && !path.is_empty(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// σᶻ terms on an open string; amplitude ΔE, gap parameter r.
    Charge,
    /// σˣ terms on a closed loop; amplitude t̃, gap parameter E_g.
    Vortex,
}

impl std::str::FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "charge" => Ok(Self::Charge),
            "vortex" => Ok(Self::Vortex),
            _ => Err(Error::Parse(format!("unknown perturbation kind {s:?}"))),
        }
    }
}

/// Closed-form splitting coefficient: `(ΔE/2)^N/(−4r)^{N−1}` for charges,
/// `t̃^N/(−2E_g)^{N−1}` for vortices.
pub fn predicted_splitting(kind: PerturbationKind, amp: f64, gap_param: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("path length must be at least 1".into()));
    }
    if !(gap_param > 0.0) {
        return Err(Error::Domain(format!("gap parameter must be positive, got {gap_param}")));
    }
    let (num, den) = match kind {
        PerturbationKind::Charge => (amp / 2.0, -4.0 * gap_param),
        PerturbationKind::Vortex => (amp, -2.0 * gap_param),
    };
    Ok(num.powi(n as i32) / den.powi(n as i32 - 1))
}

/// Exact leading-order coefficient of `∏ Oᵢ` in the effective Hamiltonian
/// for `V = Σ cᵢ Oᵢ` on a commuting-projector `h0`.
///
/// Every way of applying the `N` terms once each is summed, with energy
/// denominators read off from the `h0` terms each partial product
/// anticommutes with (cost `2|c|` apiece). Assumes the ground space
/// minimizes every `h0` term and that no partial product is free.
pub fn leading_order_coefficient(h0: &SpinHamiltonian, perturbation: &[Term]) -> Result<f64> {
    let n = perturbation.len();
    if n == 0 || n > 20 {
        return Err(Error::Domain(format!("need 1..=20 perturbation terms, got {n}")));
    }
    for (i, a) in h0.terms().iter().enumerate() {
        for b in &h0.terms()[i + 1..] {
            if !a.op.commutes(&b.op)? {
                return Err(Error::Domain("unperturbed terms do not commute".into()));
            }
        }
    }
    let full = (1usize << n) - 1;
    let cost = |set: usize| -> Result<f64> {
        let mut p = PauliOp::identity(h0.n());
        for (i, t) in perturbation.iter().enumerate() {
            if set >> i & 1 == 1 {
                p = p.multiply(&t.op)?;
            }
        }
        let mut e = 0.0;
        for t in h0.terms() {
            if !t.op.commutes(&p)? {
                e += 2.0 * t.coeff.abs();
            }
        }
        Ok(e)
    };
    let mut f = vec![0.0; 1 << n];
    f[0] = 1.0;
    for set in 1..=full {
        let mut acc = 0.0;
        for (i, t) in perturbation.iter().enumerate() {
            if set >> i & 1 == 1 {
                acc += t.coeff * f[set & !(1 << i)];
            }
        }
        if set == full {
            f[set] = acc;
        } else {
            let e = cost(set)?;
            if e == 0.0 {
                return Err(Error::Domain("a partial product leaves the ground space unexcited".into()));
            }
            f[set] = acc / -e;
        }
    }
    Ok(f[full])
}

/// Effective Hamiltonian on the ground space, in the constructed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub matrix: DMatrix<f64>,
    /// Energies of the selected multiplet.
    pub energies: Vec<f64>,
    /// Lowest energy outside the multiplet minus the highest inside.
    pub bulk_gap: f64,
}

impl EffectiveHamiltonian {
    /// `Tr(H_eff W)/2^K` for a logical operator given by its action on the
    /// ground basis.
    pub fn coefficient(&self, w: &DMatrix<f64>) -> f64 {
        (&self.matrix * w).trace() / self.matrix.nrows() as f64
    }

    pub fn spread(&self) -> f64 {
        self.energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - self.energies.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Ground-space matrix `⟨G_α|O|G_β⟩` of a physical operator.
pub fn logical_matrix(op: &PauliOp, sector: &BasisSector, ground: &GroundBasis) -> Result<DMatrix<f64>> {
    let d = ground.states.len();
    let compiled = SectorOperator::from_pauli(op, sector)?;
    let images: Vec<Vec<f64>> = ground.states.iter().map(|g| compiled.apply(g)).collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(d, d, |a, b| dot(&ground.states[a], &images[b])))
}

/// Extracts `H_eff` from the eigenstates of `h` with the largest weight on
/// the ground basis, orthonormalized symmetrically (Löwdin).
pub fn effective_hamiltonian(
    h: &SpinHamiltonian,
    sector: &BasisSector,
    ground: &GroundBasis,
    opts: &SolveOptions,
) -> Result<EffectiveHamiltonian> {
    let d = ground.states.len();
    let extra = 2.min(sector.dim().saturating_sub(d));
    let spec = diagonalize(h, sector, d + extra, opts)?;
    let weight: Vec<f64> = spec
        .eigenvectors
        .iter()
        .map(|v| ground.states.iter().map(|g| dot(g, v).powi(2)).sum())
        .collect();
    let mut idx: Vec<usize> = (0..spec.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| weight[b].total_cmp(&weight[a]));
    let mut chosen: Vec<usize> = idx[..d].to_vec();
    chosen.sort();
    let s = DMatrix::from_fn(d, d, |a, i| dot(&ground.states[a], &spec.eigenvectors[chosen[i]]));
    let m = SymmetricEigen::new(s.transpose() * &s);
    if m.eigenvalues.min() < 0.25 {
        return Err(Error::ZeroNorm(format!(
            "perturbed multiplet has weight {:.3} on the ground space",
            m.eigenvalues.min()
        )));
    }
    let inv_sqrt = &m.eigenvectors
        * DMatrix::from_diagonal(&m.eigenvalues.map(|x| 1.0 / x.sqrt()))
        * m.eigenvectors.transpose();
    let s_orth = s * inv_sqrt;
    let energies: Vec<f64> = chosen.iter().map(|&i| spec.eigenvalues[i]).collect();
    let matrix = &s_orth * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(energies.clone())) * s_orth.transpose();
    let top = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bulk_gap = (0..spec.eigenvalues.len())
        .filter(|i| !chosen.contains(i))
        .map(|i| spec.eigenvalues[i] - top)
        .fold(f64::INFINITY, f64::min);
    Ok(EffectiveHamiltonian {
        matrix,
        energies,
        bulk_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    pub kind: PerturbationKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub amp: f64,
    pub gap_param: f64,
    /// Coefficient of the logical operator in the measured `H_eff`.
    pub measured: f64,
    /// Closed-form prediction.
    pub predicted: f64,
    /// `|measured| / |predicted|`.
    pub ratio: Option<f64>,
    /// Exact leading-order coefficient from the ordering sum.
    pub leading_order: f64,
    pub ratio_to_leading: Option<f64>,
    /// Perturbation weak enough for a leading-order comparison.
    pub perturbative: bool,
    pub multiplet_spread: f64,
    pub bulk_gap: f64,
}

fn report(
    kind: PerturbationKind,
    n: usize,
    amp: f64,
    gap_param: f64,
    measured: f64,
    leading_order: f64,
    eff: &EffectiveHamiltonian,
) -> Result<SplittingReport> {
    let predicted = predicted_splitting(kind, amp, gap_param, n)?;
    let perturbative = amp.abs() / gap_param <= 0.05 && eff.spread() < 0.1 * eff.bulk_gap;
    let ratio = (perturbative && predicted != 0.0).then(|| measured.abs() / predicted.abs());
    let ratio_to_leading = (perturbative && leading_order != 0.0).then(|| measured.abs() / leading_order.abs());
    Ok(SplittingReport {
        kind,
        n,
        amp,
        gap_param,
        measured,
        predicted,
        ratio,
        leading_order,
        ratio_to_leading,
        perturbative,
        multiplet_spread: eff.spread(),
        bulk_gap: eff.bulk_gap,
    })
}

/// A tuned Hamiltonian with its ground space and effective model.
#[derive(Debug, Clone)]
pub struct PerturbedModel {
    pub kind: PerturbationKind,
    pub h0: SpinHamiltonian,
    pub h: SpinHamiltonian,
    pub sector: BasisSector,
    pub ground: GroundBasis,
    pub eff: EffectiveHamiltonian,
    /// Physical operator whose logical coefficient is induced.
    pub induced: PauliOp,
    pub path_len: usize,
}

impl PerturbedModel {
    pub fn measured(&self) -> Result<f64> {
        Ok(self.eff.coefficient(&logical_matrix(&self.induced, &self.sector, &self.ground)?))
    }

    pub fn leading_order(&self) -> Result<f64> {
        let terms = &self.h.terms()[self.h0.term_count()..];
        if terms.is_empty() {
            return Ok(0.0);
        }
        leading_order_coefficient(&self.h0, terms)
    }

    pub fn report(&self, amp: f64, gap_param: f64) -> Result<SplittingReport> {
        report(self.kind, self.path_len, amp, gap_param, self.measured()?, self.leading_order()?, &self.eff)
    }
}

/// Tunes the rhombi on `path` (a hole→outer string) by `ΔE`.
pub fn charge_model(code: &ArrayCode, r: f64, e_g: f64, path: &EdgePath, delta_e: f64, opts: &SolveOptions) -> Result<PerturbedModel> {
    code.lattice().validate_boundary_string(path)?;
    let h0 = build_bulk(code, r, e_g)?;
    let h = h0.clone().add_charge_perturbation(path, delta_e)?;
    finish_model(code, PerturbationKind::Charge, h0, h, PauliOp::z_string(code.n(), &path.edges)?, path.len(), opts)
}

/// Lets vortices hop across the rhombi of a closed loop with amplitude `t̃`.
pub fn vortex_model(code: &ArrayCode, r: f64, e_g: f64, loop_: &EdgePath, t_tunnel: f64, opts: &SolveOptions) -> Result<PerturbedModel> {
    if !loop_.is_closed() {
        return Err(Error::WrongPerturbation("vortex tuning needs a closed loop".into()));
    }
    let h0 = release_along(build_bulk(code, r, e_g)?, code, loop_)?;
    let h = h0.clone().add_vortex_perturbation(loop_, t_tunnel)?;
    finish_model(code, PerturbationKind::Vortex, h0, h, PauliOp::x_string(code.n(), &loop_.edges)?, loop_.len(), opts)
}

fn finish_model(
    code: &ArrayCode,
    kind: PerturbationKind,
    h0: SpinHamiltonian,
    h: SpinHamiltonian,
    induced: PauliOp,
    path_len: usize,
    opts: &SolveOptions,
) -> Result<PerturbedModel> {
    let sector = h.sector(opts.dim_cap)?;
    let ground = construct_ground_basis(code, &sector)?;
    let eff = effective_hamiltonian(&h, &sector, &ground, opts)?;
    Ok(PerturbedModel { kind, h0, h, sector, ground, eff, induced, path_len })
}

/// Measured string-operator coefficient for a `ΔE`-tuned string.
pub fn measure_charge_splitting(
    code: &ArrayCode,
    r: f64,
    e_g: f64,
    path: &EdgePath,
    delta_e: f64,
    opts: &SolveOptions,
) -> Result<SplittingReport> {
    charge_model(code, r, e_g, path, delta_e, opts)?.report(delta_e, r)
}

/// Measured loop-operator coefficient for a `t̃`-tuned loop.
pub fn measure_vortex_splitting(
    code: &ArrayCode,
    r: f64,
    e_g: f64,
    loop_: &EdgePath,
    t_tunnel: f64,
    opts: &SolveOptions,
) -> Result<SplittingReport> {
    vortex_model(code, r, e_g, loop_, t_tunnel, opts)?.report(t_tunnel, e_g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub amp: f64,
    pub measured: Option<f64>,
    pub predicted: Option<f64>,
    pub ratio: Option<f64>,
    pub leading_order: Option<f64>,
    /// Why a row has no measurement.
    pub note: Option<String>,
}

/// Splittings of hole 0 over path lengths `ns`, using the first path of
/// each length (charge: hole→outer strings; vortex: loops around the hole).
pub fn splitting_sweep(
    code: &ArrayCode,
    kind: PerturbationKind,
    amp: f64,
    r: f64,
    e_g: f64,
    ns: &[usize],
    opts: &SolveOptions,
) -> Result<Vec<SweepRow>> {
    let lat = code.lattice();
    lat.hole(0)?;
    let mut rows = Vec::new();
    for &n in ns {
        let path = match kind {
            PerturbationKind::Charge => lat.strings_of_length(Face::Hole(0), Face::Outer, n, 1)?.into_iter().next(),
            PerturbationKind::Vortex => lat.loops_around_hole(0, n, n)?.into_iter().next(),
        };
        let Some(path) = path else {
            rows.push(SweepRow {
                n,
                amp,
                measured: None,
                predicted: predicted_splitting(kind, amp, if kind == PerturbationKind::Charge { r } else { e_g }, n).ok(),
                ratio: None,
                leading_order: None,
                note: Some("no-path".into()),
            });
            continue;
        };
        let rep = match kind {
            PerturbationKind::Charge => measure_charge_splitting(code, r, e_g, &path, amp, opts)?,
            PerturbationKind::Vortex => measure_vortex_splitting(code, r, e_g, &path, amp, opts)?,
        };
        rows.push(SweepRow {
            n,
            amp,
            measured: Some(rep.measured),
            predicted: Some(rep.predicted),
            ratio: rep.ratio,
            leading_order: Some(rep.leading_order),
            note: (!rep.perturbative).then(|| "outside perturbative regime".into()),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleSpin {
    Up,
    Down,
    Mixed,
}

impl std::fmt::Display for HoleSpin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HoleSpin::Up => "⇑",
            HoleSpin::Down => "⇓",
            HoleSpin::Mixed => "mixed",
        })
    }
}

/// Reads each hole's spin from `⟨T_k⟩`, thresholded at `±(1 − 1e−6)`.
pub fn hole_spin_labels(state: &[f64], code: &ArrayCode, sector: &BasisSector) -> Result<Vec<HoleSpin>> {
    code.logical_z()
        .iter()
        .map(|t| {
            let e = dot(state, &apply_pauli(t, sector, state)?);
            Ok(if e >= 1.0 - 1e-6 {
                HoleSpin::Up
            } else if e <= -(1.0 - 1e-6) {
                HoleSpin::Down
            } else {
                HoleSpin::Mixed
            })
        })
        .collect()
}

/// Largest `|⟨G_α|σᶻ_e|G_β⟩|` over the given edges and ground vectors.
pub fn max_first_order_element(sector: &BasisSector, ground: &[Vec<f64>], edges: &[usize]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &e in edges {
        let z = PauliOp::z_string(sector.n(), &[e])?;
        let compiled = SectorOperator::from_pauli(&z, sector)?;
        for b in ground {
            let zb = compiled.apply(b)?;
            for a in ground {
                worst = worst.max(dot(a, &zb).abs());
            }
        }
    }
    Ok(worst)
}

/// Anchors of a string, for reports.
pub fn anchors(path: &EdgePath) -> Option<(Anchor, Anchor)> {
    match path.kind {
        PathKind::OpenString { start, end } => Some((start, end)),
        PathKind::ClosedLoop => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::build_code;
    use crate::presets::Preset;

    #[test]
    fn closed_form_examples() {
        let c = PerturbationKind::Charge;
        assert_eq!(predicted_splitting(c, 0.3, 1.0, 1).unwrap(), 0.15);
        assert!((predicted_splitting(c, 0.1, 1.0, 2).unwrap() + 6.25e-4).abs() < 1e-18);
        assert!((predicted_splitting(PerturbationKind::Vortex, 0.1, 1.0, 2).unwrap() + 5e-3).abs() < 1e-17);
        assert!(predicted_splitting(c, 0.1, 1.0, 0).is_err());
        assert!(predicted_splitting(c, 0.1, 0.0, 2).is_err());
    }

    #[test]
    fn diagonal_hamiltonian_spectrum() {
        let mut h = SpinHamiltonian::new(3);
        h.add_term(1.0, PauliOp::z_string(3, &[0]).unwrap()).unwrap();
        h.add_term(0.5, PauliOp::z_string(3, &[1]).unwrap()).unwrap();
        h.add_term(0.25, PauliOp::z_string(3, &[2]).unwrap()).unwrap();
        let s = h.sector(8).unwrap();
        let r = diagonalize(&h, &s, 8, &SolveOptions::default()).unwrap();
        let mut want: Vec<f64> = (0..8)
            .map(|b: usize| [1.0, 0.5, 0.25].iter().enumerate().map(|(i, c)| if b >> i & 1 == 1 { -c } else { *c }).sum())
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in r.eigenvalues.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_basis_labels_and_strings() {
        let code = build_code(&Preset::Star.build()).unwrap();
        let h = build_bulk(&code, 1.0, 4.0).unwrap();
        let s = h.sector(1 << 12).unwrap();
        let g = construct_ground_basis(&code, &s).unwrap();
        assert_eq!(g.labels, vec![vec![1], vec![-1]]);
        assert_eq!(hole_spin_labels(&g.states[0], &code, &s).unwrap(), vec![HoleSpin::Up]);
        assert_eq!(hole_spin_labels(&g.states[1], &code, &s).unwrap(), vec![HoleSpin::Down]);
        let mix: Vec<f64> = g.states[0].iter().zip(&g.states[1]).map(|(a, b)| (a + b) / 2f64.sqrt()).collect();
        assert_eq!(hole_spin_labels(&mix, &code, &s).unwrap(), vec![HoleSpin::Mixed]);
        assert!(dot(&g.states[0], &g.states[1]).abs() < 1e-14);
    }

    #[test]
    fn trivial_perturbation_gives_zero_coefficient() {
        let code = build_code(&Preset::Star.build()).unwrap();
        let path = code.x_paths()[0].clone();
        let rep = measure_charge_splitting(&code, 1.0, 4.0, &path, 0.0, &SolveOptions::default()).unwrap();
        assert!(rep.measured.abs() < 1e-12);
    }

    #[test]
    fn leading_order_two_edge_string() {
        // two-edge string through one triangle: 2·(ΔE/2)²/(−2r)
        let code = build_code(&Preset::Star.build()).unwrap();
        let path = code.x_paths()[0].clone();
        assert_eq!(path.len(), 2);
        let h0 = build_bulk(&code, 1.0, 4.0).unwrap();
        let h = h0.clone().add_charge_perturbation(&path, 0.1).unwrap();
        let lead = leading_order_coefficient(&h0, &h.terms()[h0.term_count()..]).unwrap();
        assert!((lead - 2.0 * 0.05f64.powi(2) / -2.0).abs() < 1e-15);
    }
}
