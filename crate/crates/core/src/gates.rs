//! Logical-space Hamiltonians, rotations and CNOT schedules.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::code::ArrayCode;
use crate::error::{Error, Result};
use crate::spectra::{charge_model, hole_spin_labels, predicted_splitting, vortex_model, HoleSpin, PerturbationKind, SolveOptions};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

const MAX_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Z,
}

/// Tensor product of `Ī`, `X̄`, `Z̄` over `K` logical qubits; qubit 0 is
/// the most significant factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LogicalWord {
    letters: Vec<Letter>,
}

impl LogicalWord {
    pub fn identity(k: usize) -> Self {
        Self { letters: vec![Letter::I; k] }
    }

    pub fn single(k: usize, qubit: usize, letter: Letter) -> Result<Self> {
        let mut w = Self::identity(k);
        *w.letters
            .get_mut(qubit)
            .ok_or(Error::UnknownHole { hole: qubit, count: k })? = letter;
        Ok(w)
    }

    pub fn pair(k: usize, (a, la): (usize, Letter), (b, lb): (usize, Letter)) -> Result<Self> {
        if a == b {
            return Err(Error::Domain(format!("two-qubit word needs distinct qubits, got {a} twice")));
        }
        let mut w = Self::single(k, a, la)?;
        *w.letters
            .get_mut(b)
            .ok_or(Error::UnknownHole { hole: b, count: k })? = lb;
        Ok(w)
    }

    pub fn k(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&l| l == Letter::I)
    }

    pub fn commutes(&self, other: &Self) -> bool {
        let clashes = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Letter::I && **b != Letter::I && a != b)
            .count();
        clashes % 2 == 0
    }

    /// Real symmetric `2^K × 2^K` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_element(1, 1, 1.0);
        for l in &self.letters {
            let f = match l {
                Letter::I => DMatrix::identity(2, 2),
                Letter::X => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
                Letter::Z => DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            };
            m = m.kronecker(&f);
        }
        m
    }
}

impl fmt::Display for LogicalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .letters
            .iter()
            .enumerate()
            .filter_map(|(q, l)| match l {
                Letter::I => None,
                Letter::X => Some(format!("X{q}")),
                Letter::Z => Some(format!("Z{q}")),
            })
            .collect();
        if parts.is_empty() {
            f.write_str("I")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

impl LogicalWord {
    /// Parses `"Z0 X1"` (or `"I"`) over `k` qubits.
    pub fn parse(s: &str, k: usize) -> Result<Self> {
        let mut w = Self::identity(k);
        for tok in s.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let (head, idx) = tok.split_at(1);
            let letter = match head {
                "X" => Letter::X,
                "Z" => Letter::Z,
                _ => return Err(Error::Parse(format!("bad logical letter in {tok:?}"))),
            };
            let q: usize = idx.parse().map_err(|_| Error::Parse(format!("bad qubit index in {tok:?}")))?;
            let slot = w.letters.get_mut(q).ok_or(Error::UnknownHole { hole: q, count: k })?;
            if *slot != Letter::I {
                return Err(Error::Parse(format!("qubit {q} appears twice")));
            }
            *slot = letter;
        }
        Ok(w)
    }
}

impl Serialize for LogicalWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalTerm {
    pub coeff: f64,
    pub word: LogicalWord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalHamiltonian {
    #[serde(rename = "K")]
    pub k: usize,
    pub terms: Vec<LogicalTerm>,
}

impl LogicalHamiltonian {
    pub fn new(k: usize) -> Result<Self> {
        if k > MAX_QUBITS {
            return Err(Error::ResourceLimit { dim: k, cap: MAX_QUBITS });
        }
        Ok(Self { k, terms: Vec::new() })
    }

    pub fn with_term(mut self, coeff: f64, word: LogicalWord) -> Result<Self> {
        if word.k() != self.k {
            return Err(Error::SizeMismatch { left: self.k, right: word.k() });
        }
        if !coeff.is_finite() {
            return Err(Error::Domain(format!("non-finite coefficient {coeff}")));
        }
        self.terms.push(LogicalTerm { coeff, word });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        1 << self.k
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        self.terms
            .iter()
            .fold(DMatrix::zeros(self.dim(), self.dim()), |acc, t| acc + t.word.matrix() * t.coeff)
    }

    pub fn is_commuting(&self) -> bool {
        self.terms
            .iter()
            .enumerate()
            .all(|(i, a)| self.terms[i + 1..].iter().all(|b| a.word.commutes(&b.word)))
    }

    /// `exp(−i·H·t)` from the eigendecomposition of the real symmetric `H`.
    pub fn evolve(&self, t: f64) -> CMatrix {
        exp_i_symmetric(&self.matrix(), -t)
    }
}

/// `exp(i·s·H)` for real symmetric `H`.
pub fn exp_i_symmetric(h: &DMatrix<f64>, s: f64) -> CMatrix {
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let phases = DVector::from_iterator(h.nrows(), eig.eigenvalues.iter().map(|&e| C64::from_polar(1.0, s * e)));
    &v * CMatrix::from_diagonal(&phases) * v.transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    /// `δε·X̄_k`, from charge tunneling.
    X,
    /// `δE·Z̄_k`, from vortex tunneling.
    Z,
    /// `α·X̄_m X̄_n`.
    Xx,
    /// `β·Z̄_m Z̄_n`.
    Zz,
    /// `γ₁Z̄_m + γ₂X̄_n + γ₃Z̄_m X̄_n`.
    Zx,
}

impl HamiltonianKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::X => "x",
            Self::Z => "z",
            Self::Xx => "xx",
            Self::Zz => "zz",
            Self::Zx => "zx",
        }
    }

    fn qubits(self) -> usize {
        match self {
            Self::X | Self::Z => 1,
            _ => 2,
        }
    }
}

impl FromStr for HamiltonianKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Self::X),
            "z" => Ok(Self::Z),
            "xx" => Ok(Self::Xx),
            "zz" => Ok(Self::Zz),
            "zx" => Ok(Self::Zx),
            _ => Err(Error::Parse(format!("unknown hamiltonian kind {s:?}"))),
        }
    }
}

/// Builds one of the tunable effective Hamiltonians on `k` logical qubits.
///
/// `zx` takes `[γ₁, γ₂]` (with `γ₃ = γ₁γ₂`) or `[γ₁, γ₂, γ₃]`; the third
/// value must equal `γ₁γ₂` within 1e−12 unless `free_gamma3` is set.
pub fn effective_hamiltonian(
    kind: HamiltonianKind,
    k: usize,
    qubits: &[usize],
    coeffs: &[f64],
    free_gamma3: bool,
) -> Result<LogicalHamiltonian> {
    if qubits.len() != kind.qubits() {
        return Err(Error::CoefficientCount { kind: kind.name(), expected: kind.qubits(), got: qubits.len() });
    }
    let expected = if kind == HamiltonianKind::Zx { 2 } else { 1 };
    let ok = coeffs.len() == expected || (kind == HamiltonianKind::Zx && coeffs.len() == 3);
    if !ok {
        return Err(Error::CoefficientCount { kind: kind.name(), expected, got: coeffs.len() });
    }
    let h = LogicalHamiltonian::new(k)?;
    match kind {
        HamiltonianKind::X => h.with_term(coeffs[0], LogicalWord::single(k, qubits[0], Letter::X)?),
        HamiltonianKind::Z => h.with_term(coeffs[0], LogicalWord::single(k, qubits[0], Letter::Z)?),
        HamiltonianKind::Xx => h.with_term(coeffs[0], LogicalWord::pair(k, (qubits[0], Letter::X), (qubits[1], Letter::X))?),
        HamiltonianKind::Zz => h.with_term(coeffs[0], LogicalWord::pair(k, (qubits[0], Letter::Z), (qubits[1], Letter::Z))?),
        HamiltonianKind::Zx => {
            let (g1, g2) = (coeffs[0], coeffs[1]);
            let g3 = match coeffs.get(2) {
                None => g1 * g2,
                Some(&g3) if free_gamma3 => g3,
                Some(&g3) => {
                    if (g3 - g1 * g2).abs() > 1e-12 * (g1 * g2).abs().max(1.0) {
                        return Err(Error::Domain(format!("γ₃ = {g3} differs from γ₁γ₂ = {}", g1 * g2)));
                    }
                    g3
                }
            };
            let (m, n) = (qubits[0], qubits[1]);
            h.with_term(g1, LogicalWord::single(k, m, Letter::Z)?)?
                .with_term(g2, LogicalWord::single(k, n, Letter::X)?)?
                .with_term(g3, LogicalWord::pair(k, (m, Letter::Z), (n, Letter::X))?)
        }
    }
}

/// `|Tr(U†V)|/d`.
pub fn gate_fidelity(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    if u.shape() != v.shape() || u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), got: v.nrows() });
    }
    Ok((u.adjoint() * v).trace().norm() / u.nrows() as f64)
}

/// Frobenius norm of `U − V`.
pub fn operator_distance(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    if u.shape() != v.shape() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), got: v.nrows() });
    }
    Ok((u - v).norm())
}

/// `‖U†U − 1‖` (Frobenius).
pub fn unitarity_error(u: &CMatrix) -> f64 {
    (u.adjoint() * u - CMatrix::identity(u.nrows(), u.ncols())).norm()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub kind: HamiltonianKind,
    pub hamiltonian: LogicalHamiltonian,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateSchedule {
    #[serde(rename = "K")]
    pub k: usize,
    /// Applied first to last.
    pub steps: Vec<Step>,
    #[serde(serialize_with = "ser_cmatrix")]
    pub target: CMatrix,
    pub achieved_fidelity: f64,
}

fn ser_cmatrix<S: serde::Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    rows.serialize(s)
}

impl GateSchedule {
    fn new(k: usize, steps: Vec<Step>, target: CMatrix) -> Result<Self> {
        if let Some(s) = steps.iter().find(|s| !(s.duration >= 0.0)) {
            return Err(Error::Domain(format!("negative duration {} in {} step", s.duration, s.kind.name())));
        }
        let mut sched = Self { k, steps, target, achieved_fidelity: 0.0 };
        sched.achieved_fidelity = gate_fidelity(&sched.target, &sched.unitary())?.min(1.0);
        Ok(sched)
    }

    pub fn unitary(&self) -> CMatrix {
        self.steps
            .iter()
            .fold(CMatrix::identity(1 << self.k, 1 << self.k), |u, s| s.hamiltonian.evolve(s.duration) * u)
    }

    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(|s| s.duration).sum()
    }

    /// Pulse table: `step,kind,coefficient,duration`, one row per term.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,kind,term,coefficient,duration\n");
        for (i, s) in self.steps.iter().enumerate() {
            for t in &s.hamiltonian.terms {
                out.push_str(&format!("{i},{},{},{:e},{:e}\n", s.kind.name(), t.word, t.coeff, s.duration));
            }
        }
        out
    }

    /// Rounds each duration to the nearest multiple of `grid`.
    pub fn quantized(&self, grid: f64) -> Result<QuantizedSchedule> {
        if !(grid > 0.0) {
            return Err(Error::Domain(format!("duration grid must be positive, got {grid}")));
        }
        let mut steps = self.steps.clone();
        for s in &mut steps {
            s.duration = (s.duration / grid).round() * grid;
        }
        let schedule = GateSchedule::new(self.k, steps, self.target.clone())?;
        Ok(QuantizedSchedule {
            fidelity_loss: self.achieved_fidelity - schedule.achieved_fidelity,
            grid,
            schedule,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizedSchedule {
    pub schedule: GateSchedule,
    pub grid: f64,
    pub fidelity_loss: f64,
}

/// Shortest nonnegative time with `coeff·t ≡ angle` modulo `period` in angle.
fn fold_duration(angle: f64, coeff: f64, period: f64, name: &'static str) -> Result<f64> {
    if angle == 0.0 {
        return Ok(0.0);
    }
    if coeff == 0.0 {
        return Err(Error::ZeroCoefficient { name, angle });
    }
    let t = (angle / coeff).rem_euclid(period / coeff.abs());
    Ok(if t.is_finite() { t } else { 0.0 })
}

/// Target `e^{−iγZ̄}e^{−iφX̄}e^{−iθZ̄}` on `qubit` of `k`.
pub fn rotation_target(theta: f64, phi: f64, gamma: f64, qubit: usize, k: usize) -> Result<CMatrix> {
    let z = LogicalWord::single(k, qubit, Letter::Z)?.matrix();
    let x = LogicalWord::single(k, qubit, Letter::X)?.matrix();
    Ok(exp_i_symmetric(&z, -gamma) * exp_i_symmetric(&x, -phi) * exp_i_symmetric(&z, -theta))
}

/// Three-pulse schedule for `e^{−iγZ̄}e^{−iφX̄}e^{−iθZ̄}` using the vortex
/// (`δE·Z̄`) and charge (`δε·X̄`) Hamiltonians of one hole.
pub fn single_qubit_rotation(
    theta: f64,
    phi: f64,
    gamma: f64,
    qubit: usize,
    k: usize,
    delta_eps: f64,
    delta_e: f64,
) -> Result<GateSchedule> {
    let hz = effective_hamiltonian(HamiltonianKind::Z, k, &[qubit], &[delta_e], false)?;
    let hx = effective_hamiltonian(HamiltonianKind::X, k, &[qubit], &[delta_eps], false)?;
    let steps = vec![
        Step { kind: HamiltonianKind::Z, hamiltonian: hz.clone(), duration: fold_duration(theta, delta_e, TAU, "δE")? },
        Step { kind: HamiltonianKind::X, hamiltonian: hx, duration: fold_duration(phi, delta_eps, TAU, "δε")? },
        Step { kind: HamiltonianKind::Z, hamiltonian: hz, duration: fold_duration(gamma, delta_e, TAU, "δE")? },
    ];
    GateSchedule::new(k, steps, rotation_target(theta, phi, gamma, qubit, k)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub theta: f64,
    pub phi: f64,
    pub gamma: f64,
    /// `α` with `target = e^{iα}·e^{−iγZ}e^{−iφX}e^{−iθZ}`.
    pub global_phase: f64,
}

/// ZXZ Euler angles of a 2×2 unitary.
pub fn euler_zxz(u: &CMatrix) -> Result<EulerAngles> {
    if u.shape() != (2, 2) {
        return Err(Error::DimensionMismatch { expected: 2, got: u.nrows() });
    }
    if unitarity_error(u) > 1e-8 {
        return Err(Error::Domain("target is not unitary".into()));
    }
    let alpha = u.determinant().arg() / 2.0;
    let w = u * C64::from_polar(1.0, -alpha);
    let phi = w[(0, 1)].norm().atan2(w[(0, 0)].norm());
    let sum = if w[(0, 0)].norm() > 1e-12 { -w[(0, 0)].arg() } else { 0.0 };
    let diff = if w[(0, 1)].norm() > 1e-12 { -FRAC_PI_2 - w[(0, 1)].arg() } else { 0.0 };
    Ok(EulerAngles { theta: (sum - diff) / 2.0, phi, gamma: (sum + diff) / 2.0, global_phase: alpha })
}

/// `|0⟩⟨0|⊗1 + |1⟩⟨1|⊗X̄` with `|0⟩` the `Z̄ = +1` state of `control`.
pub fn cnot_target(k: usize, control: usize, target: usize) -> Result<CMatrix> {
    let id = DMatrix::<f64>::identity(1 << k, 1 << k);
    let z = LogicalWord::single(k, control, Letter::Z)?.matrix();
    let x = LogicalWord::single(k, target, Letter::X)?.matrix();
    let zx = LogicalWord::pair(k, (control, Letter::Z), (target, Letter::X))?.matrix();
    Ok(((&id + &z + &x - &zx) * 0.5).map(|v| C64::new(v, 0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiteralCnot {
    pub times: [f64; 3],
    pub fidelity: f64,
    pub has_negative_time: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CnotResult {
    pub gammas: [f64; 3],
    pub solver: GateSchedule,
    pub literal: LiteralCnot,
    /// Global phase of the schedule relative to the CNOT target.
    pub target_phase: f64,
}

fn zx_schedule(k: usize, m: usize, n: usize, g: [f64; 3], times: [f64; 3]) -> Result<Vec<Step>> {
    Ok(vec![
        Step { kind: HamiltonianKind::Zx, hamiltonian: effective_hamiltonian(HamiltonianKind::Zx, k, &[m, n], &g, true)?, duration: times[0] },
        Step { kind: HamiltonianKind::Z, hamiltonian: effective_hamiltonian(HamiltonianKind::Z, k, &[m], &[g[0]], false)?, duration: times[1] },
        Step { kind: HamiltonianKind::X, hamiltonian: effective_hamiltonian(HamiltonianKind::X, k, &[n], &[g[1]], false)?, duration: times[2] },
    ])
}

/// CNOT from `H^zx`, `γ₁Z̄_m` and `γ₂X̄_n` pulses on two qubits.
///
/// The solver times satisfy `γ₃t₁ ≡ −π/4`, `γ₁(t₁+t₂) ≡ π/4` and
/// `γ₂(t₁+t₃) ≡ π/4` modulo π, which fixes the gate up to a global phase.
/// The printed times `t₁ = π/(4γ₃)`, `t₂ = 3π/(4γ₁) − t₁`,
/// `t₃ = π/(2γ₂) − t₁` are evaluated alongside.
pub fn cnot_schedule(gamma1: f64, gamma2: f64, gamma3: f64) -> Result<CnotResult> {
    cnot_schedule_on(2, 0, 1, [gamma1, gamma2, gamma3])
}

pub fn cnot_schedule_on(k: usize, control: usize, target: usize, g: [f64; 3]) -> Result<CnotResult> {
    for (i, &v) in g.iter().enumerate() {
        if v == 0.0 || !v.is_finite() {
            return Err(Error::ZeroCoefficient { name: ["γ₁", "γ₂", "γ₃"][i], angle: FRAC_PI_4 });
        }
    }
    let t1 = (-FRAC_PI_4 / g[2]).rem_euclid(PI / g[2].abs());
    let t2 = (FRAC_PI_4 / g[0] - t1).rem_euclid(PI / g[0].abs());
    let t3 = (FRAC_PI_4 / g[1] - t1).rem_euclid(PI / g[1].abs());
    let target_u = cnot_target(k, control, target)?;
    let solver = GateSchedule::new(k, zx_schedule(k, control, target, g, [t1, t2, t3])?, target_u.clone())?;
    if solver.achieved_fidelity < 1.0 - 1e-10 {
        return Err(Error::Domain(format!(
            "γ signs {:?} admit no nonnegative schedule (fidelity {})",
            g.map(f64::signum),
            solver.achieved_fidelity
        )));
    }
    let lt1 = PI / (4.0 * g[2]);
    let lt = [lt1, 3.0 * PI / (4.0 * g[0]) - lt1, PI / (2.0 * g[1]) - lt1];
    let lu = zx_schedule(k, control, target, g, lt)?
        .iter()
        .fold(CMatrix::identity(1 << k, 1 << k), |u, s| s.hamiltonian.evolve(s.duration) * u);
    let literal = LiteralCnot { times: lt, fidelity: gate_fidelity(&target_u, &lu)?.min(1.0), has_negative_time: lt.iter().any(|&t| t < 0.0) };
    let overlap = (target_u.adjoint() * solver.unitary()).trace();
    Ok(CnotResult { gammas: g, target_phase: overlap.arg(), solver, literal })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignCase {
    pub signs: [i8; 3],
    pub literal_fidelity: f64,
    pub literal_has_negative_time: bool,
    pub solver_fidelity: f64,
}

/// Literal and solver fidelities for all eight sign patterns of `|γ|`.
pub fn cnot_sign_table(magnitudes: [f64; 3]) -> Result<Vec<SignCase>> {
    (0..8)
        .map(|bits: u8| {
            let signs = [0, 1, 2].map(|i| if bits >> (2 - i) & 1 == 1 { -1i8 } else { 1 });
            let g = [0, 1, 2].map(|i| magnitudes[i].abs() * signs[i] as f64);
            let r = cnot_schedule(g[0], g[1], g[2])?;
            Ok(SignCase {
                signs,
                literal_fidelity: r.literal.fidelity,
                literal_has_negative_time: r.literal.has_negative_time,
                solver_fidelity: r.solver.achieved_fidelity,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningParams {
    pub r: f64,
    pub e_g: f64,
    pub delta_e: f64,
    pub t_tunnel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSource {
    /// Closed-form splittings.
    Formula,
    /// Coefficients measured by exact diagonalization.
    Ed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum GateRequest {
    Rotation { hole: usize, theta: f64, phi: f64, gamma: f64 },
    Cnot { control: usize, target: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub source: CoefficientSource,
    /// `(name, hole, path length, value)`.
    pub coefficients: Vec<(String, usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateCheck {
    pub initial: Vec<HoleSpin>,
    #[serde(rename = "final")]
    pub final_: Vec<HoleSpin>,
    /// `|⟨target·ψ₀|ψ(T)⟩|` in the ground space.
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndToEnd {
    pub schedule: GateSchedule,
    pub provenance: Provenance,
    /// Present for single-qubit requests with ED coefficients on `K = 1`.
    pub state_check: Option<StateCheck>,
}

fn hole_coefficient(
    code: &ArrayCode,
    hole: usize,
    kind: PerturbationKind,
    p: &TuningParams,
    source: CoefficientSource,
    opts: &SolveOptions,
) -> Result<(f64, usize)> {
    match kind {
        PerturbationKind::Charge => {
            let path = &code.x_paths()[hole];
            let v = match source {
                CoefficientSource::Formula => predicted_splitting(kind, p.delta_e, p.r, path.len())?,
                CoefficientSource::Ed => charge_model(code, p.r, p.e_g, path, p.delta_e, opts)?.measured()?,
            };
            Ok((v, path.len()))
        }
        PerturbationKind::Vortex => {
            let loop_ = &code.z_paths()[hole];
            let v = match source {
                CoefficientSource::Formula => predicted_splitting(kind, p.t_tunnel, p.e_g, loop_.len())?,
                CoefficientSource::Ed => vortex_model(code, p.r, p.e_g, loop_, p.t_tunnel, opts)?.measured()?,
            };
            Ok((v, loop_.len()))
        }
    }
}

/// Chains splittings, effective Hamiltonians and schedule synthesis.
///
/// The CNOT coupling uses `γ₁ = δE` of the control, `γ₂ = δε` of the
/// target and `γ₃ = γ₁γ₂`.
pub fn end_to_end_gate(
    code: &ArrayCode,
    params: &TuningParams,
    request: GateRequest,
    source: CoefficientSource,
    opts: &SolveOptions,
) -> Result<EndToEnd> {
    let k = code.k();
    let check_hole = |h: usize| if h < k { Ok(()) } else { Err(Error::UnknownHole { hole: h, count: k }) };
    let mut coefficients = Vec::new();
    let mut coeff = |name: &str, hole: usize, kind| -> Result<f64> {
        let (v, len) = hole_coefficient(code, hole, kind, params, source, opts)?;
        coefficients.push((name.to_string(), hole, len, v));
        Ok(v)
    };
    let (schedule, state_check) = match request {
        GateRequest::Rotation { hole, theta, phi, gamma } => {
            check_hole(hole)?;
            let d_eps = if phi != 0.0 { coeff("δε", hole, PerturbationKind::Charge)? } else { 1.0 };
            let d_e = if theta != 0.0 || gamma != 0.0 { coeff("δE", hole, PerturbationKind::Vortex)? } else { 1.0 };
            let sched = single_qubit_rotation(theta, phi, gamma, hole, k, d_eps, d_e)?;
            let check = if source == CoefficientSource::Ed && k == 1 && theta == 0.0 && gamma == 0.0 && phi != 0.0 {
                Some(charge_state_check(code, params, &sched, opts)?)
            } else {
                None
            };
            (sched, check)
        }
        GateRequest::Cnot { control, target } => {
            check_hole(control)?;
            check_hole(target)?;
            let g1 = coeff("γ₁", control, PerturbationKind::Vortex)?;
            let g2 = coeff("γ₂", target, PerturbationKind::Charge)?;
            (cnot_schedule_on(k, control, target, [g1, g2, g1 * g2])?.solver, None)
        }
    };
    Ok(EndToEnd { schedule, provenance: Provenance { source, coefficients }, state_check })
}

/// Runs the X pulse of `sched` under the full ED effective Hamiltonian
/// (identity part dropped) starting from the all-up ground state, and reads
/// the hole spins of the result.
fn charge_state_check(code: &ArrayCode, p: &TuningParams, sched: &GateSchedule, opts: &SolveOptions) -> Result<StateCheck> {
    let model = charge_model(code, p.r, p.e_g, &code.x_paths()[0], p.delta_e, opts)?;
    let d = model.ground.states.len();
    let mut h = model.eff.matrix.clone();
    let shift = h.trace() / d as f64;
    for i in 0..d {
        h[(i, i)] -= shift;
    }
    let duration: f64 = sched.steps.iter().filter(|s| s.kind == HamiltonianKind::X).map(|s| s.duration).sum();
    let u = exp_i_symmetric(&h, -duration);
    let amps: Vec<C64> = (0..d).map(|a| u[(a, 0)]).collect();
    let expected: Vec<C64> = (0..d).map(|a| sched.target[(a, 0)]).collect();
    let overlap = expected.iter().zip(&amps).map(|(e, a)| e.conj() * a).sum::<C64>().norm();
    let lead = amps.iter().cloned().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(C64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    let n = model.sector.dim();
    let mut psi = vec![0.0; n];
    for (a, g) in amps.iter().zip(&model.ground.states) {
        let c = (a * phase).re;
        psi.iter_mut().zip(g).for_each(|(x, y)| *x += c * y);
    }
    Ok(StateCheck {
        initial: hole_spin_labels(&model.ground.states[0], code, &model.sector)?,
        final_: hole_spin_labels(&psi, code, &model.sector)?,
        overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn evolve_basic_identities() {
        let h = effective_hamiltonian(HamiltonianKind::X, 1, &[0], &[0.3], false).unwrap();
        assert!(operator_distance(&h.evolve(0.0), &CMatrix::identity(2, 2)).unwrap() < 1e-15);
        let flip = h.evolve(FRAC_PI_2 / 0.3);
        let want = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        assert!(operator_distance(&flip, &want).unwrap() < 1e-12);
        let ab = h.evolve(0.7) * h.evolve(1.1);
        assert!(operator_distance(&ab, &h.evolve(1.8)).unwrap() < 1e-12);
    }

    #[test]
    fn zx_gamma3_rule() {
        let h = effective_hamiltonian(HamiltonianKind::Zx, 2, &[0, 1], &[0.5, 0.5], false).unwrap();
        assert_eq!(h.terms[2].coeff, 0.25);
        assert!(effective_hamiltonian(HamiltonianKind::Zx, 2, &[0, 1], &[0.5, 0.5, 0.3], false).is_err());
        assert!(effective_hamiltonian(HamiltonianKind::Zx, 2, &[0, 1], &[0.5, 0.5, 0.3], true).is_ok());
        assert!(matches!(
            effective_hamiltonian(HamiltonianKind::X, 1, &[0], &[0.5, 0.5], false),
            Err(Error::CoefficientCount { .. })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let cnot = cnot_target(2, 0, 1).unwrap();
        let id = CMatrix::identity(4, 4);
        assert!((gate_fidelity(&cnot, &id).unwrap() - 0.5).abs() < 1e-15);
        let phased = &cnot * C64::from_polar(1.0, 0.7);
        assert!((gate_fidelity(&cnot, &phased).unwrap() - 1.0).abs() < 1e-15);
        assert!(gate_fidelity(&cnot, &CMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn cnot_unit_gammas() {
        let r = cnot_schedule(1.0, 1.0, 1.0).unwrap();
        assert!(r.solver.achieved_fidelity > 1.0 - 1e-10);
        assert!(r.solver.steps.iter().all(|s| s.duration >= 0.0));
        assert!(r.literal.fidelity < 1.0 - 1e-6);
    }

    #[test]
    fn rotation_examples() {
        let s = single_qubit_rotation(0.0, 0.0, 0.0, 0, 1, 0.1, -0.2).unwrap();
        assert!(operator_distance(&s.unitary(), &CMatrix::identity(2, 2)).unwrap() < 1e-15);
        let s = single_qubit_rotation(0.4, -1.2, 2.5, 0, 1, -0.03, 0.07).unwrap();
        assert!(operator_distance(&s.unitary(), &s.target).unwrap() < 1e-10);
        assert!(matches!(
            single_qubit_rotation(0.0, 1.0, 0.0, 0, 1, 0.0, 1.0),
            Err(Error::ZeroCoefficient { .. })
        ));
    }

    #[test]
    fn euler_recovers_hadamard() {
        let s = 1.0 / 2f64.sqrt();
        let had = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
        let e = euler_zxz(&had).unwrap();
        let u = rotation_target(e.theta, e.phi, e.gamma, 0, 1).unwrap() * C64::from_polar(1.0, e.global_phase);
        assert!(operator_distance(&u, &had).unwrap() < 1e-12);
    }

    #[test]
    fn csv_has_one_row_per_term() {
        let r = cnot_schedule(0.3, -0.2, 0.05).unwrap();
        assert_eq!(r.solver.to_csv().lines().count(), 1 + 3 + 1 + 1);
    }
}
