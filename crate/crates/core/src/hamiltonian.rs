//! Spin Hamiltonians as weighted Pauli sums, constrained bases and a
//! matrix-free apply over computational basis states.
//!
//! Basis states are `u64` bit strings over edges (bit `e` set means the
//! rhombus on edge `e` is in the σᶻ = −1 state), so every model here must
//! have at most 64 spins.

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::ArrayCode;
use crate::error::{Error, Result};
use crate::lattice::{EdgePath, PathKind};
use crate::pauli::PauliOp;

/// Default upper bound on sector dimension.
pub const DEFAULT_DIM_CAP: usize = 1 << 24;

/// Thread pool shared by apply and the eigensolvers, sized by the
/// `JJA_THREADS` environment variable when set.
pub fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var("JJA_THREADS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub op: PauliOp,
}

/// `H = Σ cᵢ Oᵢ` with Hermitian Pauli strings `Oᵢ`, plus the σᶻ-type
/// constraints that the basis enforces exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinHamiltonian {
    n: usize,
    terms: Vec<Term>,
    enforced: Vec<PauliOp>,
}

impl SpinHamiltonian {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: Vec::new(),
            enforced: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn enforced(&self) -> &[PauliOp] {
        &self.enforced
    }

    pub fn add_term(&mut self, coeff: f64, op: PauliOp) -> Result<()> {
        if op.n() != self.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: op.n(),
            });
        }
        if !op.is_hermitian() || !coeff.is_finite() {
            return Err(Error::Domain(format!("term {coeff}·{op} is not Hermitian")));
        }
        if coeff != 0.0 {
            self.terms.push(Term { coeff, op });
        }
        Ok(())
    }

    /// Replaces the enforced constraint set.
    pub fn with_enforced(mut self, ops: Vec<PauliOp>) -> Result<Self> {
        for op in &ops {
            if op.n() != self.n {
                return Err(Error::SizeMismatch {
                    left: self.n,
                    right: op.n(),
                });
            }
            if !op.x_support().is_empty() || op.phase() % 2 == 1 {
                return Err(Error::Domain(format!("enforced constraint {op} is not a ±σᶻ product")));
            }
        }
        self.enforced = ops;
        Ok(self)
    }

    /// Drops every enforced constraint: the full 2ⁿ basis.
    pub fn unconstrained(mut self) -> Self {
        self.enforced.clear();
        self
    }

    /// Adds `(ΔE/2)·σᶻ` on every edge of an open string.
    pub fn add_charge_perturbation(mut self, path: &EdgePath, delta_e: f64) -> Result<Self> {
        if path.is_closed() {
            return Err(Error::WrongPerturbation(
                "charge tuning needs an open string; got a closed loop".into(),
            ));
        }
        for &e in &path.edges {
            self.add_term(delta_e / 2.0, PauliOp::z_string(self.n, &[e])?)?;
        }
        Ok(self)
    }

    /// Adds `t̃·σˣ` on every edge of a closed loop. Each term toggles the
    /// constraints at both ends of its edge, so none of those may be
    /// enforced.
    pub fn add_vortex_perturbation(mut self, path: &EdgePath, t_tunnel: f64) -> Result<Self> {
        if path.is_empty() {
            return Ok(self);
        }
        if let PathKind::OpenString { .. } = path.kind {
            return Err(Error::WrongPerturbation(
                "vortex tuning needs a closed loop; got an open string".into(),
            ));
        }
        for &e in &path.edges {
            let op = PauliOp::x_string(self.n, &[e])?;
            if self.enforced.iter().any(|c| !c.commutes(&op).unwrap_or(false)) {
                return Err(Error::HardSectorViolation { term: op.to_string() });
            }
            self.add_term(t_tunnel, op)?;
        }
        Ok(self)
    }

    /// Builds the basis for the enforced constraints.
    pub fn sector(&self, cap: usize) -> Result<BasisSector> {
        enumerate_sector(self.n, &self.enforced, cap)
    }

    pub fn to_file(&self) -> HamiltonianFile {
        HamiltonianFile {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    coeff: t.coeff,
                    op: op_string(&t.op),
                })
                .collect(),
            enforced: self.enforced.iter().map(op_string).collect(),
        }
    }

    pub fn from_file(f: &HamiltonianFile) -> Result<Self> {
        let mut h = Self::new(f.n);
        for t in &f.terms {
            h.add_term(t.coeff, PauliOp::parse(&t.op, f.n)?)?;
        }
        let enforced = f
            .enforced
            .iter()
            .map(|s| PauliOp::parse(s, f.n))
            .collect::<Result<_>>()?;
        h.with_enforced(enforced)
    }
}

fn op_string(op: &PauliOp) -> String {
    let s = op.to_string();
    s.strip_prefix('+').map(str::to_string).unwrap_or(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: f64,
    pub op: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianFile {
    pub n: usize,
    pub terms: Vec<TermJson>,
    #[serde(default)]
    pub enforced: Vec<String>,
}

/// Bulk model with the same vortex energy `E_g` on every hexagon.
pub fn build_bulk(code: &ArrayCode, r: f64, e_g: f64) -> Result<SpinHamiltonian> {
    build_bulk_with_penalties(code, r, &vec![e_g; code.constraints().len()])
}

/// `H = −r Σ Q_abc + Σ_a (E_a/2)(1 − P_a)`, with every `P_a` enforced.
pub fn build_bulk_with_penalties(code: &ArrayCode, r: f64, penalties: &[f64]) -> Result<SpinHamiltonian> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("flip amplitude r must be positive, got {r}")));
    }
    if penalties.len() != code.constraints().len() {
        return Err(Error::DimensionMismatch {
            expected: code.constraints().len(),
            got: penalties.len(),
        });
    }
    if let Some(e) = penalties.iter().find(|e| !(**e >= 0.0)) {
        return Err(Error::Domain(format!("vortex energy must be nonnegative, got {e}")));
    }
    let n = code.n();
    let mut h = SpinHamiltonian::new(n);
    for q in code.flips() {
        h.add_term(-r, q.clone())?;
    }
    let constant: f64 = penalties.iter().sum::<f64>() / 2.0;
    h.add_term(constant, PauliOp::identity(n))?;
    for (p, &e) in code.constraints().iter().zip(penalties) {
        h.add_term(-e / 2.0, p.clone())?;
    }
    h.with_enforced(code.constraints().to_vec())
}

/// Releases the constraints touched by `path` and keeps the rest enforced.
/// Those are the only constraints a σˣ on `path` can violate, so the
/// smaller sector is exact for the vortex problem.
pub fn release_along(h: SpinHamiltonian, code: &ArrayCode, path: &EdgePath) -> Result<SpinHamiltonian> {
    let lat = code.lattice();
    let touched: std::collections::BTreeSet<usize> =
        path.edges.iter().flat_map(|&e| lat.edges()[e]).collect();
    let keep = (0..lat.n_vertices())
        .filter(|v| !touched.contains(v))
        .map(|v| code.constraints()[v].clone())
        .collect();
    h.with_enforced(keep)
}

/// Alternative vortex model: no penalty on hexagons touched by `path`.
/// Not used for the reference results.
pub fn build_bulk_zero_penalty_on(code: &ArrayCode, r: f64, e_g: f64, path: &EdgePath) -> Result<SpinHamiltonian> {
    let lat = code.lattice();
    let mut pen = vec![e_g; lat.n_vertices()];
    for &e in &path.edges {
        for v in lat.edges()[e] {
            pen[v] = 0.0;
        }
    }
    let h = build_bulk_with_penalties(code, r, &pen)?;
    release_along(h, code, path)
}

/// States satisfying a set of `±σᶻ` parity constraints.
///
/// The constraints are reduced to row echelon form; a state is fixed by
/// its free (non-pivot) bits, and its index is those bits gathered in
/// order.
#[derive(Debug, Clone)]
pub struct BasisSector {
    n: usize,
    /// `(pivot bit, mask of free bits in the row, required parity)`.
    rows: Vec<(usize, u64, bool)>,
    free: Vec<usize>,
    states: Vec<u64>,
}

pub fn enumerate_sector(n: usize, enforced: &[PauliOp], cap: usize) -> Result<BasisSector> {
    if n > 64 {
        return Err(Error::ResourceLimit { dim: n, cap: 64 });
    }
    let mut rows: Vec<(u64, bool)> = Vec::with_capacity(enforced.len());
    for op in enforced {
        if op.n() != n {
            return Err(Error::SizeMismatch { left: n, right: op.n() });
        }
        let (x, z) = op.masks_u64().expect("n ≤ 64");
        if x != 0 || op.phase() % 2 == 1 {
            return Err(Error::Domain(format!("enforced constraint {op} is not a ±σᶻ product")));
        }
        rows.push((z, op.phase() == 2));
    }
    // reduced row echelon form
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let bit = 1u64 << col;
        let Some(sel) = (r..rows.len()).find(|&i| rows[i].0 & bit != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let pivot_row = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.0 & bit != 0 {
                row.0 ^= pivot_row.0;
                row.1 ^= pivot_row.1;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|&(_, rhs)| rhs) {
        return Err(Error::ZeroNorm("enforced constraints are inconsistent".into()));
    }
    rows.truncate(r);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let f = free.len();
    if f >= usize::BITS as usize - 1 || (1usize << f) > cap {
        return Err(Error::ResourceLimit {
            dim: if f < 63 { 1usize << f } else { usize::MAX },
            cap,
        });
    }
    let dim = 1usize << f;
    let rows: Vec<(usize, u64, bool)> = pivots
        .iter()
        .zip(&rows)
        .map(|(&p, &(mask, rhs))| (p, mask & !(1u64 << p), rhs))
        .collect();
    // toggling free bit j flips it and every pivot whose row contains it
    let flip: Vec<u64> = free
        .iter()
        .map(|&c| {
            let mut m = 1u64 << c;
            for &(p, mask, _) in &rows {
                if mask >> c & 1 == 1 {
                    m |= 1u64 << p;
                }
            }
            m
        })
        .collect();
    let mut state: u64 = rows.iter().filter(|r| r.2).fold(0, |s, r| s | 1u64 << r.0);
    let mut states = vec![0u64; dim];
    states[0] = state;
    for i in 1..dim {
        let j = i.trailing_zeros() as usize;
        state ^= flip[j];
        states[i ^ (i >> 1)] = state;
    }
    Ok(BasisSector { n, rows, free, states })
}

impl BasisSector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Number of independent enforced constraints.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, i: usize) -> u64 {
        self.states[i]
    }

    pub fn contains(&self, s: u64) -> bool {
        self.rows
            .iter()
            .all(|&(p, mask, rhs)| ((s >> p & 1) == 1) == (((s & mask).count_ones() & 1 == 1) ^ rhs))
            && (self.n == 64 || s >> self.n == 0)
    }

    #[inline]
    fn gather(&self, s: u64) -> usize {
        let mut idx = 0usize;
        for (k, &c) in self.free.iter().enumerate() {
            idx |= ((s >> c & 1) as usize) << k;
        }
        idx
    }

    pub fn index_of(&self, s: u64) -> Option<usize> {
        let i = self.gather(s);
        (self.states[i] == s).then_some(i)
    }
}

/// A Hamiltonian compiled against a sector for repeated application.
#[derive(Debug, Clone)]
pub struct SectorOperator<'a> {
    sector: &'a BasisSector,
    diag: Vec<f64>,
    /// Off-diagonal terms grouped by flip mask: `(x, [(coeff, z)])`.
    flips: Vec<(u64, Vec<(f64, u64)>)>,
}

/// Real prefactor of `i^k` for even `k`.
fn real_phase(op: &PauliOp) -> Result<f64> {
    match op.phase() {
        0 => Ok(1.0),
        2 => Ok(-1.0),
        _ => Err(Error::ComplexTerm { term: op.to_string() }),
    }
}

impl<'a> SectorOperator<'a> {
    pub fn new(terms: &[Term], n: usize, sector: &'a BasisSector) -> Result<Self> {
        if n != sector.n {
            return Err(Error::SizeMismatch { left: sector.n, right: n });
        }
        let mut diag_terms: Vec<(f64, u64)> = Vec::new();
        let mut groups: HashMap<u64, Vec<(f64, u64)>> = HashMap::new();
        for t in terms {
            let (x, z) = t.op.masks_u64().ok_or(Error::ResourceLimit { dim: n, cap: 64 })?;
            let c = t.coeff * real_phase(&t.op)?;
            if x == 0 {
                diag_terms.push((c, z));
                continue;
            }
            // x must preserve every enforced parity
            if sector.rows.iter().any(|&(p, mask, _)| ((mask | 1u64 << p) & x).count_ones() & 1 == 1) {
                return Err(Error::HardSectorViolation { term: t.op.to_string() });
            }
            groups.entry(x).or_default().push((c, z));
        }
        let mut flips: Vec<(u64, Vec<(f64, u64)>)> = groups.into_iter().collect();
        flips.sort_by_key(|g| g.0);
        let diag = thread_pool().install(|| {
            sector
                .states
                .par_iter()
                .map(|&s| diag_terms.iter().map(|&(c, z)| sign(c, z & s)).sum())
                .collect()
        });
        Ok(Self { sector, diag, flips })
    }

    pub fn from_hamiltonian(h: &SpinHamiltonian, sector: &'a BasisSector) -> Result<Self> {
        Self::new(&h.terms, h.n, sector)
    }

    /// A single Pauli operator as a sector operator.
    pub fn from_pauli(op: &PauliOp, sector: &'a BasisSector) -> Result<Self> {
        Self::new(
            &[Term {
                coeff: 1.0,
                op: op.clone(),
            }],
            op.n(),
            sector,
        )
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    fn row(&self, i: usize, v: &[f64]) -> f64 {
        let s = self.sector.states[i];
        let mut acc = self.diag[i] * v[i];
        for (x, terms) in &self.flips {
            let src = s ^ x;
            let j = self.sector.gather(src);
            let mut c = 0.0;
            for &(coef, z) in terms {
                c += sign(coef, z & src);
            }
            acc += c * v[j];
        }
        acc
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        const CHUNK: usize = 2048;
        thread_pool().install(|| {
            out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
                let base = c * CHUNK;
                for (k, o) in chunk.iter_mut().enumerate() {
                    *o = self.row(base + k, v);
                }
            })
        });
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// `⟨u|O|v⟩`.
    pub fn matrix_element(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        Ok(self.apply(v)?.iter().zip(u).map(|(a, b)| a * b).sum())
    }
}

#[inline]
fn sign(c: f64, masked: u64) -> f64 {
    if masked.count_ones() & 1 == 1 {
        -c
    } else {
        c
    }
}

/// Convenience: compile and apply once.
pub fn apply(h: &SpinHamiltonian, sector: &BasisSector, v: &[f64]) -> Result<Vec<f64>> {
    SectorOperator::from_hamiltonian(h, sector)?.apply(v)
}

/// Dense matrix of `h` on `sector`, built spin by spin through the generic
/// Pauli representation. Used as the reference for the compiled apply.
pub fn dense_matrix(h: &SpinHamiltonian, sector: &BasisSector) -> Result<DMatrix<f64>> {
    let dim = sector.dim();
    let index: HashMap<u64, usize> = sector.states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut m = DMatrix::zeros(dim, dim);
    for (j, &s) in sector.states.iter().enumerate() {
        for t in &h.terms {
            // i^k X^x Z^z |s⟩ = i^k (−1)^{z·s} |s ⊕ x⟩, phase as (re, im)
            let mut target = s;
            let mut minus = false;
            for q in 0..h.n {
                if t.op.z_bit(q) && (s >> q) & 1 == 1 {
                    minus = !minus;
                }
                if t.op.x_bit(q) {
                    target ^= 1 << q;
                }
            }
            let (re, im) = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][t.op.phase() as usize];
            if im != 0.0 {
                return Err(Error::ComplexTerm { term: t.op.to_string() });
            }
            let i = *index
                .get(&target)
                .ok_or_else(|| Error::HardSectorViolation { term: t.op.to_string() })?;
            m[(i, j)] += t.coeff * re * if minus { -1.0 } else { 1.0 };
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::build_code;
    use crate::pauli::gf2_rank;
    use crate::presets::Preset;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_real_hamiltonian(n: usize, terms: usize, seed: u64) -> SpinHamiltonian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = SpinHamiltonian::new(n);
        while h.term_count() < terms {
            let x: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
            let z: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
            let y = x.iter().filter(|q| z.contains(q)).count();
            if y % 2 == 1 {
                continue;
            }
            let op = PauliOp::from_supports(n, &x, &z, (y % 4) as u8).unwrap();
            h.add_term(rng.gen_range(-1.0..1.0), op).unwrap();
        }
        h
    }

    #[test]
    fn matrix_free_matches_dense() {
        for seed in 0..5 {
            let h = random_real_hamiltonian(10, 25, seed);
            let s = h.sector(1 << 12).unwrap();
            let m = dense_matrix(&h, &s).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let v: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = apply(&h, &s, &v).unwrap();
            let b = &m * nalgebra::DVector::from_vec(v);
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!((&m - m.transpose()).amax() < 1e-14);
        }
    }

    #[test]
    fn zero_and_identity() {
        let mut h = SpinHamiltonian::new(4);
        let s = h.sector(64).unwrap();
        let v: Vec<f64> = (0..16).map(|i| i as f64).collect();
        assert!(apply(&h, &s, &v).unwrap().iter().all(|&x| x == 0.0));
        h.add_term(2.5, PauliOp::identity(4)).unwrap();
        assert_eq!(apply(&h, &s, &v).unwrap(), v.iter().map(|x| 2.5 * x).collect::<Vec<_>>());
    }

    #[test]
    fn sector_dimensions() {
        let code = build_code(&Preset::Patch.build()).unwrap();
        let all = enumerate_sector(12, &[], 1 << 13).unwrap();
        assert_eq!(all.dim(), 1 << 12);
        let s = enumerate_sector(12, code.constraints(), 1 << 13).unwrap();
        assert_eq!(s.dim(), 1 << (12 - gf2_rank(code.constraints())));
        assert!(s.states().iter().all(|&st| s.contains(st)));
        for (i, &st) in s.states().iter().enumerate() {
            assert_eq!(s.index_of(st), Some(i));
        }
        let one = PauliOp::z_string(6, &[0, 2, 5]).unwrap();
        assert_eq!(enumerate_sector(6, &[one.clone()], 64).unwrap().dim(), 32);
        let neg = enumerate_sector(6, &[one.negate()], 64).unwrap();
        assert!(neg.states().iter().all(|s| (s & 0b100101).count_ones() % 2 == 1));
        assert!(matches!(
            enumerate_sector(30, &[], 1 << 20),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn inconsistent_constraints_are_rejected() {
        let z = PauliOp::z_string(3, &[0, 1]).unwrap();
        assert!(enumerate_sector(3, &[z.clone(), z.negate()], 64).is_err());
    }

    #[test]
    fn patch_ground_energy() {
        let code = build_code(&Preset::Patch.build()).unwrap();
        let h = build_bulk(&code, 1.0, 10.0).unwrap();
        let s = h.sector(1 << 12).unwrap();
        let m = dense_matrix(&h, &s).unwrap();
        let e = m.symmetric_eigen().eigenvalues;
        let e0 = e.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((e0 + 6.0).abs() < 1e-12);
        assert_eq!(e.iter().filter(|&&x| (x - e0).abs() < 1e-9).count(), 1);
    }

    #[test]
    fn perturbation_validation() {
        let lat = Preset::Star.build();
        let code = build_code(&lat).unwrap();
        let h = build_bulk(&code, 1.0, 10.0).unwrap();
        let string = code.x_paths()[0].clone();
        let loop_ = code.z_paths()[0].clone();
        let base = h.term_count();
        let hc = h.clone().add_charge_perturbation(&string, 0.1).unwrap();
        assert_eq!(hc.term_count(), base + string.len());
        assert!(hc.terms()[base..].iter().all(|t| t.coeff == 0.05));
        for t in &hc.terms()[base..] {
            assert!(code.constraints().iter().all(|p| p.commutes(&t.op).unwrap()));
        }
        assert!(matches!(
            h.clone().add_charge_perturbation(&loop_, 0.1),
            Err(Error::WrongPerturbation(_))
        ));
        assert!(matches!(
            h.clone().add_vortex_perturbation(&loop_, 0.1),
            Err(Error::HardSectorViolation { .. })
        ));
        let hv = release_along(h.clone(), &code, &loop_)
            .unwrap()
            .add_vortex_perturbation(&loop_, 0.1)
            .unwrap();
        assert_eq!(hv.term_count(), base + loop_.len());
        let empty = EdgePath::empty_string();
        assert_eq!(h.clone().add_charge_perturbation(&empty, 1.0).unwrap(), h);
        assert_eq!(h.clone().add_vortex_perturbation(&empty, 1.0).unwrap(), h);
    }

    #[test]
    fn json_round_trip() {
        let code = build_code(&Preset::Star.build()).unwrap();
        let h = build_bulk(&code, 1.0, 3.0).unwrap();
        let f = h.to_file();
        assert!(f.terms.iter().any(|t| t.op.starts_with('X')));
        let text = serde_json::to_string(&f).unwrap();
        let back = SpinHamiltonian::from_file(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn hermitian_on_random_vectors() {
        let code = build_code(&Preset::ExtendedStar.build()).unwrap();
        let h = build_bulk(&code, 0.7, 2.0).unwrap();
        let s = h.sector(1 << 12).unwrap();
        let op = SectorOperator::from_hamiltonian(&h, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..s.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = op.matrix_element(&u, &v).unwrap();
        let b = op.matrix_element(&v, &u).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} {b}");
    }
}
