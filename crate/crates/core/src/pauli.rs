//! Pauli operators in binary-symplectic form and the GF(2) linear algebra
//! used to reason about stabilizer groups.
//!
//! An operator on `n` spins is stored as `i^phase · X^x · Z^z`, with the
//! `X` block written to the left of the `Z` block. Products only need the
//! bit vectors and one extra parity to keep the phase exact:
//!
//! ```text
//! (i^a X^x1 Z^z1)(i^b X^x2 Z^z2) = i^(a + b + 2 z1·x2) X^(x1⊕x2) Z^(z1⊕z2)
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

fn parity(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum::<u32>() & 1
}

fn get_bit(w: &[u64], i: usize) -> bool {
    (w[i / WORD] >> (i % WORD)) & 1 == 1
}

fn set_bit(w: &mut [u64], i: usize) {
    w[i / WORD] |= 1 << (i % WORD);
}

fn flip_bit(w: &mut [u64], i: usize) {
    w[i / WORD] ^= 1 << (i % WORD);
}

fn ones(w: &[u64]) -> impl Iterator<Item = usize> + '_ {
    w.iter().enumerate().flat_map(|(k, &word)| {
        let mut word = word;
        std::iter::from_fn(move || {
            if word == 0 {
                return None;
            }
            let t = word.trailing_zeros() as usize;
            word &= word - 1;
            Some(k * WORD + t)
        })
    })
}

/// An `n`-spin Pauli operator `i^phase · X^x · Z^z`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    /// Builds `i^phase · X^x · Z^z` from support index lists.
    ///
    /// Repeated indices cancel, as they would in the product.
    pub fn from_supports(n: usize, x: &[usize], z: &[usize], phase: u8) -> Result<Self> {
        let mut op = Self::identity(n);
        for &i in x {
            if i >= n {
                return Err(Error::IndexOutOfRange {
                    what: "spin",
                    index: i,
                    size: n,
                });
            }
            flip_bit(&mut op.x, i);
        }
        for &i in z {
            if i >= n {
                return Err(Error::IndexOutOfRange {
                    what: "spin",
                    index: i,
                    size: n,
                });
            }
            flip_bit(&mut op.z, i);
        }
        op.phase = phase & 3;
        Ok(op)
    }

    /// Product of `σˣ` over `sites`.
    pub fn x_string(n: usize, sites: &[usize]) -> Result<Self> {
        Self::from_supports(n, sites, &[], 0)
    }

    /// Product of `σᶻ` over `sites`.
    pub fn z_string(n: usize, sites: &[usize]) -> Result<Self> {
        Self::from_supports(n, &[], sites, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    pub fn x_bit(&self, i: usize) -> bool {
        get_bit(&self.x, i)
    }

    pub fn z_bit(&self, i: usize) -> bool {
        get_bit(&self.z, i)
    }

    pub fn x_support(&self) -> Vec<usize> {
        ones(&self.x).collect()
    }

    pub fn z_support(&self) -> Vec<usize> {
        ones(&self.z).collect()
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// Number of spins on which the operator acts nontrivially.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// True when the operator has no phase and no support.
    pub fn is_exact_identity(&self) -> bool {
        self.is_identity() && self.phase == 0
    }

    /// Number of spins carrying both an `X` and a `Z` (a `Y` up to phase).
    pub fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    /// Self-adjoint operators satisfy `phase ≡ y_count (mod 2)`.
    pub fn is_hermitian(&self) -> bool {
        (self.phase as u32 + self.y_count()) % 2 == 0
    }

    /// The operator restricted to spins `< 64` as `(x, z)` masks.
    pub fn masks_u64(&self) -> Option<(u64, u64)> {
        if self.n > 64 {
            return None;
        }
        Some((
            self.x.first().copied().unwrap_or(0),
            self.z.first().copied().unwrap_or(0),
        ))
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let swap = parity(&self.z, &other.x) as u8;
        Ok(Self {
            n: self.n,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
            phase: (self.phase + other.phase + 2 * swap) & 3,
        })
    }

    /// `p⁻¹`, so that `p · p⁻¹ = I` exactly.
    pub fn inverse(&self) -> Self {
        let yy = (self.y_count() & 1) as u8;
        Self {
            n: self.n,
            x: self.x.clone(),
            z: self.z.clone(),
            phase: (4 - self.phase + 2 * yy) & 3,
        }
    }

    pub fn negate(&self) -> Self {
        let mut out = self.clone();
        out.phase = (out.phase + 2) & 3;
        out
    }

    /// Symplectic product `x_p·z_q + z_p·x_q` over GF(2).
    pub fn symplectic_product(&self, other: &Self) -> Result<u32> {
        self.check_size(other)?;
        Ok(parity(&self.x, &other.z) ^ parity(&self.z, &other.x))
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        Ok(self.symplectic_product(other)? == 0)
    }

    /// Concatenated `(x | z)` row of length `2n`.
    fn symplectic_row(&self) -> Vec<u64> {
        let mut row = vec![0u64; words_for(2 * self.n)];
        for i in ones(&self.x) {
            set_bit(&mut row, i);
        }
        for i in ones(&self.z) {
            set_bit(&mut row, self.n + i);
        }
        row
    }

    /// Parses strings such as `"+X0 Z3 Z7"`, `"-i Y2"` or `"I"`.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let s = s.trim();
        let (mut shown_phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1u8, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix("i ") {
            (1, r)
        } else {
            (0, s)
        };
        let mut op = Self::identity(n);
        let mut y = 0u8;
        for tok in rest.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let (letter, idx) = tok.split_at(1);
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::Parse(format!("bad Pauli token {tok:?}")))?;
            if idx >= n {
                return Err(Error::IndexOutOfRange {
                    what: "spin",
                    index: idx,
                    size: n,
                });
            }
            if get_bit(&op.x, idx) || get_bit(&op.z, idx) {
                return Err(Error::Parse(format!("spin {idx} repeated in {s:?}")));
            }
            match letter {
                "X" => set_bit(&mut op.x, idx),
                "Z" => set_bit(&mut op.z, idx),
                "Y" => {
                    set_bit(&mut op.x, idx);
                    set_bit(&mut op.z, idx);
                    y += 1;
                }
                _ => return Err(Error::Parse(format!("bad Pauli letter in {tok:?}"))),
            }
        }
        // Y = i·X·Z
        shown_phase = (shown_phase + y) & 3;
        op.phase = shown_phase;
        Ok(op)
    }

    pub fn to_json(&self) -> PauliJson {
        PauliJson {
            n: Some(self.n),
            x: self.x_support(),
            z: self.z_support(),
            phase: self.phase,
        }
    }

    pub fn from_json(j: &PauliJson, n: Option<usize>) -> Result<Self> {
        let n = match (j.n, n) {
            (Some(a), Some(b)) if a != b => return Err(Error::SizeMismatch { left: a, right: b }),
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => j.x.iter().chain(&j.z).max().map_or(0, |m| m + 1),
        };
        Self::from_supports(n, &j.x, &j.z, j.phase)
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown = (self.phase + 4 - (self.y_count() % 4) as u8) & 3;
        f.write_str(match shown {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })?;
        if self.is_identity() {
            return f.write_str("I");
        }
        let mut first = true;
        for i in 0..self.n {
            let letter = match (self.x_bit(i), self.z_bit(i)) {
                (false, false) => continue,
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{letter}{i}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOp[{}]({self})", self.n)
    }
}

/// JSON form `{"x":[..],"z":[..],"phase":k}` with the phase in the
/// `i^k X^x Z^z` convention. `n` is optional on input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub x: Vec<usize>,
    pub z: Vec<usize>,
    #[serde(default)]
    pub phase: u8,
}

impl Serialize for PauliOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PauliOp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PauliJson::deserialize(d)?;
        PauliOp::from_json(&j, None).map_err(serde::de::Error::custom)
    }
}

/// Row-echelon basis over GF(2) that remembers which input rows were
/// combined to produce each basis row.
#[derive(Debug, Clone)]
struct EchelonBasis {
    rows: Vec<(Vec<u64>, Vec<u64>)>,
    pivots: Vec<usize>,
    n_inputs: usize,
}

impl EchelonBasis {
    fn new(rows: impl IntoIterator<Item = Vec<u64>>) -> Self {
        let mut basis = Self {
            rows: Vec::new(),
            pivots: Vec::new(),
            n_inputs: 0,
        };
        let rows: Vec<_> = rows.into_iter().collect();
        basis.n_inputs = rows.len();
        for (k, row) in rows.into_iter().enumerate() {
            let mut combo = vec![0u64; words_for(basis.n_inputs)];
            set_bit(&mut combo, k);
            basis.insert(row, combo);
        }
        basis
    }

    fn reduce(&self, mut row: Vec<u64>, mut combo: Vec<u64>) -> (Vec<u64>, Vec<u64>) {
        for ((r, c), &p) in self.rows.iter().zip(&self.pivots) {
            if get_bit(&row, p) {
                row.iter_mut().zip(r).for_each(|(a, b)| *a ^= b);
                combo.iter_mut().zip(c).for_each(|(a, b)| *a ^= b);
            }
        }
        (row, combo)
    }

    fn insert(&mut self, row: Vec<u64>, combo: Vec<u64>) -> bool {
        let (row, combo) = self.reduce(row, combo);
        let pivot = ones(&row).next();
        match pivot {
            Some(p) => {
                self.rows.push((row, combo));
                self.pivots.push(p);
                true
            }
            None => false,
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Input rows whose XOR equals `row`, if any.
    fn solve(&self, row: Vec<u64>) -> Option<Vec<usize>> {
        let combo = vec![0u64; words_for(self.n_inputs)];
        let (rest, combo) = self.reduce(row, combo);
        if rest.iter().all(|&w| w == 0) {
            Some(ones(&combo).collect())
        } else {
            None
        }
    }
}

/// Row rank over GF(2) of the stacked `(x|z)` matrix.
pub fn gf2_rank(ops: &[PauliOp]) -> usize {
    EchelonBasis::new(ops.iter().map(PauliOp::symplectic_row)).rank()
}

/// A list of Pauli generators together with its cached GF(2) rank.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    n: usize,
    ops: Vec<PauliOp>,
    basis: EchelonBasis,
}

impl GeneratorSet {
    pub fn new(n: usize, ops: Vec<PauliOp>) -> Result<Self> {
        if let Some(bad) = ops.iter().find(|p| p.n != n) {
            return Err(Error::SizeMismatch {
                left: n,
                right: bad.n,
            });
        }
        let basis = EchelonBasis::new(ops.iter().map(PauliOp::symplectic_row));
        Ok(Self { n, ops, basis })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[PauliOp] {
        &self.ops
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    /// First anticommuting generator pair, if any.
    pub fn first_anticommuting_pair(&self) -> Option<(usize, usize)> {
        for i in 0..self.ops.len() {
            for j in i + 1..self.ops.len() {
                if self.ops[i].symplectic_product(&self.ops[j]).ok() == Some(1) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Abelian, and `-I` is not generated.
    pub fn is_stabilizer_group(&self) -> bool {
        if self.first_anticommuting_pair().is_some() {
            return false;
        }
        // -I is generated iff some product of generators with trivial support
        // carries a phase; every row dependency yields such a product.
        let mut basis = EchelonBasis {
            rows: Vec::new(),
            pivots: Vec::new(),
            n_inputs: self.ops.len(),
        };
        for (k, op) in self.ops.iter().enumerate() {
            let mut combo = vec![0u64; words_for(self.ops.len())];
            set_bit(&mut combo, k);
            let (rest, combo) = basis.reduce(op.symplectic_row(), combo);
            let pivot = ones(&rest).next();
            match pivot {
                None => {
                    if self.product_of(ones(&combo)).phase != 0 {
                        return false;
                    }
                }
                Some(p) => {
                    basis.rows.push((rest, combo));
                    basis.pivots.push(p);
                }
            }
        }
        true
    }

    fn product_of(&self, idx: impl IntoIterator<Item = usize>) -> PauliOp {
        idx.into_iter().fold(PauliOp::identity(self.n), |acc, i| {
            acc.multiply(&self.ops[i]).expect("sizes checked on construction")
        })
    }

    /// If `op` lies in the group up to phase, the phase `k` with
    /// `op = i^k · g` for a group element `g`.
    pub fn membership_phase(&self, op: &PauliOp) -> Result<Option<u8>> {
        if op.n != self.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: op.n,
            });
        }
        Ok(self.basis.solve(op.symplectic_row()).map(|combo| {
            let g = self.product_of(combo);
            (op.phase + 4 - g.phase) & 3
        }))
    }

    /// Indices of generators anticommuting with `op`.
    pub fn syndrome(&self, op: &PauliOp) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, g) in self.ops.iter().enumerate() {
            if g.symplectic_product(op)? == 1 {
                out.push(i);
            }
        }
        Ok(out)
    }
}

/// Role of a Pauli operator relative to a stabilizer group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// In the group up to the reported phase (`0` means exactly in it).
    Stabilizer { phase: u8 },
    /// Commutes with every generator but is not generated.
    Logical,
    /// Anticommutes with the listed generators.
    Error { syndrome: Vec<usize> },
}

pub fn classify(op: &PauliOp, code: &GeneratorSet) -> Result<Classification> {
    let syndrome = code.syndrome(op)?;
    if !syndrome.is_empty() {
        return Ok(Classification::Error { syndrome });
    }
    Ok(match code.membership_phase(op)? {
        Some(phase) => Classification::Stabilizer { phase },
        None => Classification::Logical,
    })
}

/// Outcome of a bounded minimum-weight search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Exact(usize),
    /// Nothing found up to the cap; the true value is at least this.
    AtLeast(usize),
}

impl Distance {
    pub fn exact(self) -> Option<usize> {
        match self {
            Distance::Exact(d) => Some(d),
            Distance::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Exact(d) => write!(f, "{d}"),
            Distance::AtLeast(d) => write!(f, "≥{d}"),
        }
    }
}

/// Minimum weight of a nontrivial logical operator by exhaustive search.
///
/// A candidate counts when it commutes with every generator and either
/// anticommutes with one of `logicals` or, when `logicals` is empty, lies
/// outside the generated group. Cost grows like `C(n, w)·3^w`.
pub fn code_distance_bruteforce(
    code: &GeneratorSet,
    logicals: &[PauliOp],
    max_weight: usize,
) -> Result<Distance> {
    let n = code.n();
    for l in logicals {
        if l.n != n {
            return Err(Error::SizeMismatch {
                left: n,
                right: l.n,
            });
        }
    }
    let checks: Vec<PauliOp> = code.ops().iter().chain(logicals).cloned().collect();
    let n_gen = code.ops().len();
    let sw = words_for(checks.len());
    // syndrome[q][p]: anticommutation pattern of single-spin Pauli p on spin q
    let mut single = vec![[vec![0u64; sw], vec![0u64; sw], vec![0u64; sw]]; n];
    for (q, pats) in single.iter_mut().enumerate() {
        for (p, pat) in pats.iter_mut().enumerate() {
            let op = match p {
                0 => PauliOp::from_supports(n, &[q], &[], 0)?,
                1 => PauliOp::from_supports(n, &[], &[q], 0)?,
                _ => PauliOp::from_supports(n, &[q], &[q], 1)?,
            };
            for (c, chk) in checks.iter().enumerate() {
                if chk.symplectic_product(&op)? == 1 {
                    set_bit(pat, c);
                }
            }
        }
    }
    let gen_mask: Vec<u64> = {
        let mut m = vec![0u64; sw];
        (0..n_gen).for_each(|i| set_bit(&mut m, i));
        m
    };

    struct Search<'a> {
        n: usize,
        single: &'a [[Vec<u64>; 3]],
        gen_mask: &'a [u64],
        use_logicals: bool,
        code: &'a GeneratorSet,
        chosen: Vec<(usize, usize)>,
    }

    impl Search<'_> {
        fn hit(&self, syn: &[u64]) -> bool {
            if syn.iter().zip(self.gen_mask).any(|(s, m)| s & m != 0) {
                return false;
            }
            if self.use_logicals {
                return syn.iter().zip(self.gen_mask).any(|(s, m)| s & !m != 0);
            }
            let mut x = vec![];
            let mut z = vec![];
            for &(q, p) in &self.chosen {
                if p != 1 {
                    x.push(q);
                }
                if p != 0 {
                    z.push(q);
                }
            }
            let op = PauliOp::from_supports(self.n, &x, &z, 0).expect("indices in range");
            self.code
                .membership_phase(&op)
                .expect("sizes match")
                .is_none()
        }

        fn go(&mut self, start: usize, left: usize, syn: &mut Vec<u64>) -> bool {
            if left == 0 {
                return self.hit(syn);
            }
            for q in start..self.n {
                if self.n - q < left {
                    break;
                }
                for p in 0..3 {
                    syn.iter_mut()
                        .zip(&self.single[q][p])
                        .for_each(|(a, b)| *a ^= b);
                    self.chosen.push((q, p));
                    let found = self.go(q + 1, left - 1, syn);
                    self.chosen.pop();
                    syn.iter_mut()
                        .zip(&self.single[q][p])
                        .for_each(|(a, b)| *a ^= b);
                    if found {
                        return true;
                    }
                }
            }
            false
        }
    }

    let mut search = Search {
        n,
        single: &single,
        gen_mask: &gen_mask,
        use_logicals: !logicals.is_empty(),
        code,
        chosen: Vec::new(),
    };
    for w in 1..=max_weight.min(n) {
        let mut syn = vec![0u64; sw];
        if search.go(0, w, &mut syn) {
            return Ok(Distance::Exact(w));
        }
    }
    Ok(Distance::AtLeast(max_weight + 1))
}
