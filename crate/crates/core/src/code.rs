//! The array's stabilizer code: vertex constraints, triangle flips and one
//! logical qubit per hole.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{EdgePath, Lattice};
use crate::pauli::{classify, code_distance_bruteforce, gf2_rank, Classification, Distance, GeneratorSet, PauliOp};

#[derive(Debug, Clone)]
pub struct ArrayCode {
    lattice: Lattice,
    /// `P_a`: σᶻ on every edge at vertex `a`.
    constraints: Vec<PauliOp>,
    /// `Q_abc`: σˣ on the three edges of each triangle.
    flips: Vec<PauliOp>,
    /// Per hole, σˣ around its loop.
    logical_z: Vec<PauliOp>,
    /// Per hole, σᶻ along a string to the outer boundary.
    logical_x: Vec<PauliOp>,
    z_paths: Vec<EdgePath>,
    x_paths: Vec<EdgePath>,
    group: GeneratorSet,
}

fn invariant(first: String, second: String, reason: &str) -> Error {
    Error::CodeInvariant {
        first,
        second,
        reason: reason.into(),
    }
}

/// Builds the code and checks every commutation and counting invariant.
pub fn build_code(lattice: &Lattice) -> Result<ArrayCode> {
    let n = lattice.n_edges();
    let constraints: Vec<PauliOp> = (0..lattice.n_vertices())
        .map(|v| PauliOp::z_string(n, lattice.vertex_edges(v)))
        .collect::<Result<_>>()?;
    let flips: Vec<PauliOp> = (0..lattice.n_triangles())
        .map(|t| PauliOp::x_string(n, &lattice.triangle_edges(t)))
        .collect::<Result<_>>()?;
    let mut z_paths = Vec::new();
    let mut x_paths = Vec::new();
    for k in 0..lattice.n_holes() {
        z_paths.push(lattice.find_hole_loop(k)?);
        x_paths.push(lattice.find_boundary_string(k)?);
    }
    let logical_z: Vec<PauliOp> = z_paths
        .iter()
        .map(|p| PauliOp::x_string(n, &p.edges))
        .collect::<Result<_>>()?;
    let logical_x: Vec<PauliOp> = x_paths
        .iter()
        .map(|p| PauliOp::z_string(n, &p.edges))
        .collect::<Result<_>>()?;
    ArrayCode::assemble(lattice.clone(), constraints, flips, logical_z, logical_x, z_paths, x_paths)
}

impl ArrayCode {
    fn assemble(
        lattice: Lattice,
        constraints: Vec<PauliOp>,
        flips: Vec<PauliOp>,
        logical_z: Vec<PauliOp>,
        logical_x: Vec<PauliOp>,
        z_paths: Vec<EdgePath>,
        x_paths: Vec<EdgePath>,
    ) -> Result<Self> {
        for (a, p) in constraints.iter().enumerate() {
            for (t, q) in flips.iter().enumerate() {
                if !p.commutes(q)? {
                    return Err(invariant(format!("P_{a}"), format!("Q_{t}"), "anticommute"));
                }
            }
        }
        let stabilizers = [constraints.as_slice(), flips.as_slice()].concat();
        for (name, set) in [("Zbar", &logical_z), ("Xbar", &logical_x)] {
            for (k, l) in set.iter().enumerate() {
                for (i, s) in stabilizers.iter().enumerate() {
                    if !l.commutes(s)? {
                        let g = if i < constraints.len() {
                            format!("P_{i}")
                        } else {
                            format!("Q_{}", i - constraints.len())
                        };
                        return Err(invariant(format!("{name}_{k}"), g, "logical operator is detectable"));
                    }
                }
            }
        }
        for i in 0..logical_z.len() {
            for j in 0..logical_z.len() {
                if i < j && !logical_z[i].commutes(&logical_z[j])? {
                    return Err(invariant(format!("Zbar_{i}"), format!("Zbar_{j}"), "anticommute"));
                }
                if i < j && !logical_x[i].commutes(&logical_x[j])? {
                    return Err(invariant(format!("Xbar_{i}"), format!("Xbar_{j}"), "anticommute"));
                }
                if logical_x[i].commutes(&logical_z[j])? == (i == j) {
                    return Err(invariant(
                        format!("Xbar_{i}"),
                        format!("Zbar_{j}"),
                        if i == j { "should anticommute" } else { "should commute" },
                    ));
                }
            }
        }
        let n = lattice.n_edges();
        let group = GeneratorSet::new(n, stabilizers)?;
        if !group.is_stabilizer_group() {
            return Err(invariant("P".into(), "Q".into(), "generators contain -I"));
        }
        let k = n - group.rank();
        if k != lattice.n_holes() {
            return Err(invariant(
                format!("{n} edges"),
                format!("rank {}", group.rank()),
                &format!("{k} logical qubits but {} holes", lattice.n_holes()),
            ));
        }
        Ok(Self {
            lattice,
            constraints,
            flips,
            logical_z,
            logical_x,
            z_paths,
            x_paths,
            group,
        })
    }

    /// Replaces the logical string of hole `k` (for example with a longer
    /// detuned path). The new string must act as the same logical.
    pub fn with_x_path(mut self, k: usize, path: EdgePath) -> Result<Self> {
        self.lattice.hole(k)?;
        self.lattice.validate_boundary_string(&path)?;
        let op = PauliOp::z_string(self.n(), &path.edges)?;
        let old = self.logical_action(&self.logical_x[k])?;
        if self.logical_action(&op)? != old {
            return Err(Error::InvalidPath(format!("string does not act as Xbar_{k}")));
        }
        self.logical_x[k] = op;
        self.x_paths[k] = path;
        Ok(self)
    }

    /// Replaces the logical loop of hole `k`.
    pub fn with_z_path(mut self, k: usize, path: EdgePath) -> Result<Self> {
        self.lattice.hole(k)?;
        if !path.is_closed() {
            return Err(Error::InvalidPath("expected a closed loop".into()));
        }
        let op = PauliOp::x_string(self.n(), &path.edges)?;
        let old = self.logical_action(&self.logical_z[k])?;
        if self.logical_action(&op)? != old {
            return Err(Error::InvalidPath(format!("loop does not act as Zbar_{k}")));
        }
        self.logical_z[k] = op;
        self.z_paths[k] = path;
        Ok(self)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn n(&self) -> usize {
        self.lattice.n_edges()
    }

    pub fn k(&self) -> usize {
        self.logical_z.len()
    }

    pub fn rank(&self) -> usize {
        self.group.rank()
    }

    pub fn constraints(&self) -> &[PauliOp] {
        &self.constraints
    }

    pub fn flips(&self) -> &[PauliOp] {
        &self.flips
    }

    pub fn logical_z(&self) -> &[PauliOp] {
        &self.logical_z
    }

    pub fn logical_x(&self) -> &[PauliOp] {
        &self.logical_x
    }

    pub fn z_paths(&self) -> &[EdgePath] {
        &self.z_paths
    }

    pub fn x_paths(&self) -> &[EdgePath] {
        &self.x_paths
    }

    pub fn group(&self) -> &GeneratorSet {
        &self.group
    }

    pub fn classify(&self, op: &PauliOp) -> Result<Classification> {
        classify(op, &self.group)
    }

    /// Which logical cosets `op` belongs to.
    pub fn logical_action(&self, op: &PauliOp) -> Result<LogicalLabel> {
        if let Classification::Error { syndrome } = self.classify(op)? {
            return Err(Error::DetectableOperator(format!(
                "{op} (anticommutes with {} generators)",
                syndrome.len()
            )));
        }
        let mut label = LogicalLabel::identity(self.k());
        let mut residual = op.clone();
        for k in 0..self.k() {
            // a Zbar_k factor is detected by Xbar_k and vice versa
            if !op.commutes(&self.logical_x[k])? {
                label.z[k] = true;
                residual = residual.multiply(&self.logical_z[k])?;
            }
            if !op.commutes(&self.logical_z[k])? {
                label.x[k] = true;
                residual = residual.multiply(&self.logical_x[k])?;
            }
        }
        if self.group.membership_phase(&residual)?.is_none() {
            return Err(invariant(
                format!("{op}"),
                "logical basis".into(),
                "operator is logical but outside the span of the chosen Zbar/Xbar",
            ));
        }
        Ok(label)
    }

    /// Minimal weight of an undetectable operator acting nontrivially on
    /// the logical space, searched up to `cap`.
    pub fn protection_order(&self, cap: usize) -> Result<Distance> {
        let logicals = [self.logical_z.as_slice(), self.logical_x.as_slice()].concat();
        if logicals.is_empty() {
            return Ok(Distance::AtLeast(cap + 1));
        }
        code_distance_bruteforce(&self.group, &logicals, cap)
    }

    /// Swapping the roles of the Z̄ and X̄ sets gives another independent
    /// logical basis: both sets are independent of the stabilizers and of
    /// each other, and their pairing matrix is the identity either way.
    pub fn exchange_symmetric(&self) -> Result<bool> {
        let s = [self.constraints.as_slice(), self.flips.as_slice()].concat();
        let base = gf2_rank(&s);
        let with = |extra: &[PauliOp]| gf2_rank(&[s.as_slice(), extra].concat());
        let k = self.k();
        if with(&self.logical_z) != base + k || with(&self.logical_x) != base + k {
            return Ok(false);
        }
        if with(&[self.logical_z.as_slice(), self.logical_x.as_slice()].concat()) != base + 2 * k {
            return Ok(false);
        }
        for i in 0..k {
            for j in 0..k {
                let zx = !self.logical_z[i].commutes(&self.logical_x[j])?;
                let xz = !self.logical_x[i].commutes(&self.logical_z[j])?;
                if zx != (i == j) || xz != (i == j) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn summary(&self, cap: usize) -> Result<CodeSummary> {
        let logicals = (0..self.k())
            .map(|k| LogicalSummary {
                hole: k,
                z: self.logical_z[k].to_string(),
                z_edges: self.z_paths[k].edges.clone(),
                x: self.logical_x[k].to_string(),
                x_edges: self.x_paths[k].edges.clone(),
            })
            .collect();
        Ok(CodeSummary {
            n_edges: self.n(),
            rank: self.rank(),
            k: self.k(),
            protection_order: self.protection_order(cap)?.to_string(),
            logicals,
        })
    }
}

/// Symplectic label on the logical space: `z[k]` marks a Z̄_k factor,
/// `x[k]` an X̄_k factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalLabel {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
}

impl LogicalLabel {
    pub fn identity(k: usize) -> Self {
        Self {
            x: vec![false; k],
            z: vec![false; k],
        }
    }

    pub fn is_identity(&self) -> bool {
        !self.x.iter().chain(&self.z).any(|&b| b)
    }
}

impl std::fmt::Display for LogicalLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut parts = Vec::new();
        for k in 0..self.x.len() {
            match (self.x[k], self.z[k]) {
                (true, true) => parts.push(format!("Y{k}")),
                (true, false) => parts.push(format!("X{k}")),
                (false, true) => parts.push(format!("Z{k}")),
                _ => {}
            }
        }
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalSummary {
    pub hole: usize,
    pub z: String,
    pub z_edges: Vec<usize>,
    pub x: String,
    pub x_edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSummary {
    pub n_edges: usize,
    pub rank: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub protection_order: String,
    pub logicals: Vec<LogicalSummary>,
}
