//! Lowest eigenpairs of real symmetric operators.
//!
//! The iterative path is a block Lanczos iteration with full
//! reorthogonalization and thick restarts; a random starting block lets it
//! find every copy of an exactly degenerate level. The dense path wraps
//! nalgebra's symmetric eigensolver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{thread_pool, SectorOperator};

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_into(&self, v: &[f64], out: &mut [f64]);
}

impl LinearOperator for SectorOperator<'_> {
    fn dim(&self) -> usize {
        SectorOperator::dim(self)
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        SectorOperator::apply_into(self, v, out)
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let r = self * DVector::from_column_slice(v);
        out.copy_from_slice(r.as_slice());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LanczosConfig {
    /// Krylov vectors per restart.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Residual target relative to the operator scale.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            krylov_dim: 60,
            max_restarts: 400,
            tol: 1e-11,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `‖Hv − λv‖` per pair.
    pub residuals: Vec<f64>,
}

impl Eigenpairs {
    fn sorted(mut self) -> Self {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.values = idx.iter().map(|&i| self.values[i]).collect();
        self.vectors = idx.iter().map(|&i| std::mem::take(&mut self.vectors[i])).collect();
        self.residuals = idx.iter().map(|&i| self.residuals[i]).collect();
        self
    }
}

const PAR_MIN: usize = 1 << 14;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    if a.len() >= PAR_MIN {
        thread_pool().install(|| a.par_chunks(4096).zip(b.par_chunks(4096)).map(|(x, y)| serial_dot(x, y)).sum())
    } else {
        serial_dot(a, b)
    }
}

fn serial_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    if y.len() >= PAR_MIN {
        thread_pool().install(|| {
            y.par_chunks_mut(4096)
                .zip(x.par_chunks(4096))
                .for_each(|(yc, xc)| yc.iter_mut().zip(xc).for_each(|(a, b)| *a += alpha * b))
        })
    } else {
        y.iter_mut().zip(x).for_each(|(a, b)| *a += alpha * b);
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

const CHUNK: usize = 2048;

/// `⟨bᵢ, x⟩` for every basis vector, in one sweep over memory.
fn project(basis: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let m = basis.len();
    let chunk = |(c, xc): (usize, &[f64])| -> Vec<f64> {
        let off = c * CHUNK;
        basis.iter().map(|b| serial_dot(&b[off..off + xc.len()], xc)).collect()
    };
    let add = |mut a: Vec<f64>, b: Vec<f64>| {
        a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
        a
    };
    if x.len() >= PAR_MIN {
        thread_pool().install(|| x.par_chunks(CHUNK).enumerate().map(chunk).reduce(|| vec![0.0; m], add))
    } else {
        x.chunks(CHUNK).enumerate().map(chunk).fold(vec![0.0; m], add)
    }
}

/// `out[j] += Σᵢ coeffs[j][i]·basis[i]`, reading each basis vector once.
fn accumulate(basis: &[Vec<f64>], coeffs: &[Vec<f64>], out: &mut [Vec<f64>]) {
    let n = out.first().map_or(0, Vec::len);
    let n_chunks = n.div_ceil(CHUNK);
    let mut per_chunk: Vec<Vec<&mut [f64]>> = (0..n_chunks).map(|_| Vec::with_capacity(out.len())).collect();
    for o in out.iter_mut() {
        for (c, part) in o.chunks_mut(CHUNK).enumerate() {
            per_chunk[c].push(part);
        }
    }
    let work = |(c, mut outs): (usize, Vec<&mut [f64]>)| {
        let off = c * CHUNK;
        for (i, b) in basis.iter().enumerate() {
            let bc = &b[off..off + outs[0].len()];
            for (o, cj) in outs.iter_mut().zip(coeffs) {
                let a = cj[i];
                if a != 0.0 {
                    o.iter_mut().zip(bc).for_each(|(x, y)| *x += a * y);
                }
            }
        }
    };
    if n >= PAR_MIN {
        thread_pool().install(|| per_chunk.into_par_iter().enumerate().for_each(work));
    } else {
        per_chunk.into_iter().enumerate().for_each(work);
    }
}

/// Twice-iterated classical Gram–Schmidt against `basis`.
fn orthogonalize(v: &mut Vec<f64>, basis: &[Vec<f64>]) {
    if basis.is_empty() {
        return;
    }
    for _ in 0..2 {
        let c: Vec<f64> = project(basis, v).into_iter().map(|x| -x).collect();
        accumulate(basis, &[c], std::slice::from_mut(v));
    }
}

fn residual(op: &dyn LinearOperator, v: &[f64], lambda: f64) -> f64 {
    let mut w = vec![0.0; v.len()];
    op.apply_into(v, &mut w);
    axpy(-lambda, v, &mut w);
    norm(&w)
}

/// The `k` lowest eigenpairs by block Lanczos with thick restarts.
///
/// The search space starts from `k` random vectors and grows by the
/// residuals of the unconverged Ritz pairs; Rayleigh–Ritz on the whole
/// space gives the current estimates. On overflow the lowest Ritz vectors
/// are kept. Convergence is set by the gap between the wanted cluster and
/// the rest of the spectrum, so closely split levels inside the cluster are
/// resolved as accurately as isolated ones.
pub fn lanczos_lowest(op: &dyn LinearOperator, k: usize, cfg: &LanczosConfig) -> Result<Eigenpairs> {
    let n = op.dim();
    if k > n || k == 0 {
        return Err(Error::DimensionMismatch { expected: k.max(1), got: n });
    }
    let max_basis = cfg.krylov_dim.max(3 * k + 4).min(n);
    let keep = (2 * k).max(k + 2).min(max_basis.saturating_sub(k)).max(k);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut w: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    // projected matrix VᵀHV, grown one row per accepted vector
    let mut g: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let push = |x: Vec<f64>, v: &mut Vec<Vec<f64>>, w: &mut Vec<Vec<f64>>, g: &mut Vec<Vec<f64>>| -> bool {
        let mut x = x;
        let before = norm(&x);
        orthogonalize(&mut x, v);
        let nx = norm(&x);
        if nx <= 1e-10 * before || nx == 0.0 {
            return false;
        }
        scale(&mut x, 1.0 / nx);
        let mut hx = vec![0.0; n];
        op.apply_into(&x, &mut hx);
        let mut row = project(v, &hx);
        row.push(dot(&x, &hx));
        g.push(row);
        v.push(x);
        w.push(hx);
        true
    };
    while v.len() < k {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        push(x, &mut v, &mut w, &mut g);
    }
    let mut op_scale = 1.0f64;
    let mut last_res = f64::INFINITY;
    for _iter in 0..cfg.max_restarts * max_basis {
        let m = v.len();
        let eig = SymmetricEigen::new(DMatrix::from_fn(m, m, |i, j| if j <= i { g[i][j] } else { g[j][i] }));
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        op_scale = op_scale.max(eig.eigenvalues.amax());
        let theta: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        let coeffs = |cols: std::ops::Range<usize>, factor: &dyn Fn(usize) -> f64| -> Vec<Vec<f64>> {
            cols.map(|j| eig.eigenvectors.column(order[j]).iter().map(|y| y * factor(j)).collect()).collect()
        };
        // residuals Wy − θVy without forming the Ritz vectors
        let mut resid: Vec<Vec<f64>> = vec![vec![0.0; n]; k];
        accumulate(&w, &coeffs(0..k, &|_| 1.0), &mut resid);
        accumulate(&v, &coeffs(0..k, &|j| -theta[j]), &mut resid);
        let norms: Vec<f64> = resid.iter().map(|r| norm(r)).collect();
        last_res = norms.iter().cloned().fold(0.0, f64::max);
        if last_res <= cfg.tol * op_scale || m == n {
            let mut ritz = vec![vec![0.0; n]; k];
            accumulate(&v, &coeffs(0..k, &|_| 1.0), &mut ritz);
            let residuals = (0..k).map(|i| residual(op, &ritz[i], theta[i])).collect();
            return Ok(Eigenpairs {
                values: theta[..k].to_vec(),
                vectors: ritz,
                residuals,
            }
            .sorted());
        }
        let unconverged: Vec<usize> = (0..k).filter(|&i| norms[i] > cfg.tol * op_scale).collect();
        if m + unconverged.len() > max_basis {
            let want = keep.min(m);
            let mut ritz = vec![vec![0.0; n]; want];
            let mut hritz = vec![vec![0.0; n]; want];
            accumulate(&v, &coeffs(0..want, &|_| 1.0), &mut ritz);
            accumulate(&w, &coeffs(0..want, &|_| 1.0), &mut hritz);
            v = ritz;
            w = hritz;
            // Ritz vectors diagonalize the projection
            g = (0..want)
                .map(|i| (0..=i).map(|j| if i == j { theta[i] } else { 0.0 }).collect())
                .collect();
        }
        let mut added = 0;
        for i in unconverged {
            if v.len() >= max_basis {
                break;
            }
            if push(std::mem::take(&mut resid[i]), &mut v, &mut w, &mut g) {
                added += 1;
            }
        }
        if added == 0 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if !push(x, &mut v, &mut w, &mut g) && v.len() >= n {
                continue;
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_restarts * max_basis,
        residual: last_res,
    })
}

/// The `k` lowest eigenpairs of a dense symmetric matrix.
pub fn dense_lowest(m: &DMatrix<f64>, k: usize) -> Result<Eigenpairs> {
    let n = m.nrows();
    if k > n {
        return Err(Error::DimensionMismatch { expected: k, got: n });
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out = Eigenpairs {
        values: vec![],
        vectors: vec![],
        residuals: vec![],
    };
    for &i in idx.iter().take(k) {
        let lambda = eig.eigenvalues[i];
        let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        out.residuals.push(residual(m, &v, lambda));
        out.values.push(lambda);
        out.vectors.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    }

    #[test]
    fn matches_dense_on_random_matrix() {
        let m = random_symmetric(300, 1);
        let d = dense_lowest(&m, 6).unwrap();
        let l = lanczos_lowest(&m, 6, &LanczosConfig::default()).unwrap();
        for (a, b) in d.values.iter().zip(&l.values) {
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
        assert!(l.residuals.iter().all(|&r| r < 1e-9));
    }

    #[test]
    fn resolves_exact_degeneracy() {
        // diag(−1, −1, −1, 0, 1, 2, …) in a random rotation
        let n = 120;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
        let d = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| if i < 3 { -1.0 } else { (i - 3) as f64 / 10.0 }));
        let m = &q * d * q.transpose();
        let l = lanczos_lowest(&m, 4, &LanczosConfig::default()).unwrap();
        for v in &l.values[..3] {
            assert!((v + 1.0).abs() < 1e-10);
        }
        assert!(l.values[3].abs() < 1e-10);
        for i in 0..4 {
            for j in 0..4 {
                let o = dot(&l.vectors[i], &l.vectors[j]);
                assert!((o - (i == j) as u8 as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn small_operator_is_solved_exactly() {
        let m = random_symmetric(5, 9);
        let l = lanczos_lowest(&m, 5, &LanczosConfig::default()).unwrap();
        let d = dense_lowest(&m, 5).unwrap();
        for (a, b) in d.values.iter().zip(&l.values) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(lanczos_lowest(&m, 6, &LanczosConfig::default()).is_err());
    }
}
