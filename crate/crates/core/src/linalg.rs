//! Dense and sparse linear-algebra helpers shared by the physics modules.
//!
//! Matrices are `nalgebra` dynamic matrices. Qubit operators use the
//! computational basis with qubit 1 as the most significant tensor factor.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Cartesian axis of a spin operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Single-qubit Pauli matrix.
pub fn pauli(axis: Axis) -> CMatrix {
    let i = Complex64::i();
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` acting on `site` (0-based) of `qubits`.
pub fn embed(op: &CMatrix, site: usize, qubits: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for q in 0..qubits {
        out = if q == site {
            out.kronecker(op)
        } else {
            out.kronecker(&CMatrix::identity(2, 2))
        };
    }
    out
}

/// Collective spin component `Σ_i σ_i^h` on `qubits` qubits.
pub fn spin_sum(axis: Axis, qubits: usize) -> CMatrix {
    let dim = 1usize << qubits;
    let p = pauli(axis);
    (0..qubits).fold(CMatrix::zeros(dim, dim), |acc, site| {
        acc + embed(&p, site, qubits)
    })
}

/// Kronecker sum `Σ_i I ⊗ … ⊗ A_i ⊗ … ⊗ I` of square matrices.
pub fn kronecker_sum(factors: &[&RMatrix]) -> RMatrix {
    let total: usize = factors.iter().map(|f| f.nrows()).product();
    let mut out = RMatrix::zeros(total, total);
    for (i, f) in factors.iter().enumerate() {
        let left: usize = factors[..i].iter().map(|f| f.nrows()).product();
        let right: usize = factors[i + 1..].iter().map(|f| f.nrows()).product();
        let term = RMatrix::identity(left, left)
            .kronecker(f)
            .kronecker(&RMatrix::identity(right, right));
        out += term;
    }
    out
}

/// Largest entry modulus of `a - a†`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            worst = worst.max((a[(r, c)] - a[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
///
/// Each eigenvector is rephased so that its first component of (near-)maximal
/// modulus is real and positive.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut basis = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(src);
        let peak = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let anchor = v
            .iter()
            .copied()
            .find(|z| z.norm() >= peak * (1.0 - 1e-8))
            .unwrap_or(ONE);
        let phase = anchor.conj() / anchor.norm();
        for row in 0..n {
            basis[(row, col)] = v[row] * phase;
        }
    }
    (energies, basis)
}

/// Ascending eigenvalues and matching orthonormal eigenvectors of a real
/// symmetric matrix.
pub fn symmetric_eigen(s: &RMatrix) -> (Vec<f64>, RMatrix) {
    let n = s.nrows();
    let eig = SymmetricEigen::new(s.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = RMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Diagonal similarity with power-of-two factors that evens out row and
/// column norms. Eigenvalues are unchanged and rounding is not introduced.
fn balance(m: &mut CMatrix) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    let l1 = |z: Complex64| z.re.abs() + z.im.abs();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                c += l1(m[(j, i)]);
                r += l1(m[(i, j)]);
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                m.row_mut(i).scale_mut(1.0 / f);
                m.column_mut(i).scale_mut(f);
            }
        }
    }
}

/// Eigenvalues of a general complex matrix via the complex Schur form of the
/// balanced matrix.
pub fn general_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![m[(0, 0)]]),
        _ => {}
    }
    let mut balanced = m.clone();
    balance(&mut balanced);
    // a one-ulp deflation threshold can stall on graded matrices; looser
    // ones still sit far below any physical scale
    let schur = [f64::EPSILON, 1e-14, 1e-13, 1e-12]
        .into_iter()
        .find_map(|eps| balanced.clone().try_schur(eps, 100 * n))
        .ok_or_else(|| Error::Eigensolver(format!("Schur iteration did not converge (n = {n})")))?;
    let (_, t) = schur.unpack();
    // Complex Schur form is upper triangular; the eigenvalues sit on the diagonal.
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Row-oriented sparse matrix with explicitly stored entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    dim: usize,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Copy + std::ops::AddAssign> SparseMatrix<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    /// Builds a matrix from unsorted rows; repeated columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, T)>>) -> Self {
        let dim = rows.len();
        let rows = rows
            .into_iter()
            .map(|mut row| {
                row.sort_by_key(|&(c, _)| c);
                let mut merged: Vec<(usize, T)> = Vec::with_capacity(row.len());
                for (c, v) in row {
                    match merged.last_mut() {
                        Some(last) if last.0 == c => last.1 += v,
                        _ => merged.push((c, v)),
                    }
                }
                merged
            })
            .collect();
        Self { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `value` to entry `(row, col)`.
    pub fn add(&mut self, row: usize, col: usize, value: T) {
        let r = &mut self.rows[row];
        match r.binary_search_by_key(&col, |&(c, _)| c) {
            Ok(pos) => r[pos].1 += value,
            Err(pos) => r.insert(pos, (col, value)),
        }
    }

    pub fn row(&self, row: usize) -> &[(usize, T)] {
        &self.rows[row]
    }

    pub fn get(&self, row: usize, col: usize) -> Option<T> {
        let r = &self.rows[row];
        r.binary_search_by_key(&col, |&(c, _)| c)
            .ok()
            .map(|p| r[p].1)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Connected components of the (symmetrized) sparsity graph, each sorted
    /// ascending; components are ordered by their smallest index.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.dim).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, _) in row {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..self.dim {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        groups.into_values().collect()
    }
}

impl SparseMatrix<Complex64> {
    pub fn to_dense(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                out[(r, c)] = v;
            }
        }
        out
    }

    pub fn submatrix(&self, indices: &[usize]) -> CMatrix {
        let mut local = vec![usize::MAX; self.dim];
        for (k, &i) in indices.iter().enumerate() {
            local[i] = k;
        }
        let mut out = CMatrix::zeros(indices.len(), indices.len());
        for (k, &i) in indices.iter().enumerate() {
            for &(c, v) in &self.rows[i] {
                debug_assert!(local[c] != usize::MAX, "index set is not closed");
                out[(k, local[c])] = v;
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, v)| v * x[c]).sum())
            .collect()
    }

    /// All eigenvalues, computed block by block over the connected components
    /// of the sparsity graph. Each block is invariant, so the union of block
    /// spectra is the full spectrum.
    pub fn eigenvalues_by_blocks(&self) -> Result<Vec<Complex64>> {
        let blocks = self.connected_components();
        let parts: Vec<Result<Vec<Complex64>>> = blocks
            .par_iter()
            .map(|b| general_eigenvalues(&self.submatrix(b)))
            .collect();
        let mut out = Vec::with_capacity(self.dim);
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }
}

impl SparseMatrix<f64> {
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, row) in self.rows.iter().enumerate() {
            y[r] = row.iter().map(|&(c, v)| v * x[c]).sum();
        }
    }

    pub fn to_dense(&self) -> RMatrix {
        let mut out = RMatrix::zeros(self.dim, self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                out[(r, c)] = v;
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_out(w: &mut [f64], basis: &[Vec<f64>]) {
    for v in basis {
        let c = dot(v, w);
        w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
    }
}

/// Two passes of classical Gram-Schmidt. The deflation space goes last in
/// each pass so that rounding in the Krylov basis cannot feed it back.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], deflate: &[Vec<f64>]) {
    for _ in 0..2 {
        project_out(w, basis);
        project_out(w, deflate);
    }
}

/// Smallest eigenvalue of a real symmetric operator restricted to the
/// orthogonal complement of `deflate` (orthonormal vectors).
///
/// Lanczos with full reorthogonalization; stops when the Ritz residual of the
/// lowest Ritz pair drops below `tol` times the Ritz spread.
pub fn lanczos_smallest<F>(apply: F, dim: usize, deflate: &[Vec<f64>], tol: f64) -> Result<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    let reachable = dim.saturating_sub(deflate.len());
    if reachable == 0 {
        return Err(Error::InvalidInput(
            "deflation space covers the whole operator".into(),
        ));
    }

    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * (0.7548776662 * i as f64 + 0.1).sin())
        .collect();
    orthogonalize(&mut v, &[], deflate);
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut last = f64::NAN;

    for j in 0..reachable {
        apply(&basis[j], &mut w);
        let alpha = dot(&basis[j], &w);
        alphas.push(alpha);
        orthogonalize(&mut w, &basis, deflate);
        let beta = dot(&w, &w).sqrt();

        let k = alphas.len();
        let check = k.is_multiple_of(8) || k == reachable || beta <= 1e-12 * alpha.abs().max(1.0);
        if check {
            let mut t = RMatrix::zeros(k, k);
            for i in 0..k {
                t[(i, i)] = alphas[i];
                if i + 1 < k {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let (theta, s) = symmetric_eigen(&t);
            let spread = (theta[k - 1] - theta[0])
                .abs()
                .max(theta[0].abs())
                .max(f64::MIN_POSITIVE);
            let residual = (beta * s[(k - 1, 0)]).abs();
            last = theta[0];
            if residual <= tol * spread || k == reachable || beta <= 1e-12 * spread {
                return Ok(theta[0]);
            }
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
    Ok(last)
}

pub fn rvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
