//! Sparse symmetric eigensolver for the index form.
//!
//! The smallest eigenvalue of `A v = λ M v` (`M` a positive diagonal mass)
//! restricted to the mass-orthogonal complement of the constants is found
//! by shift-invert Lanczos: with `y = M^{1/2} v` the problem becomes
//! standard, the mean-zero constraint becomes deflation against a single
//! unit vector `u`, and a Gershgorin shift `σ` below the whole spectrum
//! makes `Ã - σI` positive definite so the inner solves are plain
//! (projected, Jacobi-preconditioned) conjugate gradients.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EigenError {
    #[error("conjugate gradient stalled at residual {0:.3e}")]
    CgStalled(f64),
    #[error("Lanczos did not converge within {restarts} restarts (last residual {residual:.3e})")]
    NotConverged { restarts: usize, residual: f64 },
    #[error("matrix dimension mismatch")]
    DimensionMismatch,
}

/// Symmetric sparse matrix in CSR form (full storage, not just a triangle).
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed. Only
    /// provide each symmetric pair once with `symmetrize = true`.
    pub fn from_triplets(n: usize, triplets: &[(u32, u32, f64)], symmetrize: bool) -> Self {
        let mut entries: alloc::collections::BTreeMap<(u32, u32), f64> =
            alloc::collections::BTreeMap::new();
        for &(i, j, v) in triplets {
            *entries.entry((i, j)).or_insert(0.0) += v;
            if symmetrize && i != j {
                *entries.entry((j, i)).or_insert(0.0) += v;
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for (&(i, _), _) in &entries {
            row_ptr[i as usize + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let nnz = entries.len();
        let mut cols = vec![0u32; nnz];
        let mut vals = vec![0.0; nnz];
        let mut cursor = row_ptr.clone();
        for ((i, j), v) in entries {
            let p = cursor[i as usize];
            cols[p] = j;
            vals[p] = v;
            cursor[i as usize] += 1;
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[p] * x[self.cols[p] as usize];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[p] as usize == i {
                    d[i] = self.vals[p];
                }
            }
        }
        d
    }

    /// Largest asymmetry `|a_ij - a_ji|`; zero for exactly symmetric input.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[p] as usize;
                if j < i {
                    continue;
                }
                let mut aji = 0.0;
                for q in self.row_ptr[j]..self.row_ptr[j + 1] {
                    if self.cols[q] as usize == i {
                        aji = self.vals[q];
                    }
                }
                worst = worst.max((self.vals[p] - aji).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[i][self.cols[p] as usize] = self.vals[p];
            }
        }
        d
    }

    /// New matrix `A + diag(d)`, preserving sparsity.
    pub fn with_added_diagonal(&self, d: &[f64]) -> CsrMatrix {
        assert_eq!(d.len(), self.n);
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut cols = Vec::with_capacity(self.cols.len() + self.n);
        let mut vals = Vec::with_capacity(self.vals.len() + self.n);
        row_ptr.push(0usize);
        for i in 0..self.n {
            let mut seen_diag = false;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[p] as usize;
                let mut v = self.vals[p];
                if j == i {
                    v += d[i];
                    seen_diag = true;
                }
                // keep columns sorted, inserting the diagonal if absent
                if !seen_diag && j > i {
                    cols.push(i as u32);
                    vals.push(d[i]);
                    seen_diag = true;
                }
                cols.push(j as u32);
                vals.push(v);
            }
            if !seen_diag {
                cols.push(i as u32);
                vals.push(d[i]);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n: self.n, row_ptr, cols, vals }
    }
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Relative tolerance on the eigenvalue.
    pub tol: f64,
    /// Lanczos basis size per restart.
    pub max_lanczos: usize,
    /// Maximal restarts before giving up.
    pub restarts: usize,
    /// Inner CG tolerance (relative residual).
    pub cg_tol: f64,
    pub max_cg: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_lanczos: 60, restarts: 8, cg_tol: 1e-12, max_cg: 20000 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Smallest eigenvalue (and eigenvector) of `A v = λ M v` subject to
/// `1ᵀ M v = 0`, with `M = diag(mass) > 0`.
pub fn min_eigenvalue_mean_zero(
    a: &CsrMatrix,
    mass: &[f64],
    opts: &EigenOptions,
) -> Result<(f64, Vec<f64>), EigenError> {
    let n = a.n();
    if mass.len() != n {
        return Err(EigenError::DimensionMismatch);
    }
    let sqrt_m: Vec<f64> = mass.iter().map(|&m| m.sqrt()).collect();
    let inv_sqrt_m: Vec<f64> = sqrt_m.iter().map(|&s| 1.0 / s).collect();

    // constraint direction in the transformed metric
    let mut u: Vec<f64> = sqrt_m.clone();
    let un = dot(&u, &u).sqrt();
    for x in &mut u {
        *x /= un;
    }
    let project = |x: &mut [f64], u: &[f64]| {
        let c = dot(x, u);
        for (xi, ui) in x.iter_mut().zip(u) {
            *xi -= c * ui;
        }
    };

    // Ã = M^{-1/2} A M^{-1/2}; Gershgorin lower bound of Ã
    let mut lb = f64::INFINITY;
    for i in 0..n {
        let mut diag = 0.0;
        let mut off = 0.0;
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.cols[p] as usize;
            let v = a.vals[p] * inv_sqrt_m[i] * inv_sqrt_m[j];
            if j == i {
                diag = v;
            } else {
                off += v.abs();
            }
        }
        lb = lb.min(diag - off);
    }
    let scale = lb.abs().max(1.0);
    let sigma = lb - 0.05 * scale;

    // y ↦ (Ã - σ) y
    let apply_shifted = |x: &[f64], y: &mut [f64], tmp: &mut [f64]| {
        for i in 0..n {
            tmp[i] = x[i] * inv_sqrt_m[i];
        }
        a.matvec(tmp, y);
        for i in 0..n {
            y[i] = y[i] * inv_sqrt_m[i] - sigma * x[i];
        }
    };
    let precond: Vec<f64> = {
        let d = a.diagonal();
        (0..n)
            .map(|i| {
                let dii = d[i] * inv_sqrt_m[i] * inv_sqrt_m[i] - sigma;
                if dii > 0.0 {
                    1.0 / dii
                } else {
                    1.0
                }
            })
            .collect()
    };

    // projected preconditioned CG solve of (Ã - σ) z = b on range(P)
    let mut tmp = vec![0.0; n];
    let cg_solve = |b: &[f64], tmp: &mut [f64]| -> Result<Vec<f64>, EigenError> {
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        project(&mut r, &u);
        let b_norm = dot(&r, &r).sqrt();
        if b_norm == 0.0 {
            return Ok(x);
        }
        let mut z: Vec<f64> = r.iter().zip(&precond).map(|(ri, pi)| ri * pi).collect();
        project(&mut z, &u);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for _ in 0..opts.max_cg {
            apply_shifted(&p, &mut ap, tmp);
            project(&mut ap, &u);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(EigenError::CgStalled(pap));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rn = dot(&r, &r).sqrt();
            if rn <= opts.cg_tol * b_norm {
                return Ok(x);
            }
            let mut z2: Vec<f64> = r.iter().zip(&precond).map(|(ri, pi)| ri * pi).collect();
            project(&mut z2, &u);
            let rz2 = dot(&r, &z2);
            let beta = rz2 / rz;
            rz = rz2;
            for i in 0..n {
                p[i] = z2[i] + beta * p[i];
            }
        }
        Err(EigenError::CgStalled(dot(&r, &r).sqrt() / b_norm))
    };

    // Lanczos on Op = [P (Ã-σ) P]^{-1} restricted to range(P); the largest
    // Ritz value θ gives λ_min = σ + 1/θ.
    let mut start: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.7).sin()).collect();
    project(&mut start, &u);
    let mut last_residual = f64::INFINITY;
    for _restart in 0..opts.restarts {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let nrm = dot(&start, &start).sqrt();
        if nrm == 0.0 {
            start = (0..n).map(|i| ((i as f64) * 1.3).cos()).collect();
            project(&mut start, &u);
        }
        let nrm = dot(&start, &start).sqrt();
        let mut q: Vec<f64> = start.iter().map(|x| x / nrm).collect();
        basis.push(q.clone());
        let mut q_prev: Vec<f64> = vec![0.0; n];
        let mut beta_prev = 0.0;
        for j in 0..opts.max_lanczos {
            let mut w = cg_solve(&q, &mut tmp)?;
            // w = Op q
            if beta_prev != 0.0 {
                for i in 0..n {
                    w[i] -= beta_prev * q_prev[i];
                }
            }
            let alpha = dot(&w, &q);
            for i in 0..n {
                w[i] -= alpha * q[i];
            }
            // full reorthogonalization (cheap at this basis size)
            for b in &basis {
                let c = dot(&w, b);
                for i in 0..n {
                    w[i] -= c * b[i];
                }
            }
            project(&mut w, &u);
            alphas.push(alpha);
            let beta = dot(&w, &w).sqrt();

            // Ritz step on the tridiagonal
            let k = alphas.len();
            let mut t = vec![vec![0.0; k]; k];
            for i in 0..k {
                t[i][i] = alphas[i];
                if i + 1 < k {
                    t[i][i + 1] = betas.get(i).copied().unwrap_or(0.0);
                    t[i + 1][i] = t[i][i + 1];
                }
            }
            let (evals, evecs) = jacobi_eigen(&t);
            let (idx, &theta) = evals
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            let resid = beta * evecs[k - 1][idx].abs();
            last_residual = resid / theta.abs().max(1e-300);
            if last_residual < opts.tol || beta < 1e-14 || j + 1 == opts.max_lanczos {
                // assemble the Ritz vector
                let mut y = vec![0.0; n];
                for (bi, bvec) in basis.iter().enumerate() {
                    let c = evecs[bi][idx];
                    for i in 0..n {
                        y[i] += c * bvec[i];
                    }
                }
                if last_residual < opts.tol || beta < 1e-14 {
                    let lambda = sigma + 1.0 / theta;
                    let mut v: Vec<f64> = (0..n).map(|i| y[i] * inv_sqrt_m[i]).collect();
                    // normalize in the mass inner product
                    let vn = (0..n).map(|i| mass[i] * v[i] * v[i]).sum::<f64>().sqrt();
                    for x in &mut v {
                        *x /= vn;
                    }
                    return Ok((lambda, v));
                }
                start = y;
                break;
            }
            betas.push(beta);
            q_prev = q;
            beta_prev = beta;
            q = w.iter().map(|x| x / beta).collect();
            basis.push(q.clone());
        }
    }
    Err(EigenError::NotConverged { restarts: opts.restarts, residual: last_residual })
}

/// Cyclic Jacobi eigen decomposition of a small dense symmetric matrix.
/// Returns (eigenvalues, eigenvectors-as-columns).
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for i in 0..n {
        v[i][i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&m)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let evals: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    (evals, v)
}

fn frobenius(m: &[Vec<f64>]) -> f64 {
    m.iter().flat_map(|r| r.iter()).map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn csr_matvec_and_symmetry() {
        // 1D Laplacian on 4 nodes
        let triplets = [
            (0u32, 0u32, 1.0),
            (1, 1, 2.0),
            (2, 2, 2.0),
            (3, 3, 1.0),
            (0, 1, -1.0),
            (1, 2, -1.0),
            (2, 3, -1.0),
        ];
        let a = CsrMatrix::from_triplets(4, &triplets, true);
        assert_eq!(a.asymmetry(), 0.0);
        let x = [1.0, 1.0, 1.0, 1.0];
        let mut y = [0.0; 4];
        a.matvec(&x, &mut y);
        assert!(y.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn jacobi_eigen_2x2() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let (mut evals, _) = jacobi_eigen(&a);
        evals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_relative_eq!(evals[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(evals[1], 3.0, epsilon = 1e-12);
    }

    /// Path-graph Laplacian on n nodes with unit masses: the mean-zero
    /// spectrum is 4 sin²(kπ/2n); smallest nonzero at k = 1.
    #[test]
    fn path_laplacian_smallest_mean_zero_eigenvalue() {
        let n = 40usize;
        let mut trip = Vec::new();
        for i in 0..n - 1 {
            let (a, b) = (i as u32, (i + 1) as u32);
            trip.push((a, a, 1.0));
            trip.push((b, b, 1.0));
            trip.push((a, b, -1.0));
        }
        let a = CsrMatrix::from_triplets(n, &trip, true);
        let mass = vec![1.0; n];
        let (lam, vecv) = min_eigenvalue_mean_zero(&a, &mass, &EigenOptions::default()).unwrap();
        let exact = 4.0 * (core::f64::consts::PI / (2.0 * n as f64)).sin().powi(2);
        assert_relative_eq!(lam, exact, max_relative = 1e-7);
        // eigenvector is mass-orthogonal to constants
        let mean: f64 = vecv.iter().sum();
        assert!(mean.abs() < 1e-9, "mean {mean}");
    }

    #[test]
    fn indefinite_matrix_negative_eigenvalue() {
        // Laplacian minus a strong diagonal well at one end goes negative.
        let n = 30usize;
        let mut trip = Vec::new();
        for i in 0..n - 1 {
            let (a, b) = (i as u32, (i + 1) as u32);
            trip.push((a, a, 1.0));
            trip.push((b, b, 1.0));
            trip.push((a, b, -1.0));
        }
        trip.push((0, 0, -3.0));
        let a = CsrMatrix::from_triplets(n, &trip, true);
        let mass = vec![1.0; n];
        let (lam, _) = min_eigenvalue_mean_zero(&a, &mass, &EigenOptions::default()).unwrap();
        assert!(lam < -0.5, "expected a negative eigenvalue, got {lam}");

        // dense cross-check with explicit deflation
        let dense = a.to_dense();
        let exact = dense_min_eigen_mean_zero(&dense, &mass);
        assert_relative_eq!(lam, exact, max_relative = 1e-7);
    }

    /// Dense oracle: project onto the orthogonal complement of sqrt(mass)
    /// and run Jacobi on the reduced matrix.
    pub(crate) fn dense_min_eigen_mean_zero(a: &[Vec<f64>], mass: &[f64]) -> f64 {
        let n = a.len();
        let s: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();
        // Ã = S^{-1} A S^{-1}
        let mut at = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                at[i][j] = a[i][j] / (s[i] * s[j]);
            }
        }
        // Householder basis of the complement of u = s/|s|
        let mut u = s.clone();
        let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut u {
            *x /= un;
        }
        // columns of Q: e_k - u (u_k)/(1 - u_0...)  — build via Gram-Schmidt
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for k in 0..n {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            let c = e.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
            for i in 0..n {
                e[i] -= c * u[i];
            }
            for b in &basis {
                let c = e.iter().zip(b.iter()).map(|(a, b)| a * b).sum::<f64>();
                for i in 0..n {
                    e[i] -= c * b[i];
                }
            }
            let nn = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nn > 1e-8 {
                for x in &mut e {
                    *x /= nn;
                }
                basis.push(e);
            }
            if basis.len() == n - 1 {
                break;
            }
        }
        let m = basis.len();
        let mut red = vec![vec![0.0; m]; m];
        for p in 0..m {
            for q in 0..m {
                let mut sum = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        sum += basis[p][i] * at[i][j] * basis[q][j];
                    }
                }
                red[p][q] = sum;
            }
        }
        let (evals, _) = jacobi_eigen(&red);
        evals.into_iter().fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn shift_by_mass_moves_eigenvalue_exactly() {
        let n = 25usize;
        let mut trip = Vec::new();
        for i in 0..n - 1 {
            let (a, b) = (i as u32, (i + 1) as u32);
            trip.push((a, a, 1.0));
            trip.push((b, b, 1.0));
            trip.push((a, b, -1.0));
        }
        let mass: Vec<f64> = (0..n).map(|i| 0.5 + 0.01 * i as f64).collect();
        let a0 = CsrMatrix::from_triplets(n, &trip, true);
        let mut trip2 = trip.clone();
        let t = 0.37;
        for i in 0..n {
            trip2.push((i as u32, i as u32, t * mass[i]));
        }
        let a1 = CsrMatrix::from_triplets(n, &trip2, true);
        let (l0, _) = min_eigenvalue_mean_zero(&a0, &mass, &EigenOptions::default()).unwrap();
        let (l1, _) = min_eigenvalue_mean_zero(&a1, &mass, &EigenOptions::default()).unwrap();
        assert_relative_eq!(l1 - l0, t, epsilon = 1e-9);
    }
}
