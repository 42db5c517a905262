//! Compressed sparse row matrices on mesh adjacency and a Jacobi-preconditioned conjugate
//! gradient solver.

use crate::mesh::SphericalMesh;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Zero matrix whose pattern is the vertex adjacency of `mesh` plus the diagonal.
    pub fn from_mesh_pattern(mesh: &SphericalMesh<T>) -> Self {
        let n = mesh.n_vertices();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            let nb = mesh.neighbors(i);
            let pos = nb.partition_point(|&j| j < i);
            cols.extend_from_slice(&nb[..pos]);
            cols.push(i);
            cols.extend_from_slice(&nb[pos..]);
            row_ptr.push(cols.len());
        }
        let vals = vec![T::zero(); cols.len()];
        Self { n, row_ptr, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    fn index(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    /// Add `v` to entry `(i, j)`. Panics if `(i, j)` is outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let k = self.index(i, j).unwrap_or_else(|| panic!("entry ({i},{j}) not in sparsity pattern"));
        self.vals[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.index(i, j).map_or(T::zero(), |k| self.vals[k])
    }

    /// Row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Principal submatrix on the index set `keep` (sorted), renumbered `0..keep.len()`.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for &i in keep {
            for (j, v) in self.row(i) {
                if map[j] != usize::MAX {
                    cols.push(map[j]);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n: keep.len(), row_ptr, cols, vals }
    }

    /// Dense copy, row-major. Intended for small test problems.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

/// Outcome of a conjugate gradient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgInfo<T> {
    pub iterations: usize,
    pub relative_residual: T,
    pub converged: bool,
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

/// Solve `A x = b` for symmetric positive definite `A` with the diagonal as preconditioner,
/// starting from `x = 0`. Stops when `‖r‖ ≤ rel_tol ‖b‖` or after `max_iter` iterations.
pub fn conjugate_gradient<T: Real>(a: &CsrMatrix<T>, b: &[T], rel_tol: T, max_iter: usize) -> (Vec<T>, CgInfo<T>) {
    let n = a.n();
    let mut x = vec![T::zero(); n];
    let bnorm = dot(b, b).sqrt();
    if bnorm == T::zero() {
        return (x, CgInfo { iterations: 0, relative_residual: T::zero(), converged: true });
    }
    let inv_diag: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(r, m)| *r * *m).collect();
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    let mut rel = T::one();
    for it in 0..max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return (x, CgInfo { iterations: it, relative_residual: rel, converged: false });
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= rel_tol {
            return (x, CgInfo { iterations: it + 1, relative_residual: rel, converged: true });
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    (x, CgInfo { iterations: max_iter, relative_residual: rel, converged: false })
}
