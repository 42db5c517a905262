//! Small dense solves for local fits.

use crate::scalar::Real;

/// Solve `a x = b` by Gaussian elimination with partial pivoting. Returns `None` when a pivot
/// vanishes relative to the largest entry of its column.
pub fn solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()));
    let tiny = scale * T::epsilon() * T::from_usize(n).unwrap();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[piv][col].abs() > tiny) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != T::zero() {
                for c in col..n {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
                let v = b[col];
                b[r] -= f * v;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let s = (r + 1..n).fold(b[r], |s, c| s - a[r][c] * x[c]);
        x[r] = s / a[r][r];
    }
    Some(x)
}

/// Least-squares solution of the overdetermined system with the given rows, via the normal
/// equations.
pub fn least_squares<T: Real>(rows: &[Vec<T>], rhs: &[T]) -> Option<Vec<T>> {
    let m = rows.first()?.len();
    let mut ata = vec![vec![T::zero(); m]; m];
    let mut atb = vec![T::zero(); m];
    for (row, &r) in rows.iter().zip(rhs) {
        for i in 0..m {
            atb[i] += row[i] * r;
            for j in 0..m {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    solve(ata, atb)
}
