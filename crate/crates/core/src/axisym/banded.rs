//! Banded LU without pivoting.

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct Banded<T> {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row `i` stores columns `i − kl ..= i + ku`.
    a: Vec<Vec<T>>,
}

impl<T: Real> Banded<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, a: vec![vec![T::zero(); kl + ku + 1]; n] }
    }

    /// Add `x` at `(i, j)`. Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, x: T) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside band");
        self.a[i][j + self.kl - i] += x;
    }

    fn at(&self, i: usize, j: usize) -> T {
        self.a[i][j + self.kl - i]
    }

    /// Solve in place, consuming the factorization. `None` on a vanishing pivot.
    pub fn solve(mut self, mut b: Vec<T>) -> Option<Vec<T>> {
        let n = self.n;
        for k in 0..n {
            let p = self.at(k, k);
            if p == T::zero() || !p.is_finite() {
                return None;
            }
            for i in k + 1..n.min(k + self.kl + 1) {
                let l = self.at(i, k) / p;
                if l == T::zero() {
                    continue;
                }
                for j in k..n.min(k + self.ku + 1) {
                    let v = self.at(k, j);
                    self.a[i][j + self.kl - i] -= l * v;
                }
                let bk = b[k];
                b[i] -= l * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n.min(i + self.ku + 1) {
                s -= self.at(i, j) * b[j];
            }
            b[i] = s / self.at(i, i);
        }
        Some(b)
    }
}
