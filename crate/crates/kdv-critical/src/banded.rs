//! Banded linear systems with partial pivoting, for the implicit time steps
//! of the simulator.

// band storage indexing couples row, column and offset; explicit indices are
// clearer than iterator adapters here
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::Real;

/// Band matrix with `kl` sub- and `ku` super-diagonals, stored row-wise.
#[derive(Debug, Clone)]
pub struct BandMatrix<T: Real> {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row `i` holds entries for columns `i - kl ..= i + ku` at offsets
    /// `0 ..= kl + ku` (out-of-range columns are permanent zeros).
    rows: Vec<T>,
}

impl<T: Real> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix { n, kl, ku, rows: vec![T::zero(); n * (kl + ku + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n {
            return None;
        }
        let lo = i.saturating_sub(self.kl);
        if j < lo || j > i + self.ku {
            return None;
        }
        Some(i * self.width() + (j + self.kl - i))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.offset(i, j).map_or(T::zero(), |o| self.rows[o])
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let o = self
            .offset(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside band kl={} ku={}", self.kl, self.ku));
        self.rows[o] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let o = self
            .offset(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside band kl={} ku={}", self.kl, self.ku));
        self.rows[o] += v;
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = T::zero();
            for j in lo..=hi {
                acc += self.rows[i * self.width() + (j + self.kl - i)] * x[j];
            }
            y[i] = acc;
        }
    }
}

/// LU factorization of a band matrix with partial pivoting.
///
/// Row pivoting widens the upper band to `kl + ku`; the factors are kept in
/// compact row form together with the row multipliers.
#[derive(Debug, Clone)]
pub struct BandLu<T: Real> {
    n: usize,
    kl: usize,
    /// Compacted upper factor, `n x (2*kl + ku + 1)`.
    upper: Vec<T>,
    /// Elimination multipliers, `n x kl`.
    lower: Vec<T>,
    pivots: Vec<usize>,
    mm: usize,
}

impl<T: Real> BandMatrix<T> {
    pub fn factor(&self) -> Result<BandLu<T>> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mm = kl + ku + 1 + kl; // room for pivoting fill
        let mut u = vec![T::zero(); n * mm];

        // row-compacted copy: row i starts at its first in-band column
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                u[i * mm + (j - lo)] = self.get(i, j);
            }
        }

        let mut lower = vec![T::zero(); n * kl];
        let mut pivots = vec![0usize; n];

        for k in 0..n {
            // only rows within kl below k can hold a nonzero in column k
            let reach_k = kl.min(n - 1 - k);
            // pivot among rows k ..= k + reach_k (their leading entries)
            let mut piv = k;
            let mut best = u[k * mm].abs();
            for r in k + 1..=k + reach_k {
                let cand = u[r * mm].abs();
                if cand > best {
                    best = cand;
                    piv = r;
                }
            }
            pivots[k] = piv;
            if best == T::zero() {
                return Err(Error::SingularMatrix);
            }
            if piv != k {
                for c in 0..mm {
                    u.swap(k * mm + c, piv * mm + c);
                }
            }
            for r in k + 1..=k + reach_k {
                let mult = u[r * mm] / u[k * mm];
                lower[k * kl + (r - k - 1)] = mult;
                for c in 1..mm {
                    u[r * mm + (c - 1)] = u[r * mm + c] - mult * u[k * mm + c];
                }
                u[r * mm + mm - 1] = T::zero();
            }
        }

        Ok(BandLu { n, kl, upper: u, lower, pivots, mm })
    }
}

impl<T: Real> BandLu<T> {
    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, mm) = (self.n, self.kl, self.mm);
        // forward pass with the recorded row operations
        for k in 0..n {
            let reach_k = kl.min(n - 1 - k);
            if self.pivots[k] != k {
                b.swap(k, self.pivots[k]);
            }
            for r in k + 1..=k + reach_k {
                let mult = self.lower[k * kl + (r - k - 1)];
                b[r] -= mult * b[k];
            }
        }
        // back substitution on the compacted upper factor
        for k in (0..n).rev() {
            let mut acc = b[k];
            let hi = (mm - 1).min(n - 1 - k);
            for c in 1..=hi {
                acc -= self.upper[k * mm + c] * b[k + c];
            }
            b[k] = acc / self.upper[k * mm];
        }
    }
}
