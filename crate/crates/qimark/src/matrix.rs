//! Minimal dense square-matrix arithmetic for lattice generators.
//!
//! Lattice dimensions in this crate never exceed 8, so a simple row-major
//! `Vec` with textbook algorithms (partial-pivot LU, modified Gram-Schmidt)
//! is all that is needed.

use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        assert!(n > 0 && rows.iter().all(|r| r.len() == n));
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| T::of(x))).collect();
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self { n, data: vec![T::zero(); n * n] };
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn zero(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.n + c] = v;
    }

    /// Returns column `c` as a vector.
    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.n).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    /// Multiplies by an integer coordinate vector.
    pub fn mul_int_vec(&self, z: &[i64]) -> Vec<T> {
        assert_eq!(z.len(), self.n);
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c) * T::of(z[c] as f64)).sum())
            .collect()
    }

    /// Determinant via LU decomposition with partial pivoting.
    pub fn determinant(&self) -> T {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = T::one();
        for col in 0..n {
            let mut pivot = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[pivot * n + col].abs() {
                    pivot = r;
                }
            }
            if a[pivot * n + col] == T::zero() {
                return T::zero();
            }
            if pivot != col {
                for c in 0..n {
                    a.swap(col * n + c, pivot * n + c);
                }
                det = -det;
            }
            det *= a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / a[col * n + col];
                for c in col..n {
                    let sub = f * a[col * n + c];
                    a[r * n + c] -= sub;
                }
            }
        }
        det
    }

    /// Inverse via Gauss-Jordan elimination with partial pivoting.
    ///
    /// Panics on singular input; all generators in this crate are nonsingular
    /// by construction.
    pub fn inverse(&self) -> Self {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let mut pivot = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[pivot * n + col].abs() {
                    pivot = r;
                }
            }
            assert!(a[pivot * n + col] != T::zero(), "singular matrix");
            if pivot != col {
                for c in 0..n {
                    a.swap(col * n + c, pivot * n + c);
                    inv.data.swap(col * n + c, pivot * n + c);
                }
            }
            let p = a[col * n + col];
            for c in 0..n {
                a[col * n + c] = a[col * n + c] / p;
                inv.data[col * n + c] = inv.data[col * n + c] / p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f == T::zero() {
                    continue;
                }
                for c in 0..n {
                    let s1 = f * a[col * n + c];
                    a[r * n + c] -= s1;
                    let s2 = f * inv.data[col * n + c];
                    inv.data[r * n + c] -= s2;
                }
            }
        }
        inv
    }

    /// QR factorization of the columns via modified Gram-Schmidt.
    ///
    /// Returns `(Q, R)` with orthonormal `Q` columns and upper-triangular `R`
    /// with positive diagonal, such that `self = Q * R`.
    pub fn qr(&self) -> (Self, Self) {
        let n = self.n;
        let mut q = Self::zero(n);
        let mut r = Self::zero(n);
        for j in 0..n {
            let mut v = self.column(j);
            for i in 0..j {
                let qi = q.column(i);
                let dot: T = qi.iter().zip(&v).map(|(&a, &b)| a * b).sum();
                r.set(i, j, dot);
                for (vk, &qk) in v.iter_mut().zip(&qi) {
                    *vk -= dot * qk;
                }
            }
            let nv: T = v.iter().map(|&x| x * x).sum::<T>().sqrt();
            assert!(nv > T::zero(), "rank-deficient matrix in QR");
            r.set(j, j, nv);
            for (row, &vk) in v.iter().enumerate() {
                q.set(row, j, vk / nv);
            }
        }
        (q, r)
    }
}
