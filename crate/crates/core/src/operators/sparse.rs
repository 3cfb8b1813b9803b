use std::ops::{Add, Mul};

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{PxpError, Result};
use crate::scalar::{Real, Scalar};

/// Row-compressed sparse matrix. Rows keep their columns sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseOperator<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
    symmetric: bool,
}

impl<T: Scalar> SparseOperator<T> {
    /// Builds from unsorted triplets; duplicate coordinates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, T)>, symmetric: bool) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<T> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r},{c}) outside dimension {dim}");
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    let last = vals.last_mut().unwrap();
                    *last = *last + v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let (mut r2, mut c2, mut v2) = (Vec::new(), Vec::new(), Vec::new());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if !v.is_zero() {
                r2.push(r);
                c2.push(c);
                v2.push(v);
            }
        }
        for &r in &r2 {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            cols: c2,
            vals: v2,
            symmetric,
        }
    }

    pub fn diagonal(diag: Vec<T>) -> Self {
        let dim = diag.len();
        Self::from_triplets(dim, diag.into_iter().enumerate().map(|(i, v)| (i, i, v)).collect(), true)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new(), true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_symmetric_flag(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(p) => self.vals[range.start + p],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal_entries(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> T {
        self.diagonal_entries().into_iter().fold(T::zero(), |a, b| a + b)
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(i, j, _)| i == j)
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(i, j, v)| (j, i, v)).collect(), self.symmetric)
    }

    /// Exact structural and value symmetry check.
    pub fn check_symmetric(&self) -> bool {
        self.triplets().all(|(i, j, v)| self.get(j, i) == v)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v = *v * s);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let trip = self.triplets().chain(other.triplets()).collect();
        Ok(Self::from_triplets(self.dim, trip, self.symmetric && other.symmetric))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let mut trip = Vec::new();
        for i in 0..self.dim {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    trip.push((i, j, a * b));
                }
            }
        }
        Ok(Self::from_triplets(self.dim, trip, false))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.vals
            .iter()
            .fold(T::zero(), |m, v| if v.abs_val() > m { v.abs_val() } else { m })
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(PxpError::BasisMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// `y = A x` for any vector element type the scalar can multiply.
    pub fn apply<V>(&self, x: &[V], y: &mut [V])
    where
        V: Copy + Add<Output = V> + Mul<T, Output = V> + num_traits::Zero,
    {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = V::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc = acc + x[self.cols[p]] * self.vals[p];
            }
            *yi = acc;
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> SparseOperator<U> {
        SparseOperator {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|&v| f(v)).collect(),
            symmetric: self.symmetric,
        }
    }

    /// Coordinate dump: header `dim=<d> sym=<0|1>` then `row col value`.
    pub fn dump(&self) -> String
    where
        T: std::fmt::Display,
    {
        let mut out = format!("dim={} sym={}\n", self.dim, u8::from(self.symmetric));
        for (i, j, v) in self.triplets() {
            out.push_str(&format!("{i} {j} {v}\n"));
        }
        out
    }
}

impl<T: Real> SparseOperator<T> {
    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn apply_complex(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        assert_eq!(x.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let (mut re, mut im) = (T::zero(), T::zero());
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let xv = x[self.cols[p]];
                let a = self.vals[p];
                re += a * xv.re;
                im += a * xv.im;
            }
            *yi = Complex::new(re, im);
        }
    }

    /// `⟨x|A|x⟩` for a complex vector; real because `A` is real symmetric.
    pub fn expectation(&self, x: &[Complex<T>]) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            let (mut re, mut im) = (T::zero(), T::zero());
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let xv = x[self.cols[p]];
                re += self.vals[p] * xv.re;
                im += self.vals[p] * xv.im;
            }
            acc += x[i].re * re + x[i].im * im;
        }
        acc
    }

    pub fn expectation_real(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            let mut s = T::zero();
            for (j, v) in self.row(i) {
                s += v * x[j];
            }
            acc += x[i] * s;
        }
        acc
    }

    /// `‖A x‖₂` for a real vector.
    pub fn apply_norm(&self, x: &[T]) -> T {
        let mut y = vec![T::zero(); self.dim];
        self.apply(x, &mut y);
        num_traits::Float::sqrt(y.iter().map(|v| *v * *v).sum::<T>())
    }
}
