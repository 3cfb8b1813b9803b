//! Dense eigendecomposition, the zero-mode subspace and its rotations,
//! simultaneous zero modes of the two Hamiltonian terms, and eigenstate
//! Shannon entropies.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_traits::Float;

use crate::error::{PxpError, Result};
use crate::linalg::{null_space, symmetric_eigh};
use crate::operators::SparseOperator;
use crate::scalar::Real;

pub const DEFAULT_DENSE_CAP: usize = 40_000;
pub const DEFAULT_TOL_ZERO: f64 = 1e-8;
/// Eigenvalues closer than this form one degenerate cluster.
pub const DEFAULT_TOL_DEGENERATE: f64 = 1e-9;
/// Relative singular-value cutoff for the simultaneous null space.
pub const NULL_SPACE_CUTOFF: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
pub struct DiagOptions {
    pub cap: usize,
    pub tol_zero: f64,
}

impl Default for DiagOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_DENSE_CAP,
            tol_zero: DEFAULT_TOL_ZERO,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenSystem<T> {
    values: Vec<T>,
    vectors: DMatrix<T>,
    tol_zero: T,
    zero_mode_indices: Vec<usize>,
}

impl<T: Real> EigenSystem<T> {
    pub fn from_parts(values: Vec<T>, vectors: DMatrix<T>, tol_zero: T) -> Self {
        let zero_mode_indices = values
            .iter()
            .enumerate()
            .filter(|(_, e)| Float::abs(**e) < tol_zero)
            .map(|(i, _)| i)
            .collect();
        Self {
            values,
            vectors,
            tol_zero,
            zero_mode_indices,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Eigenvectors as columns, matching [`EigenSystem::values`].
    pub fn vectors(&self) -> &DMatrix<T> {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> Vec<T> {
        self.vectors.column(k).iter().copied().collect()
    }

    pub fn tol_zero(&self) -> T {
        self.tol_zero
    }

    pub fn zero_mode_indices(&self) -> &[usize] {
        &self.zero_mode_indices
    }

    /// Smallest `|E|` that is not classified as a zero mode.
    pub fn smallest_nonzero_abs(&self) -> Option<T> {
        self.values
            .iter()
            .map(|e| Float::abs(*e))
            .filter(|a| *a >= self.tol_zero)
            .fold(None, |m: Option<T>, a| Some(m.map_or(a, |m| Float::min(m, a))))
    }

    /// `max_i |E_i + E_{n−1−i}|`.
    pub fn reflection_defect(&self) -> T {
        let n = self.values.len();
        (0..n).fold(T::zero(), |m, i| {
            Float::max(m, Float::abs(self.values[i] + self.values[n - 1 - i]))
        })
    }

    /// `max_k ‖H v_k − E_k v_k‖₂`.
    pub fn max_residual(&self, h: &SparseOperator<T>) -> T {
        let mut worst = T::zero();
        let mut hv = vec![T::zero(); self.dim()];
        for k in 0..self.dim() {
            let v = self.vector(k);
            h.apply(&v, &mut hv);
            let r: T = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| {
                    let d = *a - self.values[k] * *b;
                    d * d
                })
                .sum();
            worst = Float::max(worst, Float::sqrt(r));
        }
        worst
    }

    /// Index ranges of eigenvalue clusters closer than `tol` to their neighbour.
    pub fn clusters(&self, tol: T) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.values.len() {
            if i == self.values.len() || self.values[i] - self.values[i - 1] > tol {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// Columns `idx` as a dense block.
    pub fn columns(&self, idx: &[usize]) -> DMatrix<T> {
        DMatrix::from_fn(self.dim(), idx.len(), |r, c| self.vectors[(r, idx[c])])
    }

    /// `Vᵀ ψ`.
    pub fn coefficients(&self, psi: &[T]) -> Vec<T> {
        let p = nalgebra::DVector::from_column_slice(psi);
        (self.vectors.transpose() * p).iter().copied().collect()
    }
}

pub fn diagonalize<T: Real>(h: &SparseOperator<T>) -> Result<EigenSystem<T>> {
    diagonalize_with(h, DiagOptions::default())
}

pub fn diagonalize_with<T: Real>(h: &SparseOperator<T>, opts: DiagOptions) -> Result<EigenSystem<T>> {
    if h.dim() > opts.cap {
        return Err(PxpError::CapacityExceeded {
            dim: h.dim(),
            cap: opts.cap,
        });
    }
    let (values, vectors) = symmetric_eigh(h.to_dense());
    Ok(EigenSystem::from_parts(values, vectors, T::lit(opts.tol_zero)))
}

/// Orthonormal basis of the kernel of `H`.
#[derive(Clone, Debug)]
pub struct ZeroModeBasis<T> {
    pub vectors: DMatrix<T>,
}

impl<T: Real> ZeroModeBasis<T> {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    /// `P = V Vᵀ`.
    pub fn projector(&self) -> DMatrix<T> {
        &self.vectors * self.vectors.transpose()
    }
}

pub fn zero_subspace<T: Real>(es: &EigenSystem<T>, tol_zero: T) -> ZeroModeBasis<T> {
    let idx: Vec<usize> = (0..es.dim()).filter(|&i| Float::abs(es.values[i]) < tol_zero).collect();
    ZeroModeBasis {
        vectors: es.columns(&idx),
    }
}

/// A basis of some subspace that diagonalizes an operator there.
#[derive(Clone, Debug)]
pub struct RotatedBasis<T> {
    pub vectors: DMatrix<T>,
    /// `⟨u_k|A|u_k⟩`, ascending.
    pub diagonal: Vec<T>,
}

/// Diagonalizes `Vᵀ A V` and rotates the columns of `v` accordingly.
pub fn rotate_within<T: Real>(v: &DMatrix<T>, a: &SparseOperator<T>) -> RotatedBasis<T> {
    let m = v.ncols();
    if m == 0 {
        return RotatedBasis {
            vectors: v.clone(),
            diagonal: Vec::new(),
        };
    }
    let av = apply_columns(a, v);
    let mut small = v.transpose() * av;
    small = (&small + small.transpose()) * T::lit(0.5);
    let (diagonal, w) = symmetric_eigh(small);
    RotatedBasis {
        vectors: v * w,
        diagonal,
    }
}

pub(crate) fn apply_columns<T: Real>(a: &SparseOperator<T>, v: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(v.nrows(), v.ncols());
    let mut buf = vec![T::zero(); v.nrows()];
    for c in 0..v.ncols() {
        let col: Vec<T> = v.column(c).iter().copied().collect();
        a.apply(&col, &mut buf);
        out.column_mut(c).copy_from_slice(&buf);
    }
    out
}

pub fn rotate_zero_modes<T: Real>(zero: &ZeroModeBasis<T>, a: &SparseOperator<T>) -> RotatedBasis<T> {
    rotate_within(&zero.vectors, a)
}

#[derive(Clone, Debug)]
pub struct SimultaneousZeroModes<T> {
    pub count: usize,
    /// Columns over the full basis.
    pub vectors: DMatrix<T>,
    /// Basis indices where the diagonal term vanishes.
    pub support: Vec<usize>,
    /// Singular values of the restricted flip matrix, descending.
    pub singular_values: Vec<T>,
}

/// Vectors annihilated by both `hz` (diagonal) and `hx`.
///
/// The kernel of `hz` is spanned by the basis states with a zero diagonal
/// entry; the result is the null space of `hx` restricted to those columns.
pub fn simultaneous_zero_modes<T: Real>(
    hz: &SparseOperator<T>,
    hx: &SparseOperator<T>,
) -> Result<SimultaneousZeroModes<T>> {
    if hz.dim() != hx.dim() {
        return Err(PxpError::BasisMismatch {
            expected: hz.dim(),
            found: hx.dim(),
        });
    }
    if !hz.is_diagonal() {
        return Err(PxpError::InvalidParameter("the first operator must be diagonal".into()));
    }
    let diag = hz.diagonal_entries();
    let scale = hz.max_abs();
    if scale == T::zero() {
        return Err(PxpError::InvalidParameter(
            "diagonal term vanishes identically; its kernel is the whole space".into(),
        ));
    }
    let tol = scale * T::lit(1e-12);
    let support: Vec<usize> = (0..hz.dim()).filter(|&i| Float::abs(diag[i]) <= tol).collect();
    let dim = hz.dim();
    let mut row_of = vec![usize::MAX; dim];
    let mut rows = 0;
    let mut entries = Vec::new();
    for (c, &s) in support.iter().enumerate() {
        // Column s of a symmetric operator is its row s.
        for (r, v) in hx.row(s) {
            if row_of[r] == usize::MAX {
                row_of[r] = rows;
                rows += 1;
            }
            entries.push((row_of[r], c, v));
        }
    }
    let mut a = DMatrix::zeros(rows, support.len());
    for (r, c, v) in entries {
        a[(r, c)] += v;
    }
    let (null, singular_values) = null_space(&a, T::lit(NULL_SPACE_CUTOFF));
    let mut vectors = DMatrix::zeros(dim, null.ncols());
    for k in 0..null.ncols() {
        for (c, &s) in support.iter().enumerate() {
            vectors[(s, k)] = null[(c, k)];
        }
    }
    Ok(SimultaneousZeroModes {
        count: null.ncols(),
        vectors,
        support,
        singular_values,
    })
}

/// `−Σ p log p` over a probability vector, natural log, `0 log 0 = 0`.
pub fn shannon_of_probabilities<T: Real>(p: impl IntoIterator<Item = T>) -> T {
    p.into_iter()
        .filter(|&x| x > T::zero())
        .map(|x| -x * Float::ln(x))
        .sum()
}

pub fn shannon_per_eigenstate<T: Real>(es: &EigenSystem<T>) -> Vec<T> {
    (0..es.dim())
        .map(|k| shannon_of_probabilities(es.vectors.column(k).iter().map(|&v| v * v)))
        .collect()
}

/// Parameters identifying a cached eigensystem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheHeader {
    pub legs: u32,
    pub rungs: u32,
    pub delta: f64,
    pub w: f64,
    pub dim: u64,
    pub tol_zero: f64,
    /// Momentum sector, or −1 for the full basis.
    pub sector: i64,
}

const CACHE_MAGIC: &[u8; 8] = b"PXPEIG01";

impl EigenSystem<f64> {
    /// Binary cache: magic, header, eigenvalues then column-major eigenvectors,
    /// all little-endian.
    pub fn write_cache(&self, path: &Path, header: &CacheHeader) -> Result<()> {
        let mut buf = Vec::with_capacity(64 + 8 * self.dim() * (self.dim() + 1));
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&header.legs.to_le_bytes());
        buf.extend_from_slice(&header.rungs.to_le_bytes());
        buf.extend_from_slice(&header.delta.to_le_bytes());
        buf.extend_from_slice(&header.w.to_le_bytes());
        buf.extend_from_slice(&header.dim.to_le_bytes());
        buf.extend_from_slice(&header.tol_zero.to_le_bytes());
        buf.extend_from_slice(&header.sector.to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.vectors.as_slice() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)?.write_all(&buf)?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<(CacheHeader, Self)> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let bad = |m: &str| PxpError::Parse(format!("{}: {m}", path.display()));
        if bytes.len() < 56 || &bytes[..8] != CACHE_MAGIC {
            return Err(bad("not an eigensystem cache"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let header = CacheHeader {
            legs: u32_at(8),
            rungs: u32_at(12),
            delta: f64_at(16),
            w: f64_at(24),
            dim: u64_at(32),
            tol_zero: f64_at(40),
            sector: u64_at(48) as i64,
        };
        let n = header.dim as usize;
        let need = 56 + 8 * n * (n + 1);
        if bytes.len() != need {
            return Err(bad("truncated payload"));
        }
        let values: Vec<f64> = (0..n).map(|i| f64_at(56 + 8 * i)).collect();
        let base = 56 + 8 * n;
        let data: Vec<f64> = (0..n * n).map(|i| f64_at(base + 8 * i)).collect();
        let vectors = DMatrix::from_column_slice(n, n, &data);
        Ok((header, Self::from_parts(values, vectors, header.tol_zero)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{enumerate_basis, Geometry};
    use crate::operators::{build_hamiltonian, build_hx, build_hz, ModelParams};

    fn h_ladder(l: usize, delta: f64) -> SparseOperator<f64> {
        let basis = enumerate_basis(&Geometry::ladder(l).unwrap()).unwrap();
        build_hamiltonian(&basis, &ModelParams::new(delta))
    }

    #[test]
    fn n4_spectrum() {
        let es = diagonalize(&h_ladder(2, 1.0)).unwrap();
        let expected = [-10f64.sqrt(), -6f64.sqrt(), 0.0, 0.0, 0.0, 6f64.sqrt(), 10f64.sqrt()];
        for (a, b) in es.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(es.zero_mode_indices().len(), 3);
    }

    #[test]
    fn hz_only_returns_sorted_diagonal() {
        let basis = enumerate_basis(&Geometry::ladder(4).unwrap()).unwrap();
        let hz = build_hz(&basis, 1.0);
        let es = diagonalize(&hz).unwrap();
        let mut d = hz.diagonal_entries();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(es.values(), d.as_slice());
    }

    #[test]
    fn cap_enforced() {
        let h = h_ladder(4, 0.5);
        let err = diagonalize_with(&h, DiagOptions { cap: 10, tol_zero: 1e-8 }).unwrap_err();
        assert!(matches!(err, PxpError::CapacityExceeded { dim: 35, cap: 10 }));
    }

    #[test]
    fn kernel_dimension_independent_of_delta() {
        let a = diagonalize(&h_ladder(4, 0.3)).unwrap();
        let b = diagonalize(&h_ladder(4, 0.9)).unwrap();
        assert_eq!(a.zero_mode_indices().len(), b.zero_mode_indices().len());
        assert!(a.reflection_defect() < 1e-9);
    }

    #[test]
    fn n4_simultaneous_zero_mode() {
        let basis = enumerate_basis(&Geometry::ladder(2).unwrap()).unwrap();
        let z = simultaneous_zero_modes(&build_hz(&basis, 1.0), &build_hx(&basis, 1.0)).unwrap();
        assert_eq!(z.count, 1);
        // Plaquette labels: F0 = vacuum, F5 = {(1,1),(2,2)}, F6 = {(2,1),(1,2)}.
        let f0 = basis.index_of(0).unwrap();
        let f5 = basis.index_of(0b1001).unwrap();
        let f6 = basis.index_of(0b0110).unwrap();
        let v = z.vectors.column(0);
        let s = v[f0].signum();
        let third = 1.0 / 3f64.sqrt();
        assert!((s * v[f0] - third).abs() < 1e-12);
        assert!((s * v[f5] + third).abs() < 1e-12);
        assert!((s * v[f6] + third).abs() < 1e-12);
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_of_probabilities([1.0, 0.0, 0.0]), 0.0);
        let u = shannon_of_probabilities(vec![1.0 / 7.0; 7]);
        assert!((u - 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rotation_keeps_projector() {
        let basis = enumerate_basis(&Geometry::ladder(4).unwrap()).unwrap();
        let h = build_hamiltonian(&basis, &ModelParams::new(0.4));
        let es = diagonalize(&h).unwrap();
        let zb = zero_subspace(&es, 1e-8);
        let a = crate::operators::build_imbalance(&basis, crate::operators::Imbalance::IzZ2).unwrap();
        let rot = rotate_zero_modes(&zb, &a);
        let rb = ZeroModeBasis { vectors: rot.vectors.clone() };
        assert!((zb.projector() - rb.projector()).amax() < 1e-9);
        let inner = rot.vectors.transpose() * apply_columns(&a, &rot.vectors);
        for i in 0..inner.nrows() {
            for j in 0..inner.ncols() {
                if i != j {
                    assert!(inner[(i, j)].abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn cache_round_trip() {
        let es = diagonalize(&h_ladder(2, 0.8)).unwrap();
        let dir = std::env::temp_dir().join(format!("pxp-cache-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("eig.bin");
        let header = CacheHeader {
            legs: 2,
            rungs: 2,
            delta: 0.8,
            w: 1.0,
            dim: 7,
            tol_zero: 1e-8,
            sector: -1,
        };
        es.write_cache(&path, &header).unwrap();
        let (h2, es2) = EigenSystem::read_cache(&path).unwrap();
        assert_eq!(h2, header);
        assert_eq!(es2.values(), es.values());
        assert_eq!(es2.vectors(), es.vectors());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
