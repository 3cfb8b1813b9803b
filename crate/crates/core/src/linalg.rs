//! Thin wrappers over `nalgebra` dense factorizations with the conventions the
//! rest of the crate expects (ascending order, column eigenvectors).

use nalgebra::{ComplexField, DMatrix, SymmetricEigen, SVD};
use num_traits::Float;

use crate::scalar::Real;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending, eigenvectors
/// as matching columns.
pub fn symmetric_eigh<T: Real>(m: DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues (ascending) of a Hermitian matrix over any `nalgebra` field.
pub fn hermitian_eigenvalues<F: ComplexField>(m: DMatrix<F>) -> Vec<F::RealField>
where
    F::RealField: PartialOrd,
{
    let mut v: Vec<F::RealField> = SymmetricEigen::new(m).eigenvalues.iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Orthonormal null space of `a` via singular value decomposition.
///
/// Singular values below `rel_cutoff · σ_max` count as zero. Wide inputs are
/// padded with zero rows so the right singular basis is complete. Returns the
/// null-space columns and the singular values in descending order.
pub fn null_space<T: Real>(a: &DMatrix<T>, rel_cutoff: T) -> (DMatrix<T>, Vec<T>) {
    let n = a.ncols();
    if n == 0 {
        return (DMatrix::zeros(0, 0), Vec::new());
    }
    let padded;
    let a = if a.nrows() < n {
        padded = a.clone().resize_vertically(n, T::zero());
        &padded
    } else {
        a
    };
    let svd = SVD::new(a.clone(), false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].partial_cmp(&svd.singular_values[x]).unwrap());
    let sv: Vec<T> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or_else(T::zero);
    let cutoff = rel_cutoff * smax;
    let null: Vec<usize> = order.iter().copied().filter(|&i| svd.singular_values[i] <= cutoff).collect();
    let basis = DMatrix::from_fn(n, null.len(), |r, c| v_t[(null[c], r)]);
    (basis, sv)
}

/// Maximum absolute entry of `VᵀV − I`.
pub fn orthonormality_defect<T: Real>(v: &DMatrix<T>) -> T {
    let g = v.transpose() * v;
    let mut worst = T::zero();
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = Float::max(worst, Float::abs(g[(i, j)] - target));
        }
    }
    worst
}
