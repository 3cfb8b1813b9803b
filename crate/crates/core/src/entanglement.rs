//! Bipartite entanglement for the leg-parallel and rung-perpendicular cuts.
//!
//! Subsystem bases contain only configurations that actually occur in the
//! constrained basis.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{PxpError, Result};
use crate::hilbert::Basis;
use crate::linalg::hermitian_eigenvalues;
use crate::scalar::Real;
use crate::spectra::shannon_of_probabilities;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CutKind {
    /// `A` = the whole leg `a = 1`.
    Parallel,
    /// `A` = rungs `1..=L/2`.
    Perpendicular,
}

#[derive(Clone, Debug)]
pub struct Bipartition {
    pub kind: CutKind,
    pub a_mask: u64,
    pub b_mask: u64,
    a_configs: Vec<u64>,
    b_configs: Vec<u64>,
    /// `(A index, B index)` of every basis state.
    pairs: Vec<(u32, u32)>,
}

impl Bipartition {
    pub fn a_configs(&self) -> &[u64] {
        &self.a_configs
    }

    pub fn b_configs(&self) -> &[u64] {
        &self.b_configs
    }

    pub fn dim_a(&self) -> usize {
        self.a_configs.len()
    }

    pub fn dim_b(&self) -> usize {
        self.b_configs.len()
    }

    pub fn pair(&self, basis_idx: usize) -> (usize, usize) {
        let (a, b) = self.pairs[basis_idx];
        (a as usize, b as usize)
    }

    /// Amplitude matrix `M[a, b] = ψ(a ⊕ b)`.
    pub fn amplitude_matrix<T: Real>(&self, psi: &[Complex<T>]) -> Result<DMatrix<Complex<T>>> {
        if psi.len() != self.pairs.len() {
            return Err(PxpError::BasisMismatch {
                expected: self.pairs.len(),
                found: psi.len(),
            });
        }
        let mut m = DMatrix::from_element(self.dim_a(), self.dim_b(), Complex::new(T::zero(), T::zero()));
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            m[(a as usize, b as usize)] = psi[i];
        }
        Ok(m)
    }
}

pub fn build_bipartition(basis: &Basis, kind: CutKind) -> Result<Bipartition> {
    let g = *basis.geometry();
    let a_mask = match kind {
        CutKind::Parallel => {
            if !g.is_ladder() {
                return Err(PxpError::UnsupportedGeometry(
                    "the chain supports only the perpendicular cut".into(),
                ));
            }
            (1..=g.rungs).fold(0u64, |m, j| m | 1 << g.site_unchecked(j, 1))
        }
        CutKind::Perpendicular => {
            let bits = g.legs * g.rungs / 2;
            (1u64 << bits) - 1
        }
    };
    let b_mask = g.full_mask() & !a_mask;
    let mut a_configs: Vec<u64> = basis.states().iter().map(|s| s & a_mask).collect();
    let mut b_configs: Vec<u64> = basis.states().iter().map(|s| s & b_mask).collect();
    a_configs.sort_unstable();
    a_configs.dedup();
    b_configs.sort_unstable();
    b_configs.dedup();
    let pairs = basis
        .states()
        .iter()
        .map(|s| {
            let a = a_configs.binary_search(&(s & a_mask)).unwrap() as u32;
            let b = b_configs.binary_search(&(s & b_mask)).unwrap() as u32;
            (a, b)
        })
        .collect();
    Ok(Bipartition {
        kind,
        a_mask,
        b_mask,
        a_configs,
        b_configs,
        pairs,
    })
}

/// `ρ_A = M M†`.
pub fn reduced_density<T: Real>(psi: &[Complex<T>], bip: &Bipartition) -> Result<DMatrix<Complex<T>>> {
    let m = bip.amplitude_matrix(psi)?;
    Ok(&m * m.adjoint())
}

/// `ρ_B = Mᵀ M*`, the complementary reduced state.
pub fn reduced_density_b<T: Real>(psi: &[Complex<T>], bip: &Bipartition) -> Result<DMatrix<Complex<T>>> {
    let m = bip.amplitude_matrix(psi)?.transpose();
    Ok(&m * m.adjoint())
}

/// Eigenvalues of a density matrix after the trace check, negatives clipped.
pub fn density_spectrum<T: Real>(rho: &DMatrix<Complex<T>>) -> Result<Vec<T>> {
    let trace: T = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
    if Float::abs(trace - T::one()) > T::lit(1e-8) {
        return Err(PxpError::TraceNotNormalized { trace: trace.as_f64() });
    }
    let herm = (rho + rho.adjoint()) * Complex::new(T::lit(0.5), T::zero());
    Ok(hermitian_eigenvalues(herm)
        .into_iter()
        .map(|l| if l < T::zero() { T::zero() } else { l })
        .collect())
}

/// `−Tr ρ log ρ`, natural log.
pub fn vn_entropy<T: Real>(rho: &DMatrix<Complex<T>>) -> Result<T> {
    Ok(shannon_of_probabilities(density_spectrum(rho)?))
}

/// Entanglement entropy of `psi` across `bip`.
pub fn entanglement_entropy<T: Real>(psi: &[Complex<T>], bip: &Bipartition) -> Result<T> {
    let (a, b) = (bip.dim_a(), bip.dim_b());
    // The smaller side gives the cheaper spectrum.
    if a <= b {
        vn_entropy(&reduced_density(psi, bip)?)
    } else {
        vn_entropy(&reduced_density_b(psi, bip)?)
    }
}
