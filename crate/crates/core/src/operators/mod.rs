//! Hamiltonian, local operators, imbalance operators and symmetry maps over a
//! constrained basis.

mod sector;
mod sparse;
mod symmetry;

use serde::{Deserialize, Serialize};

pub use sector::{embed_vector, project_operator, project_vector};
pub use sparse::SparseOperator;
pub use symmetry::{build_symmetry, translation, SymmetryKind, SymmetryMap};

use crate::error::{PxpError, Result};
use crate::hilbert::Basis;
use crate::scalar::Scalar;

/// Staggered detuning `delta` and flip amplitude `w` (units of `w`, so `w = 1`
/// by default).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub delta: T,
    pub w: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(delta: T) -> Self {
        Self { delta, w: T::one() }
    }
}

#[inline]
fn stagger(j: usize) -> i64 {
    if j % 2 == 0 {
        1
    } else {
        -1
    }
}

#[inline]
fn sigma_z(state: u64, bit: usize) -> i64 {
    if state >> bit & 1 == 1 {
        1
    } else {
        -1
    }
}

/// Diagonal part `−Δ Σ (−1)^j σᶻ_{j,a}`.
pub fn build_hz<T: Scalar>(basis: &Basis, delta: T) -> SparseOperator<T> {
    let g = *basis.geometry();
    let diag = basis
        .states()
        .iter()
        .map(|&s| {
            let m: i64 = (0..g.n_sites())
                .map(|b| stagger(g.coords(b).0) * sigma_z(s, b))
                .sum();
            -delta * T::from_i64_exact(m)
        })
        .collect();
    SparseOperator::diagonal(diag)
}

/// Off-diagonal part `−w Σ σ̃ˣ_{j,a}`.
pub fn build_hx<T: Scalar>(basis: &Basis, w: T) -> SparseOperator<T> {
    let coef = vec![-w; basis.geometry().n_sites()];
    weighted_flips(basis, &coef)
}

pub fn build_hamiltonian<T: Scalar>(basis: &Basis, params: &ModelParams<T>) -> SparseOperator<T> {
    build_hz(basis, params.delta)
        .add(&build_hx(basis, params.w))
        .expect("same basis")
}

/// `Σ_b coef[b] σ̃ˣ_b` over the constrained basis.
fn weighted_flips<T: Scalar>(basis: &Basis, coef: &[T]) -> SparseOperator<T> {
    let nb = basis.neighbors();
    let mut trip = Vec::new();
    for (i, &s) in basis.states().iter().enumerate() {
        for (b, &c) in coef.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let occupied = s >> b & 1 == 1;
            if !occupied && s & nb[b] != 0 {
                continue;
            }
            let t = s ^ (1u64 << b);
            let j = basis.index_of(t).expect("allowed flip stays in the basis");
            trip.push((i, j, c));
        }
    }
    SparseOperator::from_triplets(basis.dim(), trip, true)
}

/// `Σ_b coef[b] σᶻ_b`, diagonal.
fn weighted_sigma_z<T: Scalar>(basis: &Basis, coef: &[T]) -> SparseOperator<T> {
    let diag = basis
        .states()
        .iter()
        .map(|&s| {
            coef.iter()
                .enumerate()
                .fold(T::zero(), |acc, (b, &c)| acc + c * T::from_i64_exact(sigma_z(s, b)))
        })
        .collect();
    SparseOperator::diagonal(diag)
}

pub fn local_sigma_z<T: Scalar>(basis: &Basis, j: usize, a: usize) -> Result<SparseOperator<T>> {
    let b = basis.geometry().site(j, a)?;
    let mut coef = vec![T::zero(); basis.geometry().n_sites()];
    coef[b] = T::one();
    Ok(weighted_sigma_z(basis, &coef))
}

/// Projected flip `P↓ P↓ P↓ σˣ` at site `(j, a)`.
pub fn local_sigma_x_tilde<T: Scalar>(basis: &Basis, j: usize, a: usize) -> Result<SparseOperator<T>> {
    let b = basis.geometry().site(j, a)?;
    let mut coef = vec![T::zero(); basis.geometry().n_sites()];
    coef[b] = T::one();
    Ok(weighted_flips(basis, &coef))
}

/// σᶻ diagonals for every site in bit order, as integers ±1.
pub fn sigma_z_table(basis: &Basis) -> Vec<Vec<i8>> {
    let n = basis.geometry().n_sites();
    (0..n)
        .map(|b| basis.states().iter().map(|&s| sigma_z(s, b) as i8).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Imbalance {
    IzZ2,
    IxZ2,
    IxVac,
}

impl Imbalance {
    pub const ALL: [Imbalance; 3] = [Imbalance::IzZ2, Imbalance::IxZ2, Imbalance::IxVac];

    pub fn label(self) -> &'static str {
        match self {
            Imbalance::IzZ2 => "Iz_Z2",
            Imbalance::IxZ2 => "Ix_Z2",
            Imbalance::IxVac => "Ix_vac",
        }
    }

    /// Sign of site `(j, a)` in the `L × 2` sign-matrix form, row index `a`.
    pub fn sign_pattern(self, j: usize, a: usize) -> i64 {
        let odd = j % 2 == 1;
        match (self, a) {
            (Imbalance::IzZ2, 1) => if odd { 1 } else { -1 },
            (Imbalance::IzZ2, _) => if odd { -1 } else { 1 },
            (Imbalance::IxZ2, 1) => -1,
            (Imbalance::IxZ2, _) => 1,
            (Imbalance::IxVac, _) => if odd { 1 } else { -1 },
        }
    }
}

impl std::str::FromStr for Imbalance {
    type Err = PxpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Iz_Z2" | "iz_z2" => Ok(Imbalance::IzZ2),
            "Ix_Z2" | "ix_z2" => Ok(Imbalance::IxZ2),
            "Ix_vac" | "ix_vac" => Ok(Imbalance::IxVac),
            other => Err(PxpError::Parse(format!("unknown imbalance operator {other:?}"))),
        }
    }
}

/// Imbalance operators, assembled cell by cell over rungs `(2c−1, 2c)`.
pub fn build_imbalance<T: Scalar>(basis: &Basis, which: Imbalance) -> Result<SparseOperator<T>> {
    let g = *basis.geometry();
    if !g.is_ladder() {
        return Err(PxpError::UnsupportedGeometry(
            "imbalance operators are defined on the two-leg ladder".into(),
        ));
    }
    let inv_l = T::one() / T::from_i64_exact(g.rungs as i64);
    let mut coef = vec![T::zero(); g.n_sites()];
    // Cell weights for (odd rung, leg 1), (even, 1), (odd, 2), (even, 2).
    let cell: [i64; 4] = match which {
        Imbalance::IzZ2 => [1, -1, -1, 1],
        Imbalance::IxZ2 => [-1, -1, 1, 1],
        Imbalance::IxVac => [1, -1, 1, -1],
    };
    for c in 1..=g.rungs / 2 {
        let sites = [(2 * c - 1, 1), (2 * c, 1), (2 * c - 1, 2), (2 * c, 2)];
        for (&(j, a), &w) in sites.iter().zip(cell.iter()) {
            coef[g.site_unchecked(j, a)] = T::from_i64_exact(w) * inv_l;
        }
    }
    Ok(match which {
        Imbalance::IzZ2 => weighted_sigma_z(basis, &coef),
        _ => weighted_flips(basis, &coef),
    })
}

/// The same operator assembled from the sign-matrix description.
pub fn build_imbalance_from_signs<T: Scalar>(basis: &Basis, which: Imbalance) -> Result<SparseOperator<T>> {
    let g = *basis.geometry();
    if !g.is_ladder() {
        return Err(PxpError::UnsupportedGeometry(
            "imbalance operators are defined on the two-leg ladder".into(),
        ));
    }
    let inv_l = T::one() / T::from_i64_exact(g.rungs as i64);
    let coef: Vec<T> = g
        .sites()
        .map(|(j, a)| T::from_i64_exact(which.sign_pattern(j, a)) * inv_l)
        .collect();
    Ok(match which {
        Imbalance::IzZ2 => weighted_sigma_z(basis, &coef),
        _ => weighted_flips(basis, &coef),
    })
}

/// Longitudinal magnetization density `(1/N) Σ σᶻ`.
pub fn mz_density<T: Scalar>(basis: &Basis) -> SparseOperator<T> {
    let n = basis.geometry().n_sites();
    let coef = vec![T::one() / T::from_i64_exact(n as i64); n];
    weighted_sigma_z(basis, &coef)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{enumerate_basis, named_state, Geometry, NamedState};
    use num_rational::Ratio;

    fn ladder(l: usize) -> Basis {
        enumerate_basis(&Geometry::ladder(l).unwrap()).unwrap()
    }

    #[test]
    fn product_states_have_zero_energy() {
        let basis = ladder(4);
        for delta in [0.0, 0.5, 1.0] {
            let h = build_hamiltonian(&basis, &ModelParams::new(delta));
            for name in [NamedState::Z2, NamedState::Vac] {
                let i = basis.index_of(named_state(&name, basis.geometry()).unwrap()).unwrap();
                assert_eq!(h.get(i, i), 0.0);
            }
        }
    }

    #[test]
    fn hx_on_vacuum() {
        let basis = ladder(4);
        let hx = build_hx(&basis, 1.0);
        let row: Vec<_> = hx.row(0).collect();
        assert_eq!(row.len(), 8);
        for (j, v) in row {
            assert_eq!(basis.state(j).count_ones(), 1);
            assert_eq!(v, -1.0);
        }
    }

    #[test]
    fn hamiltonian_is_exact_sum() {
        let basis = ladder(4);
        let p = ModelParams::new(Ratio::new(7i64, 10));
        let h = build_hamiltonian(&basis, &p);
        assert!(h.check_symmetric());
        let diff = h
            .sub(&build_hz(&basis, p.delta).add(&build_hx(&basis, p.w)).unwrap())
            .unwrap();
        assert_eq!(diff.nnz(), 0);
    }

    #[test]
    fn local_operators() {
        let basis = ladder(4);
        let g = *basis.geometry();
        let sz: SparseOperator<i64> = local_sigma_z(&basis, 2, 1).unwrap();
        assert_eq!(sz.get(0, 0), -1);
        let sx: SparseOperator<i64> = local_sigma_x_tilde(&basis, 1, 1).unwrap();
        let single = basis.index_of(1 << g.site(1, 1).unwrap()).unwrap();
        assert_eq!(sx.get(single, 0), 1);
        let z2 = named_state(&NamedState::Z2, &g).unwrap();
        let down = z2 & !(1 << g.site(1, 1).unwrap());
        assert_eq!(sx.get(basis.index_of(down).unwrap(), basis.index_of(z2).unwrap()), 1);
        assert!(matches!(
            local_sigma_z::<f64>(&basis, 5, 1),
            Err(PxpError::InvalidSite { .. })
        ));
        assert!(local_sigma_x_tilde::<f64>(&basis, 1, 3).is_err());
    }

    #[test]
    fn flip_squares_to_projector() {
        let basis = ladder(4);
        for (j, a) in basis.geometry().sites().collect::<Vec<_>>() {
            let sx: SparseOperator<i64> = local_sigma_x_tilde(&basis, j, a).unwrap();
            let sq = sx.matmul(&sx).unwrap();
            assert!(sq.is_diagonal());
            assert!(sq.triplets().all(|(_, _, v)| v == 1));
        }
    }

    #[test]
    fn imbalance_values() {
        let basis = ladder(4);
        let g = *basis.geometry();
        let iz: SparseOperator<Ratio<i64>> = build_imbalance(&basis, Imbalance::IzZ2).unwrap();
        let z2 = basis.index_of(named_state(&NamedState::Z2, &g).unwrap()).unwrap();
        assert_eq!(iz.get(z2, z2), Ratio::from_integer(2));
        assert_eq!(iz.get(0, 0), Ratio::from_integer(0));
        let ixv: SparseOperator<Ratio<i64>> = build_imbalance(&basis, Imbalance::IxVac).unwrap();
        assert!(ixv.diagonal_entries().iter().all(|v| *v == Ratio::from_integer(0)));
        for which in Imbalance::ALL {
            let op: SparseOperator<Ratio<i64>> = build_imbalance(&basis, which).unwrap();
            assert_eq!(op.trace(), Ratio::from_integer(0));
        }
    }

    #[test]
    fn sign_matrices_agree_with_cell_forms() {
        for l in [2, 4, 6] {
            let basis = ladder(l);
            for which in Imbalance::ALL {
                let a: SparseOperator<Ratio<i64>> = build_imbalance(&basis, which).unwrap();
                let b: SparseOperator<Ratio<i64>> = build_imbalance_from_signs(&basis, which).unwrap();
                assert_eq!(a, b, "{which:?} at L={l}");
            }
        }
    }

    #[test]
    fn imbalance_rejects_chain() {
        let basis = enumerate_basis(&Geometry::chain(6).unwrap()).unwrap();
        assert!(build_imbalance::<f64>(&basis, Imbalance::IzZ2).is_err());
    }
}
