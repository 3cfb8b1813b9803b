use serde::{Deserialize, Serialize};

use super::SparseOperator;
use crate::error::{PxpError, Result};
use crate::hilbert::Basis;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryKind {
    /// Translation by one rung, `j → j + 1`.
    Tx,
    /// Leg exchange.
    Ty,
    /// Exchange of the two sites on every rung; on two legs this coincides with `Ty`.
    Rx,
    /// `Π σᶻ`, sign `(−1)^(number of down spins)`.
    C,
    /// `T_x C`.
    C1,
    /// `T_x T_y C`.
    C2,
    /// Any product of the above.
    Composite,
}

/// Signed permutation: `S|i⟩ = sign[i] |perm[i]⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryMap {
    pub kind: SymmetryKind,
    perm: Vec<usize>,
    sign: Vec<i8>,
}

impl SymmetryMap {
    pub fn identity(dim: usize) -> Self {
        Self {
            kind: SymmetryKind::Composite,
            perm: (0..dim).collect(),
            sign: vec![1; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.sign
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SymmetryMap) -> SymmetryMap {
        assert_eq!(self.dim(), other.dim());
        let perm = other.perm.iter().map(|&p| self.perm[p]).collect();
        let sign = other
            .perm
            .iter()
            .zip(&other.sign)
            .map(|(&p, &s)| s * self.sign[p])
            .collect();
        SymmetryMap {
            kind: SymmetryKind::Composite,
            perm,
            sign,
        }
    }

    pub fn inverse(&self) -> SymmetryMap {
        let mut perm = vec![0; self.dim()];
        let mut sign = vec![1; self.dim()];
        for (i, (&p, &s)) in self.perm.iter().zip(&self.sign).enumerate() {
            perm[p] = i;
            sign[p] = s;
        }
        SymmetryMap {
            kind: SymmetryKind::Composite,
            perm,
            sign,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p) && self.sign.iter().all(|&s| s == 1)
    }

    /// Same signed permutation, ignoring the kind tag.
    pub fn same_action(&self, other: &SymmetryMap) -> bool {
        self.perm == other.perm && self.sign == other.sign
    }

    pub fn apply<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); x.len()];
        for (i, (&p, &s)) in self.perm.iter().zip(&self.sign).enumerate() {
            out[p] = if s < 0 { -x[i] } else { x[i] };
        }
        out
    }

    /// `S O S⁻¹`.
    pub fn conjugate<T: Scalar>(&self, op: &SparseOperator<T>) -> SparseOperator<T> {
        let trip = op
            .triplets()
            .map(|(i, j, v)| {
                let s = self.sign[i] * self.sign[j];
                (self.perm[i], self.perm[j], if s < 0 { -v } else { v })
            })
            .collect();
        SparseOperator::from_triplets(op.dim(), trip, op.is_symmetric_flag())
    }

    /// `‖S O S⁻¹ + O‖_max`; zero when `S` anticommutes with `O`.
    pub fn anticommutator_max<T: Scalar>(&self, op: &SparseOperator<T>) -> T {
        self.conjugate(op).add(op).expect("same basis").max_abs()
    }

    /// `‖S O S⁻¹ − O‖_max`; zero when `S` commutes with `O`.
    pub fn commutator_max<T: Scalar>(&self, op: &SparseOperator<T>) -> T {
        self.conjugate(op).sub(op).expect("same basis").max_abs()
    }
}

fn from_state_map(basis: &Basis, kind: SymmetryKind, f: impl Fn(u64) -> (u64, i8)) -> SymmetryMap {
    let (perm, sign) = basis
        .states()
        .iter()
        .map(|&s| {
            let (t, sg) = f(s);
            (basis.index_of(t).expect("symmetry preserves the blockade"), sg)
        })
        .unzip();
    SymmetryMap { kind, perm, sign }
}

/// Translation by `shift` rungs.
pub fn translation(basis: &Basis, shift: usize) -> SymmetryMap {
    let g = *basis.geometry();
    from_state_map(basis, SymmetryKind::Composite, |s| (g.translate(s, shift), 1))
}

pub fn build_symmetry(basis: &Basis, kind: SymmetryKind) -> Result<SymmetryMap> {
    let g = *basis.geometry();
    let needs_ladder = matches!(kind, SymmetryKind::Ty | SymmetryKind::Rx | SymmetryKind::C2);
    if needs_ladder && !g.is_ladder() {
        return Err(PxpError::UnsupportedGeometry(format!("{kind:?} needs the two-leg ladder")));
    }
    let n = g.n_sites() as u32;
    let chirality = |s: u64| -> i8 {
        if (n - s.count_ones()) % 2 == 0 {
            1
        } else {
            -1
        }
    };
    Ok(match kind {
        SymmetryKind::Tx => from_state_map(basis, kind, |s| (g.translate(s, 1), 1)),
        SymmetryKind::Ty | SymmetryKind::Rx => from_state_map(basis, kind, |s| (g.swap_legs(s), 1)),
        SymmetryKind::C => from_state_map(basis, kind, |s| (s, chirality(s))),
        SymmetryKind::C1 => from_state_map(basis, kind, |s| (g.translate(s, 1), chirality(s))),
        SymmetryKind::C2 => {
            from_state_map(basis, kind, |s| (g.swap_legs(g.translate(s, 1)), chirality(s)))
        }
        SymmetryKind::Composite => {
            return Err(PxpError::InvalidParameter(
                "composite maps are built by composition".into(),
            ))
        }
    })
}
