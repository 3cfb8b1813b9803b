use super::SparseOperator;
use crate::error::{PxpError, Result};
use crate::hilbert::{Basis, MomentumSector};
use crate::scalar::Real;

fn check(basis: &Basis, sector: &MomentumSector) -> Result<()> {
    if basis.dim() != sector.parent_dim() {
        return Err(PxpError::BasisMismatch {
            expected: sector.parent_dim(),
            found: basis.dim(),
        });
    }
    if !sector.has_real_character() {
        return Err(PxpError::InvalidParameter(format!(
            "sector k={} has a complex character; only real sectors are projected",
            sector.k()
        )));
    }
    Ok(())
}

/// Restricts a translation-invariant symmetric operator to a momentum sector:
/// `⟨ã|O|b̃⟩ = √(p_b/p_a) Σ_{c ∈ orbit(a)} χ(l_c) O_{c b}`.
pub fn project_operator<T: Real>(
    op: &SparseOperator<T>,
    basis: &Basis,
    sector: &MomentumSector,
) -> Result<SparseOperator<T>> {
    check(basis, sector)?;
    if op.dim() != basis.dim() {
        return Err(PxpError::BasisMismatch {
            expected: basis.dim(),
            found: op.dim(),
        });
    }
    if !op.is_symmetric_flag() {
        return Err(PxpError::InvalidParameter("sector projection needs a symmetric operator".into()));
    }
    let periods = sector.periods();
    let mut trip = Vec::new();
    for (b, &rep) in sector.representatives().iter().enumerate() {
        let full_b = basis.index_of(rep).expect("representative in parent basis");
        // Row of a symmetric operator doubles as its column.
        for (c, v) in op.row(full_b) {
            if let Some((a, shift)) = sector.lookup(c) {
                let ratio = T::lit((periods[b] as f64 / periods[a] as f64).sqrt());
                trip.push((a, b, v * ratio * T::lit(sector.character_sign(shift))));
            }
        }
    }
    Ok(SparseOperator::from_triplets(sector.dim(), trip, true))
}

/// `⟨ã|ψ⟩` for every representative `a`.
pub fn project_vector<T: Real>(psi: &[T], basis: &Basis, sector: &MomentumSector) -> Result<Vec<T>> {
    check(basis, sector)?;
    let mut out = vec![T::zero(); sector.dim()];
    for (c, &amp) in psi.iter().enumerate() {
        if let Some((a, shift)) = sector.lookup(c) {
            out[a] += amp * T::lit(sector.character_sign(shift));
        }
    }
    for (a, v) in out.iter_mut().enumerate() {
        *v /= T::lit((sector.periods()[a] as f64).sqrt());
    }
    Ok(out)
}

/// Expands sector coefficients back to the parent basis.
pub fn embed_vector<T: Real>(v: &[T], basis: &Basis, sector: &MomentumSector) -> Result<Vec<T>> {
    check(basis, sector)?;
    let mut out = vec![T::zero(); basis.dim()];
    for (c, slot) in out.iter_mut().enumerate() {
        if let Some((a, shift)) = sector.lookup(c) {
            *slot = v[a] * T::lit(sector.character_sign(shift)) / T::lit((sector.periods()[a] as f64).sqrt());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_sector, enumerate_basis, Geometry};
    use crate::operators::{build_hamiltonian, ModelParams};

    #[test]
    fn embed_and_project_round_trip() {
        let basis = enumerate_basis(&Geometry::ladder(6).unwrap()).unwrap();
        let sector = build_sector(&basis, 0).unwrap();
        let v: Vec<f64> = (0..sector.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let full = embed_vector(&v, &basis, &sector).unwrap();
        let n_full: f64 = full.iter().map(|x| x * x).sum();
        let n_sec: f64 = v.iter().map(|x| x * x).sum();
        assert!((n_full - n_sec).abs() < 1e-12);
        let back = project_vector(&full, &basis, &sector).unwrap();
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn projected_operator_matches_embedded_action() {
        let basis = enumerate_basis(&Geometry::ladder(8).unwrap()).unwrap();
        let h = build_hamiltonian(&basis, &ModelParams::new(0.6));
        for k in [0, 2] {
            let sector = build_sector(&basis, k).unwrap();
            let hk = project_operator(&h, &basis, &sector).unwrap();
            assert!(hk.to_dense().iter().zip(hk.to_dense().transpose().iter()).all(|(a, b): (&f64, &f64)| (a - b).abs() < 1e-12));
            let v: Vec<f64> = (0..sector.dim()).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
            let mut hv = vec![0.0; sector.dim()];
            hk.apply(&v, &mut hv);
            let full = embed_vector(&v, &basis, &sector).unwrap();
            let mut hfull = vec![0.0; basis.dim()];
            h.apply(&full, &mut hfull);
            let expected = embed_vector(&hv, &basis, &sector).unwrap();
            for (a, b) in hfull.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10, "k={k}");
            }
        }
    }

    #[test]
    fn complex_sector_rejected() {
        let basis = enumerate_basis(&Geometry::ladder(8).unwrap()).unwrap();
        let sector = build_sector(&basis, 1).unwrap();
        let h = build_hamiltonian(&basis, &ModelParams::new(0.5));
        assert!(project_operator(&h, &basis, &sector).is_err());
    }
}
