//! Infinite-temperature averages and diagonal-ensemble long-time averages.
//!
//! The diagonal ensemble is evaluated cluster by cluster: inside every
//! degenerate energy cluster (the zero-mode subspace included) the observable
//! is diagonalized first, so the weights do not depend on the arbitrary
//! eigenvector basis returned by the eigensolver.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PxpError, Result};
use crate::format::fmt12;
use crate::hilbert::{build_sector, enumerate_basis, named_vector, Geometry, NamedState};
use crate::operators::{
    build_hamiltonian, build_imbalance, project_operator, project_vector, Imbalance, ModelParams, SparseOperator,
};
use crate::scalar::{Real, Scalar};
use crate::spectra::{diagonalize_with, rotate_within, DiagOptions, EigenSystem, DEFAULT_TOL_DEGENERATE};

/// `Tr A / 𝒟`.
pub fn thermal_beta0<T: Scalar>(a: &SparseOperator<T>) -> T {
    let dim = T::from_usize(a.dim()).expect("dimension representable");
    a.trace() / dim
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagonalEnsembleResult<T> {
    pub total: T,
    /// Contribution of the nonzero-energy eigenstates.
    pub nonzero_part: T,
    /// Contribution of the zero-mode subspace.
    pub zero_part: T,
    /// `|⟨ψ₀|E_μ⟩|²` in the cluster-rotated eigenbasis, in eigenvalue order.
    pub weights: Vec<T>,
    /// `⟨E_μ|A|E_μ⟩` in the same basis.
    pub diagonal: Vec<T>,
}

/// Long-time average of `⟨ψ(t)|A|ψ(t)⟩` for `ψ(0) = psi0` evolving under the
/// Hamiltonian whose eigensystem is `es`.
pub fn diagonal_ensemble<T: Real>(
    es: &EigenSystem<T>,
    psi0: &[T],
    a: &SparseOperator<T>,
) -> Result<DiagonalEnsembleResult<T>> {
    diagonal_ensemble_with(es, psi0, a, T::lit(DEFAULT_TOL_DEGENERATE))
}

pub fn diagonal_ensemble_with<T: Real>(
    es: &EigenSystem<T>,
    psi0: &[T],
    a: &SparseOperator<T>,
    cluster_tol: T,
) -> Result<DiagonalEnsembleResult<T>> {
    for found in [psi0.len(), a.dim()] {
        if found != es.dim() {
            return Err(PxpError::BasisMismatch {
                expected: es.dim(),
                found,
            });
        }
    }
    let zero_idx = es.zero_mode_indices();
    let mut groups: Vec<(bool, Vec<usize>)> = Vec::new();
    if !zero_idx.is_empty() {
        groups.push((true, zero_idx.to_vec()));
    }
    for r in es.clusters(cluster_tol) {
        let idx: Vec<usize> = r.filter(|i| !zero_idx.contains(i)).collect();
        if !idx.is_empty() {
            groups.push((false, idx));
        }
    }
    let psi = nalgebra::DVector::from_column_slice(psi0);
    let n = es.dim();
    let mut weights = vec![T::zero(); n];
    let mut diagonal = vec![T::zero(); n];
    let (mut zero_part, mut nonzero_part) = (T::zero(), T::zero());
    let mut buf = vec![T::zero(); n];
    for (is_zero, idx) in groups {
        let (vectors, diag) = if idx.len() == 1 {
            let v = es.vector(idx[0]);
            a.apply(&v, &mut buf);
            let d = v.iter().zip(&buf).map(|(x, y)| *x * *y).sum::<T>();
            (es.columns(&idx), vec![d])
        } else {
            let rot = rotate_within(&es.columns(&idx), a);
            (rot.vectors, rot.diagonal)
        };
        let coeff = vectors.transpose() * &psi;
        let mut part = T::zero();
        for (k, &slot) in idx.iter().enumerate() {
            let w = coeff[k] * coeff[k];
            weights[slot] = w;
            diagonal[slot] = diag[k];
            part += w * diag[k];
        }
        if is_zero {
            zero_part += part;
        } else {
            nonzero_part += part;
        }
    }
    Ok(DiagonalEnsembleResult {
        total: zero_part + nonzero_part,
        nonzero_part,
        zero_part,
        weights,
        diagonal,
    })
}

/// Summed weights of the clusters at `+E` and `−E`, paired from the outside in.
/// Returns `(E, weight(+E), weight(−E))` for every positive cluster.
pub fn paired_cluster_weights<T: Real>(es: &EigenSystem<T>, weights: &[T], tol: T) -> Vec<(T, T, T)> {
    let clusters = es.clusters(tol);
    let level = |r: &std::ops::Range<usize>| {
        let e = es.values()[r.clone()].iter().copied().sum::<T>() / T::lit(r.len() as f64);
        let w = weights[r.clone()].iter().copied().sum::<T>();
        (e, w)
    };
    let n = clusters.len();
    (0..n / 2)
        .filter_map(|i| {
            let (e_lo, w_lo) = level(&clusters[i]);
            let (e_hi, w_hi) = level(&clusters[n - 1 - i]);
            (e_hi > es.tol_zero() && e_lo < -es.tol_zero()).then_some((e_hi, w_hi, w_lo))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n_sites: usize,
    pub delta: f64,
    pub operator: Imbalance,
    pub initial_state: String,
    pub total: f64,
    pub nonzero_part: f64,
    pub zero_part: f64,
}

pub const SWEEP_HEADER: &str = "N,delta,operator,initial_state,total,nonzero_part,zero_part";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n_sites,
            fmt12(self.delta),
            self.operator.label(),
            self.initial_state,
            fmt12(self.total),
            fmt12(self.nonzero_part),
            fmt12(self.zero_part)
        )
    }
}

pub fn write_sweep_csv(rows: &[SweepRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub geometry: Geometry,
    pub deltas: Vec<f64>,
    pub w: f64,
    /// `(operator, initial state)` pairs evaluated at every Δ.
    pub cells: Vec<(Imbalance, NamedState)>,
    /// Work in the zero-momentum sector of `T_x²` when every initial state
    /// is invariant under it.
    pub use_sector: bool,
    pub dense_cap: usize,
}

impl SweepSpec {
    /// Every imbalance paired with the state it is defined for.
    pub fn standard(geometry: Geometry, deltas: Vec<f64>) -> Self {
        Self {
            geometry,
            deltas,
            w: 1.0,
            cells: vec![
                (Imbalance::IzZ2, NamedState::Z2),
                (Imbalance::IxZ2, NamedState::Z2),
                (Imbalance::IxVac, NamedState::Vac),
            ],
            use_sector: true,
            dense_cap: crate::spectra::DEFAULT_DENSE_CAP,
        }
    }
}

/// Diagonal-ensemble imbalances over a Δ grid; Δ values run in parallel.
pub fn imbalance_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.deltas.iter().any(|d| !d.is_finite()) {
        return Err(PxpError::InvalidParameter("Δ grid must be finite".into()));
    }
    let basis = enumerate_basis(&spec.geometry)?;
    let mut states = Vec::with_capacity(spec.cells.len());
    for (_, s) in &spec.cells {
        states.push(named_vector(s, &basis)?);
    }
    let mut ops = Vec::with_capacity(spec.cells.len());
    for (op, _) in &spec.cells {
        ops.push(build_imbalance::<f64>(&basis, *op)?);
    }
    let invariant = spec.cells.iter().all(|(_, s)| {
        crate::hilbert::named_state(s, &spec.geometry)
            .map(|m| spec.geometry.translate(m, 2) == m)
            .unwrap_or(false)
    });
    let reduce = spec.use_sector && invariant && spec.geometry.rungs > 2;
    let sector = if reduce { Some(build_sector(&basis, 0)?) } else { None };
    let (states, ops) = match &sector {
        Some(sec) => (
            states
                .iter()
                .map(|v| project_vector(v, &basis, sec))
                .collect::<Result<Vec<_>>>()?,
            ops.iter()
                .map(|o| project_operator(o, &basis, sec))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => (states, ops),
    };
    let opts = DiagOptions {
        cap: spec.dense_cap,
        ..DiagOptions::default()
    };
    let per_delta: Vec<Result<Vec<SweepRow>>> = spec
        .deltas
        .par_iter()
        .map(|&delta| {
            let params = ModelParams { delta, w: spec.w };
            let mut h = build_hamiltonian(&basis, &params);
            if let Some(sec) = &sector {
                h = project_operator(&h, &basis, sec)?;
            }
            let es = diagonalize_with(&h, opts)?;
            spec.cells
                .iter()
                .enumerate()
                .map(|(i, (op, init))| {
                    let r = diagonal_ensemble(&es, &states[i], &ops[i])?;
                    Ok(SweepRow {
                        n_sites: spec.geometry.n_sites(),
                        delta,
                        operator: *op,
                        initial_state: init.label(),
                        total: r.total,
                        nonzero_part: r.nonzero_part,
                        zero_part: r.zero_part,
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_delta {
        rows.extend(r?);
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TimeAverageReport {
    pub window_start: f64,
    pub window_end: f64,
    pub samples: usize,
    pub running_mean: f64,
    pub ensemble_value: f64,
    pub deviation: f64,
}

/// Mean of `series` over `t ∈ [t_max/2, t_max]` against the ensemble value.
pub fn time_average_check<T: Real>(times: &[T], series: &[T], ensemble_value: T) -> TimeAverageReport {
    let t_max = times.last().map(|t| t.as_f64()).unwrap_or(0.0);
    let start = 0.5 * t_max;
    let window: Vec<f64> = times
        .iter()
        .zip(series)
        .filter(|(t, _)| t.as_f64() >= start)
        .map(|(_, v)| v.as_f64())
        .collect();
    let mean = if window.is_empty() {
        f64::NAN
    } else {
        window.iter().sum::<f64>() / window.len() as f64
    };
    TimeAverageReport {
        window_start: start,
        window_end: t_max,
        samples: window.len(),
        running_mean: mean,
        ensemble_value: ensemble_value.as_f64(),
        deviation: (mean - ensemble_value.as_f64()).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Basis;
    use crate::operators::{build_hz, local_sigma_x_tilde, local_sigma_z};
    use crate::spectra::diagonalize;
    use crate::Rational;

    fn ladder(l: usize) -> Basis {
        enumerate_basis(&Geometry::ladder(l).unwrap()).unwrap()
    }

    #[test]
    fn beta0_of_hamiltonian_and_flips() {
        let basis = ladder(4);
        let h = build_hamiltonian(&basis, &ModelParams::new(Rational::new(7, 10)));
        assert_eq!(thermal_beta0(&h), Rational::from_integer(0));
        let sx: SparseOperator<Rational> = local_sigma_x_tilde(&basis, 2, 1).unwrap();
        assert_eq!(thermal_beta0(&sx), Rational::from_integer(0));
    }

    #[test]
    fn beta0_of_imbalances_is_exactly_zero() {
        let basis = ladder(6);
        for op in Imbalance::ALL {
            let a: SparseOperator<Rational> = build_imbalance(&basis, op).unwrap();
            assert_eq!(thermal_beta0(&a), Rational::from_integer(0), "{op:?}");
        }
    }

    #[test]
    fn beta0_sigma_z_site_independent() {
        let basis = ladder(4);
        let first: Rational = thermal_beta0(&local_sigma_z(&basis, 1, 1).unwrap());
        for (j, a) in basis.geometry().sites().collect::<Vec<_>>() {
            assert_eq!(thermal_beta0(&local_sigma_z::<Rational>(&basis, j, a).unwrap()), first);
        }
    }

    #[test]
    fn identity_gives_one() {
        let basis = ladder(4);
        let h = build_hamiltonian(&basis, &ModelParams::new(1.0));
        let es = diagonalize(&h).unwrap();
        let psi = named_vector(&NamedState::Z2, &basis).unwrap();
        let id = SparseOperator::diagonal(vec![1.0; basis.dim()]);
        let r = diagonal_ensemble(&es, &psi, &id).unwrap();
        assert!((r.total - 1.0).abs() < 1e-12);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn static_diagonal_model() {
        // With only the diagonal term, a Fock state is stationary.
        let basis = ladder(4);
        let hz = build_hz(&basis, 1.0);
        let es = diagonalize(&hz).unwrap();
        let psi = named_vector(&NamedState::Z2, &basis).unwrap();
        let a = build_imbalance::<f64>(&basis, Imbalance::IzZ2).unwrap();
        let r = diagonal_ensemble(&es, &psi, &a).unwrap();
        let direct = a.expectation_real(&psi);
        assert!((r.total - direct).abs() < 1e-12);
    }

    #[test]
    fn mismatch_is_reported() {
        let basis = ladder(2);
        let es = diagonalize(&build_hamiltonian(&basis, &ModelParams::new(1.0))).unwrap();
        let id = SparseOperator::diagonal(vec![1.0; basis.dim()]);
        assert!(matches!(
            diagonal_ensemble(&es, &[1.0, 0.0], &id),
            Err(PxpError::BasisMismatch { .. })
        ));
    }

    #[test]
    fn sector_and_full_basis_agree() {
        let g = Geometry::ladder(6).unwrap();
        let mut spec = SweepSpec::standard(g, vec![0.6]);
        let reduced = imbalance_sweep(&spec).unwrap();
        spec.use_sector = false;
        let full = imbalance_sweep(&spec).unwrap();
        for (a, b) in reduced.iter().zip(&full) {
            assert!((a.total - b.total).abs() < 1e-9, "{a:?} vs {b:?}");
            assert!((a.zero_part - b.zero_part).abs() < 1e-9, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn csv_row_format() {
        let row = SweepRow {
            n_sites: 8,
            delta: 0.5,
            operator: Imbalance::IxVac,
            initial_state: "vac".into(),
            total: 0.25,
            nonzero_part: 0.125,
            zero_part: 0.125,
        };
        let mut out = Vec::new();
        write_sweep_csv(&[row], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with(SWEEP_HEADER));
        assert!(text.lines().nth(1).unwrap().starts_with("8,0.5,Ix_vac,vac,"));
    }

    #[test]
    fn time_average_window() {
        let times: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let series: Vec<f64> = times.iter().map(|&t| if t >= 5.0 { 2.0 } else { 0.0 }).collect();
        let rep = time_average_check(&times, &series, 2.0);
        assert_eq!(rep.samples, 6);
        assert_eq!(rep.deviation, 0.0);
    }
}
