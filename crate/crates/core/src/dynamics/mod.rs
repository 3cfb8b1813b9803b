//! Quench dynamics: propagation, observables, revival and tower analysis.

mod observables;
mod propagate;
mod revivals;

use std::io::Write;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use observables::{
    inner, max_relation_violation, measure_fidelity, measure_mz_density, measure_overlap, measure_shannon,
    measure_site_magnetizations, SiteTables,
};
pub use propagate::{
    convergence_probe, evolve_eigenbasis, evolve_rk4, max_amplitude_deviation, norm, rk4_final_state, to_complex,
    EigenPropagator, Rk4Options, Rk4Report, StateVector, DEFAULT_DT, DEFAULT_STRIDE, DRIFT_BUDGET,
};
pub use revivals::{
    find_minima, find_peaks, levels_tower, maxima_between, oscillation_frequency, revival_period,
    scar_tower_spacing, series_max, Peak, RevivalResult, Tower, TowerMember, TowerOptions, TowerResult,
    DEFAULT_PROMINENCE,
};

use crate::entanglement::{build_bipartition, entanglement_entropy, CutKind};
use crate::error::{PxpError, Result};
use crate::format::fmt12;
use crate::hilbert::{enumerate_basis, named_vector, Basis, Geometry, NamedState};
use crate::operators::{build_hamiltonian, ModelParams, SparseOperator};
use crate::spectra::{diagonalize_with, DiagOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Eigenbasis,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuenchSpec {
    pub geometry: Geometry,
    pub delta: f64,
    pub w: f64,
    pub initial: NamedState,
    pub t_max: f64,
    pub dt: f64,
    pub stride: f64,
    pub method: Method,
    /// Extra states whose overlap `|⟨φ|ψ(t)⟩|²` is recorded.
    pub overlaps: Vec<NamedState>,
    /// Record `mz_<j>_<a>` and `mx_<j>_<a>` columns.
    pub site_resolved: bool,
    /// Record `svn_par` and `svn_perp` columns.
    pub entanglement: bool,
    /// Dense cap for the eigenbasis method.
    pub dense_cap: usize,
}

impl QuenchSpec {
    pub fn new(geometry: Geometry, delta: f64, initial: NamedState, t_max: f64) -> Self {
        Self {
            geometry,
            delta,
            w: 1.0,
            initial,
            t_max,
            dt: DEFAULT_DT,
            stride: DEFAULT_STRIDE,
            method: Method::Rk4,
            overlaps: Vec::new(),
            site_resolved: true,
            entanglement: false,
            dense_cap: crate::spectra::DEFAULT_DENSE_CAP,
        }
    }
}

/// Column-oriented time series; `t` is kept separately.
#[derive(Clone, Debug, Default, Serialize)]
pub struct QuenchTrace {
    pub times: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl QuenchTrace {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn rows(&self) -> usize {
        self.times.len()
    }

    pub fn header(&self) -> String {
        std::iter::once("t".to_string())
            .chain(self.columns.iter().map(|(n, _)| n.clone()))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{}", self.header())?;
        for (r, t) in self.times.iter().enumerate() {
            let mut line = fmt12(*t);
            for (_, col) in &self.columns {
                line.push(',');
                line.push_str(&fmt12(col[r]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Diagnostics accompanying a trace.
#[derive(Clone, Debug, Default, Serialize)]
pub struct QuenchDiagnostics {
    pub dim: usize,
    pub rk4: Option<Rk4Report>,
    pub initial_energy: f64,
    pub smallest_nonzero_abs_energy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct QuenchOutput {
    pub trace: QuenchTrace,
    pub diagnostics: QuenchDiagnostics,
}

struct Recorder {
    tables: SiteTables,
    psi0: StateVector<f64>,
    overlap_states: Vec<StateVector<f64>>,
    site_resolved: bool,
    cuts: Vec<crate::entanglement::Bipartition>,
    trace: QuenchTrace,
    error: Option<PxpError>,
}

impl Recorder {
    fn new(basis: &Basis, spec: &QuenchSpec, psi0: StateVector<f64>) -> Result<Self> {
        let g = basis.geometry();
        let mut names = vec!["fidelity".to_string(), "shannon".into(), "mz_density".into()];
        let mut overlap_states = Vec::new();
        for s in &spec.overlaps {
            names.push(format!("overlap_{}", s.label()));
            overlap_states.push(to_complex(&named_vector(s, basis)?));
        }
        if spec.site_resolved {
            for prefix in ["mz", "mx"] {
                for (j, a) in g.sites() {
                    names.push(format!("{prefix}_{j}_{a}"));
                }
            }
        }
        let mut cuts = Vec::new();
        if spec.entanglement {
            if g.is_ladder() {
                cuts.push(build_bipartition(basis, CutKind::Parallel)?);
                names.push("svn_par".into());
            }
            cuts.push(build_bipartition(basis, CutKind::Perpendicular)?);
            names.push("svn_perp".into());
        }
        Ok(Self {
            tables: SiteTables::new(basis),
            psi0,
            overlap_states,
            site_resolved: spec.site_resolved,
            cuts,
            trace: QuenchTrace {
                times: Vec::new(),
                columns: names.into_iter().map(|n| (n, Vec::new())).collect(),
            },
            error: None,
        })
    }

    fn record(&mut self, t: f64, psi: &[Complex<f64>]) {
        let mut row = vec![
            measure_fidelity(psi, &self.psi0),
            measure_shannon(psi),
            self.tables.mz_density(psi),
        ];
        for phi in &self.overlap_states {
            row.push(measure_overlap(psi, phi));
        }
        if self.site_resolved {
            let (mz, mx) = self.tables.site_magnetizations(psi);
            row.extend(mz);
            row.extend(mx);
        }
        for cut in &self.cuts {
            match entanglement_entropy(psi, cut) {
                Ok(s) => row.push(s),
                Err(e) => {
                    self.error.get_or_insert(e);
                    row.push(f64::NAN);
                }
            }
        }
        debug_assert_eq!(row.len(), self.trace.columns.len());
        self.trace.times.push(t);
        for ((_, col), v) in self.trace.columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
}

/// Runs a full quench described by `spec` in the full constrained basis.
pub fn run_quench(spec: &QuenchSpec) -> Result<QuenchOutput> {
    let basis = enumerate_basis(&spec.geometry)?;
    let h = build_hamiltonian(&basis, &ModelParams { delta: spec.delta, w: spec.w });
    run_quench_with(spec, &basis, &h)
}

pub fn run_quench_with(spec: &QuenchSpec, basis: &Basis, h: &SparseOperator<f64>) -> Result<QuenchOutput> {
    if !(spec.t_max >= 0.0) {
        return Err(PxpError::InvalidParameter("t_max must be non-negative".into()));
    }
    let psi0 = to_complex(&named_vector(&spec.initial, basis)?);
    let mut rec = Recorder::new(basis, spec, psi0.clone())?;
    let mut diag = QuenchDiagnostics {
        dim: basis.dim(),
        initial_energy: h.expectation(&psi0),
        ..Default::default()
    };
    let opts = Rk4Options {
        dt: spec.dt,
        t_max: spec.t_max,
        stride: spec.stride,
        drift_budget: DRIFT_BUDGET,
    };
    match spec.method {
        Method::Rk4 => {
            let report = evolve_rk4(h, &psi0, &opts, |t, psi| rec.record(t, psi))?;
            diag.rk4 = Some(report);
        }
        Method::Eigenbasis => {
            let es = diagonalize_with(
                h,
                DiagOptions {
                    cap: spec.dense_cap,
                    ..Default::default()
                },
            )?;
            diag.smallest_nonzero_abs_energy = es.smallest_nonzero_abs();
            let prop = EigenPropagator::new(&es, &psi0)?;
            for k in 0..opts.n_outputs() {
                let t = spec.stride * k as f64;
                rec.record(t, &prop.state_at(t));
            }
        }
    }
    if let Some(e) = rec.error.take() {
        return Err(e);
    }
    Ok(QuenchOutput {
        trace: rec.trace,
        diagnostics: diag,
    })
}
