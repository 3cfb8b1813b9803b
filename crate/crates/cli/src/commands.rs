use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use pxp::dynamics::{run_quench, scar_tower_spacing, to_complex, Method, QuenchSpec, TowerOptions, TowerResult};
use pxp::ensemble::{imbalance_sweep as run_sweep, write_sweep_csv, SweepSpec};
use pxp::entanglement::{build_bipartition, entanglement_entropy, CutKind};
use pxp::format::fmt12;
use pxp::hilbert::{build_sector, enumerate_basis, named_vector, Basis, Geometry, NamedState};
use pxp::operators::{build_hamiltonian, build_hx, build_hz, ModelParams};
use pxp::plaquette::{PlaquetteInitial, PlaquetteModel, N_CONFIGS};
use pxp::spectra::{shannon_of_probabilities, shannon_per_eigenstate, simultaneous_zero_modes};

use crate::config::{parse_grid, Common, Defaults, RunConfig};
use crate::output::{eigensystem, tag, Artifacts};
use crate::CliError;

const ZERO_MODE_RESIDUAL: f64 = 1e-8;

const SPECTRAL: Defaults = Defaults {
    delta: "1",
    init: "Z2",
    tmax: 100.0,
};

fn setup(common: &Common, defaults: &Defaults) -> Result<(RunConfig, Basis), CliError> {
    let cfg = common.resolve(defaults)?;
    if let Some(n) = cfg.threads {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let basis = enumerate_basis(&Geometry::new(cfg.legs, cfg.rungs)?)?;
    Ok((cfg, basis))
}

fn states(cfg: &RunConfig) -> Result<Vec<NamedState>, CliError> {
    cfg.init.iter().map(|s| Ok(s.parse::<NamedState>()?)).collect()
}

pub fn dims(common: &Common) -> Result<(), CliError> {
    let (cfg, basis) = setup(common, &SPECTRAL)?;
    let mut line = format!("N={} dim={}", cfg.n_sites(), basis.dim());
    if let Ok(sector) = build_sector(&basis, 0) {
        line.push_str(&format!(" k0={}", sector.dim()));
    }
    println!("{line}");
    Ok(())
}

pub fn spectrum(common: &Common) -> Result<(), CliError> {
    let (cfg, basis) = setup(common, &SPECTRAL)?;
    let art = Artifacts::new("spectrum", &cfg, json!({}))?;
    cfg.deltas.par_iter().try_for_each(|&delta| {
        let es = eigensystem(&basis, delta, cfg.w, cfg.cache_dir.as_deref())?;
        let shannon = shannon_per_eigenstate(&es);
        let name = format!("spectrum_N{}_delta{}.csv", cfg.n_sites(), tag(delta));
        let diag = json!({
            "delta": delta,
            "dim": es.dim(),
            "zero_modes": es.zero_mode_indices().len(),
            "reflection_defect": es.reflection_defect(),
        });
        art.write(&name, diag, |out| {
            writeln!(out, "index,energy,shannon")?;
            for (i, (e, s)) in es.values().iter().zip(&shannon).enumerate() {
                writeln!(out, "{i},{},{}", fmt12(*e), fmt12(*s))?;
            }
            Ok(())
        })?;
        Ok::<_, CliError>(())
    })
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Eigenbasis,
}

#[derive(Args)]
pub struct QuenchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "rk4")]
    method: MethodArg,
    /// Extra states whose overlap is recorded, comma separated.
    #[arg(long)]
    overlaps: Option<String>,
    /// Record the entanglement entropy of both cuts.
    #[arg(long)]
    entanglement: bool,
    /// Omit the per-site magnetization columns.
    #[arg(long)]
    no_site_resolved: bool,
}

pub fn quench(args: &QuenchArgs) -> Result<(), CliError> {
    let (cfg, _) = setup(&args.common, &SPECTRAL)?;
    let geometry = Geometry::new(cfg.legs, cfg.rungs)?;
    let overlaps: Vec<NamedState> = match &args.overlaps {
        Some(s) => s
            .split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse::<NamedState>())
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let method = match args.method {
        MethodArg::Rk4 => Method::Rk4,
        MethodArg::Eigenbasis => Method::Eigenbasis,
    };
    let extra = json!({
        "method": method,
        "overlaps": overlaps,
        "entanglement": args.entanglement,
        "site_resolved": !args.no_site_resolved,
    });
    let art = Artifacts::new("quench", &cfg, extra)?;
    let cells: Vec<(f64, NamedState)> = cfg
        .deltas
        .iter()
        .flat_map(|&d| states(&cfg).into_iter().flatten().map(move |s| (d, s)))
        .collect();
    // Validate names before spending time on any cell.
    states(&cfg)?;
    cells.par_iter().try_for_each(|(delta, init)| {
        let spec = QuenchSpec {
            w: cfg.w,
            dt: cfg.dt,
            stride: cfg.stride,
            method,
            overlaps: overlaps.clone(),
            site_resolved: !args.no_site_resolved,
            entanglement: args.entanglement,
            ..QuenchSpec::new(geometry, *delta, init.clone(), cfg.tmax)
        };
        let out = run_quench(&spec)?;
        let name = format!("quench_N{}_delta{}_{}.csv", cfg.n_sites(), tag(*delta), init.label());
        let diag = json!({ "spec": spec, "diagnostics": out.diagnostics });
        art.write(&name, diag, |w| Ok(out.trace.write_csv(w)?))?;
        Ok::<_, CliError>(())
    })
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Work in the full basis instead of the zero-momentum sector.
    #[arg(long)]
    full_basis: bool,
}

pub fn imbalance_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let defaults = Defaults {
        delta: "0:1:0.1",
        ..SPECTRAL
    };
    let (cfg, _) = setup(&args.common, &defaults)?;
    let mut spec = SweepSpec::standard(Geometry::new(cfg.legs, cfg.rungs)?, cfg.deltas.clone());
    spec.w = cfg.w;
    spec.use_sector = !args.full_basis;
    let rows = run_sweep(&spec)?;
    let art = Artifacts::new("imbalance-sweep", &cfg, json!({ "use_sector": spec.use_sector }))?;
    let name = format!("imbalance_sweep_N{}.csv", cfg.n_sites());
    art.write(&name, json!({ "rows": rows.len() }), |w| Ok(write_sweep_csv(&rows, w)?))?;
    Ok(())
}

pub fn zero_modes(common: &Common) -> Result<(), CliError> {
    let defaults = Defaults {
        delta: "0.1:1:0.45",
        ..SPECTRAL
    };
    let (cfg, basis) = setup(common, &defaults)?;
    let modes = simultaneous_zero_modes(&build_hz::<f64>(&basis, 1.0), &build_hx::<f64>(&basis, cfg.w))?;
    let columns: Vec<Vec<f64>> = (0..modes.count)
        .map(|k| modes.vectors.column(k).iter().copied().collect())
        .collect();
    let mut residuals = Vec::new();
    for &delta in &cfg.deltas {
        let h = build_hamiltonian(&basis, &ModelParams { delta, w: cfg.w });
        let worst = columns.iter().map(|v| h.apply_norm(v)).fold(0.0, f64::max);
        residuals.push(json!({ "delta": delta, "max_residual": worst }));
        if worst > ZERO_MODE_RESIDUAL {
            return Err(CliError::Tolerance(format!(
                "zero-mode residual {worst:.3e} at delta={delta} exceeds {ZERO_MODE_RESIDUAL:e}"
            )));
        }
    }
    let shannon: Vec<f64> = columns
        .iter()
        .map(|v| shannon_of_probabilities(v.iter().map(|x| x * x)))
        .collect();
    let art = Artifacts::new("zero-modes", &cfg, json!({}))?;
    let name = format!("zero_modes_N{}.csv", cfg.n_sites());
    let diag = json!({
        "count": modes.count,
        "support": modes.support.len(),
        "residuals": residuals,
        "shannon": shannon,
    });
    let geometry = *basis.geometry();
    art.write(&name, diag, |w| {
        let header: Vec<String> = (1..=modes.count).map(|k| format!("mode_{k}")).collect();
        writeln!(w, "state,{}", header.join(","))?;
        for (i, &s) in basis.states().iter().enumerate() {
            if columns.iter().all(|v| v[i] == 0.0) {
                continue;
            }
            let vals: Vec<String> = columns.iter().map(|v| fmt12(v[i])).collect();
            writeln!(w, "{},{}", geometry.to_string_repr(s), vals.join(","))?;
        }
        Ok(())
    })?;
    println!("N={} zero_modes={}", cfg.n_sites(), modes.count);
    Ok(())
}

#[derive(Args)]
pub struct PlaquetteArgs {
    /// Grid of r = w/(2Δ) for the steady-state tables.
    #[arg(long, default_value = "0.05:5:0.05")]
    r: String,
    /// r used for the coefficient and magnetization traces.
    #[arg(long, default_value_t = 0.5)]
    r_trace: f64,
    /// Final time of the traces, in units of 1/(2Δ).
    #[arg(long, default_value_t = 50.0)]
    tmax: f64,
    #[arg(long, default_value_t = 0.05)]
    stride: f64,
    #[arg(long, default_value = ".")]
    out: std::path::PathBuf,
}

pub fn plaquette(args: &PlaquetteArgs) -> Result<(), CliError> {
    let rs = parse_grid(&args.r)?;
    if rs.iter().any(|&r| r <= 0.0) || args.r_trace <= 0.0 {
        return Err(CliError::Config("r must be positive".into()));
    }
    if !(args.tmax > 0.0 && args.stride > 0.0) {
        return Err(CliError::Config("tmax and stride must be positive".into()));
    }
    // The plaquette has no geometry flags; record its own parameters instead.
    let cfg = RunConfig {
        legs: 2,
        rungs: 2,
        deltas: Vec::new(),
        w: 1.0,
        init: vec!["Z2".into(), "vac".into()],
        tmax: args.tmax,
        dt: args.stride,
        stride: args.stride,
        out: args.out.clone(),
        cache_dir: None,
        threads: None,
    };
    let extra = json!({ "r": args.r, "r_trace": args.r_trace });
    let art = Artifacts::new("plaquette", &cfg, extra)?;
    let models: Vec<PlaquetteModel<f64>> = rs.iter().map(|&r| PlaquetteModel::new(r)).collect::<Result<_, _>>()?;
    for (name, exact) in [("plaquette_steady.csv", false), ("plaquette_steady_exact.csv", true)] {
        let form = if exact { "infinite-time averages" } else { "closed forms" };
        art.write(name, json!({ "values": form }), |w| {
            writeln!(w, "r,iz_z2,ix_z2,ix_vac")?;
            for m in &models {
                let s = if exact { m.steady_imbalances_exact() } else { m.steady_imbalances() };
                writeln!(w, "{},{},{},{}", fmt12(m.r()), fmt12(s.iz_z2), fmt12(s.ix_z2), fmt12(s.ix_vac))?;
            }
            Ok(())
        })?;
    }
    let model = PlaquetteModel::new(args.r_trace)?;
    let steps = (args.tmax / args.stride + 0.5).floor() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * args.stride).collect();
    for init in [PlaquetteInitial::Z2, PlaquetteInitial::Vac] {
        let label = match init {
            PlaquetteInitial::Z2 => "Z2",
            PlaquetteInitial::Vac => "vac",
        };
        let diag = json!({ "r": args.r_trace, "initial_config": init.config(), "columns": "|c_k(t)|^2" });
        art.write(&format!("plaquette_coefficients_{label}.csv"), diag, |w| {
            let header: Vec<String> = (0..N_CONFIGS).map(|k| format!("c{k}")).collect();
            writeln!(w, "t,{}", header.join(","))?;
            for &t in &times {
                let c = model.coefficients(init, t);
                let vals: Vec<String> = c.iter().map(|z| fmt12(z.norm_sqr())).collect();
                writeln!(w, "{},{}", fmt12(t), vals.join(","))?;
            }
            Ok(())
        })?;
        let diag = json!({ "r": args.r_trace, "initial_config": init.config() });
        art.write(&format!("plaquette_magnetizations_{label}.csv"), diag, |w| {
            const SITES: [(usize, usize); 4] = [(1, 1), (2, 1), (1, 2), (2, 2)];
            let mut header = vec!["t".to_string()];
            header.extend(SITES.iter().map(|(j, a)| format!("mz_{j}_{a}")));
            header.extend(SITES.iter().map(|(j, a)| format!("mx_{j}_{a}")));
            writeln!(w, "{}", header.join(","))?;
            for &t in &times {
                let m = model.magnetizations(init, t);
                let mut vals = vec![fmt12(t)];
                vals.extend(SITES.iter().map(|&(j, a)| fmt12(m.mz_at(j, a))));
                vals.extend(SITES.iter().map(|&(j, a)| fmt12(m.mx_at(j, a))));
                writeln!(w, "{}", vals.join(","))?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

pub fn entanglement(common: &Common) -> Result<(), CliError> {
    let (cfg, basis) = setup(common, &SPECTRAL)?;
    let cuts = [CutKind::Parallel, CutKind::Perpendicular];
    let bips = cuts
        .iter()
        .map(|&k| build_bipartition(&basis, k))
        .collect::<Result<Vec<_>, _>>()?;
    let sizes: Vec<_> = bips
        .iter()
        .zip(["parallel", "perpendicular"])
        .map(|(b, name)| json!({ "cut": name, "dim_a": b.dim_a(), "dim_b": b.dim_b() }))
        .collect();
    let art = Artifacts::new("entanglement", &cfg, json!({}))?;
    cfg.deltas.par_iter().try_for_each(|&delta| {
        let es = eigensystem(&basis, delta, cfg.w, cfg.cache_dir.as_deref())?;
        let rows = (0..es.dim())
            .into_par_iter()
            .map(|k| {
                let v: Vec<f64> = es.vectors().column(k).iter().copied().collect();
                let psi = to_complex(&v);
                let s: Vec<f64> = bips
                    .iter()
                    .map(|b| entanglement_entropy(&psi, b))
                    .collect::<Result<_, _>>()?;
                Ok((es.values()[k], s[0], s[1]))
            })
            .collect::<Result<Vec<_>, pxp::PxpError>>()?;
        let name = format!("entanglement_N{}_delta{}.csv", cfg.n_sites(), tag(delta));
        art.write(&name, json!({ "delta": delta, "dictionaries": sizes }), |w| {
            writeln!(w, "energy,svn_par,svn_perp")?;
            for (e, a, b) in &rows {
                writeln!(w, "{},{},{}", fmt12(*e), fmt12(*a), fmt12(*b))?;
            }
            Ok(())
        })?;
        Ok::<_, CliError>(())
    })?;
    for (b, name) in bips.iter().zip(["parallel", "perpendicular"]) {
        println!("N={} cut={name} dim_a={} dim_b={}", cfg.n_sites(), b.dim_a(), b.dim_b());
    }
    Ok(())
}

#[derive(Serialize)]
struct TowerSummary {
    delta: f64,
    init: String,
    result: TowerResult,
    predicted_revival: Option<f64>,
}

pub fn towers(common: &Common) -> Result<(), CliError> {
    let (cfg, basis) = setup(common, &SPECTRAL)?;
    let inits = states(&cfg)?;
    let vectors: Vec<Vec<f64>> = inits.iter().map(|s| named_vector(s, &basis)).collect::<Result<_, _>>()?;
    let art = Artifacts::new("towers", &cfg, json!({}))?;
    let opts = TowerOptions::for_rungs(cfg.rungs);
    let lines = cfg
        .deltas
        .par_iter()
        .map(|&delta| {
            let es = eigensystem(&basis, delta, cfg.w, cfg.cache_dir.as_deref())?;
            let mut lines = Vec::new();
            for (init, psi) in inits.iter().zip(&vectors) {
                let result = scar_tower_spacing(&es, psi, &opts);
                let predicted = result.tower().map(|t| 2.0 * std::f64::consts::PI / t.delta_e);
                let overlaps: Vec<f64> = es.coefficients(psi).iter().map(|c| c * c).collect();
                let stem = format!("N{}_delta{}_{}", cfg.n_sites(), tag(delta), init.label());
                art.write(&format!("overlaps_{stem}.csv"), json!({ "delta": delta }), |w| {
                    writeln!(w, "energy,overlap")?;
                    for (e, o) in es.values().iter().zip(&overlaps) {
                        writeln!(w, "{},{}", fmt12(*e), fmt12(*o))?;
                    }
                    Ok(())
                })?;
                lines.push(match result.tower() {
                    Some(t) => format!(
                        "N={} delta={} init={} dE={} E*={} members={}",
                        cfg.n_sites(),
                        tag(delta),
                        init.label(),
                        fmt12(t.delta_e),
                        fmt12(t.e_star),
                        t.members.len()
                    ),
                    None => format!("N={} delta={} init={} no tower", cfg.n_sites(), tag(delta), init.label()),
                });
                let members = result.tower().map(|t| t.members.clone()).unwrap_or_default();
                let summary = TowerSummary {
                    delta,
                    init: init.label(),
                    result,
                    predicted_revival: predicted,
                };
                art.write(&format!("towers_{stem}.csv"), summary, |w| {
                    writeln!(w, "energy,weight")?;
                    for m in &members {
                        writeln!(w, "{},{}", fmt12(m.energy), fmt12(m.weight))?;
                    }
                    Ok(())
                })?;
            }
            Ok(lines)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    for line in lines.into_iter().flatten() {
        println!("{line}");
    }
    Ok(())
}
