use num_traits::Float;
use serde::Serialize;

use crate::scalar::Real;
use crate::spectra::EigenSystem;

pub const DEFAULT_PROMINENCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub index: usize,
    pub time: f64,
    pub value: f64,
    pub prominence: f64,
}

/// Interior local maxima whose topographic prominence is at least
/// `min_prominence`. Flat tops are reported at their left edge.
pub fn find_peaks<T: Real>(times: &[T], values: &[T], min_prominence: f64) -> Vec<Peak> {
    let x: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
    let n = x.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i] > x[i - 1] {
            // Walk across a plateau.
            let mut r = i;
            while r + 1 < n && x[r + 1] == x[i] {
                r += 1;
            }
            if r + 1 < n && x[r + 1] < x[i] {
                let prom = prominence(&x, i, r);
                if prom >= min_prominence {
                    out.push(Peak {
                        index: i,
                        time: times[i].as_f64(),
                        value: x[i],
                        prominence: prom,
                    });
                }
            }
            i = r + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Interior local minima, reported with positive prominence.
pub fn find_minima<T: Real>(times: &[T], values: &[T], min_prominence: f64) -> Vec<Peak> {
    let neg: Vec<T> = values.iter().map(|v| -*v).collect();
    find_peaks(times, &neg, min_prominence)
        .into_iter()
        .map(|p| Peak { value: -p.value, ..p })
        .collect()
}

fn prominence(x: &[f64], left_edge: usize, right_edge: usize) -> f64 {
    let h = x[left_edge];
    let mut left_min = h;
    for k in (0..left_edge).rev() {
        if x[k] > h {
            break;
        }
        left_min = left_min.min(x[k]);
    }
    let mut right_min = h;
    for &v in &x[right_edge + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

#[derive(Clone, Debug, Serialize)]
pub struct RevivalResult {
    /// Time between the first two qualifying peaks; `None` means no revival.
    pub t_star: Option<f64>,
    pub peaks: Vec<Peak>,
}

impl RevivalResult {
    pub fn detected(&self) -> bool {
        self.t_star.is_some()
    }
}

pub fn revival_period<T: Real>(times: &[T], series: &[T], min_prominence: f64) -> RevivalResult {
    let peaks = find_peaks(times, series, min_prominence);
    let t_star = if peaks.len() >= 2 {
        Some(peaks[1].time - peaks[0].time)
    } else {
        None
    };
    RevivalResult { t_star, peaks }
}

/// `2π / (t₂ − t₁)` from the first two qualifying maxima.
pub fn oscillation_frequency<T: Real>(times: &[T], series: &[T], min_prominence: f64) -> Option<f64> {
    revival_period(times, series, min_prominence)
        .t_star
        .map(|t| 2.0 * std::f64::consts::PI / t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TowerMember {
    pub energy: f64,
    /// Summed `|⟨ψ₀|E⟩|²` over the degenerate cluster.
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tower {
    /// Median spacing between consecutive members.
    pub delta_e: f64,
    pub members: Vec<TowerMember>,
    /// Smallest positive member energy.
    pub e_star: f64,
    pub median_overlap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub enum TowerResult {
    Found(Tower),
    NoTower { reason: String },
}

impl TowerResult {
    pub fn tower(&self) -> Option<&Tower> {
        match self {
            TowerResult::Found(t) => Some(t),
            TowerResult::NoTower { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TowerOptions {
    /// Eigenvalues closer than this are merged into one level.
    pub cluster_tol: f64,
    /// Seed weight must exceed this multiple of the median overlap.
    pub min_ratio: f64,
    /// Maximum member count including the zero-energy level.
    /// [`TowerOptions::for_rungs`] uses `2⌊L/2⌋ + 1`. The walk also stops
    /// once the best candidate falls below `min_ratio` times the median.
    pub members: usize,
}

impl TowerOptions {
    pub fn for_rungs(l: usize) -> Self {
        Self {
            cluster_tol: 1e-9,
            min_ratio: 10.0,
            members: 2 * (l / 2) + 1,
        }
    }
}

/// Heuristic scar-tower extraction from the overlap profile of `psi0`.
///
/// Levels are merged into degenerate clusters. The heaviest positive-energy
/// cluster sets the initial spacing estimate; the tower is then followed
/// outward from zero energy by picking the heaviest cluster within half a
/// spacing of each predicted position, stopping at the first candidate that is
/// not anomalously heavy. The spacing is re-estimated once from
/// the members found and the walk repeated.
pub fn scar_tower_spacing<T: Real>(es: &EigenSystem<T>, psi0: &[T], opts: &TowerOptions) -> TowerResult {
    let coeff = es.coefficients(psi0);
    let overlaps: Vec<f64> = coeff.iter().map(|c| (*c * *c).as_f64()).collect();
    let energies: Vec<f64> = es.values().iter().map(|e| e.as_f64()).collect();
    let tol_zero = es.tol_zero().as_f64();
    let mut levels: Vec<TowerMember> = Vec::new();
    for r in es.clusters(T::lit(opts.cluster_tol)) {
        let weight = overlaps[r.clone()].iter().sum();
        let mut energy = energies[r.clone()].iter().sum::<f64>() / r.len() as f64;
        if energy.abs() < tol_zero {
            energy = 0.0;
        }
        levels.push(TowerMember { energy, weight });
    }
    levels_tower(&levels, &overlaps, opts)
}

/// Tower extraction from precomputed levels (energy, cluster weight).
pub fn levels_tower(levels: &[TowerMember], overlaps: &[f64], opts: &TowerOptions) -> TowerResult {
    let mut nonzero: Vec<f64> = overlaps.iter().copied().filter(|&w| w > 1e-12).collect();
    if nonzero.is_empty() {
        return TowerResult::NoTower {
            reason: "state has no overlap with the spectrum".into(),
        };
    }
    nonzero.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = median_sorted(&nonzero);
    let seed = levels
        .iter()
        .filter(|l| l.energy > 0.0)
        .max_by(|a, b| a.weight.partial_cmp(&b.weight).unwrap());
    let Some(seed) = seed else {
        return TowerResult::NoTower {
            reason: "no positive-energy levels".into(),
        };
    };
    if seed.weight < opts.min_ratio * median {
        return TowerResult::NoTower {
            reason: format!(
                "heaviest level weight {:.3e} below {}x median overlap {:.3e}",
                seed.weight, opts.min_ratio, median
            ),
        };
    }
    let threshold = opts.min_ratio * median;
    // The heaviest positive level seeds the spacing estimate.
    let mut delta = seed.energy;
    let per_side = opts.members.saturating_sub(1) / 2;
    let mut members = Vec::new();
    for pass in 0..2 {
        members = walk(levels, delta, per_side, threshold);
        let spacing = median_spacing(&members);
        if pass == 0 {
            match spacing {
                Some(s) if s > 0.0 => delta = s,
                _ => break,
            }
        }
    }
    let Some(delta_e) = median_spacing(&members) else {
        return TowerResult::NoTower {
            reason: "fewer than two tower members".into(),
        };
    };
    let e_star = members
        .iter()
        .map(|m| m.energy)
        .filter(|&e| e > 0.0)
        .fold(f64::INFINITY, f64::min);
    TowerResult::Found(Tower {
        delta_e,
        members,
        e_star,
        median_overlap: median,
    })
}

fn walk(levels: &[TowerMember], delta: f64, per_side: usize, threshold: f64) -> Vec<TowerMember> {
    let mut members: Vec<TowerMember> = levels.iter().filter(|l| l.energy == 0.0).copied().collect();
    for dir in [1.0, -1.0] {
        let mut last = 0.0;
        for step in 0..per_side {
            // The first window reaches down to zero so half-integer ladders are found.
            let near = if step == 0 { 0.0 } else { 0.5 };
            let lo = last + dir * near * delta;
            let hi = last + dir * 1.5 * delta;
            let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
            let best = levels
                .iter()
                .filter(|l| l.energy > lo && l.energy <= hi && l.energy != 0.0)
                .max_by(|a, b| a.weight.partial_cmp(&b.weight).unwrap());
            match best {
                Some(b) if b.weight >= threshold => {
                    members.push(*b);
                    last = b.energy;
                }
                _ => break,
            }
        }
    }
    members.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());
    members
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn median_spacing(members: &[TowerMember]) -> Option<f64> {
    if members.len() < 2 {
        return None;
    }
    let mut gaps: Vec<f64> = members.windows(2).map(|w| w[1].energy - w[0].energy).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(median_sorted(&gaps))
}

/// Detected local maxima of a series lying strictly between each pair of
/// consecutive reference peaks.
pub fn maxima_between(reference: &[Peak], candidates: &[Peak]) -> Vec<Peak> {
    candidates
        .iter()
        .copied()
        .filter(|c| reference.windows(2).any(|w| c.time > w[0].time && c.time < w[1].time))
        .collect()
}

/// Max of a float slice, for convenience in reports.
pub fn series_max<T: Real>(x: &[T]) -> T {
    x.iter().copied().fold(T::neg_infinity(), Float::max)
}
