//! Lattice geometry, the blockade-constrained Fock basis, momentum sectors
//! under two-rung translations, and the named product states.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PxpError, Result};

/// Occupation mask: bit set means the site is excited (σᶻ = +1).
pub type FockState = u64;

/// Largest number of sites a `u64` mask can hold.
pub const MAX_SITES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Geometry {
    pub legs: usize,
    pub rungs: usize,
}

impl Geometry {
    /// Periodic along the legs, open along the rungs. `rungs` must be even.
    pub fn new(legs: usize, rungs: usize) -> Result<Self> {
        if legs != 1 && legs != 2 {
            return Err(PxpError::UnsupportedGeometry(format!(
                "legs must be 1 or 2, got {legs}"
            )));
        }
        if rungs < 2 || rungs % 2 != 0 {
            return Err(PxpError::UnsupportedGeometry(format!(
                "L must be an even integer >= 2, got {rungs}"
            )));
        }
        if legs * rungs > MAX_SITES {
            return Err(PxpError::UnsupportedGeometry(format!(
                "N = {} exceeds the {MAX_SITES}-site mask width",
                legs * rungs
            )));
        }
        Ok(Self { legs, rungs })
    }

    pub fn ladder(rungs: usize) -> Result<Self> {
        Self::new(2, rungs)
    }

    pub fn chain(sites: usize) -> Result<Self> {
        Self::new(1, sites)
    }

    pub fn is_ladder(&self) -> bool {
        self.legs == 2
    }

    pub fn n_sites(&self) -> usize {
        self.legs * self.rungs
    }

    /// Bit index of site `(j, a)`, both 1-based.
    pub fn site(&self, j: usize, a: usize) -> Result<usize> {
        if j == 0 || j > self.rungs || a == 0 || a > self.legs {
            return Err(PxpError::InvalidSite {
                j,
                a,
                legs: self.legs,
                rungs: self.rungs,
            });
        }
        Ok(self.site_unchecked(j, a))
    }

    #[inline]
    pub(crate) fn site_unchecked(&self, j: usize, a: usize) -> usize {
        self.legs * (j - 1) + (a - 1)
    }

    /// Inverse of [`Geometry::site`].
    pub fn coords(&self, bit: usize) -> (usize, usize) {
        (bit / self.legs + 1, bit % self.legs + 1)
    }

    /// All sites in bit order as `(j, a)`.
    pub fn sites(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_sites()).map(move |b| self.coords(b))
    }

    pub fn full_mask(&self) -> u64 {
        if self.n_sites() == 64 {
            u64::MAX
        } else {
            (1u64 << self.n_sites()) - 1
        }
    }

    /// Blockade neighbours of every site as bitmasks.
    pub fn neighbor_masks(&self) -> Vec<u64> {
        let l = self.rungs;
        (0..self.n_sites())
            .map(|bit| {
                let (j, a) = self.coords(bit);
                let prev = if j == 1 { l } else { j - 1 };
                let next = if j == l { 1 } else { j + 1 };
                let mut m = (1u64 << self.site_unchecked(prev, a)) | (1u64 << self.site_unchecked(next, a));
                if self.legs == 2 {
                    m |= 1u64 << self.site_unchecked(j, 3 - a);
                }
                m
            })
            .collect()
    }

    /// Translate by `shift` rungs (j → j + shift), periodic.
    pub fn translate(&self, state: FockState, shift: usize) -> FockState {
        let n = self.n_sites() as u32;
        let k = ((shift % self.rungs) * self.legs) as u32;
        if k == 0 {
            return state;
        }
        ((state << k) | (state >> (n - k))) & self.full_mask()
    }

    /// Exchange the two legs. Identity on a chain.
    pub fn swap_legs(&self, state: FockState) -> FockState {
        if self.legs == 1 {
            return state;
        }
        let even = state & 0x5555_5555_5555_5555;
        let odd = state & 0xAAAA_AAAA_AAAA_AAAA;
        (even << 1) | (odd >> 1)
    }

    pub fn to_string_repr(&self, state: FockState) -> String {
        (0..self.n_sites())
            .map(|b| if state >> b & 1 == 1 { 'x' } else { '.' })
            .collect()
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.is_ladder() { "ladder" } else { "chain" };
        write!(f, "{kind}(L={}, N={})", self.rungs, self.n_sites())
    }
}

pub fn is_valid(state: FockState, geometry: &Geometry) -> bool {
    if state & !geometry.full_mask() != 0 {
        return false;
    }
    let nb = geometry.neighbor_masks();
    is_valid_with(state, &nb)
}

#[inline]
pub(crate) fn is_valid_with(state: FockState, neighbors: &[u64]) -> bool {
    let mut s = state;
    while s != 0 {
        let b = s.trailing_zeros() as usize;
        if state & neighbors[b] != 0 {
            return false;
        }
        s &= s - 1;
    }
    true
}

#[derive(Clone, Debug)]
pub struct Basis {
    geometry: Geometry,
    states: Vec<FockState>,
    neighbors: Vec<u64>,
}

impl Basis {
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, idx: usize) -> FockState {
        self.states[idx]
    }

    /// Position of `state` in the ascending list.
    #[inline]
    pub fn index_of(&self, state: FockState) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }

    pub fn neighbors(&self) -> &[u64] {
        &self.neighbors
    }

    /// Text export: header `N=<n> dim=<d>` then one `.`/`x` line per state.
    pub fn export(&self) -> String {
        let mut out = format!("N={} dim={}\n", self.geometry.n_sites(), self.dim());
        for &s in &self.states {
            out.push_str(&self.geometry.to_string_repr(s));
            out.push('\n');
        }
        out
    }

    /// Unit vector on a basis state.
    pub fn unit_vector(&self, state: FockState) -> Result<Vec<f64>> {
        let idx = self
            .index_of(state)
            .ok_or_else(|| PxpError::InvalidState(format!("{state:#x} is not in the basis")))?;
        let mut v = vec![0.0; self.dim()];
        v[idx] = 1.0;
        Ok(v)
    }
}

/// Enumerates every blockade-valid configuration in ascending mask order.
pub fn enumerate_basis(geometry: &Geometry) -> Result<Basis> {
    let g = Geometry::new(geometry.legs, geometry.rungs)?;
    let neighbors = g.neighbor_masks();
    let mut states = Vec::with_capacity(dimension_estimate(&g));
    // Rung-by-rung depth-first construction; only same-leg wrap-around needs a final check.
    let rung_options: &[u64] = if g.legs == 2 { &[0b00, 0b01, 0b10] } else { &[0, 1] };
    let l = g.rungs;
    let legs = g.legs;
    let mut stack: Vec<(usize, u64, u64)> = vec![(0, 0, 0)];
    while let Some((j, mask, prev)) = stack.pop() {
        if j == l {
            let first = mask & ((1u64 << legs) - 1);
            if first & prev == 0 {
                states.push(mask);
            }
            continue;
        }
        for &opt in rung_options {
            if opt & prev == 0 {
                stack.push((j + 1, mask | (opt << (legs * j)), opt));
            }
        }
    }
    states.sort_unstable();
    Ok(Basis {
        geometry: g,
        states,
        neighbors,
    })
}

fn dimension_estimate(g: &Geometry) -> usize {
    let d = if g.is_ladder() {
        dimension_formula(g.rungs)
    } else {
        chain_dimension(g.rungs)
    };
    d.min(1 << 24) as usize
}

/// Ladder dimension `(1+√2)^L + (1−√2)^L + (−1)^L`, rounded.
pub fn dimension_formula(l: usize) -> u64 {
    let s = std::f64::consts::SQRT_2;
    let lf = l as i32;
    let v = (1.0 + s).powi(lf) + (1.0 - s).powi(lf) + if l % 2 == 0 { 1.0 } else { -1.0 };
    v.round() as u64
}

/// Periodic chain dimension (Lucas number `L_L`).
pub fn chain_dimension(l: usize) -> u64 {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let psi = (1.0 - 5f64.sqrt()) / 2.0;
    (phi.powi(l as i32) + psi.powi(l as i32)).round() as u64
}

/// States with definite momentum under two-rung translations `T_x²`.
///
/// The state for representative `a` with orbit period `p_a` and group order
/// `G = L/2` is `√p_a / G · Σ_r e^{−2πi k r/G} T^r |a⟩`.
#[derive(Clone, Debug)]
pub struct MomentumSector {
    k: usize,
    group_order: usize,
    representatives: Vec<FockState>,
    periods: Vec<usize>,
    /// For every parent-basis index: representative index and shift `l` with
    /// `state = T^l rep`. `None` when the orbit is absent from the sector.
    lookup: Vec<Option<(usize, usize)>>,
    parent_dim: usize,
}

impl MomentumSector {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    pub fn parent_dim(&self) -> usize {
        self.parent_dim
    }

    pub fn representatives(&self) -> &[FockState] {
        &self.representatives
    }

    pub fn periods(&self) -> &[usize] {
        &self.periods
    }

    pub fn lookup(&self, parent_idx: usize) -> Option<(usize, usize)> {
        self.lookup[parent_idx]
    }

    /// True when the character `e^{2πi k l/G}` is real (±1) for every shift.
    pub fn has_real_character(&self) -> bool {
        (2 * self.k) % self.group_order == 0
    }

    /// Character sign `e^{2πi k l/G}` for a real-character sector.
    pub fn character_sign(&self, shift: usize) -> f64 {
        if self.k == 0 || (self.k * shift) % self.group_order == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

pub fn build_sector(basis: &Basis, k: usize) -> Result<MomentumSector> {
    let g = basis.geometry();
    let group_order = g.rungs / 2;
    if k >= group_order {
        return Err(PxpError::InvalidParameter(format!(
            "momentum k={k} must satisfy 0 <= k < L/2 = {group_order}"
        )));
    }
    let dim = basis.dim();
    let mut lookup = vec![None; dim];
    let mut representatives = Vec::new();
    let mut periods = Vec::new();
    let mut seen = vec![false; dim];
    for idx in 0..dim {
        if seen[idx] {
            continue;
        }
        let rep = basis.state(idx);
        // Ascending scan reaches the orbit minimum first.
        let mut orbit = vec![rep];
        let mut cur = g.translate(rep, 2);
        while cur != rep {
            orbit.push(cur);
            cur = g.translate(cur, 2);
        }
        let period = orbit.len();
        let allowed = (k * period) % group_order == 0;
        let rep_idx = representatives.len();
        for (shift, &s) in orbit.iter().enumerate() {
            let i = basis.index_of(s).expect("translation preserves the blockade");
            seen[i] = true;
            if allowed {
                lookup[i] = Some((rep_idx, shift));
            }
        }
        if allowed {
            representatives.push(rep);
            periods.push(period);
        }
    }
    Ok(MomentumSector {
        k,
        group_order,
        representatives,
        periods,
        lookup,
        parent_dim: dim,
    })
}

/// Named product states used as quench initial conditions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedState {
    Z2,
    Z2Bar,
    /// Period-3 pattern translated by 0, 1 or 2 rungs.
    Z3(usize),
    Z4,
    Vac,
    /// Bitstring over `.x` or `01`, one character per site in bit order.
    Custom(String),
}

impl NamedState {
    pub fn label(&self) -> String {
        match self {
            NamedState::Z2 => "Z2".into(),
            NamedState::Z2Bar => "Z2bar".into(),
            NamedState::Z3(0) => "Z3".into(),
            NamedState::Z3(s) => format!("Z3_{s}"),
            NamedState::Z4 => "Z4".into(),
            NamedState::Vac => "vac".into(),
            NamedState::Custom(s) => s.clone(),
        }
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for NamedState {
    type Err = PxpError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Z2" | "z2" => NamedState::Z2,
            "Z2bar" | "z2bar" | "Z2Bar" => NamedState::Z2Bar,
            "Z3" | "z3" | "Z3_0" => NamedState::Z3(0),
            "Z3_1" | "z3_1" => NamedState::Z3(1),
            "Z3_2" | "z3_2" => NamedState::Z3(2),
            "Z4" | "z4" => NamedState::Z4,
            "vac" | "VAC" | "Vac" => NamedState::Vac,
            other if !other.is_empty() && other.chars().all(|c| matches!(c, '.' | 'x' | '0' | '1')) => {
                NamedState::Custom(other.to_string())
            }
            other => return Err(PxpError::InvalidState(format!("unknown state name {other:?}"))),
        })
    }
}

/// Fock mask for a named state on `geometry`.
pub fn named_state(name: &NamedState, geometry: &Geometry) -> Result<FockState> {
    let g = geometry;
    let l = g.rungs;
    let incompatible = |reason: &str| PxpError::IncompatibleState {
        name: name.label(),
        rungs: l,
        reason: reason.to_string(),
    };
    let mut mask = 0u64;
    let mut set = |j: usize, a: usize| mask |= 1u64 << g.site_unchecked(j, a);
    match name {
        NamedState::Vac => {}
        NamedState::Z2 | NamedState::Z2Bar => {
            for j in 1..=l {
                if g.is_ladder() {
                    set(j, if j % 2 == 1 { 1 } else { 2 });
                } else if j % 2 == 1 {
                    set(j, 1);
                }
            }
            if *name == NamedState::Z2Bar {
                mask ^= g.full_mask();
            }
        }
        NamedState::Z3(shift) => {
            if l % 3 != 0 {
                return Err(incompatible("L must be a multiple of 3"));
            }
            if *shift > 2 {
                return Err(incompatible("Z3 translate index must be 0, 1 or 2"));
            }
            for j in 1..=l {
                if g.is_ladder() {
                    match j % 3 {
                        1 => set(j, 2),
                        0 => set(j, 1),
                        _ => {}
                    }
                } else if j % 3 == 1 {
                    set(j, 1);
                }
            }
            mask = g.translate(mask, *shift);
        }
        NamedState::Z4 => {
            if l % 4 != 0 {
                return Err(incompatible("L must be a multiple of 4"));
            }
            for j in 1..=l {
                if g.is_ladder() {
                    match j % 4 {
                        3 => set(j, 1),
                        0 => set(j, 2),
                        _ => {}
                    }
                } else if j % 4 == 1 {
                    set(j, 1);
                }
            }
        }
        NamedState::Custom(bits) => {
            if bits.chars().count() != g.n_sites() {
                return Err(PxpError::InvalidState(format!(
                    "bitstring {bits:?} has {} characters, expected N={}",
                    bits.chars().count(),
                    g.n_sites()
                )));
            }
            let dotted = bits.contains('.') || bits.contains('x');
            let binary = bits.contains('0') || bits.contains('1');
            if dotted && binary {
                return Err(PxpError::InvalidState(format!(
                    "bitstring {bits:?} mixes the .x and 01 alphabets"
                )));
            }
            for (b, c) in bits.chars().enumerate() {
                match c {
                    'x' | '1' => mask |= 1u64 << b,
                    '.' | '0' => {}
                    other => {
                        return Err(PxpError::InvalidState(format!("unexpected character {other:?}")))
                    }
                }
            }
        }
    }
    if !is_valid(mask, g) {
        return Err(PxpError::InvalidState(format!(
            "{} = {} violates the blockade",
            name.label(),
            g.to_string_repr(mask)
        )));
    }
    Ok(mask)
}

/// Normalized real vector for a named state over `basis`.
pub fn named_vector(name: &NamedState, basis: &Basis) -> Result<Vec<f64>> {
    basis.unit_vector(named_state(name, basis.geometry())?)
}

/// Number of basis states per momentum, keyed by `k`.
pub fn sector_dimensions(basis: &Basis) -> Result<HashMap<usize, usize>> {
    let g = basis.geometry().rungs / 2;
    (0..g).map(|k| build_sector(basis, k).map(|s| (k, s.dim()))).collect()
}
