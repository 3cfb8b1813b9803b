//! Closed-form solution of a single four-site plaquette.
//!
//! The plaquette has the seven configurations
//!
//! | label | occupied sites |
//! |-------|----------------|
//! | F0    | none |
//! | F1    | (1,1) |
//! | F2    | (2,1) |
//! | F3    | (1,2) |
//! | F4    | (2,2) |
//! | F5    | (1,1), (2,2) |
//! | F6    | (2,1), (1,2) |
//!
//! and a dimensionless Hamiltonian `P(r)` with `r = w/(2Δ)`. On an `L = 2`
//! ladder `H = −2Δ P(r)` in this basis. Time is measured in units of `1/(2Δ)`.
//!
//! Everything here is independent of the many-body machinery so it can serve
//! as a cross-check of it.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;
use serde::Serialize;

use crate::error::{PxpError, Result};
use crate::linalg::symmetric_eigh;
use crate::scalar::Real;

pub const N_CONFIGS: usize = 7;

/// Occupied `(j, a)` sites of each configuration.
pub const CONFIG_SITES: [&[(usize, usize)]; N_CONFIGS] = [
    &[],
    &[(1, 1)],
    &[(2, 1)],
    &[(1, 2)],
    &[(2, 2)],
    &[(1, 1), (2, 2)],
    &[(2, 1), (1, 2)],
];

/// Pairs `(α, β)` connected by the constrained flip of a site.
pub fn flip_pairs(j: usize, a: usize) -> [(usize, usize); 2] {
    match (j, a) {
        (1, 1) => [(0, 1), (4, 5)],
        (2, 1) => [(0, 2), (3, 6)],
        (1, 2) => [(0, 3), (2, 6)],
        (2, 2) => [(0, 4), (1, 5)],
        _ => panic!("plaquette site ({j},{a}) out of range"),
    }
}

const SITES: [(usize, usize); 4] = [(1, 1), (2, 1), (1, 2), (2, 2)];

fn occupied(config: usize, site: (usize, usize)) -> bool {
    CONFIG_SITES[config].contains(&site)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlaquetteModel<T> {
    r: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PlaquetteInitial {
    /// `F5`.
    Z2,
    /// `F0`.
    Vac,
}

impl PlaquetteInitial {
    pub fn config(self) -> usize {
        match self {
            PlaquetteInitial::Z2 => 5,
            PlaquetteInitial::Vac => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteadyImbalances<T> {
    pub iz_z2: T,
    pub ix_z2: T,
    pub ix_vac: T,
}

/// Site magnetizations indexed `[j − 1][a − 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlaquetteMagnetizations<T> {
    pub mz: [[T; 2]; 2],
    pub mx: [[T; 2]; 2],
}

impl<T: Real> PlaquetteMagnetizations<T> {
    pub fn mz_at(&self, j: usize, a: usize) -> T {
        self.mz[j - 1][a - 1]
    }

    pub fn mx_at(&self, j: usize, a: usize) -> T {
        self.mx[j - 1][a - 1]
    }

    /// Imbalances with the cell weights of the ladder operators and their `1/L` factor.
    pub fn imbalances(&self) -> SteadyImbalances<T> {
        let half = T::lit(0.5);
        let (z, x) = (&self.mz, &self.mx);
        SteadyImbalances {
            iz_z2: half * (z[0][0] - z[1][0] - z[0][1] + z[1][1]),
            ix_z2: half * (-x[0][0] - x[1][0] + x[0][1] + x[1][1]),
            ix_vac: half * (x[0][0] - x[1][0] + x[0][1] - x[1][1]),
        }
    }
}

impl<T: Real> PlaquetteModel<T> {
    pub fn new(r: T) -> Result<Self> {
        if !(r > T::zero()) || !Float::is_finite(r) {
            return Err(PxpError::InvalidParameter(format!("r must be positive, got {r}")));
        }
        Ok(Self { r })
    }

    /// Model for a ladder with detuning `delta` and flip amplitude `w`.
    pub fn from_ladder(delta: T, w: T) -> Result<Self> {
        Self::new(w / (T::lit(2.0) * delta))
    }

    pub fn r(&self) -> T {
        self.r
    }

    /// `√(1 + 2r²)`.
    pub fn e1(&self) -> T {
        Float::sqrt(T::one() + T::lit(2.0) * self.r * self.r)
    }

    /// `√(1 + 6r²)`.
    pub fn e2(&self) -> T {
        Float::sqrt(T::one() + T::lit(6.0) * self.r * self.r)
    }

    pub fn hamiltonian(&self) -> DMatrix<T> {
        let r = self.r;
        let mut h = DMatrix::zeros(N_CONFIGS, N_CONFIGS);
        for (k, d) in [(1, -1.0), (2, 1.0), (3, -1.0), (4, 1.0)] {
            h[(k, k)] = T::lit(d);
        }
        for (a, b) in [(0, 1), (0, 2), (0, 3), (0, 4), (1, 5), (4, 5), (2, 6), (3, 6)] {
            h[(a, b)] = r;
            h[(b, a)] = r;
        }
        h
    }

    /// Eigenpairs in the order `0, 0, 0, −E₁, +E₁, −E₂, +E₂`. The three zero
    /// modes are orthonormalized in that order.
    pub fn eigensystem(&self) -> Vec<(T, [T; N_CONFIGS])> {
        let r = self.r;
        let two = T::lit(2.0);
        let (e1, e2) = (self.e1(), self.e2());
        let (alpha, beta) = ((e1 - T::one()) / (two * r), (e1 + T::one()) / (two * r));
        let (alpha2, beta2) = ((e2 - T::one()) / (two * r), (e2 + T::one()) / (two * r));
        let z = T::zero();
        let one = T::one();
        let zero_modes = [
            [z, z, -r, r, z, z, one],
            [-one, z, r, -r, z, one, z],
            [-one / r, -one, one, -one, one, z, z],
        ];
        let mut out: Vec<(T, [T; N_CONFIGS])> = Vec::with_capacity(N_CONFIGS);
        for v in zero_modes {
            let mut v = v;
            for (_, u) in &out {
                let p = dot(&v, u);
                for k in 0..N_CONFIGS {
                    v[k] -= p * u[k];
                }
            }
            out.push((z, normalized(v)));
        }
        out.push((-e1, normalized([z, beta, -alpha, -beta, alpha, -one, one])));
        out.push((e1, normalized([z, -alpha, beta, alpha, -beta, -one, one])));
        out.push((-e2, normalized([two, -beta2, -alpha2, -beta2, -alpha2, one, one])));
        out.push((e2, normalized([two, alpha2, beta2, alpha2, beta2, one, one])));
        out
    }

    /// `(α, β, α′, β′)`.
    pub fn alpha_beta(&self) -> (T, T, T, T) {
        let two_r = T::lit(2.0) * self.r;
        let (e1, e2) = (self.e1(), self.e2());
        (
            (e1 - T::one()) / two_r,
            (e1 + T::one()) / two_r,
            (e2 - T::one()) / two_r,
            (e2 + T::one()) / two_r,
        )
    }

    /// Norms of the nonzero-energy eigenvectors: `𝒩 = √2 √(2 + 1/r²)` and
    /// `𝒩′ = √2 √(1 + 6r²) / r`.
    pub fn norms(&self) -> (T, T) {
        let r = self.r;
        let two = T::lit(2.0);
        (
            Float::sqrt(two) * Float::sqrt(two + T::one() / (r * r)),
            Float::sqrt(two) * self.e2() / r,
        )
    }

    /// Amplitudes `c_α(t)` starting from `F5`.
    pub fn z2_coefficients(&self, t: T) -> [Complex<T>; N_CONFIGS] {
        let r = self.r;
        let r2 = r * r;
        let (e1, e2) = (self.e1(), self.e2());
        let (e1s, e2s) = (e1 * e1, e2 * e2);
        let (c1t, c2t) = (Float::cos(e1 * t), Float::cos(e2 * t));
        let (s1t, s2t) = (Float::sin(e1 * t), Float::sin(e2 * t));
        let two = T::lit(2.0);
        let half_r = r / two;
        let re = |x: T| Complex::new(x, T::zero());
        let a1 = (T::one() - c1t) / e1s;
        let a2 = (T::one() - c2t) / e2s;
        let c0 = re(two * r2 * (c2t - T::one()) / e2s);
        let c1 = Complex::new(half_r * (a1 + a2), -half_r * (s1t / e1 + s2t / e2));
        let c2 = Complex::new(half_r * (a1 - a2), -half_r * (-s1t / e1 + s2t / e2));
        let c3 = -c2.conj();
        let c4 = -c1.conj();
        let c5 = re(T::one() - two * r2 * (T::one() + T::lit(4.0) * r2) / (e1s * e2s) + r2 * (c1t / e1s + c2t / e2s));
        let c6 = re(T::lit(4.0) * r2 * r2 / (e1s * e2s) + r2 * (c2t / e2s - c1t / e1s));
        [c0, c1, c2, c3, c4, c5, c6]
    }

    /// Amplitudes `d_α(t)` starting from `F0`.
    pub fn vac_coefficients(&self, t: T) -> [Complex<T>; N_CONFIGS] {
        let r = self.r;
        let r2 = r * r;
        let (e1, e2) = (self.e1(), self.e2());
        let e2s = e2 * e2;
        let (c, s) = (Float::cos(e2 * t), Float::sin(e2 * t));
        let d0 = Complex::new((e1 * e1 + T::lit(4.0) * r2 * c) / e2s, T::zero());
        let d1 = Complex::new(r * (T::one() - c) / e2s, -r * e2 * s / e2s);
        let d2 = -d1.conj();
        let d5 = Complex::new(T::lit(2.0) * r2 * (c - T::one()) / e2s, T::zero());
        [d0, d1, d2, d1, d2, d5, d5]
    }

    pub fn coefficients(&self, initial: PlaquetteInitial, t: T) -> [Complex<T>; N_CONFIGS] {
        match initial {
            PlaquetteInitial::Z2 => self.z2_coefficients(t),
            PlaquetteInitial::Vac => self.vac_coefficients(t),
        }
    }

    /// Site magnetizations from the closed-form amplitudes.
    pub fn magnetizations(&self, initial: PlaquetteInitial, t: T) -> PlaquetteMagnetizations<T> {
        magnetizations_of(&self.coefficients(initial, t))
    }

    /// Infinite-time averages of [`PlaquetteMagnetizations::imbalances`], in
    /// closed form: `2(1+5r²)/(E₁²E₂²)`, `2r(1+4r²)/(E₁²E₂²)` and
    /// `4r(1+3r²)/E₂⁴`.
    pub fn steady_imbalances_exact(&self) -> SteadyImbalances<T> {
        let r = self.r;
        let r2 = r * r;
        let one = T::one();
        let (e1s, e2s) = (one + T::lit(2.0) * r2, one + T::lit(6.0) * r2);
        SteadyImbalances {
            iz_z2: T::lit(2.0) * (one + T::lit(5.0) * r2) / (e1s * e2s),
            ix_z2: T::lit(2.0) * r * (one + T::lit(4.0) * r2) / (e1s * e2s),
            ix_vac: T::lit(4.0) * r * (one + T::lit(3.0) * r2) / (e2s * e2s),
        }
    }

    /// Reference closed forms
    /// `2(1+5r²)/(E₁²E₂²)`, `r(1+4r²)³/(E₁⁴E₂⁴)` and `2r(1+4r²)/(1+6r²)²`.
    ///
    /// Only the first agrees with the dynamics; see
    /// [`PlaquetteModel::steady_imbalances_exact`].
    pub fn steady_imbalances(&self) -> SteadyImbalances<T> {
        let r = self.r;
        let r2 = r * r;
        let one = T::one();
        let four_r2 = T::lit(4.0) * r2;
        let (e1s, e2s) = (one + T::lit(2.0) * r2, one + T::lit(6.0) * r2);
        SteadyImbalances {
            iz_z2: T::lit(2.0) * (one + T::lit(5.0) * r2) / (e1s * e2s),
            ix_z2: r * Float::powi(one + four_r2, 3) / (e1s * e1s * e2s * e2s),
            ix_vac: T::lit(2.0) * r * (one + four_r2) / (e2s * e2s),
        }
    }

    /// `M^x` on site `(1,1)` from `F0`: `2r(1 − cos E₂t)(1 + 4r² + 2r² cos E₂t)/E₂⁴`.
    pub fn vac_transverse(&self, t: T) -> T {
        let r = self.r;
        let r2 = r * r;
        let e2 = self.e2();
        let c = Float::cos(e2 * t);
        let two = T::lit(2.0);
        two * r * (T::one() - c) * (T::one() + T::lit(4.0) * r2 + two * r2 * c) / Float::powi(e2, 4)
    }

    /// `M^z` on every site from `F0`: `−1 + 4r²(1 − cos E₂t)(1 + 5r² + r² cos E₂t)/E₂⁴`.
    pub fn vac_longitudinal(&self, t: T) -> T {
        let r = self.r;
        let r2 = r * r;
        let e2 = self.e2();
        let c = Float::cos(e2 * t);
        -T::one() + T::lit(4.0) * r2 * (T::one() - c) * (T::one() + T::lit(5.0) * r2 + r2 * c) / Float::powi(e2, 4)
    }
}

fn dot<T: Real>(a: &[T; N_CONFIGS], b: &[T; N_CONFIGS]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn normalized<T: Real>(v: [T; N_CONFIGS]) -> [T; N_CONFIGS] {
    let n = Float::sqrt(dot(&v, &v));
    v.map(|x| x / n)
}

/// `⟨σᶻ⟩` and `⟨σ̃ˣ⟩` on the four sites of a plaquette state.
pub fn magnetizations_of<T: Real>(c: &[Complex<T>; N_CONFIGS]) -> PlaquetteMagnetizations<T> {
    let mut mz = [[T::zero(); 2]; 2];
    let mut mx = [[T::zero(); 2]; 2];
    for (j, a) in SITES {
        let mut z = T::zero();
        for (k, amp) in c.iter().enumerate() {
            let s = if occupied(k, (j, a)) { T::one() } else { -T::one() };
            z += s * amp.norm_sqr();
        }
        let mut x = T::zero();
        for (p, q) in flip_pairs(j, a) {
            x += T::lit(2.0) * (c[p].conj() * c[q]).re;
        }
        mz[j - 1][a - 1] = z;
        mx[j - 1][a - 1] = x;
    }
    PlaquetteMagnetizations { mz, mx }
}

/// Numerical propagation of the seven-level problem through the eigenbasis
/// of the dense matrix. Used as the oracle for the closed forms.
#[derive(Clone, Debug)]
pub struct NumericPlaquette<T> {
    values: Vec<T>,
    vectors: DMatrix<T>,
}

impl<T: Real> NumericPlaquette<T> {
    pub fn new(model: &PlaquetteModel<T>) -> Self {
        let (values, vectors) = symmetric_eigh(model.hamiltonian());
        Self { values, vectors }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn state_at(&self, initial: PlaquetteInitial, t: T) -> [Complex<T>; N_CONFIGS] {
        let k0 = initial.config();
        let mut out = [Complex::new(T::zero(), T::zero()); N_CONFIGS];
        for (mu, &e) in self.values.iter().enumerate() {
            let phase = Complex::from_polar(self.vectors[(k0, mu)], -e * t);
            for (k, slot) in out.iter_mut().enumerate() {
                *slot += phase * self.vectors[(k, mu)];
            }
        }
        out
    }

    /// Infinite-time averages of the site magnetizations, with every
    /// degenerate level rotated to diagonalize each observable.
    pub fn steady_magnetizations(&self, initial: PlaquetteInitial, tol: T) -> PlaquetteMagnetizations<T> {
        let k0 = initial.config();
        let n = N_CONFIGS;
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for mu in 0..n {
            match groups.last_mut() {
                Some(g) if Float::abs(self.values[mu] - self.values[g[0]]) < tol => g.push(mu),
                _ => groups.push(vec![mu]),
            }
        }
        // Σ_groups ⟨ψ|P_g A P_g|ψ⟩ is basis independent within each group.
        let average = |op: &DMatrix<T>| {
            let mut acc = T::zero();
            for g in &groups {
                let v = DMatrix::from_fn(n, g.len(), |r, c| self.vectors[(r, g[c])]);
                let proj = v.row(k0).transpose();
                let small = v.transpose() * op * &v;
                acc += (proj.transpose() * small * &proj)[(0, 0)];
            }
            acc
        };
        let mut mz = [[T::zero(); 2]; 2];
        let mut mx = [[T::zero(); 2]; 2];
        for (j, a) in SITES {
            let z = DMatrix::from_fn(n, n, |r, c| {
                if r != c {
                    T::zero()
                } else if occupied(r, (j, a)) {
                    T::one()
                } else {
                    -T::one()
                }
            });
            let mut x = DMatrix::zeros(n, n);
            for (p, q) in flip_pairs(j, a) {
                x[(p, q)] = T::one();
                x[(q, p)] = T::one();
            }
            mz[j - 1][a - 1] = average(&z);
            mx[j - 1][a - 1] = average(&x);
        }
        PlaquetteMagnetizations { mz, mx }
    }
}
