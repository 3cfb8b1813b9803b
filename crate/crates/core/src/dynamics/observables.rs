use num_complex::Complex;
use num_traits::Float;

use crate::hilbert::Basis;
use crate::scalar::Real;
use crate::spectra::shannon_of_probabilities;

/// `|⟨ψ₀|ψ_t⟩|²`.
pub fn measure_fidelity<T: Real>(psi_t: &[Complex<T>], psi0: &[Complex<T>]) -> T {
    inner(psi0, psi_t).norm_sqr()
}

/// `|⟨φ|ψ_t⟩|²`.
pub fn measure_overlap<T: Real>(psi_t: &[Complex<T>], phi: &[Complex<T>]) -> T {
    inner(phi, psi_t).norm_sqr()
}

/// `⟨a|b⟩`.
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// Fock-basis Shannon entropy, natural log.
pub fn measure_shannon<T: Real>(psi_t: &[Complex<T>]) -> T {
    shannon_of_probabilities(psi_t.iter().map(|c| c.norm_sqr()))
}

/// Precomputed site tables for fast magnetization measurements.
#[derive(Clone, Debug)]
pub struct SiteTables {
    n_sites: usize,
    states: Vec<u64>,
    /// `flip[i * n + b]`: basis index reached by the allowed flip of site `b`
    /// from state `i`, or `u32::MAX` when blocked.
    flip: Vec<u32>,
}

impl SiteTables {
    pub fn new(basis: &Basis) -> Self {
        let n = basis.geometry().n_sites();
        let nb = basis.neighbors();
        let mut flip = vec![u32::MAX; basis.dim() * n];
        for (i, &s) in basis.states().iter().enumerate() {
            for b in 0..n {
                let occupied = s >> b & 1 == 1;
                if occupied || s & nb[b] == 0 {
                    flip[i * n + b] = basis.index_of(s ^ (1 << b)).expect("allowed flip") as u32;
                }
            }
        }
        Self {
            n_sites: n,
            states: basis.states().to_vec(),
            flip,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// `(⟨σᶻ_b⟩, ⟨σ̃ˣ_b⟩)` for every site `b` in bit order.
    pub fn site_magnetizations<T: Real>(&self, psi: &[Complex<T>]) -> (Vec<T>, Vec<T>) {
        let n = self.n_sites;
        let mut occ = vec![T::zero(); n];
        let mut mx = vec![T::zero(); n];
        let mut total = T::zero();
        for (i, (&s, amp)) in self.states.iter().zip(psi).enumerate() {
            let p = amp.norm_sqr();
            total += p;
            let mut bits = s;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                occ[b] += p;
                bits &= bits - 1;
            }
            for b in 0..n {
                let j = self.flip[i * n + b];
                if j != u32::MAX {
                    let other = psi[j as usize];
                    mx[b] += amp.re * other.re + amp.im * other.im;
                }
            }
        }
        let two = T::lit(2.0);
        let mz = occ.into_iter().map(|o| two * o - total).collect();
        (mz, mx)
    }

    /// `⟨(1/N) Σ σᶻ⟩`.
    pub fn mz_density<T: Real>(&self, psi: &[Complex<T>]) -> T {
        let n = T::lit(self.n_sites as f64);
        let mut acc = T::zero();
        for (&s, amp) in self.states.iter().zip(psi) {
            let ones = T::lit(s.count_ones() as f64);
            acc += amp.norm_sqr() * (T::lit(2.0) * ones - n);
        }
        acc / n
    }
}

/// Longitudinal magnetization density.
pub fn measure_mz_density<T: Real>(basis: &Basis, psi: &[Complex<T>]) -> T {
    let n = T::lit(basis.geometry().n_sites() as f64);
    basis
        .states()
        .iter()
        .zip(psi)
        .map(|(&s, a)| a.norm_sqr() * (T::lit(2.0) * T::lit(s.count_ones() as f64) - n))
        .sum::<T>()
        / n
}

/// Per-site `(M^z, M^x)` in bit order.
pub fn measure_site_magnetizations<T: Real>(basis: &Basis, psi: &[Complex<T>]) -> (Vec<T>, Vec<T>) {
    SiteTables::new(basis).site_magnetizations(psi)
}

/// Largest `|a_i − sign · b_i|` across two series.
pub fn max_relation_violation<T: Real>(a: &[T], b: &[T], sign: T) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| Float::abs(*x - sign * *y))
        .fold(T::zero(), |m, d| Float::max(m, d))
}
