use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;

use crate::error::{PxpError, Result};
use crate::operators::SparseOperator;
use crate::scalar::Real;
use crate::spectra::EigenSystem;

pub type StateVector<T> = Vec<Complex<T>>;

pub const DEFAULT_DT: f64 = 0.005;
pub const DEFAULT_STRIDE: f64 = 0.05;
pub const DRIFT_BUDGET: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct Rk4Options<T> {
    pub dt: T,
    pub t_max: T,
    /// Output spacing; must be an integer multiple of `dt`.
    pub stride: T,
    /// Largest tolerated `|‖ψ‖ − 1|`.
    pub drift_budget: T,
}

impl<T: Real> Rk4Options<T> {
    pub fn new(t_max: T) -> Self {
        Self {
            dt: T::lit(DEFAULT_DT),
            t_max,
            stride: T::lit(DEFAULT_STRIDE),
            drift_budget: T::lit(DRIFT_BUDGET),
        }
    }

    fn steps_per_output(&self) -> Result<usize> {
        if !(self.dt > T::zero()) || !(self.stride > T::zero()) || self.t_max < T::zero() {
            return Err(PxpError::InvalidParameter(
                "dt and stride must be positive and t_max non-negative".into(),
            ));
        }
        let ratio = self.stride / self.dt;
        let n = Float::round(ratio);
        if Float::abs(ratio - n) > T::lit(1e-9) * ratio || n < T::one() {
            return Err(PxpError::InvalidParameter(format!(
                "stride {} is not an integer multiple of dt {}",
                self.stride, self.dt
            )));
        }
        Ok(n.as_f64() as usize)
    }

    /// `floor(t_max / stride) + 1`.
    pub fn n_outputs(&self) -> usize {
        (Float::floor(self.t_max / self.stride + T::lit(1e-9))).as_f64() as usize + 1
    }
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct Rk4Report {
    pub steps: usize,
    pub outputs: usize,
    pub final_norm_deviation: f64,
    pub max_norm_deviation: f64,
    pub max_energy_drift: f64,
}

pub fn norm<T: Real>(psi: &[Complex<T>]) -> T {
    Float::sqrt(psi.iter().map(|c| c.norm_sqr()).sum::<T>())
}

pub fn to_complex<T: Real>(psi: &[T]) -> StateVector<T> {
    psi.iter().map(|&x| Complex::new(x, T::zero())).collect()
}

/// Integrates `i dψ/dt = H ψ` with classical fourth-order Runge–Kutta.
///
/// `sink` receives every output sample. The state is never renormalized; the
/// norm and energy drifts are reported and an over-budget norm is an error.
pub fn evolve_rk4<T: Real>(
    h: &SparseOperator<T>,
    psi0: &[Complex<T>],
    opts: &Rk4Options<T>,
    mut sink: impl FnMut(T, &[Complex<T>]),
) -> Result<Rk4Report> {
    let per = opts.steps_per_output()?;
    let n_out = opts.n_outputs();
    let dim = h.dim();
    if psi0.len() != dim {
        return Err(PxpError::BasisMismatch {
            expected: dim,
            found: psi0.len(),
        });
    }
    let mut psi = psi0.to_vec();
    let zero = Complex::new(T::zero(), T::zero());
    let (mut k, mut acc, mut tmp) = (vec![zero; dim], vec![zero; dim], vec![zero; dim]);
    let dt = opts.dt;
    let half = dt * T::lit(0.5);
    let sixth = dt / T::lit(6.0);
    let norm0 = norm(&psi);
    let e0 = h.expectation(&psi);
    let mut report = Rk4Report::default();
    let minus_i = |z: Complex<T>| Complex::new(z.im, -z.re);
    for out in 0..n_out {
        if out > 0 {
            for _ in 0..per {
                // k1
                h.apply_complex(&psi, &mut k);
                for i in 0..dim {
                    k[i] = minus_i(k[i]);
                    acc[i] = k[i];
                    tmp[i] = psi[i] + k[i] * half;
                }
                // k2
                h.apply_complex(&tmp, &mut k);
                for i in 0..dim {
                    k[i] = minus_i(k[i]);
                    acc[i] += k[i] * T::lit(2.0);
                    tmp[i] = psi[i] + k[i] * half;
                }
                // k3
                h.apply_complex(&tmp, &mut k);
                for i in 0..dim {
                    k[i] = minus_i(k[i]);
                    acc[i] += k[i] * T::lit(2.0);
                    tmp[i] = psi[i] + k[i] * dt;
                }
                // k4
                h.apply_complex(&tmp, &mut k);
                for i in 0..dim {
                    k[i] = minus_i(k[i]);
                    psi[i] += (acc[i] + k[i]) * sixth;
                }
                report.steps += 1;
            }
        }
        let t = opts.stride * T::lit(out as f64);
        let dn = Float::abs(norm(&psi) - norm0).as_f64();
        let de = Float::abs(h.expectation(&psi) - e0).as_f64();
        report.max_norm_deviation = report.max_norm_deviation.max(dn);
        report.max_energy_drift = report.max_energy_drift.max(de);
        report.final_norm_deviation = dn;
        if dn > opts.drift_budget.as_f64() {
            return Err(PxpError::DriftExceeded {
                drift: dn,
                budget: opts.drift_budget.as_f64(),
            });
        }
        sink(t, &psi);
        report.outputs += 1;
    }
    Ok(report)
}

/// Final state after integrating to `t_max` (no intermediate output).
pub fn rk4_final_state<T: Real>(
    h: &SparseOperator<T>,
    psi0: &[Complex<T>],
    dt: T,
    t_max: T,
) -> Result<StateVector<T>> {
    let opts = Rk4Options {
        dt,
        t_max,
        stride: t_max,
        drift_budget: T::lit(DRIFT_BUDGET),
    };
    let mut last = psi0.to_vec();
    evolve_rk4(h, psi0, &opts, |_, psi| last.copy_from_slice(psi))?;
    Ok(last)
}

/// Half-step probe: largest amplitude difference at `t_probe` between runs
/// with `dt` and `dt/2`.
pub fn convergence_probe<T: Real>(h: &SparseOperator<T>, psi0: &[Complex<T>], dt: T, t_probe: T) -> Result<T> {
    let a = rk4_final_state(h, psi0, dt, t_probe)?;
    let b = rk4_final_state(h, psi0, dt * T::lit(0.5), t_probe)?;
    Ok(max_amplitude_deviation(&a, &b))
}

pub fn max_amplitude_deviation<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).norm())
        .fold(T::zero(), |m, d| Float::max(m, d))
}

/// Exact propagation `Σ_μ e^{−iE_μ t} |E_μ⟩⟨E_μ|ψ₀⟩`.
#[derive(Clone, Debug)]
pub struct EigenPropagator<'a, T> {
    es: &'a EigenSystem<T>,
    coeff: Vec<Complex<T>>,
}

impl<'a, T: Real> EigenPropagator<'a, T> {
    pub fn new(es: &'a EigenSystem<T>, psi0: &[Complex<T>]) -> Result<Self> {
        if psi0.len() != es.dim() {
            return Err(PxpError::BasisMismatch {
                expected: es.dim(),
                found: psi0.len(),
            });
        }
        let re: Vec<T> = psi0.iter().map(|c| c.re).collect();
        let im: Vec<T> = psi0.iter().map(|c| c.im).collect();
        let cr = es.coefficients(&re);
        let ci = es.coefficients(&im);
        let coeff = cr.into_iter().zip(ci).map(|(a, b)| Complex::new(a, b)).collect();
        Ok(Self { es, coeff })
    }

    /// `⟨E_μ|ψ₀⟩`.
    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coeff
    }

    pub fn state_at(&self, t: T) -> StateVector<T> {
        let phased: Vec<Complex<T>> = self
            .coeff
            .iter()
            .zip(self.es.values())
            .map(|(c, &e)| *c * Complex::from_polar(T::one(), -e * t))
            .collect();
        let v: &DMatrix<T> = self.es.vectors();
        let re = nalgebra::DVector::from_iterator(phased.len(), phased.iter().map(|c| c.re));
        let im = nalgebra::DVector::from_iterator(phased.len(), phased.iter().map(|c| c.im));
        let out_re = v * re;
        let out_im = v * im;
        out_re.iter().zip(out_im.iter()).map(|(&a, &b)| Complex::new(a, b)).collect()
    }
}

/// States at each requested time via eigenbasis phases.
pub fn evolve_eigenbasis<T: Real>(es: &EigenSystem<T>, psi0: &[Complex<T>], times: &[T]) -> Result<Vec<StateVector<T>>> {
    let prop = EigenPropagator::new(es, psi0)?;
    Ok(times.iter().map(|&t| prop.state_at(t)).collect())
}
