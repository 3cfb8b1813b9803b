use num_complex::Complex;
use proptest::prelude::*;

use pxp::dynamics::{evolve_rk4, norm, to_complex, EigenPropagator, Rk4Options};
use pxp::ensemble::{diagonal_ensemble, thermal_beta0};
use pxp::entanglement::{build_bipartition, entanglement_entropy, reduced_density, reduced_density_b, vn_entropy, CutKind};
use pxp::hilbert::{enumerate_basis, is_valid, named_vector, Basis, Geometry, NamedState};
use pxp::operators::{
    build_hamiltonian, build_imbalance, build_symmetry, translation, Imbalance, ModelParams, SymmetryKind,
};
use pxp::plaquette::{PlaquetteInitial, PlaquetteModel};
use pxp::spectra::diagonalize;
use pxp::Rational;

fn ladder(l: usize) -> Basis {
    enumerate_basis(&Geometry::ladder(l).unwrap()).unwrap()
}

fn state(parts: &[(f64, f64)]) -> Vec<Complex<f64>> {
    let mut v: Vec<Complex<f64>> = parts.iter().map(|&(re, im)| Complex::new(re, im)).collect();
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    v.iter_mut().for_each(|c| *c /= n);
    v
}

fn amplitudes(dim: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim)
        .prop_filter("nonzero", |v| v.iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_symmetric(delta in -3.0..3.0f64, w in 0.1..3.0f64, l in prop::sample::select(vec![2usize, 4, 6])) {
        let h = build_hamiltonian(&ladder(l), &ModelParams { delta, w });
        prop_assert!(h.check_symmetric());
    }

    #[test]
    fn spectrum_is_reflection_symmetric(delta in -2.0..2.0f64, l in prop::sample::select(vec![2usize, 4, 6])) {
        let es = diagonalize(&build_hamiltonian(&ladder(l), &ModelParams::new(delta))).unwrap();
        prop_assert!(es.reflection_defect() < 1e-10);
    }

    #[test]
    fn chiral_symmetries_anticommute_exactly(num in -40i64..40, den in 1i64..12, l in prop::sample::select(vec![2usize, 4, 6])) {
        let basis = ladder(l);
        let h = build_hamiltonian(&basis, &ModelParams::new(Rational::new(num, den)));
        let zero = Rational::from_integer(0);
        for kind in [SymmetryKind::C1, SymmetryKind::C2] {
            prop_assert_eq!(build_symmetry(&basis, kind).unwrap().anticommutator_max(&h), zero);
        }
        prop_assert_eq!(translation(&basis, 2).commutator_max(&h), zero);
    }

    #[test]
    fn symmetries_square_to_identity_and_preserve_the_constraint(l in prop::sample::select(vec![2usize, 4, 6, 8])) {
        let basis = ladder(l);
        for kind in [SymmetryKind::Ty, SymmetryKind::C] {
            let s = build_symmetry(&basis, kind).unwrap();
            prop_assert!(s.compose(&s).is_identity());
        }
        for kind in [SymmetryKind::C1, SymmetryKind::C2] {
            let s = build_symmetry(&basis, kind).unwrap();
            prop_assert!(s.compose(&s).same_action(&translation(&basis, 2)));
        }
        let t = translation(&basis, 1);
        let mut power = t.clone();
        for _ in 1..l {
            power = power.compose(&t);
        }
        prop_assert!(power.is_identity());
        for &s in basis.states() {
            prop_assert!(is_valid(basis.geometry().translate(s, 1), basis.geometry()));
            prop_assert!(is_valid(basis.geometry().swap_legs(s), basis.geometry()));
        }
    }

    #[test]
    fn schmidt_duality(amps in amplitudes(199)) {
        let basis = ladder(6);
        let psi = state(&amps);
        for kind in [CutKind::Parallel, CutKind::Perpendicular] {
            let bip = build_bipartition(&basis, kind).unwrap();
            let sa = vn_entropy(&reduced_density(&psi, &bip).unwrap()).unwrap();
            let sb = vn_entropy(&reduced_density_b(&psi, &bip).unwrap()).unwrap();
            prop_assert!((sa - sb).abs() < 1e-9);
            prop_assert!(sa >= -1e-12);
            prop_assert!(sa <= (bip.dim_a().min(bip.dim_b()) as f64).ln() + 1e-9);
        }
    }

    #[test]
    fn diagonal_ensemble_is_linear(alpha in -2.0..2.0f64, beta in -2.0..2.0f64, delta in 0.1..1.5f64) {
        let basis = ladder(4);
        let es = diagonalize(&build_hamiltonian(&basis, &ModelParams::new(delta))).unwrap();
        let psi = named_vector(&NamedState::Vac, &basis).unwrap();
        let a = build_imbalance::<f64>(&basis, Imbalance::IzZ2).unwrap();
        let b = build_imbalance::<f64>(&basis, Imbalance::IxVac).unwrap();
        let combo = a.scale(alpha).add(&b.scale(beta)).unwrap();
        let da = diagonal_ensemble(&es, &psi, &a).unwrap();
        let db = diagonal_ensemble(&es, &psi, &b).unwrap();
        let dc = diagonal_ensemble(&es, &psi, &combo).unwrap();
        prop_assert!((dc.total - alpha * da.total - beta * db.total).abs() < 1e-10);
        prop_assert!((dc.total - dc.nonzero_part - dc.zero_part).abs() < 1e-12);
    }

    #[test]
    fn evolution_is_unitary_and_matches_eigenbasis(amps in amplitudes(35), delta in 0.0..1.5f64) {
        let basis = ladder(4);
        let h = build_hamiltonian(&basis, &ModelParams::new(delta));
        let es = diagonalize(&h).unwrap();
        let psi0 = state(&amps);
        let prop = EigenPropagator::new(&es, &psi0).unwrap();
        let mut worst = 0.0f64;
        let report = evolve_rk4(&h, &psi0, &Rk4Options::new(5.0), |t, psi| {
            let exact = prop.state_at(t);
            for (a, b) in psi.iter().zip(&exact) {
                worst = worst.max((a - b).norm());
            }
        }).unwrap();
        prop_assert!(worst < 1e-5);
        prop_assert!(report.max_norm_deviation < 1e-6);
        prop_assert!((norm(&prop.state_at(3.3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plaquette_amplitudes_stay_normalized(r in 0.01..10.0f64, t in 0.0..200.0f64) {
        let m = PlaquetteModel::new(r).unwrap();
        for init in [PlaquetteInitial::Z2, PlaquetteInitial::Vac] {
            let total: f64 = m.coefficients(init, t).iter().map(|c| c.norm_sqr()).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fock_states_are_unentangled(idx in 0usize..199) {
        let basis = ladder(6);
        let psi = to_complex(&basis.unit_vector(basis.state(idx)).unwrap());
        for kind in [CutKind::Parallel, CutKind::Perpendicular] {
            let bip = build_bipartition(&basis, kind).unwrap();
            prop_assert!(entanglement_entropy(&psi, &bip).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn infinite_temperature_hamiltonian_vanishes(num in -20i64..20, den in 1i64..9, l in prop::sample::select(vec![2usize, 4, 6])) {
        let h = build_hamiltonian(&ladder(l), &ModelParams::new(Rational::new(num, den)));
        prop_assert_eq!(thermal_beta0(&h), Rational::from_integer(0));
    }
}
