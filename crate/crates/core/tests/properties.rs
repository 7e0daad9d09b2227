use proptest::prelude::*;

use phasewig_core::numgrid::{self, Axis, ComplexField, PhaseGrid, RealField};
use phasewig_core::schrod::{hermiticity_pair, PolynomialPotential};
use phasewig_core::states::{
    born_residual, gaussian_packet, lift_state, GaussianFactorState, PhaseState,
};
use phasewig_core::symcalc::{
    closedness_residual, commutator_residual, connection_from_generating, exterior_d,
    gauge_shift_connection, integrability_residual, line_integral, GeneratingFunction, PathPolyline,
};
use phasewig_core::wigner::{marginals, wigner_direct, wigner_tegmen};
use phasewig_core::C64;

fn grid() -> PhaseGrid {
    PhaseGrid::square(10.0, 96, 1.0).unwrap()
}

/// Finer grid for products with non-polynomial connection components.
fn fine() -> PhaseGrid {
    PhaseGrid::square(8.0, 128, 1.0).unwrap()
}

fn generating() -> impl Strategy<Value = GeneratingFunction> {
    (-0.5..0.5f64, 0.5..1.5f64, -0.5..0.5f64, 0.5..1.5f64).prop_map(|(a, k, b, l)| {
        GeneratingFunction::parse(&format!("p*q/2 + {a}*sin({k}*q)*cos(p) + {b}*tanh({l}*p)*q")).unwrap()
    })
}

fn bump() -> impl Strategy<Value = PhaseState> {
    (-1.5..1.5f64, -1.5..1.5f64, 0.6..0.9f64, -1.0..1.0f64).prop_map(|(q0, p0, s, k)| {
        let f = ComplexField::from_fn(fine(), |q, p| {
            C64::from_polar((-((q - q0).powi(2) + (p - p0).powi(2)) / (2.0 * s * s)).exp(), k * (q + p))
        });
        PhaseState::from_samples(f).unwrap()
    })
}

fn factor_state() -> impl Strategy<Value = GaussianFactorState> {
    (0.4..1.0f64, prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..6)).prop_map(|(a, c)| {
        let phi = c.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        GaussianFactorState::new(a, phi).unwrap().normalized()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn shifts_compose(a in -1.0..1.0f64, b in -1.0..1.0f64) {
        let f = RealField::from_fn(grid(), |q, p| (-(q * q + p * p) / 3.0).exp());
        let two = numgrid::shift(&numgrid::shift(&f, Axis::Q, a).unwrap(), Axis::Q, b).unwrap();
        let one = numgrid::shift(&f, Axis::Q, a + b).unwrap();
        prop_assert!(two.zip_with(&one, |x, y| x - y).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn generated_connections_commute(f in generating(), psi in bump()) {
        let a = connection_from_generating(&f, &fine()).unwrap();
        prop_assert!(commutator_residual(&a, &psi).unwrap() < 1e-8);
        prop_assert!(integrability_residual(&a).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn gauge_shifts_keep_integrability(f0 in generating(), f in generating()) {
        let a = gauge_shift_connection(&connection_from_generating(&f0, &grid()).unwrap(), &f).unwrap();
        prop_assert!(integrability_residual(&a).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn exact_forms_are_closed_and_path_independent(f in generating(), mid in (-5.0..5.0f64, -5.0..5.0f64)) {
        let g = grid();
        let df = exterior_d(&f, &g).unwrap();
        prop_assert!(closedness_residual(&df).unwrap() < 1e-8);
        let (a, b) = ((-3.0, 1.0), (2.0, -2.0));
        let direct = line_integral(&df, &PathPolyline::new(vec![a, b]).unwrap()).unwrap();
        let bent = line_integral(&df, &PathPolyline::new(vec![a, mid, b]).unwrap()).unwrap();
        prop_assert!((direct - bent).abs() < 1e-8);
    }

    #[test]
    fn lifting_preserves_the_born_rule(f in generating(), q0 in -1.5..1.5f64, p0 in -1.0..1.0f64) {
        let g = fine();
        let psi = gaussian_packet(q0, p0, 0.6, &g).unwrap();
        prop_assert!(born_residual(&lift_state(&psi, &f, &g).unwrap(), &psi).unwrap() < 1e-12);
    }

    #[test]
    fn wigner_routes_agree_and_normalise(s in factor_state()) {
        let g = grid();
        let wd = wigner_direct(&s.to_wavefunction(&g).unwrap(), &g).unwrap();
        let wt = wigner_tegmen(&s, &g).unwrap();
        prop_assert!(wd.max_abs_diff(&wt).unwrap() < 1e-9);
        prop_assert!((wd.total() - 1.0).abs() < 1e-9);
        let (pos, _) = marginals(&wd).unwrap();
        let dens = s.to_wavefunction(&g).unwrap().samples();
        let err = pos.line().iter().zip(&dens).fold(0.0_f64, |m, (a, b)| m.max((a - b.norm_sqr()).abs()));
        prop_assert!(err < 1e-9);
    }

    #[test]
    fn phase_hamiltonian_is_hermitian(f in generating(), phi in bump(), psi in bump(), c4 in 0.0..0.2f64) {
        let v = PolynomialPotential::new(vec![0.0, 0.1, 0.5, 0.0, c4]).unwrap();
        let a = connection_from_generating(&f, &fine()).unwrap();
        let (x, y) = hermiticity_pair(&a, &v, 1.0, &phi, &psi).unwrap();
        prop_assert!((x - y).norm() < 1e-8 * x.norm().max(1.0));
    }
}
