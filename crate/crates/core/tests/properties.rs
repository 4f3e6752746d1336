use approx::assert_abs_diff_eq;
use edgeprep::control::{control_field_v1, control_field_v2};
use edgeprep::observables::wootters_concurrence;
use edgeprep::{
    build_hamiltonian, build_p1, build_uniform_p, concurrence, eigendecompose, reduced_density_1n, Boundary,
    ControlLaw, Gains, LatticeSpec, POperator, Rational, SpectralDecomposition, State,
};
use num_complex::Complex64;
use proptest::prelude::*;

const N: usize = 29;

fn reference() -> (SpectralDecomposition, usize) {
    let h = build_hamiltonian(&LatticeSpec::reference()).unwrap();
    let mut d = eigendecompose(&h).unwrap();
    d.label_edges(0.5).unwrap();
    let target = d.edge_right().unwrap();
    (d, target)
}

fn state(dim: usize) -> impl Strategy<Value = State> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| State::new(v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).normalized())
}

fn lattice() -> impl Strategy<Value = LatticeSpec> {
    (3usize..60, 0.2f64..2.0, -4.0f64..4.0, 1i64..12, 2i64..13, -7.0f64..7.0).prop_map(|(n, t, v, p, q, phase)| {
        LatticeSpec { sites: n, hopping: t, potential: v, alpha: Rational::new(p, q).unwrap(), phase }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// With `P = −|T⟩⟨T|` the projector field is the overlap field times `2|⟨T|ψ⟩|`.
    #[test]
    fn bridge_identity(psi in state(N), a1 in 0.1f64..10.0, a2 in 0.1f64..10.0) {
        let (d, target) = reference();
        let mut p = vec![0.0; N];
        p[target] = -1.0;
        let p = POperator::from_coefficients(&d, target, p).unwrap();
        let t = d.eigenstate(target);
        let z = psi.inner(&t).norm();
        for k in Boundary::BOTH {
            let f2 = control_field_v2(&psi, &p, k, a2);
            let f1 = control_field_v1(&psi, &t, k, a1);
            prop_assert!((f2 - 2.0 * a2 * z * f1 / a1).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hamiltonian_is_real_symmetric_tridiagonal(spec in lattice()) {
        let h = build_hamiltonian(&spec).unwrap();
        let dense = h.to_dense();
        prop_assert_eq!(dense.transpose(), dense.clone());
        for i in 0..spec.sites {
            for j in 0..spec.sites {
                if i.abs_diff(j) > 1 {
                    prop_assert_eq!(dense[(i, j)], 0.0);
                }
            }
        }
        prop_assert!(h.trace().abs() <= spec.potential.abs() * spec.sites as f64 + 1e-12);
    }

    #[test]
    fn decomposition_invariants(spec in lattice()) {
        let h = build_hamiltonian(&spec).unwrap();
        let d = eigendecompose(&h).unwrap();
        prop_assert!(d.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(d.orthogonality_error() < 1e-9);
        prop_assert!(d.reconstruction_error(&h) < 1e-9);
        let trace: f64 = d.eigenvalues().iter().sum();
        prop_assert!((trace - h.trace()).abs() < 1e-9);
    }

    #[test]
    fn projector_fields_ignore_identity_shift(psi in state(N), c in -10.0f64..10.0, a in 0.1f64..10.0) {
        let (d, target) = reference();
        let p = build_p1(&d, target, -3.0).unwrap();
        let shifted = p.shifted(&d, c).unwrap();
        for k in Boundary::BOTH {
            let f = control_field_v2(&psi, &p, k, a);
            let g = control_field_v2(&psi, &shifted, k, a);
            prop_assert!((f - g).abs() < 1e-12 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn fields_are_linear_in_gain(psi in state(N), a in 0.0f64..10.0, s in 0.0f64..10.0) {
        let (d, target) = reference();
        let mut dd = d.clone();
        let pair = dd.label_edges(0.5).unwrap();
        let laws = [
            ControlLaw::target_overlap(Gains::uniform(a).unwrap(), d.eigenstate(target)),
            ControlLaw::projector(Gains::uniform(a).unwrap(), build_uniform_p(&d, target, 5.0, 2.0).unwrap()),
            ControlLaw::edge_subspace(Gains::uniform(a).unwrap(), &pair),
        ];
        for law in laws {
            let f = law.fields(&psi);
            let g = law.with_gains(law.gains().scaled([s, s])).fields(&psi);
            for k in 0..2 {
                prop_assert!((g[k] - s * f[k]).abs() < 1e-12 * (1.0 + s * f[k].abs()));
                prop_assert!((f[k] - law.field(&psi, Boundary::BOTH[k])).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn fields_are_real_and_phase_invariant(psi in state(N), phase in 0.0f64..6.3) {
        let (d, target) = reference();
        let rotated = State::new(psi.iter().map(|c| c * Complex64::from_polar(1.0, phase)).collect());
        let laws = [
            ControlLaw::target_overlap(Gains::uniform(1.0).unwrap(), d.eigenstate(target)),
            ControlLaw::projector(Gains::uniform(5.0).unwrap(), build_p1(&d, target, -3.0).unwrap()),
        ];
        for law in laws {
            let (f, g) = (law.fields(&psi), law.fields(&rotated));
            for k in 0..2 {
                prop_assert!(f[k].is_finite());
                prop_assert!((f[k] - g[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_concurrence_matches_wootters(psi in state(11)) {
        let block = reduced_density_1n(&psi);
        prop_assert!(block.positivity_violation() < 1e-15);
        assert_abs_diff_eq!(block.trace(), 1.0, epsilon = 1e-12);
        let c = concurrence(&block).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
        let w = wootters_concurrence(&block.to_matrix()).unwrap();
        prop_assert!((c - w).abs() < 1e-10, "closed form {} vs Wootters {}", c, w);
    }

    #[test]
    fn rational_round_trips(p in -50i64..50, q in 1i64..50) {
        let r = Rational::new(p, q).unwrap();
        let back: Rational = r.to_string().parse().unwrap();
        prop_assert_eq!(back, r);
        prop_assert!((r.to_f64() - p as f64 / q as f64).abs() < 1e-15);
    }
}
