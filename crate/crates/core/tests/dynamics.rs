use num_complex::Complex64;
use edgeprep::{
    build_hamiltonian, build_p1, eigendecompose, evolve, ControlLaw, EdgePair, Gains, HamiltonianMatrix,
    IntegratorParams, LatticeSpec, Probes, SpectralDecomposition, State,
};

struct Fixture {
    h: HamiltonianMatrix,
    d: SpectralDecomposition,
    pair: EdgePair,
}

impl Fixture {
    fn new() -> Self {
        let h = build_hamiltonian(&LatticeSpec::reference()).unwrap();
        let mut d = eigendecompose(&h).unwrap();
        let pair = d.label_edges(0.5).unwrap();
        Fixture { h, d, pair }
    }

    fn laws(&self) -> [ControlLaw; 3] {
        let target = self.d.edge_right().unwrap();
        [
            ControlLaw::target_overlap(Gains::uniform(1.0).unwrap(), self.pair.right_state()),
            ControlLaw::projector(Gains::uniform(5.0).unwrap(), build_p1(&self.d, target, -3.0).unwrap()),
            ControlLaw::edge_subspace(Gains::uniform(1.0).unwrap(), &self.pair),
        ]
    }
}

#[test]
fn lyapunov_never_rises_and_norm_holds() {
    let fx = Fixture::new();
    let target = fx.pair.right_state();
    let params = IntegratorParams { t_max: 2000.0, ..Default::default() };
    for law in fx.laws() {
        for site in [1usize, 3, 15, 29] {
            let traj = evolve(&fx.h, &law, &State::site(29, site), &params, Probes::target(&target)).unwrap();
            let worst = traj.lyapunov.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max);
            assert!(worst <= 1e-8, "{} from |{site}⟩ rose by {worst:e}", law.kind());
            assert!(traj.max_norm_drift <= 1e-8, "{} from |{site}⟩: drift {:e}", law.kind(), traj.max_norm_drift);
        }
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let fx = Fixture::new();
    let target = fx.pair.right_state();
    let law = &fx.laws()[1];
    let psi0 = State::site(29, 3);
    let run = |dt: f64| {
        let params = IntegratorParams { dt, t_max: 20.0, record_stride: 1_000_000, renormalize: false, stop_fidelity: None };
        evolve(&fx.h, law, &psi0, &params, Probes::target(&target)).unwrap().final_state
    };
    let (a, b, c) = (run(0.08), run(0.04), run(0.02));
    let dist = |x: &State, y: &State| x.iter().zip(y.iter()).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
    let ratio = dist(&a, &b) / dist(&b, &c);
    assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn free_evolution_conserves_energy_and_overlaps() {
    let fx = Fixture::new();
    let target = fx.pair.right_state();
    let law = fx.laws()[0].with_gains(Gains::zero());
    let psi0 = State::site(29, 5);
    // RK4 damps each mode by (λ·dt)⁶/72 per step; at dt = 0.01 that alone moves ⟨H0⟩ by ~7e-9 over t = 100.
    let params = IntegratorParams { dt: 0.005, t_max: 100.0, record_stride: 100, ..Default::default() };
    let traj = evolve(&fx.h, &law, &psi0, &params, Probes { states: true, ..Probes::target(&target) }).unwrap();
    let e0 = fx.h.expectation(&psi0);
    assert!(!traj.states.is_empty());
    let drift = traj.states.iter().map(|s| (fx.h.expectation(s) - e0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-9, "energy drift {drift:e}");
    let f0 = traj.fidelity_target[0];
    assert!(traj.fidelity_target.iter().all(|f| (f - f0).abs() < 1e-10));
    assert!(traj.fields.iter().flatten().all(|&f| f == 0.0));
}

/// Under the overlap law the `|Edge₁⟩` weight is fixed up to the tail amplitude.
#[test]
fn edge1_weight_is_frozen_under_overlap_law() {
    let fx = Fixture::new();
    let target = fx.pair.right_state();
    let left = fx.pair.left_state();
    let law = &fx.laws()[0];
    let params = IntegratorParams { t_max: 1000.0, ..Default::default() };
    for psi0 in [State::site(29, 1), State::site(29, 3), State::site(29, 1).superpose(1.0.into(), &State::site(29, 2), 0.5.into())] {
        let probes = Probes { edge_left: Some(&left), ..Probes::target(&target) };
        let traj = evolve(&fx.h, law, &psi0, &params, probes).unwrap();
        let a = traj.a_edge1_sq.unwrap();
        let drift = a.iter().map(|x| (x - a[0]).abs()).fold(0.0, f64::max);
        assert!(drift <= 1e-3, "drift {drift:e}");
    }
}

#[test]
fn edge_target_is_a_fixed_point() {
    let fx = Fixture::new();
    let target = fx.pair.right_state();
    let params = IntegratorParams { t_max: 100.0, ..Default::default() };
    for law in &fx.laws()[..2] {
        let traj = evolve(&fx.h, law, &target, &params, Probes::target(&target)).unwrap();
        let worst = traj.fidelity_target.iter().map(|f| (f - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "{}: {worst:e}", law.kind());
        assert!(traj.fields.iter().flatten().all(|f| f.abs() <= 1e-10));
    }
}

/// Once the phase of `|Edge_N⟩` rotates, the round-off overlap with `|Edge₁⟩` picks an
/// arbitrary phase, and the edge-subspace field is only zero up to the tail amplitude.
#[test]
fn edge_subspace_law_rests_on_edge_states() {
    let fx = Fixture::new();
    let target = fx.pair.right_state();
    let left = fx.pair.left_state();
    let law = &fx.laws()[2];
    let params = IntegratorParams { t_max: 100.0, ..Default::default() };
    let mixed = left.superpose((0.6).into(), &target, Complex64::new(0.0, 0.8));
    for psi0 in [target.clone(), left.clone(), mixed] {
        let probes = Probes { edge_left: Some(&left), concurrence: true, ..Probes::target(&target) };
        let traj = evolve(&fx.h, law, &psi0, &params, probes).unwrap();
        assert!(traj.fields.iter().flatten().all(|f| f.abs() <= 1e-4));
        let f0 = traj.fidelity_target[0];
        let moved = traj.fidelity_target.iter().map(|f| (f - f0).abs()).fold(0.0, f64::max);
        assert!(moved < 1e-5, "moved {moved:e}");
        let c = traj.concurrence.unwrap();
        assert!(c.iter().all(|x| (x - c[0]).abs() < 1e-4));
    }
}
