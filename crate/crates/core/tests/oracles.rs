//! Independent references for the eigensolver, the reduced boundary state and
//! the Lyapunov derivatives.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use edgeprep::control::{control_field_v1, Gains};
use edgeprep::dynamics::rhs;
use edgeprep::harness::{gaussian_state, task_rng};
use edgeprep::observables::wootters_concurrence;
use edgeprep::{
    build_hamiltonian, build_p1, concurrence, eigendecompose, reduced_density_1n, Boundary, ControlLaw,
    HamiltonianMatrix, LatticeSpec, Rational, State,
};
use nalgebra::Matrix4;
use num_complex::Complex64;

/// Number of eigenvalues of the tridiagonal matrix strictly below `x` (Sturm count).
fn count_below(h: &HamiltonianMatrix, x: f64) -> usize {
    let (a, b) = (h.diagonal(), h.offdiagonal());
    let mut count = 0;
    let mut q = a[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..a.len() {
        let prev = if q == 0.0 { f64::EPSILON * (b[i - 1].abs() + 1.0) } else { q };
        q = a[i] - x - b[i - 1] * b[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue by bisection on the Sturm count.
fn bisect_eigenvalue(h: &HamiltonianMatrix, k: usize) -> f64 {
    let r = h.norm_inf() + 1.0;
    let (mut lo, mut hi) = (-r, r);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(h, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn specs() -> Vec<LatticeSpec> {
    let r = LatticeSpec::reference();
    vec![
        r,
        r.with_sites(41),
        r.with_sites(59),
        r.with_sites(128),
        LatticeSpec { potential: 3.7, alpha: Rational::new(2, 5).unwrap(), phase: 0.3, ..r.with_sites(50) },
        LatticeSpec { hopping: 0.4, potential: -1.0, alpha: Rational::new(1, 7).unwrap(), phase: -2.0, ..r.with_sites(17) },
    ]
}

#[test]
fn eigenvalues_match_sturm_bisection() {
    for spec in specs() {
        let h = build_hamiltonian(&spec).unwrap();
        let d = eigendecompose(&h).unwrap();
        for k in 0..spec.sites {
            assert_abs_diff_eq!(d.eigenvalue(k), bisect_eigenvalue(&h, k), epsilon = 1e-10);
        }
    }
}

#[test]
fn free_chain_matches_analytic_spectrum() {
    for n in [3usize, 4, 10, 29, 64] {
        let spec = LatticeSpec { potential: 0.0, hopping: 1.3, ..LatticeSpec::reference().with_sites(n) };
        let d = eigendecompose(&build_hamiltonian(&spec).unwrap()).unwrap();
        let norm = (2.0 / (n as f64 + 1.0)).sqrt();
        for k in 1..=n {
            let lambda = -2.0 * 1.3 * (k as f64 * PI / (n as f64 + 1.0)).cos();
            assert_abs_diff_eq!(d.eigenvalue(k - 1), lambda, epsilon = 1e-10);
            let v = d.eigenvector(k - 1);
            let exact: Vec<f64> = (1..=n).map(|j| norm * (j as f64 * k as f64 * PI / (n as f64 + 1.0)).sin()).collect();
            let overlap: f64 = v.iter().zip(&exact).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(overlap.abs(), 1.0, epsilon = 1e-10);
        }
    }
}

#[test]
fn decomposition_is_orthonormal_and_reconstructs() {
    for spec in specs() {
        let h = build_hamiltonian(&spec).unwrap();
        let d = eigendecompose(&h).unwrap();
        assert!(d.orthogonality_error() < 1e-9, "{spec:?}");
        assert!(d.reconstruction_error(&h) < 1e-9, "{spec:?}");
        assert!(d.max_residual(&h) < 1e-9, "{spec:?}");
    }
}

#[test]
fn p1_commutes_with_h0() {
    for spec in specs().into_iter().take(3) {
        let h = build_hamiltonian(&spec).unwrap();
        let mut d = eigendecompose(&h).unwrap();
        d.label_edges(0.5).unwrap();
        let p = build_p1(&d, d.edge_right().unwrap(), -3.0).unwrap();
        let hd = h.to_dense();
        let comm = &hd * p.dense() - p.dense() * &hd;
        assert!(comm.amax() < 1e-10, "N = {}: {}", spec.sites, comm.amax());
    }
}

/// Partial trace onto sites 1 and N of the Fock-space vector `Σ_j C_j |0…1_j…0⟩`,
/// in the basis `{|00⟩, |10⟩, |01⟩, |11⟩}` with site 1 first.
fn brute_force_boundary_state(c: &[Complex64]) -> Matrix4<Complex64> {
    let n = c.len();
    let mut fock = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (j, &a) in c.iter().enumerate() {
        fock[1 << j] = a;
    }
    let last = n - 1;
    let mut rho = Matrix4::<Complex64>::zeros();
    for x in 0..(1usize << n) {
        for y in 0..(1usize << n) {
            let interior = !(1 | (1 << last));
            if x & interior != y & interior {
                continue;
            }
            let ix = (x & 1) | (((x >> last) & 1) << 1);
            let iy = (y & 1) | (((y >> last) & 1) << 1);
            rho[(ix, iy)] += fock[x] * fock[y].conj();
        }
    }
    rho
}

#[test]
fn reduced_state_matches_fock_partial_trace() {
    for (seed, n) in [(1u64, 3usize), (2, 5), (3, 7), (4, 9)] {
        let psi = gaussian_state(&mut task_rng(seed, 0), n);
        let block = reduced_density_1n(&psi);
        let brute = brute_force_boundary_state(&psi);
        assert!((block.to_matrix() - brute).camax() < 1e-14, "N = {n}");
        let c = concurrence(&block).unwrap();
        assert_abs_diff_eq!(c, wootters_concurrence(&brute).unwrap(), epsilon = 1e-10);
        assert_abs_diff_eq!(c, 2.0 * psi[0].norm() * psi[n - 1].norm(), epsilon = 1e-14);
    }
}

struct Reference {
    h: HamiltonianMatrix,
    left: State,
    right: State,
    p1: edgeprep::POperator,
}

fn reference() -> Reference {
    let h = build_hamiltonian(&LatticeSpec::reference()).unwrap();
    let mut d = eigendecompose(&h).unwrap();
    let pair = d.label_edges(0.5).unwrap();
    let p1 = build_p1(&d, d.edge_right().unwrap(), -3.0).unwrap();
    Reference { h, left: pair.left_state(), right: pair.right_state(), p1 }
}

/// Central difference of `V` along the controlled flow at `psi`.
fn numeric_vdot(h: &HamiltonianMatrix, law: &ControlLaw, psi: &State) -> f64 {
    let step = 1e-6;
    let v = rhs(h, law, psi);
    let plus = psi.superpose(Complex64::new(1.0, 0.0), &v, Complex64::new(step, 0.0));
    let minus = psi.superpose(Complex64::new(1.0, 0.0), &v, Complex64::new(-step, 0.0));
    (law.lyapunov(&plus) - law.lyapunov(&minus)) / (2.0 * step)
}

#[test]
fn lyapunov_derivatives_match_finite_differences() {
    let r = reference();
    let gains = Gains::new(1.7, 0.6).unwrap();
    let v1 = ControlLaw::target_overlap(gains, r.right.clone());
    let v2 = ControlLaw::projector(gains, r.p1.clone());
    let v3 = ControlLaw::EdgeSubspace { gains, left: r.left.clone(), right: r.right.clone() };
    for seed in 0..20 {
        let psi = gaussian_state(&mut task_rng(seed, 7), 29);
        let sq = |law: &ControlLaw| {
            let f = law.fields(&psi);
            f[0] * f[0] / gains.0[0] + f[1] * f[1] / gains.0[1]
        };

        // V̇₁ = −2|⟨T|ψ⟩|·Σ f_k²/A_k
        let z = psi.inner(&r.right).norm();
        assert_abs_diff_eq!(numeric_vdot(&r.h, &v1, &psi), -2.0 * z * sq(&v1), epsilon = 1e-7);

        // V̇₂ = −Σ f_k²/A_k
        assert_abs_diff_eq!(numeric_vdot(&r.h, &v2, &psi), -sq(&v2), epsilon = 1e-7);

        // V̇₃ = −2 Σ_k f_k Σ_m |⟨Edge_m|ψ⟩|·g_mk
        let f = v3.fields(&psi);
        let expected: f64 = Boundary::BOTH
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let weighted: f64 = [&r.left, &r.right]
                    .iter()
                    .map(|e| psi.inner(e).norm() * control_field_v1(&psi, e, k, 1.0))
                    .sum();
                -2.0 * f[i] * weighted
            })
            .sum();
        assert_abs_diff_eq!(numeric_vdot(&r.h, &v3, &psi), expected, epsilon = 1e-7);
    }
}
