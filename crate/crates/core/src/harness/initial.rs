use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::state::State;

/// Independent stream for sweep item `index`, seeded with `base_seed ⊕ index`.
pub fn task_rng(base_seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base_seed ^ index as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialForm {
    /// `cosθ|n⟩ + sinθ|m⟩` with distinct random sites and `θ ∈ [0, 2π)`.
    TwoSiteTheta,
    /// I.i.d. complex normal amplitudes, normalized.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteDraw {
    /// 1-based sites.
    pub n: usize,
    pub m: usize,
    pub theta: f64,
    pub state: State,
}

pub fn two_site_state(dim: usize, n: usize, m: usize, theta: f64) -> State {
    let mut s = State::zeros(dim);
    s[n - 1] += Complex64::new(theta.cos(), 0.0);
    s[m - 1] += Complex64::new(theta.sin(), 0.0);
    s
}

pub fn draw_two_site<R: Rng>(rng: &mut R, dim: usize) -> TwoSiteDraw {
    let n = rng.gen_range(1..=dim);
    let mut m = rng.gen_range(1..dim);
    if m >= n {
        m += 1;
    }
    let theta = rng.gen_range(0.0..2.0 * PI);
    TwoSiteDraw { n, m, theta, state: two_site_state(dim, n, m, theta) }
}

pub fn gaussian_state<R: Rng>(rng: &mut R, dim: usize) -> State {
    State::new(
        (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect(),
    )
    .normalized()
}

pub fn random_initial_state(seed: u64, dim: usize, form: InitialForm) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match form {
        InitialForm::TwoSiteTheta => draw_two_site(&mut rng, dim).state,
        InitialForm::Gaussian => gaussian_state(&mut rng, dim),
    }
}

/// Mixes a random component into `ideal` so that `1 − |⟨ψ0|ideal⟩| = delta`.
///
/// The random state is orthogonalized against `ideal`; with a unit orthogonal
/// `χ`, `normalize(ideal + κχ)` has overlap `1/√(1+κ²)`, which fixes `κ`.
pub fn mix_initial_error<R: Rng>(ideal: &State, delta: f64, rng: &mut R) -> Result<State> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("initial-state error must lie in [0, 1), got {delta}")));
    }
    if delta == 0.0 {
        return Ok(ideal.clone());
    }
    let ideal = ideal.clone().normalized();
    let mut chi = gaussian_state(rng, ideal.dim());
    let overlap = ideal.inner(&chi);
    for (c, i) in chi.iter_mut().zip(ideal.iter()) {
        *c -= i * overlap;
    }
    if chi.normalize() == 0.0 {
        return Err(Error::InvalidParameter("could not draw a component orthogonal to the ideal state".into()));
    }
    let overlap_target = 1.0 - delta;
    let kappa = (1.0 / (overlap_target * overlap_target) - 1.0).sqrt();
    Ok(ideal.superpose(Complex64::new(1.0, 0.0), &chi, Complex64::new(kappa, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn theta_zero_is_site_state() {
        let s = two_site_state(7, 4, 2, 0.0);
        assert_eq!(s, State::site(7, 4));
    }

    #[test]
    fn draws_are_normalized_and_distinct() {
        let mut rng = task_rng(7, 0);
        for _ in 0..500 {
            let d = draw_two_site(&mut rng, 29);
            assert_ne!(d.n, d.m);
            assert!((1..=29).contains(&d.n) && (1..=29).contains(&d.m));
            assert_abs_diff_eq!(d.state.norm(), 1.0, epsilon = 1e-14);
        }
        let g = random_initial_state(3, 29, InitialForm::Gaussian);
        assert_abs_diff_eq!(g.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn fixed_seed_is_bitwise_reproducible() {
        for form in [InitialForm::TwoSiteTheta, InitialForm::Gaussian] {
            assert_eq!(random_initial_state(42, 29, form), random_initial_state(42, 29, form));
        }
    }

    #[test]
    fn mixing_hits_requested_infidelity() {
        let ideal = State::site(29, 3);
        let mut rng = task_rng(1, 0);
        assert_eq!(mix_initial_error(&ideal, 0.0, &mut rng).unwrap(), ideal);
        for delta in [1e-4, 0.05, 0.1, 0.5, 0.9] {
            let psi = mix_initial_error(&ideal, delta, &mut rng).unwrap();
            assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(1.0 - psi.inner(&ideal).norm(), delta, epsilon = 1e-10);
        }
        assert!(mix_initial_error(&ideal, 1.0, &mut rng).is_err());
        assert!(mix_initial_error(&ideal, -0.1, &mut rng).is_err());
    }
}
