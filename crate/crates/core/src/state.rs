//! Single-excitation state vectors.

use std::ops::{Deref, DerefMut};

use num_complex::Complex64;

/// Amplitudes `C_n` of a single excitation over the sites of the chain,
/// stored 0-based (`self[0]` is site 1).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct State(Vec<Complex64>);

impl State {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        State(amplitudes)
    }

    pub fn zeros(dim: usize) -> Self {
        State(vec![Complex64::new(0.0, 0.0); dim])
    }

    /// The localized state `|site⟩`, with `site` counted from 1.
    pub fn site(dim: usize, site: usize) -> Self {
        assert!(site >= 1 && site <= dim, "site {site} outside 1..={dim}");
        let mut s = Self::zeros(dim);
        s.0[site - 1] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        State(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescale to unit norm; returns the norm before rescaling.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.0.iter_mut().for_each(|c| *c *= inv);
        }
        n
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &[Complex64]) -> Complex64 {
        inner(&self.0, other)
    }

    /// `a·self + b·other`, normalized.
    pub fn superpose(&self, a: Complex64, other: &State, b: Complex64) -> State {
        State(self.0.iter().zip(&other.0).map(|(x, y)| a * x + b * y).collect()).normalized()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

impl Deref for State {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for State {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for State {
    fn from(v: Vec<Complex64>) -> Self {
        State(v)
    }
}

/// `⟨a|b⟩ = Σ conj(a_i)·b_i`.
#[inline]
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨a|b⟩` with `a` real.
#[inline]
pub fn inner_real(a: &[f64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| y * *x).sum()
}
