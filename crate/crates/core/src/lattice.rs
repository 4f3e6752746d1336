//! The open-boundary Aubry-André-Harper chain in the single-excitation basis.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational modulation frequency `num/den`, kept in lowest terms with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("rational with zero denominator".into()));
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let sign = den.signum();
        Ok(Rational { num: sign * num / g, den: sign * den / g })
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Fractional part of `self·i` as an exact residue `r/den` with `0 ≤ r < den`.
    fn frac_times(&self, i: i64) -> f64 {
        let r = (self.num as i128 * i as i128).rem_euclid(self.den as i128);
        r as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse rational from {s:?}"));
        match s.trim().split_once('/') {
            Some((n, d)) => {
                let n = n.trim().parse().map_err(|_| bad())?;
                let d = d.trim().parse().map_err(|_| bad())?;
                Rational::new(n, d)
            }
            None => Rational::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}

impl TryFrom<String> for Rational {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Rational> for String {
    fn from(r: Rational) -> String {
        r.to_string()
    }
}

/// Static model parameters. Energies are in units of the hopping amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub sites: usize,
    pub hopping: f64,
    pub potential: f64,
    pub alpha: Rational,
    /// Phase `δ` in radians.
    pub phase: f64,
}

impl LatticeSpec {
    pub fn new(sites: usize, hopping: f64, potential: f64, alpha: Rational, phase: f64) -> Result<Self> {
        let spec = LatticeSpec { sites, hopping, potential, alpha, phase };
        spec.validate()?;
        Ok(spec)
    }

    /// N = 29, t = 1, V = 1.5, α = 1/3, δ = 2π/3: the chain with two well-separated edge states.
    pub fn reference() -> Self {
        LatticeSpec {
            sites: 29,
            hopping: 1.0,
            potential: 1.5,
            alpha: Rational { num: 1, den: 3 },
            phase: 2.0 * PI / 3.0,
        }
    }

    pub fn with_sites(self, sites: usize) -> Self {
        LatticeSpec { sites, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 3 {
            return Err(Error::InvalidLattice(format!("need at least 3 sites, got {}", self.sites)));
        }
        if !(self.hopping > 0.0 && self.hopping.is_finite()) {
            return Err(Error::InvalidLattice(format!("hopping must be positive, got {}", self.hopping)));
        }
        if !self.potential.is_finite() || !self.phase.is_finite() {
            return Err(Error::InvalidLattice("potential and phase must be finite".into()));
        }
        Ok(())
    }

    /// On-site energy `V·cos(2πα·i + δ)` for the 1-based site index `i`.
    pub fn onsite(&self, site: usize) -> f64 {
        let angle = 2.0 * PI * self.alpha.frac_times(site as i64) + self.phase;
        self.potential * angle.cos()
    }
}

/// Real symmetric tridiagonal `H0` in band form.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    diagonal: Vec<f64>,
    offdiagonal: Vec<f64>,
}

impl HamiltonianMatrix {
    /// Band form from raw parts; `offdiagonal` must be one shorter than `diagonal`.
    pub fn from_bands(diagonal: Vec<f64>, offdiagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() || offdiagonal.len() + 1 != diagonal.len() {
            return Err(Error::InvalidParameter(format!(
                "band lengths {} / {} do not form a tridiagonal matrix",
                diagonal.len(),
                offdiagonal.len()
            )));
        }
        Ok(HamiltonianMatrix { diagonal, offdiagonal })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn offdiagonal(&self) -> &[f64] {
        &self.offdiagonal
    }

    pub fn trace(&self) -> f64 {
        self.diagonal.iter().sum()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiagonal[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.offdiagonal[i].abs() } else { 0.0 };
                self.diagonal[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diagonal[i];
        }
        for (i, &e) in self.offdiagonal.iter().enumerate() {
            m[(i, i + 1)] = e;
            m[(i + 1, i)] = e;
        }
        m
    }

    /// `out = H·psi`.
    #[inline]
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        debug_assert!(psi.len() == n && out.len() == n);
        let d = &self.diagonal;
        let e = &self.offdiagonal;
        if n == 1 {
            out[0] = psi[0] * d[0];
            return;
        }
        out[0] = psi[0] * d[0] + psi[1] * e[0];
        for i in 1..n - 1 {
            out[i] = psi[i] * d[i] + psi[i - 1] * e[i - 1] + psi[i + 1] * e[i];
        }
        out[n - 1] = psi[n - 1] * d[n - 1] + psi[n - 2] * e[n - 2];
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_into(psi, &mut out);
        out
    }

    /// `⟨psi|H|psi⟩`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        crate::state::inner(psi, &self.apply(psi)).re
    }
}

/// Which end of the chain a control acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    First,
    Last,
}

impl Boundary {
    pub const BOTH: [Boundary; 2] = [Boundary::First, Boundary::Last];

    /// 0-based storage index of this boundary in a chain of `sites` sites.
    pub fn index(self, sites: usize) -> usize {
        match self {
            Boundary::First => 0,
            Boundary::Last => sites - 1,
        }
    }

    /// Control channel number (`k = 1` or `k = 2`).
    pub fn channel(self) -> usize {
        match self {
            Boundary::First => 1,
            Boundary::Last => 2,
        }
    }
}

/// Rank-1 projector `c_s† c_s` onto a boundary site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlOperator {
    which: Boundary,
    dim: usize,
}

impl ControlOperator {
    pub fn boundary(&self) -> Boundary {
        self.which
    }

    /// 1-based site the projector acts on.
    pub fn site(&self) -> usize {
        self.which.index(self.dim) + 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let idx = self.which.index(self.dim);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        out[idx] = psi[idx];
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let idx = self.which.index(self.dim);
        let mut m = DMatrix::zeros(self.dim, self.dim);
        m[(idx, idx)] = 1.0;
        m
    }
}

pub fn build_hamiltonian(spec: &LatticeSpec) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    let diagonal = (1..=spec.sites).map(|i| spec.onsite(i)).collect();
    let offdiagonal = vec![-spec.hopping; spec.sites - 1];
    Ok(HamiltonianMatrix { diagonal, offdiagonal })
}

pub fn boundary_projector(spec: &LatticeSpec, which: Boundary) -> ControlOperator {
    ControlOperator { which, dim: spec.sites }
}
