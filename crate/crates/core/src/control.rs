//! Lyapunov functions and the feedback fields that make them non-increasing.
//!
//! Three laws are provided, all acting through the two boundary projectors
//! `H₁ = c₁†c₁` and `H₂ = c_N†c_N`:
//!
//! * [`ControlLaw::TargetOverlap`] — `V = 1 − |⟨ψ_T|ψ⟩|²`
//! * [`ControlLaw::Projector`] — `V = ⟨ψ|P|ψ⟩` with `[H0, P] = 0`
//! * [`ControlLaw::EdgeSubspace`] — `V = 1 − |⟨Edge₁|ψ⟩|² − |⟨Edge_N|ψ⟩|²`

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Boundary;
use crate::spectral::{EdgePair, SpectralDecomposition};
use crate::state::{inner, inner_real, State};

/// Per-channel gains, indexed by [`Boundary::First`] / [`Boundary::Last`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains(pub [f64; 2]);

impl Gains {
    /// Non-negative finite gains. A zero gain switches its channel off.
    pub fn new(first: f64, last: f64) -> Result<Self> {
        for g in [first, last] {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameter(format!("gain must be non-negative and finite, got {g}")));
            }
        }
        Ok(Gains([first, last]))
    }

    pub fn uniform(g: f64) -> Result<Self> {
        Self::new(g, g)
    }

    pub fn zero() -> Self {
        Gains([0.0, 0.0])
    }

    pub fn get(&self, k: Boundary) -> f64 {
        self.0[k.channel() - 1]
    }

    /// Multiply each channel, as in a mis-calibrated field `f' = (1 + δ)·f`.
    pub fn scaled(&self, factors: [f64; 2]) -> Gains {
        Gains([self.0[0] * factors[0], self.0[1] * factors[1]])
    }
}

/// `P = Σ pᵢ |λᵢ⟩⟨λᵢ|`, diagonal in the eigenbasis of `H0`.
///
/// Only the rows of `P` at the two boundary sites enter the control fields,
/// so they are cached alongside the dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct POperator {
    p_values: Vec<f64>,
    target: usize,
    dense: DMatrix<f64>,
    boundary_rows: [Vec<f64>; 2],
}

impl POperator {
    /// `P` from explicit coefficients in spectral order. No ordering condition is imposed.
    pub fn from_coefficients(d: &SpectralDecomposition, target: usize, p_values: Vec<f64>) -> Result<Self> {
        if p_values.len() != d.dim() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                d.dim(),
                p_values.len()
            )));
        }
        if target >= d.dim() {
            return Err(Error::InvalidParameter(format!("target index {target} out of range")));
        }
        if p_values.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("coefficients must be finite".into()));
        }
        let dense = d.operator_from_coefficients(&p_values);
        let n = d.dim();
        let boundary_rows = [dense.row(0).iter().copied().collect(), dense.row(n - 1).iter().copied().collect()];
        Ok(POperator { p_values, target, dense, boundary_rows })
    }

    pub fn p_values(&self) -> &[f64] {
        &self.p_values
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn dim(&self) -> usize {
        self.p_values.len()
    }

    pub fn dense(&self) -> &DMatrix<f64> {
        &self.dense
    }

    /// Smallest coefficient among the non-target states.
    pub fn min_other(&self) -> f64 {
        self.p_values
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.target)
            .map(|(_, &p)| p)
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether the target coefficient is strictly the smallest.
    pub fn target_is_minimal(&self) -> bool {
        self.p_values[self.target] < self.min_other()
    }

    /// Adds `c·I`, which leaves every control field unchanged.
    pub fn shifted(&self, d: &SpectralDecomposition, c: f64) -> Result<Self> {
        Self::from_coefficients(d, self.target, self.p_values.iter().map(|p| p + c).collect())
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += psi[j] * self.dense[(i, j)];
            }
            acc += (psi[i].conj() * row).re;
        }
        acc
    }

    /// `(Pψ)_s` at the given boundary.
    #[inline]
    fn boundary_component(&self, k: Boundary, psi: &[Complex64]) -> Complex64 {
        inner_real(&self.boundary_rows[k.channel() - 1], psi)
    }

    /// Dense `i[H_k, P]` (Hermitian).
    pub fn commutator(&self, k: Boundary) -> DMatrix<Complex64> {
        let n = self.dim();
        let s = k.index(n);
        let i = Complex64::new(0.0, 1.0);
        DMatrix::from_fn(n, n, |r, c| {
            let hp = if r == s { self.dense[(s, c)] } else { 0.0 };
            let ph = if c == s { self.dense[(r, s)] } else { 0.0 };
            i * (hp - ph)
        })
    }
}

/// `P₁`: `pᵢ = λᵢ` for every non-target state and `p_target = p_f`.
pub fn build_p1(d: &SpectralDecomposition, target: usize, p_f: f64) -> Result<POperator> {
    let mut p: Vec<f64> = d.eigenvalues().to_vec();
    if target >= p.len() {
        return Err(Error::InvalidParameter(format!("target index {target} out of range")));
    }
    p[target] = p_f;
    let op = POperator::from_coefficients(d, target, p)?;
    if !op.target_is_minimal() {
        return Err(Error::TargetNotMinimal { p_f, min_other: op.min_other() });
    }
    Ok(op)
}

/// Uniform `pᵢ = p` for `i ≠ target` and `p_target = p_f`. Any ordering is accepted.
pub fn build_uniform_p(d: &SpectralDecomposition, target: usize, p: f64, p_f: f64) -> Result<POperator> {
    let mut values = vec![p; d.dim()];
    if target >= values.len() {
        return Err(Error::InvalidParameter(format!("target index {target} out of range")));
    }
    values[target] = p_f;
    POperator::from_coefficients(d, target, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    V1,
    V2,
    V3,
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LawKind::V1 => "v1",
            LawKind::V2 => "v2",
            LawKind::V3 => "v3",
        })
    }
}

impl FromStr for LawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "v1" => Ok(LawKind::V1),
            "v2" => Ok(LawKind::V2),
            "v3" => Ok(LawKind::V3),
            other => Err(Error::InvalidParameter(format!("unknown law {other:?} (expected v1, v2 or v3)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlLaw {
    TargetOverlap { gains: Gains, target: State },
    Projector { gains: Gains, p: POperator },
    EdgeSubspace { gains: Gains, left: State, right: State },
}

impl ControlLaw {
    pub fn target_overlap(gains: Gains, target: State) -> Self {
        ControlLaw::TargetOverlap { gains, target }
    }

    pub fn projector(gains: Gains, p: POperator) -> Self {
        ControlLaw::Projector { gains, p }
    }

    pub fn edge_subspace(gains: Gains, pair: &EdgePair) -> Self {
        ControlLaw::EdgeSubspace { gains, left: pair.left_state(), right: pair.right_state() }
    }

    pub fn kind(&self) -> LawKind {
        match self {
            ControlLaw::TargetOverlap { .. } => LawKind::V1,
            ControlLaw::Projector { .. } => LawKind::V2,
            ControlLaw::EdgeSubspace { .. } => LawKind::V3,
        }
    }

    pub fn gains(&self) -> Gains {
        match self {
            ControlLaw::TargetOverlap { gains, .. }
            | ControlLaw::Projector { gains, .. }
            | ControlLaw::EdgeSubspace { gains, .. } => *gains,
        }
    }

    /// The same law with every gain replaced.
    pub fn with_gains(&self, gains: Gains) -> Self {
        let mut law = self.clone();
        match &mut law {
            ControlLaw::TargetOverlap { gains: g, .. }
            | ControlLaw::Projector { gains: g, .. }
            | ControlLaw::EdgeSubspace { gains: g, .. } => *g = gains,
        }
        law
    }

    pub fn lyapunov(&self, psi: &[Complex64]) -> f64 {
        match self {
            ControlLaw::TargetOverlap { target, .. } => 1.0 - inner(target, psi).norm_sqr(),
            ControlLaw::Projector { p, .. } => p.expectation(psi),
            ControlLaw::EdgeSubspace { left, right, .. } => {
                1.0 - inner(left, psi).norm_sqr() - inner(right, psi).norm_sqr()
            }
        }
    }

    pub fn field(&self, psi: &[Complex64], k: Boundary) -> f64 {
        match self {
            ControlLaw::TargetOverlap { gains, target } => control_field_v1(psi, target, k, gains.get(k)),
            ControlLaw::Projector { gains, p } => control_field_v2(psi, p, k, gains.get(k)),
            ControlLaw::EdgeSubspace { gains, left, right } => {
                control_field_v3(psi, left, right, k, gains.get(k))
            }
        }
    }

    /// `[f₁, f₂]`, sharing the overlaps between the two channels.
    #[inline]
    pub fn fields(&self, psi: &[Complex64]) -> [f64; 2] {
        let last = psi.len() - 1;
        match self {
            ControlLaw::TargetOverlap { gains, target } => match unit_phase(psi, target) {
                Some(ph) => [
                    gains.0[0] * (ph * target[0].conj() * psi[0]).im,
                    gains.0[1] * (ph * target[last].conj() * psi[last]).im,
                ],
                None => [0.0, 0.0],
            },
            ControlLaw::Projector { .. } => [self.field(psi, Boundary::First), self.field(psi, Boundary::Last)],
            ControlLaw::EdgeSubspace { gains, left, right } => {
                let mut acc = [0.0; 2];
                for e in [left, right] {
                    if let Some(ph) = unit_phase(psi, e) {
                        acc[0] += (ph * e[0].conj() * psi[0]).im;
                        acc[1] += (ph * e[last].conj() * psi[last]).im;
                    }
                }
                [gains.0[0] * acc[0], gains.0[1] * acc[1]]
            }
        }
    }
}

/// `e^{i arg⟨ψ|e⟩}`, or `None` when the overlap vanishes.
#[inline]
fn unit_phase(psi: &[Complex64], e: &[Complex64]) -> Option<Complex64> {
    let z = inner(psi, e);
    let mag = z.norm();
    (mag > 0.0).then(|| z / mag)
}

/// `Im[e^{i arg z} · conj(e_s) · ψ_s]` with `z = ⟨ψ|e⟩`; zero when `z = 0`.
#[inline]
fn phase_aligned_boundary_term(psi: &[Complex64], e: &[Complex64], s: usize) -> f64 {
    unit_phase(psi, e).map_or(0.0, |ph| (ph * e[s].conj() * psi[s]).im)
}

/// `A·Im[e^{i arg⟨ψ|ψ_T⟩}⟨ψ_T|H_k|ψ⟩]`.
pub fn control_field_v1(psi: &[Complex64], target: &[Complex64], k: Boundary, gain: f64) -> f64 {
    gain * phase_aligned_boundary_term(psi, target, k.index(psi.len()))
}

/// `−A·⟨ψ|i[H_k, P]|ψ⟩`.
///
/// With `H_k = |s⟩⟨s|` the expectation reduces to `−2·Im(conj(ψ_s)·(Pψ)_s)`,
/// so only one row of `P` is needed.
pub fn control_field_v2(psi: &[Complex64], p: &POperator, k: Boundary, gain: f64) -> f64 {
    let s = k.index(psi.len());
    2.0 * gain * (psi[s].conj() * p.boundary_component(k, psi)).im
}

/// `A·Σ_{m ∈ {1,N}} Im[e^{i arg⟨ψ|Edge_m⟩}⟨Edge_m|H_k|ψ⟩]`.
///
/// The overall sign is the one for which `V̇ ≤ 0`, matching the target-overlap law.
pub fn control_field_v3(psi: &[Complex64], left: &[Complex64], right: &[Complex64], k: Boundary, gain: f64) -> f64 {
    let s = k.index(psi.len());
    gain * (phase_aligned_boundary_term(psi, left, s) + phase_aligned_boundary_term(psi, right, s))
}

/// `V` for `law` at `psi`.
pub fn lyapunov_value(law: &ControlLaw, psi: &[Complex64]) -> f64 {
    law.lyapunov(psi)
}
