//! Integration of the state-feedback Schrödinger equation
//! `dψ/dt = −i·(H0 + Σ_k f_k(ψ)·H_k)·ψ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::control::ControlLaw;
use crate::error::{Error, Result};
use crate::lattice::{Boundary, HamiltonianMatrix};
use crate::observables::{concurrence_of_state, eigen_amplitudes};
use crate::spectral::SpectralDecomposition;
use crate::state::{inner, State};

/// Upper bound on `dt·‖H_total‖∞`.
pub const STABILITY_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorParams {
    pub dt: f64,
    pub t_max: f64,
    /// Record every `record_stride`-th step (the first and last step are always recorded).
    pub record_stride: usize,
    pub renormalize: bool,
    /// Stop at the first recorded point whose target fidelity reaches this value.
    pub stop_fidelity: Option<f64>,
}

impl Default for IntegratorParams {
    fn default() -> Self {
        IntegratorParams { dt: 0.01, t_max: 1000.0, record_stride: 100, renormalize: true, stop_fidelity: None }
    }
}

impl IntegratorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be at least 1".into()));
        }
        if let Some(f) = self.stop_fidelity {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidParameter(format!("stop_fidelity must lie in (0, 1], got {f}")));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// What to measure along a trajectory besides `V` and the fields.
#[derive(Debug, Clone, Copy)]
pub struct Probes<'a> {
    /// Fidelity is reported against this state.
    pub target: &'a [Complex64],
    /// Records `|⟨Edge₁|ψ⟩|²` when present.
    pub edge_left: Option<&'a [Complex64]>,
    /// Records the boundary-boundary concurrence.
    pub concurrence: bool,
    /// Records `|aᵢ|²` in this eigenbasis when present.
    pub eigenbasis: Option<&'a SpectralDecomposition>,
    /// Keeps the full state at each recorded point.
    pub states: bool,
}

impl<'a> Probes<'a> {
    pub fn target(target: &'a [Complex64]) -> Self {
        Probes { target, edge_left: None, concurrence: false, eigenbasis: None, states: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub lyapunov: Vec<f64>,
    /// `[f₁(t), f₂(t)]` at each recorded time.
    pub fields: [Vec<f64>; 2],
    pub fidelity_target: Vec<f64>,
    /// Largest `|‖ψ‖ − 1|` before renormalization over the steps since the previous record.
    pub norm_drift: Vec<f64>,
    pub concurrence: Option<Vec<f64>>,
    pub a_edge1_sq: Option<Vec<f64>>,
    pub eigen_amplitudes: Option<Vec<Vec<f64>>>,
    pub final_state: State,
    /// Largest per-step norm drift over the whole run.
    pub max_norm_drift: f64,
    pub steps_taken: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_fidelity(&self) -> f64 {
        *self.fidelity_target.last().expect("trajectory has at least one record")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one record")
    }

    /// Mean of `|f_k|` over the recorded points.
    pub fn mean_abs_field(&self, k: Boundary) -> f64 {
        let f = &self.fields[k.channel() - 1];
        f.iter().map(|x| x.abs()).sum::<f64>() / f.len() as f64
    }
}

/// `−i·(H0 + Σ f_k H_k)·ψ` written into `out`; returns the fields used.
#[inline]
pub fn rhs_into(h0: &HamiltonianMatrix, law: &ControlLaw, psi: &[Complex64], out: &mut [Complex64]) -> [f64; 2] {
    let f = law.fields(psi);
    h0.apply_into(psi, out);
    let n = psi.len();
    out[0] += psi[0] * f[0];
    out[n - 1] += psi[n - 1] * f[1];
    let minus_i = Complex64::new(0.0, -1.0);
    out.iter_mut().for_each(|x| *x *= minus_i);
    f
}

pub fn rhs(h0: &HamiltonianMatrix, law: &ControlLaw, psi: &[Complex64]) -> State {
    let mut out = State::zeros(psi.len());
    rhs_into(h0, law, psi, &mut out);
    out
}

struct Rk4Buffers {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    stage: Vec<Complex64>,
}

impl Rk4Buffers {
    fn new(n: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n];
        Rk4Buffers { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), stage: z }
    }

    /// One classic RK4 step with the feedback re-evaluated at each stage.
    /// Returns the fields of the first stage.
    fn step(&mut self, h0: &HamiltonianMatrix, law: &ControlLaw, psi: &mut [Complex64], dt: f64) -> [f64; 2] {
        let f = rhs_into(h0, law, psi, &mut self.k1);
        let half = 0.5 * dt;
        for ((s, p), k) in self.stage.iter_mut().zip(psi.iter()).zip(&self.k1) {
            *s = p + k * half;
        }
        rhs_into(h0, law, &self.stage, &mut self.k2);
        for ((s, p), k) in self.stage.iter_mut().zip(psi.iter()).zip(&self.k2) {
            *s = p + k * half;
        }
        rhs_into(h0, law, &self.stage, &mut self.k3);
        for ((s, p), k) in self.stage.iter_mut().zip(psi.iter()).zip(&self.k3) {
            *s = p + k * dt;
        }
        rhs_into(h0, law, &self.stage, &mut self.k4);
        let w = dt / 6.0;
        for i in 0..psi.len() {
            psi[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * w;
        }
        f
    }
}

struct Recorder<'a> {
    probes: Probes<'a>,
    traj: Trajectory,
}

impl<'a> Recorder<'a> {
    fn new(probes: Probes<'a>) -> Self {
        let mut traj = Trajectory::default();
        if probes.concurrence {
            traj.concurrence = Some(Vec::new());
        }
        if probes.edge_left.is_some() {
            traj.a_edge1_sq = Some(Vec::new());
        }
        if probes.eigenbasis.is_some() {
            traj.eigen_amplitudes = Some(Vec::new());
        }
        Recorder { probes, traj }
    }

    fn record(&mut self, t: f64, psi: &[Complex64], law: &ControlLaw, drift: f64) -> f64 {
        let fields = law.fields(psi);
        let fid = inner(psi, self.probes.target).norm();
        let tr = &mut self.traj;
        tr.times.push(t);
        tr.lyapunov.push(law.lyapunov(psi));
        tr.fields[0].push(fields[0]);
        tr.fields[1].push(fields[1]);
        tr.fidelity_target.push(fid);
        tr.norm_drift.push(drift);
        if let Some(c) = tr.concurrence.as_mut() {
            c.push(concurrence_of_state(psi));
        }
        if let (Some(a), Some(edge)) = (tr.a_edge1_sq.as_mut(), self.probes.edge_left) {
            a.push(inner(edge, psi).norm_sqr());
        }
        if let (Some(m), Some(d)) = (tr.eigen_amplitudes.as_mut(), self.probes.eigenbasis) {
            m.push(eigen_amplitudes(psi, d).iter().map(|a| a.norm_sqr()).collect());
        }
        if self.probes.states {
            tr.states.push(State::new(psi.to_vec()));
        }
        fid
    }
}

/// Integrates from `psi0` until `t_max` or until the target fidelity reaches `stop_fidelity`.
pub fn evolve(
    h0: &HamiltonianMatrix,
    law: &ControlLaw,
    psi0: &State,
    params: &IntegratorParams,
    probes: Probes<'_>,
) -> Result<Trajectory> {
    params.validate()?;
    let n = h0.dim();
    if psi0.dim() != n || probes.target.len() != n {
        return Err(Error::InvalidParameter(format!(
            "state dimension {} does not match lattice size {n}",
            psi0.dim()
        )));
    }

    let h_norm = h0.norm_inf();
    let steps = params.steps();
    let mut psi = psi0.clone();
    let mut buffers = Rk4Buffers::new(n);
    let mut rec = Recorder::new(probes);
    let mut max_drift: f64 = 0.0;
    let mut drift_since_record: f64 = 0.0;

    let fid = rec.record(0.0, &psi, law, 0.0);
    let reached = |fid: f64| params.stop_fidelity.is_some_and(|s| fid >= s);
    let mut steps_taken = 0;

    if !reached(fid) {
        for step in 1..=steps {
            let t_prev = (step - 1) as f64 * params.dt;
            let f = buffers.step(h0, law, &mut psi, params.dt);
            let product = params.dt * (h_norm + f[0].abs() + f[1].abs());
            if product >= STABILITY_LIMIT {
                return Err(Error::StabilityGuard { time: t_prev, product });
            }
            let t = step as f64 * params.dt;
            if !psi.is_finite() {
                return Err(Error::NonFinite { time: t });
            }
            let norm = if params.renormalize { psi.normalize() } else { psi.norm() };
            let drift = (norm - 1.0).abs();
            max_drift = max_drift.max(drift);
            drift_since_record = drift_since_record.max(drift);
            steps_taken = step;

            if step % params.record_stride == 0 || step == steps {
                let fid = rec.record(t, &psi, law, drift_since_record);
                drift_since_record = 0.0;
                if reached(fid) {
                    break;
                }
            }
        }
    }

    let mut traj = rec.traj;
    traj.final_state = psi;
    traj.max_norm_drift = max_drift;
    traj.steps_taken = steps_taken;
    Ok(traj)
}

/// First recorded time at which the target fidelity reaches `threshold`,
/// linearly interpolated between neighbouring records.
pub fn time_to_fidelity(traj: &Trajectory, threshold: f64) -> Option<f64> {
    time_to_threshold(&traj.times, &traj.fidelity_target, threshold)
}

pub fn time_to_threshold(times: &[f64], values: &[f64], threshold: f64) -> Option<f64> {
    let i = values.iter().position(|&f| f >= threshold)?;
    if i == 0 {
        return Some(times[0]);
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let (f0, f1) = (values[i - 1], values[i]);
    if f1 == f0 {
        return Some(t1);
    }
    Some(t0 + (threshold - f0) / (f1 - f0) * (t1 - t0))
}
