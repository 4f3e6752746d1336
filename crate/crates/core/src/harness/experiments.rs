use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Setup};
use super::initial::{draw_two_site, mix_initial_error, task_rng, two_site_state};
use super::output::{num, Param, SweepRow, SweepTable};
use crate::control::{build_uniform_p, ControlLaw, Gains, LawKind};
use crate::dynamics::{time_to_fidelity, IntegratorParams, Trajectory};
use crate::error::{Error, Result};
use crate::lattice::build_hamiltonian;
use crate::observables::fidelity;
use crate::spectral::{boundary_weight, eigendecompose};
use crate::state::State;

/// Runs `task(0..count)` on a pool of `workers` threads, returning results in index order.
fn par_tasks<T, F>(workers: usize, count: usize, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if workers <= 1 {
        return (0..count).map(task).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(task).collect())
}

/// Mean over the trailing `fraction` of the samples (at least one).
pub fn steady_mean(values: &[f64], fraction: f64) -> f64 {
    let take = ((values.len() as f64 * fraction).ceil() as usize).clamp(1, values.len().max(1));
    let tail = &values[values.len().saturating_sub(take)..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

const STEADY_FRACTION: f64 = 0.1;

fn summarize(config: &ExperimentConfig, index: usize, params: Vec<Param>, traj: &Trajectory) -> SweepRow {
    SweepRow {
        index,
        params,
        fidelity_final: traj.final_fidelity(),
        time_to_threshold: time_to_fidelity(traj, config.fidelity_threshold),
        concurrence_final: traj.concurrence.as_deref().map(|c| steady_mean(c, STEADY_FRACTION)),
    }
}

pub fn run_single(config: &ExperimentConfig) -> Result<Trajectory> {
    let setup = Setup::new(config)?;
    setup.run(&State::site(setup.sites(), config.initial_site), &config.integrator)
}

/// `index,eigenvalue,boundary_weight,p_first,p_last,edge`.
///
/// The table is written even when edge detection fails; the detection error
/// is returned afterwards.
pub fn spectrum_table<W: Write>(config: &ExperimentConfig, w: W) -> Result<()> {
    config.lattice.validate()?;
    let h = build_hamiltonian(&config.lattice)?;
    let mut spectrum = eigendecompose(&h)?;
    let edges = spectrum.label_edges(config.edge_threshold);
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "eigenvalue", "boundary_weight", "p_first", "p_last", "edge"])?;
    for i in 0..spectrum.dim() {
        let v = spectrum.eigenvector(i);
        let label = match &edges {
            Ok(_) if spectrum.edge_left() == Some(i) => "edge_1",
            Ok(_) if spectrum.edge_right() == Some(i) => "edge_n",
            _ => "",
        };
        out.write_record([
            i.to_string(),
            num(spectrum.eigenvalue(i)),
            num(boundary_weight(v)),
            num(v[0] * v[0]),
            num(v[v.len() - 1] * v[v.len() - 1]),
            label.to_string(),
        ])?;
    }
    out.flush()?;
    edges.map(|_| ())
}

/// `ψ0 = |n⟩` for every site.
pub fn sweep_initial_sites(config: &ExperimentConfig) -> Result<SweepTable> {
    let setup = Setup::new(config)?;
    let n = setup.sites();
    let rows = par_tasks(config.workers, n, |i| {
        let psi0 = State::site(n, i + 1);
        let traj = setup.run(&psi0, &config.integrator)?;
        let f0 = fidelity(&psi0, setup.edge_left());
        Ok(summarize(config, i, vec![Param::Int(i as i64 + 1), Param::Float(f0)], &traj))
    })?;
    Ok(SweepTable::new(vec!["site", "fidelity_initial_edge1"], rows))
}

/// `ψ0 = cosθ|1⟩ + sinθ|2⟩` on `points` equally spaced angles covering `[0, 2π]`.
pub fn sweep_theta(config: &ExperimentConfig, points: usize) -> Result<SweepTable> {
    if points < 2 {
        return Err(Error::InvalidParameter(format!("theta sweep needs at least 2 points, got {points}")));
    }
    let setup = Setup::new(config)?;
    let rows = par_tasks(config.workers, points, |j| {
        let theta = 2.0 * PI * j as f64 / (points - 1) as f64;
        let psi0 = two_site_state(setup.sites(), 1, 2, theta);
        let traj = setup.run(&psi0, &config.integrator)?;
        let f0 = fidelity(&psi0, setup.edge_left());
        Ok(summarize(config, j, vec![Param::Float(theta), Param::Float(f0)], &traj))
    })?;
    Ok(SweepTable::new(vec!["theta", "fidelity_initial_edge1"], rows))
}

fn random_rows(config: &ExperimentConfig, setup: &Setup, count: usize) -> Result<Vec<SweepRow>> {
    par_tasks(config.workers, count, |i| {
        let draw = draw_two_site(&mut task_rng(config.seed, i), setup.sites());
        let traj = setup.run(&draw.state, &config.integrator)?;
        let f0 = fidelity(&draw.state, setup.edge_left());
        let params = vec![Param::Int(draw.n as i64), Param::Int(draw.m as i64), Param::Float(draw.theta), Param::Float(f0)];
        Ok(summarize(config, i, params, &traj))
    })
}

/// `count` random two-site initial states under the configured law.
pub fn sweep_random(config: &ExperimentConfig, count: usize) -> Result<SweepTable> {
    let setup = Setup::new(config)?;
    let rows = random_rows(config, &setup, count)?;
    Ok(SweepTable::new(vec!["n", "m", "theta", "fidelity_initial_edge1"], rows))
}

/// Final fidelity from `|initial_site⟩` with uniform `p` off target and `p_f` on it,
/// at the configured horizon, for every grid point (`p` major).
pub fn optimize_p(config: &ExperimentConfig, p_grid: &[f64], pf_grid: &[f64]) -> Result<SweepTable> {
    let setup = Setup::new(config)?;
    let target = setup
        .spectrum
        .edge_right()
        .ok_or_else(|| Error::InvalidParameter("degenerate edge doublet has no eigenstate target".into()))?;
    let gains = Gains::uniform(config.law.gain)?;
    let psi0 = State::site(setup.sites(), config.initial_site);
    let points: Vec<(f64, f64)> = p_grid.iter().flat_map(|&p| pf_grid.iter().map(move |&pf| (p, pf))).collect();
    let rows = par_tasks(config.workers, points.len(), |i| {
        let (p, pf) = points[i];
        let law = ControlLaw::projector(gains, build_uniform_p(&setup.spectrum, target, p, pf)?);
        let traj = setup.run_with(&law, &psi0, &config.integrator)?;
        Ok(summarize(config, i, vec![Param::Float(p), Param::Float(pf)], &traj))
    })?;
    Ok(SweepTable::new(vec!["p", "p_f"], rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorChannel {
    Initial,
    F1,
    F2,
}

impl ErrorChannel {
    pub const ALL: [ErrorChannel; 3] = [ErrorChannel::Initial, ErrorChannel::F1, ErrorChannel::F2];

    fn label(self) -> &'static str {
        match self {
            ErrorChannel::Initial => "initial",
            ErrorChannel::F1 => "f1",
            ErrorChannel::F2 => "f2",
        }
    }
}

/// Field scaling `f′_k = (1+δ_k)·f_k` and initial-state infidelity `1 − |⟨ψ0|ideal⟩|`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorModel {
    pub field_scale_delta: [f64; 2],
    pub initial_state_delta: f64,
}

impl ErrorModel {
    pub fn single(channel: ErrorChannel, delta: f64) -> Self {
        let mut m = ErrorModel::default();
        match channel {
            ErrorChannel::Initial => m.initial_state_delta = delta,
            ErrorChannel::F1 => m.field_scale_delta[0] = delta,
            ErrorChannel::F2 => m.field_scale_delta[1] = delta,
        }
        m
    }

    /// Every channel at every `δ`, channel major.
    pub fn channel_grid(deltas: &[f64]) -> Vec<(ErrorChannel, ErrorModel)> {
        ErrorChannel::ALL
            .iter()
            .flat_map(|&c| deltas.iter().map(move |&d| (c, ErrorModel::single(c, d))))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.initial_state_delta) {
            return Err(Error::InvalidParameter(format!(
                "initial-state error must lie in [0, 1), got {}",
                self.initial_state_delta
            )));
        }
        if self.field_scale_delta.iter().any(|d| !(d.is_finite() && *d >= -1.0)) {
            return Err(Error::InvalidParameter(format!(
                "field scale errors must be finite and at least -1, got {:?}",
                self.field_scale_delta
            )));
        }
        Ok(())
    }
}

/// One trajectory from `|initial_site⟩` per error model.
pub fn robustness_scan(config: &ExperimentConfig, grid: &[(ErrorChannel, ErrorModel)]) -> Result<SweepTable> {
    for (_, m) in grid {
        m.validate()?;
    }
    let setup = Setup::new(config)?;
    let ideal = State::site(setup.sites(), config.initial_site);
    let rows = par_tasks(config.workers, grid.len(), |i| {
        let (channel, model) = grid[i];
        let psi0 = mix_initial_error(&ideal, model.initial_state_delta, &mut task_rng(config.seed, i))?;
        let [d1, d2] = model.field_scale_delta;
        let law = setup.law.with_gains(setup.law.gains().scaled([1.0 + d1, 1.0 + d2]));
        let traj = setup.run_with(&law, &psi0, &config.integrator)?;
        let params = vec![
            Param::Text(channel.label()),
            Param::Float(model.initial_state_delta),
            Param::Float(d1),
            Param::Float(d2),
        ];
        Ok(summarize(config, i, params, &traj))
    })?;
    Ok(SweepTable::new(vec!["channel", "delta_initial", "delta_f1", "delta_f2"], rows))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LinearFit { slope, intercept, r_squared })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub table: SweepTable,
    /// Fit of control time against `N` over the sizes that reached the threshold.
    pub fit: Option<LinearFit>,
}

/// Control time to `threshold` from `|initial_site⟩` for each lattice size.
///
/// Sizes without a usable edge pair produce a row with `edge_states = 0`
/// and no outcome.
pub fn scaling_study(config: &ExperimentConfig, sizes: &[usize], threshold: f64) -> Result<ScalingResult> {
    config.validate()?;
    let params = IntegratorParams { stop_fidelity: Some(threshold), ..config.integrator };
    let rows = par_tasks(config.workers, sizes.len(), |i| {
        let n = sizes[i];
        let setup = match Setup::for_lattice(config, config.lattice.with_sites(n)) {
            Ok(s) => s,
            Err(Error::NoEdgeStates { .. } | Error::AmbiguousEdgeStates { .. }) => {
                return Ok(SweepRow {
                    index: i,
                    params: vec![Param::Int(n as i64), Param::Int(0)],
                    fidelity_final: f64::NAN,
                    time_to_threshold: None,
                    concurrence_final: None,
                })
            }
            Err(e) => return Err(e),
        };
        if config.initial_site > n {
            return Err(Error::InvalidParameter(format!("initial site {} outside lattice of {n}", config.initial_site)));
        }
        let traj = setup.run(&State::site(n, config.initial_site), &params)?;
        Ok(SweepRow {
            index: i,
            params: vec![Param::Int(n as i64), Param::Int(1)],
            fidelity_final: traj.final_fidelity(),
            time_to_threshold: time_to_fidelity(&traj, threshold),
            concurrence_final: None,
        })
    })?;
    let table = SweepTable::new(vec!["sites", "edge_states"], rows);
    let (x, y): (Vec<f64>, Vec<f64>) = table
        .rows
        .iter()
        .filter_map(|r| r.time_to_threshold.map(|t| (r.params[0].as_f64().unwrap_or(f64::NAN), t)))
        .unzip();
    let fit = linear_fit(&x, &y);
    Ok(ScalingResult { table, fit })
}

#[derive(Debug, Clone)]
pub struct EntangleResult {
    /// Edge-subspace trajectory from `|initial_site⟩`.
    pub trajectory: Trajectory,
    /// Mean concurrence over the last tenth of the recorded trajectory.
    pub steady_concurrence: f64,
    /// Random two-site draws; `concurrence_final` holds each draw's steady concurrence.
    pub scan: SweepTable,
}

/// Edge-subspace control from `|initial_site⟩` plus a scan over `count` random draws.
pub fn entangle_run(config: &ExperimentConfig, count: usize) -> Result<EntangleResult> {
    let mut config = config.clone();
    config.law.kind = LawKind::V3;
    let setup = Setup::new(&config)?;
    let trajectory = setup.run(&State::site(setup.sites(), config.initial_site), &config.integrator)?;
    let steady_concurrence = steady_mean(trajectory.concurrence.as_deref().unwrap_or(&[]), STEADY_FRACTION);
    let rows = random_rows(&config, &setup, count)?;
    let scan = SweepTable::new(vec!["n", "m", "theta", "fidelity_initial_edge1"], rows);
    Ok(EntangleResult { trajectory, steady_concurrence, scan })
}
