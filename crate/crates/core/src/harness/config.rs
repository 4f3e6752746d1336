use serde::{Deserialize, Serialize};

use crate::control::{build_p1, build_uniform_p, ControlLaw, Gains, LawKind};
use crate::dynamics::{evolve, IntegratorParams, Probes, Trajectory};
use crate::error::{Error, Result};
use crate::lattice::{build_hamiltonian, HamiltonianMatrix, LatticeSpec};
use crate::spectral::{eigendecompose, EdgePair, SpectralDecomposition};
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawConfig {
    pub kind: LawKind,
    /// Gain applied to both channels.
    pub gain: f64,
    /// Uniform coefficient for every non-target state; `None` uses `pᵢ = λᵢ`.
    pub p: Option<f64>,
    pub p_f: f64,
}

impl LawConfig {
    /// Gain 1 for the overlap laws, gain 5 with `p_f = −3` for the projector law.
    pub fn default_for(kind: LawKind) -> Self {
        let gain = match kind {
            LawKind::V2 => 5.0,
            LawKind::V1 | LawKind::V3 => 1.0,
        };
        LawConfig { kind, gain, p: None, p_f: -3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    pub law: LawConfig,
    pub integrator: IntegratorParams,
    pub seed: u64,
    pub workers: usize,
    pub edge_threshold: f64,
    /// Site `n` of the localized initial state `|n⟩` used by single runs.
    pub initial_site: usize,
    /// Fidelity defining the control time reported in sweep tables.
    pub fidelity_threshold: f64,
}

impl ExperimentConfig {
    /// Reference lattice with the law's default gain and horizon
    /// (`t_max` = 1000 for the projector law, 2000 otherwise).
    pub fn for_law(kind: LawKind) -> Self {
        let t_max = match kind {
            LawKind::V2 => 1000.0,
            LawKind::V1 | LawKind::V3 => 2000.0,
        };
        ExperimentConfig {
            lattice: LatticeSpec::reference(),
            law: LawConfig::default_for(kind),
            integrator: IntegratorParams { t_max, ..Default::default() },
            seed: 0,
            workers: 1,
            edge_threshold: 0.5,
            initial_site: 3,
            fidelity_threshold: 0.97,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        self.integrator.validate()?;
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        if self.initial_site == 0 || self.initial_site > self.lattice.sites {
            return Err(Error::InvalidParameter(format!(
                "initial site {} outside 1..={}",
                self.initial_site, self.lattice.sites
            )));
        }
        if !(self.fidelity_threshold > 0.0 && self.fidelity_threshold <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fidelity threshold must lie in (0, 1], got {}",
                self.fidelity_threshold
            )));
        }
        Gains::uniform(self.law.gain)?;
        Ok(())
    }
}

/// Everything derived from a config before any trajectory is integrated.
#[derive(Debug, Clone)]
pub struct Setup {
    pub spec: LatticeSpec,
    pub hamiltonian: HamiltonianMatrix,
    pub spectrum: SpectralDecomposition,
    pub edges: EdgePair,
    pub law: ControlLaw,
    left: State,
    right: State,
}

impl Setup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        Self::for_lattice(config, config.lattice)
    }

    /// Same law settings on a different lattice.
    pub fn for_lattice(config: &ExperimentConfig, spec: LatticeSpec) -> Result<Self> {
        let hamiltonian = build_hamiltonian(&spec)?;
        let mut spectrum = eigendecompose(&hamiltonian)?;
        let edges = spectrum.label_edges(config.edge_threshold)?;
        let gains = Gains::uniform(config.law.gain)?;
        let law = match config.law.kind {
            LawKind::V1 => ControlLaw::target_overlap(gains, edges.right_state()),
            LawKind::V2 => {
                let target = spectrum.edge_right().ok_or_else(|| {
                    Error::InvalidParameter("degenerate edge doublet has no eigenstate target".into())
                })?;
                let p = match config.law.p {
                    Some(p) => build_uniform_p(&spectrum, target, p, config.law.p_f)?,
                    None => build_p1(&spectrum, target, config.law.p_f)?,
                };
                ControlLaw::projector(gains, p)
            }
            LawKind::V3 => ControlLaw::edge_subspace(gains, &edges),
        };
        let left = edges.left_state();
        let right = edges.right_state();
        Ok(Setup { spec, hamiltonian, spectrum, edges, law, left, right })
    }

    pub fn sites(&self) -> usize {
        self.spec.sites
    }

    pub fn edge_left(&self) -> &State {
        &self.left
    }

    pub fn edge_right(&self) -> &State {
        &self.right
    }

    /// Fidelity against `|Edge_N⟩`, `|⟨Edge₁|ψ⟩|²`, and concurrence for the edge-subspace law.
    pub fn probes(&self) -> Probes<'_> {
        Probes {
            target: &self.right,
            edge_left: Some(&self.left),
            concurrence: self.law.kind() == LawKind::V3,
            eigenbasis: None,
            states: false,
        }
    }

    pub fn run(&self, psi0: &State, params: &IntegratorParams) -> Result<Trajectory> {
        evolve(&self.hamiltonian, &self.law, psi0, params, self.probes())
    }

    pub fn run_with(&self, law: &ControlLaw, psi0: &State, params: &IntegratorParams) -> Result<Trajectory> {
        evolve(&self.hamiltonian, law, psi0, params, self.probes())
    }
}
