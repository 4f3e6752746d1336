//! Preparation of Aubry-André-Harper edge states by Lyapunov feedback on the
//! two boundary sites of an open chain.
//!
//! The crate is organized bottom-up:
//!
//! * [`lattice`] builds `H0` and the boundary projectors,
//! * [`spectral`] diagonalizes `H0` and picks out the edge states,
//! * [`control`] evaluates Lyapunov functions and feedback fields,
//! * [`dynamics`] integrates the controlled Schrödinger equation,
//! * [`observables`] computes fidelities and boundary concurrence,
//! * [`harness`] runs the parameter sweeps and writes CSV.

pub mod control;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod observables;
pub mod spectral;
pub mod state;

pub use control::{build_p1, build_uniform_p, ControlLaw, Gains, LawKind, POperator};
pub use dynamics::{evolve, time_to_fidelity, IntegratorParams, Probes, Trajectory};
pub use error::{Error, Result};
pub use lattice::{boundary_projector, build_hamiltonian, Boundary, HamiltonianMatrix, LatticeSpec, Rational};
pub use observables::{concurrence, fidelity, reduced_density_1n, BoundaryDensityBlock};
pub use spectral::{eigendecompose, identify_edge_states, EdgePair, SpectralDecomposition};
pub use state::State;
