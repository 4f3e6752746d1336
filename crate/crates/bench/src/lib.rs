//! Shared fixtures for the criterion benchmarks.

use edgeprep::{build_hamiltonian, build_p1, eigendecompose, ControlLaw, EdgePair, Gains, HamiltonianMatrix, LatticeSpec, SpectralDecomposition};

pub struct Fixture {
    pub hamiltonian: HamiltonianMatrix,
    pub spectrum: SpectralDecomposition,
    pub edges: EdgePair,
}

impl Fixture {
    pub fn new(sites: usize) -> Self {
        let hamiltonian = build_hamiltonian(&LatticeSpec::reference().with_sites(sites)).expect("valid lattice");
        let mut spectrum = eigendecompose(&hamiltonian).expect("eigensolver converges");
        let edges = spectrum.label_edges(0.5).expect("edge states present");
        Fixture { hamiltonian, spectrum, edges }
    }

    pub fn v1(&self) -> ControlLaw {
        ControlLaw::target_overlap(Gains([1.0, 1.0]), self.edges.right_state())
    }

    pub fn v2(&self) -> ControlLaw {
        let target = self.spectrum.edge_right().expect("labelled");
        ControlLaw::projector(Gains([5.0, 5.0]), build_p1(&self.spectrum, target, -3.0).expect("valid P1"))
    }

    pub fn v3(&self) -> ControlLaw {
        ControlLaw::edge_subspace(Gains([1.0, 1.0]), &self.edges)
    }
}
