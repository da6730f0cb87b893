//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use heisenlab::hamiltonians::{build_em_hamiltonian, build_potential_hamiltonian, FieldConfig, PolyHamiltonian};
use heisenlab::{make_basis, BasisSpec};

pub fn basis_1d(n: usize) -> Arc<BasisSpec> {
    make_basis(n, 1, 1.0, &[1.0], &[1.0]).expect("valid basis")
}

/// `p²/2 + x²/2 + 0.1 x⁴`.
pub fn quartic(n: usize) -> PolyHamiltonian {
    build_potential_hamiltonian(&basis_1d(n), &[0.0, 0.0, 0.5, 0.0, 0.1], 0.0).expect("valid Hamiltonian")
}

/// Charge in a uniform field along `z`, matched to the magnetic length.
pub fn cyclotron(n: usize) -> PolyHamiltonian {
    let ell = 2.0f64.sqrt();
    let basis = make_basis(n, 2, 1.0, &[1.0, 1.0], &[ell, ell]).expect("valid basis");
    build_em_hamiltonian(&basis, &FieldConfig::new(1.0, [0.0, 0.0, 1.0], [0.0; 3])).expect("valid Hamiltonian")
}
