//! Heisenberg-picture dynamics on truncated Fock bases.
//!
//! Operators are dense matrices on a tensor product of truncated harmonic
//! oscillator bases. Polynomial Hamiltonians are built symbolically,
//! evaluated in the basis, and propagated exactly through their spectral
//! decomposition. Operator identities are tested on an interior block of
//! low levels, away from the truncation edge.

pub mod basis;
pub mod classical;
pub mod ehrenfest;
pub mod error;
pub mod evolution;
pub mod hamiltonians;
pub mod ladder;
pub mod operator;
pub mod poly;
pub mod series;
pub mod state;
pub mod verify;

pub use basis::{make_basis, BasisSpec, InteriorBlock};
pub use classical::{
    integrate_hamilton, integrate_lorentz, integrate_newton, integrate_rotating, ClassicalState, IntegratorConfig, Method,
};
pub use ehrenfest::{compare_trajectories, ehrenfest_check, linear_scenario_exactness, DeviationReport, DivergenceMetrics};
pub use error::{Error, Result};
pub use evolution::{
    heisenberg_evolve, heisenberg_rhs, make_propagator, sample_expectations, schrodinger_evolve, Observable,
    SpectralPropagator,
};
pub use faer::c64;
pub use hamiltonians::{
    build_em_hamiltonian, build_gravity_taylor, build_potential_hamiltonian, build_rotating_frame,
    build_rotating_frame_with_factor, kinetic_momentum_operator, FieldConfig, Gauge, HamiltonianKind,
    PolyHamiltonian,
};
pub use ladder::{lowering_operator, momentum_operator, position_operator};
pub use operator::{commutator, interior_error, relative_frobenius_error, Hermiticity, Operator};
pub use poly::{evaluate_polynomial, Monomial, Polynomial, Var};
pub use state::{coherent_state, expectation, fock_state, product_coherent_state, uncertainty, QuantumState};
pub use series::{linspace, TimeSeries};
pub use verify::{run_all, CheckResult, VerificationReport, VerifyConfig};
