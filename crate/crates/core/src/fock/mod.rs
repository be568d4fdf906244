//! Truncated-Fock ground truth for the full multimode Hamiltonians.

mod hamiltonian;
mod operator;
mod oracle;
mod states;

pub use hamiltonian::{build_hamiltonian, configured_dim_cap, Environment, FockSpaceSpec, DEFAULT_DIM_CAP, DIM_CAP_ENV};
pub use operator::FockOperator;
pub use oracle::{evolve_adaptive, evolve_and_reduce, AdaptiveRun, FockOracle, OracleOptions, OracleResult, LEAKAGE_TOL};
pub use states::{annihilation, char_fn_oracle, displacement, gaussian_density_matrix, moments_from_density, top_population};
