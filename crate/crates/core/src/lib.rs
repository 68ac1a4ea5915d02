//! Exact finite-N boson dynamics on a periodic lattice, the lattice Hartree
//! flow, reduced density matrices, and the closed-form bounds that compare
//! them.
//!
//! The pieces, bottom-up:
//!
//! * [`lattice`]: the one-dimensional model `h = -Δ + U` with pair
//!   interaction `V` and its constants `‖V‖`, `‖V̂‖₁`, `λ_V`.
//! * [`fock`]: the bosonic occupation-number basis and the N-body
//!   Hamiltonian with the mean-field `1/N` coupling.
//! * [`propagate`]: `exp(-iHt)` by eigendecomposition or Lanczos stepping.
//! * [`rdm`]: k-particle marginals and trace distances.
//! * [`hartree`]: the nonlinear one-body comparison flow.
//! * [`distinguishable`]: the unsymmetrized tensor space for slot
//!   observables (commutators, covariances).
//! * [`bounds`]: envelopes, hierarchy residuals and rate fits.

pub mod bounds;
pub mod distinguishable;
pub mod error;
pub mod fock;
pub mod hartree;
pub mod lattice;
pub mod linalg;
pub mod propagate;
pub mod rdm;

pub use bounds::{
    bbgky_residual, commutator_envelope, correlation_envelope, fit_rate, infinite_hierarchy_residual,
    main_theorem_envelope, ExperimentRecord, HierarchyFrame, RateFit,
};
pub use distinguishable::{
    commutator_norm, covariance_gap, full_evolve, sample_observables, FullHamiltonian, FullState, NormEstimate,
    PowerIterationConfig, SlotObservable,
};
pub use error::{Error, Result};
pub use fock::{apply_hamiltonian, basis_dimension, hamiltonian, product_state, FockHamiltonian, OccupationBasis, SymmetricState};
pub use hartree::{hartree_energy, hartree_solve, HartreeOrbital, HartreeSolver};
pub use lattice::{build_lattice, interaction_norms, InteractionNorms, LatticeModel, Shape};
pub use linalg::C64;
pub use propagate::{energy, evolve, Method, Propagator, PropagatorConfig};
pub use rdm::{dense_oracle_rdm, k_rdm, one_rdm, trace_distance, ReducedDensity};
