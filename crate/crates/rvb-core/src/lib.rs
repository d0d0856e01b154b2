//! Doped short-range RVB states on 2-leg spin ladders.
//!
//! Each lattice site is a qutrit: spin-up (`0`), spin-down (`1`), or hole
//! (`2`). The crate builds the equal-weight superposition of all dimer-hole
//! coverings of a ladder, computes its 4-site reduced density matrices either
//! by brute-force enumeration ([`coverings`]) or by a rung-frontier transfer
//! recursion that runs in O(N) per ladder ([`recursion`]), and quantifies
//! genuine multipartite entanglement via the generalized geometric measure
//! ([`entanglement`]). The [`tjmodel`] module exactly diagonalizes the t-J
//! ladder Hamiltonian in conserved symmetry sectors for comparison against
//! the RVB ansatz.

pub mod coverings;
pub mod entanglement;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod recursion;
pub mod statevec;
pub mod tjmodel;

pub use error::LadderError;
pub use lattice::{build_ladder, nn_edges, Boundary, LadderSpec, Sublattice};
pub use statevec::{DensityMatrix, SparseState};
