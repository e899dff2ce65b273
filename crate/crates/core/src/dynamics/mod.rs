//! Quantized Hamiltonian paths: the path algebra, the Schrodinger propagator
//! `mu_k`, and loop invariants.

mod loops;
mod path;
mod propagate;
pub mod registry;

pub use loops::{loop_invariants, LoopInvariants};
pub use path::{HamiltonianPath, Profile};
pub use propagate::{midpoint_product, propagate, propagate_with, PropagateOptions};
pub use registry::path_by_name;
