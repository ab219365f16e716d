//! Q-index (spectral radius of the signless Laplacian `Q = D + A`) of strongly
//! connected bipartite digraphs: construction of the extremal families,
//! power-iteration and dense eigen-solvers, closed-form polynomial roots,
//! numerical certificates for the extremal inequalities and exhaustive
//! enumeration of small classes.

pub mod charpoly;
pub mod config;
pub mod dense;
pub mod digraph;
pub mod enumerate;
pub mod families;
pub mod numfmt;
pub mod spectral;
pub mod verify;

pub use digraph::{Bipartition, Digraph};
pub use families::{build, Family, FamilySpec};
pub use spectral::{q_index, SolverConfig, SpectralResult};
