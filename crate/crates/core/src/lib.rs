//! Learning k-juntas over finite fields.
//!
//! The learner reduces junta learning to learning with discrete memoryless
//! errors (LDME), and LDME to the light bulb problem (LBP):
//!
//! - [`gf`]: arithmetic in `F_{p^ell}`, trace, characters, vector combinatorics.
//! - [`funcs`]: target functions, example oracles and oracle transformations.
//! - [`analysis`]: exact and empirical Fourier analysis, distances, projections.
//! - [`lbp`]: light bulb instances and correlated-pair solvers.
//! - [`ldme`]: correlation checks, split-and-list instances and the LDME solver.
//! - [`junta`]: the top-level junta learner.

pub mod analysis;
pub mod budget;
pub mod funcs;
pub mod gf;
pub mod junta;
pub mod lbp;
pub mod ldme;
pub mod rng;
mod text;

pub use gf::{FieldSpec, FieldVector, Fq, Partition, Side};
pub use rng::StreamRng;
