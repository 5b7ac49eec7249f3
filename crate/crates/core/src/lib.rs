//! Truncated character groups of graded Hopf algebras.
//!
//! The crate computes in `Hom(H, B)` up to a degree cutoff: convolution,
//! inversion, `exp`/`log`/BCH between infinitesimal characters and
//! characters, and the evolution equation `η' = η ⋆ γ`. The Connes–Kreimer
//! algebra of rooted trees gives the Butcher group of Runge–Kutta methods;
//! finite-dimensional coalgebras come with explicit Banach norms.

pub mod charalg;
pub mod cli;
pub mod ck;
pub mod coeff;
pub mod evolution;
pub mod findim;
pub mod hopf;
pub mod par;
pub mod primitive;

pub use charalg::{CharError, Functional};
pub use coeff::{Coeff, TruncPoly};
pub use hopf::{verify_axioms, Degree, HopfAlgebra, LinComb, TensorSum, Truncation};
