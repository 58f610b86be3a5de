//! Constructive machinery for counting essential surfaces in hyperbolic
//! 3-manifolds: bounded-degree triangulation census and upper-bound
//! estimator, complex Fenchel-Nielsen representations of surface groups
//! with bending, and permutation covers of surface groups.

pub mod census;
pub mod cli;
pub mod covers;
pub mod fenchel;
pub mod moebius;
pub mod ribbon;
