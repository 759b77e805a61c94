//! Minimum bisections of random cubic graphs.
//!
//! * [`graph`]: configuration model, multigraphs, short cycles, 2-core, cherries.
//! * [`cut`]: cuts, exchange calculus, balance repair.
//! * [`improve`]: local search over small structural moves.
//! * [`wave`]: the Gaussian wave field, sign cut and border-cherry refinement.
//! * [`firstmoment`]: first-moment exponents behind the lower bound.
//! * [`montecarlo`]: the seven-variable orthant probability and the upper bounds.
//! * [`oracle`]: exact bisection width for small graphs.

pub mod error;
pub mod firstmoment;
pub mod cut;
pub mod graph;
pub mod improve;
pub mod montecarlo;
pub mod oracle;
pub mod seed;
pub mod wave;

pub use error::{Error, Result};
