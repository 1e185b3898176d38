//! Simulation and likelihood-based parameter estimation for alpha-stable
//! continuous-state branching processes (CSBPs).
//!
//! The transition law from state `x` over a step `delta` is that of a subordinator
//! at time `x` with Laplace exponent `u_delta`. Densities and distribution functions
//! are recovered by Euler-summation inversion of the Bromwich integral, which drives
//! both path simulation (inverse-transform sampling) and the likelihood.

pub mod bayes;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod inversion;
pub mod io;
pub mod model;
pub mod rng;
pub mod sampler;
pub mod simplex;

pub use bayes::{PriorSpec, WeightedPosterior};
pub use error::{CsbpError, Result};
pub use estimation::{AlphaGrid, FitResult, OptimizerConfig};
pub use inversion::{InversionConfig, Inverter, LaplaceTransform};
pub use model::{ConditionalTransform, ModelParams, SingularitySet, TransitionContext};
pub use rng::RngStream;
pub use sampler::Trajectory;
