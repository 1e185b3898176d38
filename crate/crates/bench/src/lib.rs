//! Shared fixtures for the criterion benches.

use csbp_core::{ModelParams, RngStream, Trajectory, TransitionContext};

pub fn reference_params() -> ModelParams {
    ModelParams::new(-6.0, 6.0, 1.5).expect("valid parameters")
}

pub fn context(x: f64) -> TransitionContext {
    TransitionContext::new(x, 1.0 / 6.0, reference_params()).expect("valid context")
}

/// A short simulated path used by the likelihood benches.
pub fn fixture_path(n_steps: usize) -> Trajectory {
    let inverter = csbp_core::Inverter::default();
    let mut rng = RngStream::new(7, 0);
    csbp_core::sampler::simulate_path(csbp_core::experiments::DEFAULT_X0, 1.0 / 6.0, n_steps, &reference_params(), &mut rng, &inverter)
        .expect("simulation succeeds")
}
