//! Discrete skeletons of the CSBP by chaining subordinator draws.
//!
//! Given `X_{(i-1) delta} = x`, the next state is zero with probability `p_delta(0)`;
//! otherwise it is drawn from the survival-conditioned law by solving `F(s) = u`
//! with `F` obtained from numerical inversion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CsbpError, Result};
use crate::inversion::Inverter;
use crate::model::{ConditionalTransform, ModelParams, TransitionContext};
use crate::rng::RngStream;

const LOWER_START: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 60;
const ROOT_REL_TOL: f64 = 1e-8;

/// An observed or simulated path `X_0, X_delta, ..., X_{n delta}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub x0: f64,
    pub delta: f64,
    pub values: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub stream_id: u64,
}

impl Trajectory {
    /// Builds a trajectory from observations, checking nonnegativity and absorption at 0.
    pub fn from_values(delta: f64, values: Vec<f64>, seed: u64, stream_id: u64) -> Result<Self> {
        let x0 = *values
            .first()
            .ok_or_else(|| CsbpError::InvalidTrajectory("no observations".into()))?;
        let t = Trajectory {
            x0,
            delta,
            values,
            seed,
            stream_id,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(CsbpError::InvalidTrajectory(format!("step must be positive, got {}", self.delta)));
        }
        if self.values.first() != Some(&self.x0) {
            return Err(CsbpError::InvalidTrajectory("values[0] must equal x0".into()));
        }
        let mut extinct = false;
        for (i, v) in self.values.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(CsbpError::InvalidTrajectory(format!("value {v} at step {i} is not a nonnegative number")));
            }
            if extinct && *v != 0.0 {
                return Err(CsbpError::InvalidTrajectory(format!("path leaves 0 at step {i}")));
            }
            extinct |= *v == 0.0;
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Consecutive pairs `(X_{(i-1) delta}, X_{i delta})`.
    pub fn transitions(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.delta
    }

    /// Index of the first zero, if the path went extinct.
    pub fn extinction_step(&self) -> Option<usize> {
        self.values.iter().position(|v| *v == 0.0)
    }
}

/// Draws `X_delta` given `X_0 = x`.
pub fn sample_transition(
    x: f64,
    delta: f64,
    params: &ModelParams,
    rng: &mut RngStream,
    inverter: &Inverter,
) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let atom = rng.uniform();
    let level = rng.uniform();
    transition_from_uniforms(x, delta, params, atom, level, inverter)
}

/// Transition driven by explicit uniforms: `atom` decides extinction, `level` is the
/// quantile level of the survival-conditioned law.
pub fn transition_from_uniforms(
    x: f64,
    delta: f64,
    params: &ModelParams,
    atom: f64,
    level: f64,
    inverter: &Inverter,
) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let ctx = TransitionContext::new(x, delta, *params)?;
    if atom <= ctx.extinction_probability() {
        return Ok(0.0);
    }
    let handle = ConditionalTransform::conditional(ctx)?;
    conditional_quantile(&handle, level, inverter)
}

/// Solves `F(s) = level` for the survival-conditioned distribution function.
pub fn conditional_quantile(handle: &ConditionalTransform, level: f64, inverter: &Inverter) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(CsbpError::Domain(format!("quantile level must lie in (0, 1), got {level}")));
    }
    let f = |s: f64| -> Result<f64> { Ok(inverter.cdf(handle, s)? - level) };

    let mut lo = LOWER_START;
    let mut f_lo = f(lo)?;
    let mut shrink = 0;
    while f_lo >= 0.0 {
        if shrink == 20 {
            return Ok(lo);
        }
        lo *= 1e-4;
        f_lo = f(lo)?;
        shrink += 1;
    }

    let mut hi = handle.mean().max(2.0 * lo);
    let mut f_hi = f(hi)?;
    let mut doublings = 0;
    while f_hi <= 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(CsbpError::Bracket(format!(
                "distribution function stays below {level} up to {hi:e}"
            )));
        }
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi)?;
        doublings += 1;
    }

    // geometric bisection until the bracket is within a factor of two
    while hi > 2.0 * lo {
        let mid = (lo * hi).sqrt();
        let f_mid = f(mid)?;
        if f_mid > 0.0 {
            hi = mid;
            f_hi = f_mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }

    // Illinois false position, with a bisection step whenever progress stalls
    let mut side = 0i8;
    let mut width = hi - lo;
    for _ in 0..200 {
        if hi - lo <= ROOT_REL_TOL * hi {
            break;
        }
        let mut c = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        if !(c > lo && c < hi) {
            c = 0.5 * (lo + hi);
        }
        let f_c = f(c)?;
        if f_c == 0.0 {
            return Ok(c);
        }
        if f_c > 0.0 {
            hi = c;
            f_hi = f_c;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = c;
            f_lo = f_c;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        }
        if hi - lo > 0.5 * width {
            let mid = 0.5 * (lo + hi);
            let f_mid = f(mid)?;
            if f_mid > 0.0 {
                hi = mid;
                f_hi = f_mid;
            } else {
                lo = mid;
                f_lo = f_mid;
            }
            side = 0;
        }
        width = hi - lo;
    }
    Ok(if f_hi.abs() < f_lo.abs() { hi } else { lo })
}

/// Simulates `n_steps` transitions from `x0`; state 0 is absorbing.
pub fn simulate_path(
    x0: f64,
    delta: f64,
    n_steps: usize,
    params: &ModelParams,
    rng: &mut RngStream,
    inverter: &Inverter,
) -> Result<Trajectory> {
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(CsbpError::Domain(format!("initial state must be positive, got {x0}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(CsbpError::Domain(format!("step must be positive, got {delta}")));
    }
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(x0);
    let mut x = x0;
    for _ in 0..n_steps {
        x = if x > 0.0 {
            sample_transition(x, delta, params, rng, inverter)?
        } else {
            0.0
        };
        values.push(x);
    }
    Ok(Trajectory {
        x0,
        delta,
        values,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    })
}

/// Simulates `n_paths` independent paths; path `i` uses stream `(master_seed, i)`.
pub fn simulate_batch(
    x0: f64,
    delta: f64,
    n_steps: usize,
    params: &ModelParams,
    master_seed: u64,
    n_paths: usize,
    inverter: &Inverter,
) -> Result<Vec<Trajectory>> {
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(master_seed, i as u64);
            simulate_path(x0, delta, n_steps, params, &mut rng, inverter)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ModelParams {
        ModelParams::new(-6.0, 6.0, 1.5).unwrap()
    }

    #[test]
    fn atom_branch_returns_zero() {
        let inv = Inverter::default();
        let ctx = TransitionContext::new(1.0, 1.0 / 6.0, reference()).unwrap();
        let p = ctx.extinction_probability();
        let v = transition_from_uniforms(1.0, 1.0 / 6.0, &reference(), 0.5 * p, 0.3, &inv).unwrap();
        assert_eq!(v, 0.0);
        let v = transition_from_uniforms(1.0, 1.0 / 6.0, &reference(), 0.5, 0.3, &inv).unwrap();
        assert!(v > 0.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let inv = Inverter::default();
        let ctx = TransitionContext::new(1.0, 1.0 / 6.0, reference()).unwrap();
        let h = ConditionalTransform::conditional(ctx).unwrap();
        for level in [1e-4, 0.1, 0.5, 0.9, 0.999] {
            let s = conditional_quantile(&h, level, &inv).unwrap();
            let back = inv.cdf(&h, s).unwrap();
            assert!((back - level).abs() < 1e-6, "level {level}: F({s}) = {back}");
        }
    }

    #[test]
    fn zero_steps_gives_initial_state_only() {
        let inv = Inverter::default();
        let mut rng = RngStream::new(1, 0);
        let t = simulate_path(1.0, 1.0 / 6.0, 0, &reference(), &mut rng, &inv).unwrap();
        assert_eq!(t.values, vec![1.0]);
    }

    #[test]
    fn reproducible_and_absorbing() {
        let inv = Inverter::default();
        let a = simulate_path(0.05, 1.0 / 6.0, 6, &reference(), &mut RngStream::new(9, 4), &inv).unwrap();
        let b = simulate_path(0.05, 1.0 / 6.0, 6, &reference(), &mut RngStream::new(9, 4), &inv).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
    }

    #[test]
    fn trajectory_validation() {
        assert!(Trajectory::from_values(0.1, vec![1.0, 0.0, 2.0], 0, 0).is_err());
        assert!(Trajectory::from_values(0.1, vec![1.0, -1.0], 0, 0).is_err());
        assert!(Trajectory::from_values(0.0, vec![1.0, 2.0], 0, 0).is_err());
        assert!(Trajectory::from_values(0.1, vec![], 0, 0).is_err());
        let t = Trajectory::from_values(0.1, vec![1.0, 2.0, 0.0, 0.0], 0, 0).unwrap();
        assert_eq!(t.extinction_step(), Some(2));
        assert_eq!(t.n_steps(), 3);
    }
}
