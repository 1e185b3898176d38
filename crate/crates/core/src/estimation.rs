//! Likelihood of a discretely observed path and the two-step maximum-likelihood fit.
//!
//! The transition from `x` to `y > 0` contributes the density of the continuous part
//! of the law of `X_delta` given `X_0 = x`; a transition into 0 contributes the atom
//! mass `p_delta(0)`; a transition from 0 to 0 contributes nothing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CsbpError, Result};
use crate::inversion::Inverter;
use crate::model::{ConditionalTransform, ModelParams, TransitionContext};
use crate::sampler::Trajectory;
use crate::simplex::{minimize, SimplexOptions};

/// Floor applied to densities before taking logs.
pub const DENSITY_FLOOR: f64 = 1e-300;
/// Log-likelihood gap below which two grid points count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Candidate stability indices, strictly increasing inside (1, 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AlphaGrid {
    values: Vec<f64>,
}

impl AlphaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(CsbpError::InvalidParams("alpha grid is empty".into()));
        }
        if let Some(a) = values.iter().find(|a| !(**a > 1.0 && **a < 2.0)) {
            return Err(CsbpError::InvalidParams(format!("grid value {a} outside (1, 2)")));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CsbpError::InvalidParams("grid must be strictly increasing".into()));
        }
        Ok(AlphaGrid { values })
    }

    /// Parses either a comma list `1.3,1.5,1.7` or a range `start:stop:step`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |e: std::num::ParseFloatError| CsbpError::Config(format!("bad grid '{text}': {e}"));
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        if parts.len() == 3 {
            let start: f64 = parts[0].parse().map_err(bad)?;
            let stop: f64 = parts[1].parse().map_err(bad)?;
            let step: f64 = parts[2].parse().map_err(bad)?;
            if !(step > 0.0) {
                return Err(CsbpError::Config(format!("bad grid '{text}': step must be positive")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as i64 + 1;
            let values = (0..count.max(0)).map(|k| start + k as f64 * step).collect();
            return Self::new(values);
        }
        let values = text
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(bad)?;
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid {
            values: (1..=9).map(|k| 1.0 + k as f64 / 10.0).collect(),
        }
    }
}

impl TryFrom<Vec<f64>> for AlphaGrid {
    type Error = CsbpError;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        AlphaGrid::new(values)
    }
}

impl From<AlphaGrid> for Vec<f64> {
    fn from(g: AlphaGrid) -> Self {
        g.values
    }
}

/// Simplex controls for the likelihood searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub tol: f64,
    pub max_evals: usize,
    pub restarts: usize,
    pub gamma_step: f64,
    pub log_beta_step: f64,
    pub alpha_logit_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            tol: 1e-6,
            max_evals: 500,
            restarts: 1,
            gamma_step: 1.0,
            log_beta_step: 0.5,
            alpha_logit_step: 0.5,
        }
    }
}

impl OptimizerConfig {
    fn simplex(&self) -> SimplexOptions {
        SimplexOptions {
            tol: self.tol,
            max_evals: self.max_evals,
            restarts: self.restarts,
        }
    }
}

/// Log-density of one observed transition `x -> y` over a step `delta`.
pub fn transition_loglik(params: &ModelParams, x: f64, y: f64, delta: f64, inverter: &Inverter) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
        return Err(CsbpError::InvalidTrajectory(format!("transition {x} -> {y} has a negative or non-finite state")));
    }
    if x == 0.0 {
        return if y == 0.0 {
            Ok(0.0)
        } else {
            Err(CsbpError::InvalidTrajectory(format!("transition 0 -> {y} leaves the absorbing state")))
        };
    }
    let ctx = TransitionContext::new(x, delta, *params)?;
    if y == 0.0 {
        return Ok(-x * params.exponent_at_infinity(delta));
    }
    let handle = ConditionalTransform::continuous_part(ctx)?;
    let f = inverter.density(&handle, y)?;
    Ok(f.max(DENSITY_FLOOR).ln())
}

/// Sum of transition log-densities along the path.
pub fn loglik(params: &ModelParams, traj: &Trajectory, inverter: &Inverter) -> Result<f64> {
    if traj.n_steps() == 0 {
        return Err(CsbpError::InvalidTrajectory("path has no transitions".into()));
    }
    if !(traj.x0 > 0.0) {
        return Err(CsbpError::InvalidTrajectory("initial state must be positive".into()));
    }
    traj.transitions()
        .map(|(x, y)| transition_loglik(params, x, y, traj.delta, inverter))
        .sum()
}

/// Moment hint for `gamma` from the mean identity `E[X_delta | x] = x e^{-gamma delta}`.
pub fn gamma_hint(traj: &Trajectory) -> f64 {
    let (num, den) = traj
        .transitions()
        .filter(|(x, _)| *x > 0.0)
        .fold((0.0, 0.0), |(n, d), (x, y)| (n + y, d + x));
    let g = -(num / den).ln() / traj.delta;
    let cap = 5.0 / traj.delta;
    if g.is_finite() {
        g.clamp(-cap, cap)
    } else if num == 0.0 {
        cap
    } else {
        0.0
    }
}

/// Result of maximizing over `(gamma, beta)` at a fixed `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub gamma: f64,
    pub beta: f64,
    pub loglik: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// A grid point at which no finite likelihood was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaFailure {
    pub alpha: f64,
    pub message: String,
}

/// Per-grid-point fits and the selected triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub per_alpha: Vec<AlphaFit>,
    pub failures: Vec<AlphaFailure>,
    pub selected: usize,
    pub theta_star: ModelParams,
}

impl FitResult {
    pub fn selected_fit(&self) -> &AlphaFit {
        &self.per_alpha[self.selected]
    }
}

/// Index of the largest value; near-ties resolve to the earliest index.
pub fn select_index(logliks: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &ll) in logliks.iter().enumerate() {
        if ll.is_nan() {
            continue;
        }
        match best {
            Some(b) if ll <= logliks[b] + TIE_TOLERANCE => {}
            _ => best = Some(i),
        }
    }
    best
}

struct Objective<'a> {
    traj: &'a Trajectory,
    inverter: &'a Inverter,
    last_error: Option<CsbpError>,
}

impl Objective<'_> {
    fn negative_loglik(&mut self, gamma: f64, beta: f64, alpha: f64) -> f64 {
        let ll = ModelParams::new(gamma, beta, alpha).and_then(|p| loglik(&p, self.traj, self.inverter));
        match ll {
            Ok(v) if v.is_finite() => -v,
            Ok(_) => f64::INFINITY,
            Err(e) => {
                self.last_error = Some(e);
                f64::INFINITY
            }
        }
    }

    fn finish(self, value: f64) -> Result<()> {
        if value.is_finite() {
            Ok(())
        } else {
            Err(self
                .last_error
                .unwrap_or_else(|| CsbpError::AllFailed("no finite likelihood value found".into())))
        }
    }
}

/// Starting `log beta`: 0 unless refused there, else the first finite point stepping upward.
/// Larger `beta` shrinks the singularity modulus, so refusals at small `alpha` clear this way.
fn feasible_log_beta(mut f: impl FnMut(f64) -> f64, step: f64) -> f64 {
    let step = step.max(0.1);
    (0..40).map(|k| k as f64 * step).find(|&b| f(b).is_finite()).unwrap_or(0.0)
}

/// Maximizes the likelihood over `(gamma, beta)` with `alpha` held fixed.
pub fn fit_gamma_beta(alpha: f64, traj: &Trajectory, inverter: &Inverter, opt: &OptimizerConfig) -> Result<AlphaFit> {
    traj.validate()?;
    ModelParams::new(0.0, 1.0, alpha)?;
    let mut obj = Objective {
        traj,
        inverter,
        last_error: None,
    };
    let gamma0 = gamma_hint(traj);
    let b0 = feasible_log_beta(|b| obj.negative_loglik(gamma0, b.exp(), alpha), opt.log_beta_step);
    let r = minimize(
        |z| obj.negative_loglik(z[0], z[1].exp(), alpha),
        &[gamma0, b0],
        &[opt.gamma_step, opt.log_beta_step],
        &opt.simplex(),
    );
    obj.finish(r.value)?;
    Ok(AlphaFit {
        alpha,
        gamma: r.x[0],
        beta: r.x[1].exp(),
        loglik: -r.value,
        converged: r.converged,
        evaluations: r.evaluations,
    })
}

/// Fits `(gamma, beta)` on every grid point and keeps the best triple.
pub fn two_step_fit(traj: &Trajectory, grid: &AlphaGrid, inverter: &Inverter, opt: &OptimizerConfig) -> Result<FitResult> {
    traj.validate()?;
    let outcomes: Vec<Result<AlphaFit>> = grid
        .values()
        .par_iter()
        .map(|&a| fit_gamma_beta(a, traj, inverter, opt))
        .collect();
    let mut per_alpha = Vec::new();
    let mut failures = Vec::new();
    for (&alpha, outcome) in grid.values().iter().zip(outcomes) {
        match outcome {
            Ok(fit) => per_alpha.push(fit),
            Err(e) => {
                log::debug!("alpha {alpha}: {e}");
                failures.push(AlphaFailure {
                    alpha,
                    message: e.to_string(),
                })
            }
        }
    }
    let logliks: Vec<f64> = per_alpha.iter().map(|f| f.loglik).collect();
    let selected = select_index(&logliks).ok_or_else(|| {
        CsbpError::AllFailed(format!("all {} grid points failed", grid.len()))
    })?;
    let best = &per_alpha[selected];
    let theta_star = ModelParams::new(best.gamma, best.beta, best.alpha)?;
    Ok(FitResult {
        per_alpha,
        failures,
        selected,
        theta_star,
    })
}

/// Outcome of the simultaneous three-parameter search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointFit {
    pub gamma: f64,
    pub beta: f64,
    pub alpha: f64,
    pub loglik: f64,
    pub converged: bool,
    pub evaluations: usize,
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Maximizes over all of `(gamma, beta, alpha)` at once. With `frozen_alpha` the
/// search reduces to [`fit_gamma_beta`].
pub fn joint_fit_unrestricted(
    traj: &Trajectory,
    inverter: &Inverter,
    opt: &OptimizerConfig,
    frozen_alpha: Option<f64>,
) -> Result<JointFit> {
    if let Some(alpha) = frozen_alpha {
        let f = fit_gamma_beta(alpha, traj, inverter, opt)?;
        return Ok(JointFit {
            gamma: f.gamma,
            beta: f.beta,
            alpha,
            loglik: f.loglik,
            converged: f.converged,
            evaluations: f.evaluations,
        });
    }
    traj.validate()?;
    let mut obj = Objective {
        traj,
        inverter,
        last_error: None,
    };
    let gamma0 = gamma_hint(traj);
    let b0 = feasible_log_beta(|b| obj.negative_loglik(gamma0, b.exp(), 1.5), opt.log_beta_step);
    let r = minimize(
        |z| obj.negative_loglik(z[0], z[1].exp(), 1.0 + logistic(z[2])),
        &[gamma0, b0, 0.0],
        &[opt.gamma_step, opt.log_beta_step, opt.alpha_logit_step],
        &opt.simplex(),
    );
    obj.finish(r.value)?;
    Ok(JointFit {
        gamma: r.x[0],
        beta: r.x[1].exp(),
        alpha: 1.0 + logistic(r.x[2]),
        loglik: -r.value,
        converged: r.converged,
        evaluations: r.evaluations,
    })
}
