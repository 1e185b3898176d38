//! Importance sampling with the prior as proposal.

use rand_distr::{Beta, Distribution, LogNormal, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CsbpError, Result};
use crate::estimation::loglik;
use crate::inversion::Inverter;
use crate::model::ModelParams;
use crate::rng::RngStream;
use crate::sampler::Trajectory;

/// Independent priors: `alpha = 1 + Beta(a, b)`, `gamma ~ Normal`, `beta ~ LogNormal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorSpec {
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub gamma_mean: f64,
    pub gamma_sd: f64,
    pub beta_log_mean: f64,
    pub beta_log_sd: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec {
            alpha_a: 3.0,
            alpha_b: 3.0,
            gamma_mean: -6.0,
            gamma_sd: 1.0,
            beta_log_mean: 1.8,
            beta_log_sd: 0.1,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.alpha_a, self.alpha_b, self.gamma_sd, self.beta_log_sd];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || !self.gamma_mean.is_finite() || !self.beta_log_mean.is_finite() {
            return Err(CsbpError::InvalidParams(format!("invalid prior {self:?}")));
        }
        Ok(())
    }

    /// Standard deviation of the `alpha` marginal.
    pub fn alpha_sd(&self) -> f64 {
        let (a, b) = (self.alpha_a, self.alpha_b);
        (a * b / ((a + b).powi(2) * (a + b + 1.0))).sqrt()
    }
}

/// Draws `n_draws` independent triples from the prior.
pub fn sample_prior(n_draws: usize, spec: &PriorSpec, rng: &mut RngStream) -> Result<Vec<ModelParams>> {
    spec.validate()?;
    let bad = |e: String| CsbpError::InvalidParams(e);
    let alpha = Beta::new(spec.alpha_a, spec.alpha_b).map_err(|e| bad(e.to_string()))?;
    let gamma = Normal::new(spec.gamma_mean, spec.gamma_sd).map_err(|e| bad(e.to_string()))?;
    let beta = LogNormal::new(spec.beta_log_mean, spec.beta_log_sd).map_err(|e| bad(e.to_string()))?;
    let mut draws = Vec::with_capacity(n_draws);
    while draws.len() < n_draws {
        let a = 1.0 + alpha.sample(rng);
        let g = gamma.sample(rng);
        let b = beta.sample(rng);
        // endpoints of the Beta support are rejected
        if let Ok(p) = ModelParams::new(g, b, a) {
            draws.push(p);
        }
    }
    Ok(draws)
}

/// Prior draws with normalized importance weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPosterior {
    pub draws: Vec<ModelParams>,
    /// Unnormalized log weights; `-inf` marks a failed evaluation.
    pub log_weights: Vec<f64>,
    pub weights: Vec<f64>,
    pub ess: f64,
    pub failures: usize,
}

impl WeightedPosterior {
    /// Normalizes log weights with log-sum-exp.
    pub fn from_log_weights(draws: Vec<ModelParams>, log_weights: Vec<f64>) -> Result<Self> {
        if draws.is_empty() || draws.len() != log_weights.len() {
            return Err(CsbpError::InvalidParams("draws and log weights must be nonempty and aligned".into()));
        }
        let failures = log_weights.iter().filter(|w| !w.is_finite()).count();
        let max = log_weights.iter().copied().filter(|w| w.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(CsbpError::ZeroWeights {
                failures,
                total: draws.len(),
            });
        }
        let raw: Vec<f64> = log_weights
            .iter()
            .map(|w| if w.is_finite() { (w - max).exp() } else { 0.0 })
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        if ess < 0.05 * draws.len() as f64 {
            log::warn!("effective sample size {ess:.1} is below 5% of {} draws", draws.len());
        }
        Ok(WeightedPosterior {
            draws,
            log_weights,
            weights,
            ess,
            failures,
        })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn failure_fraction(&self) -> f64 {
        self.failures as f64 / self.draws.len() as f64
    }

    /// Weighted average of `g` over the draws.
    pub fn expectation(&self, g: impl Fn(&ModelParams) -> f64) -> f64 {
        self.draws.iter().zip(&self.weights).map(|(d, w)| w * g(d)).sum()
    }

    /// Weighted variance of `g` over the draws.
    pub fn variance(&self, g: impl Fn(&ModelParams) -> f64) -> f64 {
        let m = self.expectation(&g);
        self.expectation(|d| (g(d) - m).powi(2))
    }

    /// Weighted histogram of `g`: `(bin_center, draw_count, weight_mass)` over the draw range.
    pub fn histogram(&self, g: impl Fn(&ModelParams) -> f64, bins: usize) -> Vec<(f64, usize, f64)> {
        let xs: Vec<f64> = self.draws.iter().map(&g).collect();
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bins = bins.max(1);
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let mut out: Vec<(f64, usize, f64)> = (0..bins).map(|k| (lo + (k as f64 + 0.5) * width, 0, 0.0)).collect();
        for (x, w) in xs.iter().zip(&self.weights) {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            out[k].1 += 1;
            out[k].2 += w;
        }
        out
    }
}

/// Weights prior draws by an arbitrary log-likelihood; errors become zero weight.
pub fn compute_weights_with<F>(draws: Vec<ModelParams>, log_likelihood: F) -> Result<WeightedPosterior>
where
    F: Fn(&ModelParams) -> Result<f64> + Sync,
{
    let log_weights: Vec<f64> = draws
        .par_iter()
        .map(|d| match log_likelihood(d) {
            Ok(v) if !v.is_nan() => v,
            Ok(_) => f64::NEG_INFINITY,
            Err(e) => {
                log::debug!("draw {d:?} failed: {e}");
                f64::NEG_INFINITY
            }
        })
        .collect();
    WeightedPosterior::from_log_weights(draws, log_weights)
}

/// Weights prior draws by the path likelihood.
pub fn compute_weights(draws: Vec<ModelParams>, traj: &Trajectory, inverter: &Inverter) -> Result<WeightedPosterior> {
    compute_weights_with(draws, |p| loglik(p, traj, inverter))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(n: usize) -> Vec<ModelParams> {
        sample_prior(n, &PriorSpec::default(), &mut RngStream::new(5, 0)).unwrap()
    }

    #[test]
    fn prior_support() {
        for d in draws(2000) {
            assert!(d.alpha() > 1.0 && d.alpha() < 2.0);
            assert!(d.beta() > 0.0);
        }
    }

    #[test]
    fn prior_alpha_sd() {
        assert!((PriorSpec::default().alpha_sd() - (9.0f64 / 252.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn softmax_of_two() {
        let post = WeightedPosterior::from_log_weights(draws(2), vec![3f64.ln(), 0.0]).unwrap();
        assert!((post.weights[0] - 0.75).abs() < 1e-15);
        assert!((post.weights[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn flat_likelihood_recovers_prior_mean() {
        let d = draws(500);
        let mean = d.iter().map(|p| p.alpha()).sum::<f64>() / 500.0;
        let post = compute_weights_with(d, |_| Ok(-12.0)).unwrap();
        assert!((post.ess - 500.0).abs() < 1e-9);
        assert!(post.weights.iter().all(|w| (w - 1.0 / 500.0).abs() < 1e-15));
        assert!((post.expectation(|p| p.alpha()) - mean).abs() < 1e-12);
        assert!((post.expectation(|_| 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn failures_get_zero_weight() {
        let post = compute_weights_with(draws(4), |p| {
            if p.alpha() > 1.5 {
                Err(CsbpError::Instability { required: 1e3, cap: 500.0 })
            } else {
                Ok(0.0)
            }
        });
        match post {
            Ok(post) => {
                for (d, w) in post.draws.iter().zip(&post.weights) {
                    assert_eq!(*w == 0.0, d.alpha() > 1.5);
                }
            }
            Err(e) => assert!(matches!(e, CsbpError::ZeroWeights { .. })),
        }
        let all_bad = compute_weights_with(draws(3), |_| Ok(f64::NEG_INFINITY));
        assert!(matches!(all_bad, Err(CsbpError::ZeroWeights { failures: 3, total: 3 })));
    }

    #[test]
    fn histogram_mass_sums_to_one() {
        let post = compute_weights_with(draws(300), |p| Ok(-p.gamma().powi(2))).unwrap();
        let h = post.histogram(|p| p.alpha(), 20);
        assert_eq!(h.iter().map(|b| b.1).sum::<usize>(), 300);
        assert!((h.iter().map(|b| b.2).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
