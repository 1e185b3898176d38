//! Scripted simulation studies: two-step recovery, the joint-fit counterexample,
//! the inversion stability scan and the importance-sampling posterior.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{compute_weights, sample_prior, PriorSpec, WeightedPosterior};
use crate::error::{CsbpError, Result};
use crate::estimation::{joint_fit_unrestricted, two_step_fit, AlphaGrid, FitResult, OptimizerConfig};
use crate::inversion::{InversionConfig, Inverter};
use crate::io::{self, EstimateRow, TrajectoryManifest};
use crate::model::{ConditionalTransform, ModelParams, TransitionContext};
use crate::rng::RngStream;
use crate::sampler::{simulate_batch, simulate_path, Trajectory};

/// Stream used for prior draws, kept apart from path streams.
const PRIOR_STREAM: u64 = u64::MAX;
const KDE_POINTS: usize = 512;

/// Default initial state. Large enough that extinction within the observation
/// window has probability below 1e-6 for the reference configurations.
pub const DEFAULT_X0: f64 = 100.0;

/// Settings shared by all experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentPlan {
    pub name: String,
    pub params_true: ModelParams,
    pub x0: f64,
    pub delta: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub grid: AlphaGrid,
    pub seed: u64,
    /// Not serialized, so reruns into different directories stay byte-identical.
    #[serde(skip_serializing)]
    pub outputs: Option<PathBuf>,
    pub inversion: InversionConfig,
    pub optimizer: OptimizerConfig,
    pub prior: PriorSpec,
    pub n_draws: usize,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            name: "stability".into(),
            params_true: ModelParams::new(-6.0, 6.0, 1.5).expect("valid reference parameters"),
            x0: DEFAULT_X0,
            delta: 1.0 / 6.0,
            n_steps: 20,
            n_paths: 20,
            grid: AlphaGrid::default(),
            seed: 2024,
            outputs: None,
            inversion: InversionConfig::default(),
            optimizer: OptimizerConfig::default(),
            prior: PriorSpec::default(),
            n_draws: 1000,
        }
    }
}

/// Names accepted by [`ExperimentPlan::preset`].
pub const PRESETS: &[&str] = &[
    "stability",
    "stability-d12",
    "alpha19",
    "alpha19-n50",
    "identifiability",
    "bayes",
];

impl ExperimentPlan {
    /// Desk-scale defaults for a named study; `paper_scale` raises path and draw counts.
    pub fn preset(name: &str, paper_scale: bool) -> Result<Self> {
        let base = ExperimentPlan {
            name: name.to_string(),
            n_paths: if paper_scale { 100 } else { 20 },
            n_draws: if paper_scale { 1000 } else { 500 },
            ..Default::default()
        };
        let plan = match name {
            "stability" | "identifiability" => base,
            "stability-d12" => ExperimentPlan {
                params_true: ModelParams::new(-6.0, 12.0, 1.5)?,
                delta: 1.0 / 12.0,
                n_steps: 10,
                ..base
            },
            "alpha19" => ExperimentPlan {
                params_true: ModelParams::new(-6.0, 6.0, 1.9)?,
                ..base
            },
            "alpha19-n50" => ExperimentPlan {
                params_true: ModelParams::new(-6.0, 6.0, 1.9)?,
                n_steps: 50,
                ..base
            },
            "bayes" => ExperimentPlan {
                delta: 1.0 / 24.0,
                n_steps: 50,
                n_paths: 1,
                n_draws: 1000,
                ..base
            },
            other => {
                return Err(CsbpError::Config(format!(
                    "unknown experiment '{other}', expected one of {}",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(CsbpError::Config("n_paths must be at least 1".into()));
        }
        if !(self.x0 > 0.0 && self.x0.is_finite()) {
            return Err(CsbpError::Config(format!("x0 must be positive, got {}", self.x0)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(CsbpError::Config(format!("delta must be positive, got {}", self.delta)));
        }
        if self.n_draws == 0 {
            return Err(CsbpError::Config("n_draws must be at least 1".into()));
        }
        self.inversion.validate()?;
        self.prior.validate()?;
        if let Some(dir) = &self.outputs {
            std::fs::create_dir_all(dir).map_err(|e| CsbpError::Config(format!("cannot create {}: {e}", dir.display())))?;
        }
        Ok(())
    }

    fn inverter(&self) -> Result<Inverter> {
        Inverter::new(self.inversion.clone())
    }

    fn simulate(&self, inverter: &Inverter) -> Result<Vec<Trajectory>> {
        simulate_batch(
            self.x0,
            self.delta,
            self.n_steps,
            &self.params_true,
            self.seed,
            self.n_paths,
            inverter,
        )
    }

    fn manifest(&self, n_paths: usize) -> TrajectoryManifest {
        TrajectoryManifest {
            params: self.params_true,
            x0: self.x0,
            delta: self.delta,
            n_steps: self.n_steps,
            n_paths,
            seed: self.seed,
            inversion: self.inversion.clone(),
        }
    }

    fn write_paths(&self, dir: &Path, trajs: &[Trajectory]) -> Result<()> {
        io::write_trajectories(&dir.join("trajectories.csv"), trajs)?;
        io::write_json(&dir.join("manifest.json"), &self.manifest(trajs.len()))
    }
}

/// Cross-path mean with a normal-approximation 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Interval {
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Some(Interval {
                n,
                mean,
                sd: None,
                lower: None,
                upper: None,
            });
        }
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let half = 1.96 * sd / (n as f64).sqrt();
        Some(Interval {
            n,
            mean,
            sd: Some(sd),
            lower: Some(mean - half),
            upper: Some(mean + half),
        })
    }
}

/// Gaussian kernel estimate with Silverman's bandwidth on an evenly spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kde {
    pub bandwidth: f64,
    pub x: Vec<f64>,
    pub density: Vec<f64>,
}

impl Kde {
    pub fn fit(xs: &[f64], points: usize) -> Option<Self> {
        let n = xs.len();
        if n < 2 || points < 3 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
        let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
        let mut h = 0.9 * spread * (n as f64).powf(-0.2);
        if !(h > 0.0) {
            h = 1e-6 * (1.0 + mean.abs());
        }
        let lo = sorted[0] - 3.0 * h;
        let hi = sorted[n - 1] + 3.0 * h;
        let step = (hi - lo) / (points - 1) as f64;
        let norm = 1.0 / (n as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
        let x: Vec<f64> = (0..points).map(|k| lo + k as f64 * step).collect();
        let density = x
            .iter()
            .map(|g| norm * xs.iter().map(|v| (-0.5 * ((g - v) / h).powi(2)).exp()).sum::<f64>())
            .collect();
        Some(Kde { bandwidth: h, x, density })
    }

    /// Number of interior local maxima above 0.1% of the peak height.
    pub fn mode_count(&self) -> usize {
        let peak = self.density.iter().copied().fold(0.0, f64::max);
        let d = &self.density;
        (1..d.len() - 1)
            .filter(|&i| d[i] > d[i - 1] && d[i] >= d[i + 1] && d[i] > 1e-3 * peak)
            .count()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - i as f64) * (sorted[j] - sorted[i])
}

/// Per-grid-point average log-likelihood across paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaProfile {
    pub alpha: f64,
    pub mean_loglik: Option<f64>,
    pub successes: usize,
    pub selected_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFailure {
    pub path_id: u64,
    pub message: String,
}

/// Summary of a two-step recovery study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub plan: ExperimentPlan,
    pub extinct_paths: usize,
    pub profile: Vec<AlphaProfile>,
    pub modal_alpha: Option<f64>,
    pub true_alpha_fraction: f64,
    pub gamma: Option<Interval>,
    pub beta: Option<Interval>,
    pub alpha: Option<Interval>,
    pub estimates: Vec<EstimateRow>,
    pub failures: Vec<PathFailure>,
}

/// Simulates paths and runs the two-step fit on each.
pub fn run_stability_experiment(plan: &ExperimentPlan) -> Result<StabilitySummary> {
    plan.validate()?;
    let inverter = plan.inverter()?;
    let trajs = plan.simulate(&inverter)?;
    let fits: Vec<(u64, Result<FitResult>)> = trajs
        .par_iter()
        .map(|t| (t.stream_id, two_step_fit(t, &plan.grid, &inverter, &plan.optimizer)))
        .collect();

    let mut ok: Vec<(u64, FitResult)> = Vec::new();
    let mut failures = Vec::new();
    for (id, fit) in fits {
        match fit {
            Ok(f) => ok.push((id, f)),
            Err(e) => failures.push(PathFailure {
                path_id: id,
                message: e.to_string(),
            }),
        }
    }

    let estimates: Vec<EstimateRow> = ok
        .iter()
        .map(|(id, f)| {
            let s = f.selected_fit();
            EstimateRow {
                path_id: *id,
                gamma: s.gamma,
                beta: s.beta,
                alpha: s.alpha,
                loglik: s.loglik,
                converged: s.converged,
            }
        })
        .collect();

    let profile: Vec<AlphaProfile> = plan
        .grid
        .values()
        .iter()
        .map(|&a| {
            let lls: Vec<f64> = ok
                .iter()
                .filter_map(|(_, f)| f.per_alpha.iter().find(|r| r.alpha == a).map(|r| r.loglik))
                .collect();
            AlphaProfile {
                alpha: a,
                mean_loglik: (!lls.is_empty()).then(|| lls.iter().sum::<f64>() / lls.len() as f64),
                successes: lls.len(),
                selected_count: estimates.iter().filter(|e| e.alpha == a).count(),
            }
        })
        .collect();
    let modal_alpha = profile
        .iter()
        .filter(|p| p.selected_count > 0)
        .fold(None::<&AlphaProfile>, |best, p| match best {
            Some(b) if b.selected_count >= p.selected_count => Some(b),
            _ => Some(p),
        })
        .map(|p| p.alpha);
    let true_alpha = plan.params_true.alpha();
    let true_alpha_fraction = if estimates.is_empty() {
        0.0
    } else {
        estimates.iter().filter(|e| (e.alpha - true_alpha).abs() < 1e-9).count() as f64 / estimates.len() as f64
    };
    let column = |g: fn(&EstimateRow) -> f64| Interval::from_samples(&estimates.iter().map(g).collect::<Vec<_>>());

    let summary = StabilitySummary {
        plan: plan.clone(),
        extinct_paths: trajs.iter().filter(|t| t.extinction_step().is_some()).count(),
        gamma: column(|e| e.gamma),
        beta: column(|e| e.beta),
        alpha: column(|e| e.alpha),
        profile,
        modal_alpha,
        true_alpha_fraction,
        estimates,
        failures,
    };

    if let Some(dir) = &plan.outputs {
        plan.write_paths(dir, &trajs)?;
        io::write_fit_table(&dir.join("fits.csv"), &ok)?;
        io::write_estimates(&dir.join("estimates.csv"), &summary.estimates)?;
        let rows: Vec<Vec<f64>> = summary
            .profile
            .iter()
            .filter_map(|p| p.mean_loglik.map(|m| vec![p.alpha, m]))
            .collect();
        io::write_series(&dir.join("loglik_by_alpha.csv"), &["alpha", "mean_loglik"], &rows)?;
        io::write_json(&dir.join("summary.json"), &summary)?;
    }
    if ok.is_empty() {
        return Err(CsbpError::AllFailed(format!("all {} paths failed", trajs.len())));
    }
    Ok(summary)
}

/// Estimate distribution of one parameter under the joint fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub interval: Option<Interval>,
    pub modes: usize,
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilitySummary {
    pub plan: ExperimentPlan,
    pub gamma: MarginalSummary,
    pub beta: MarginalSummary,
    pub alpha: MarginalSummary,
    pub estimates: Vec<EstimateRow>,
    pub failures: Vec<PathFailure>,
}

/// Simulates paths and runs the unrestricted three-parameter fit on each.
pub fn run_identifiability_experiment(plan: &ExperimentPlan) -> Result<IdentifiabilitySummary> {
    plan.validate()?;
    let inverter = plan.inverter()?;
    let trajs = plan.simulate(&inverter)?;
    let fits: Vec<(u64, Result<_>)> = trajs
        .par_iter()
        .map(|t| (t.stream_id, joint_fit_unrestricted(t, &inverter, &plan.optimizer, None)))
        .collect();
    let mut estimates = Vec::new();
    let mut failures = Vec::new();
    for (id, fit) in fits {
        match fit {
            Ok(f) => estimates.push(EstimateRow {
                path_id: id,
                gamma: f.gamma,
                beta: f.beta,
                alpha: f.alpha,
                loglik: f.loglik,
                converged: f.converged,
            }),
            Err(e) => failures.push(PathFailure {
                path_id: id,
                message: e.to_string(),
            }),
        }
    }

    let mut kdes = Vec::new();
    let mut marginal = |name: &'static str, g: fn(&EstimateRow) -> f64| {
        let xs: Vec<f64> = estimates.iter().map(g).collect();
        let kde = Kde::fit(&xs, KDE_POINTS);
        let summary = MarginalSummary {
            interval: Interval::from_samples(&xs),
            modes: kde.as_ref().map_or(usize::from(!xs.is_empty()), Kde::mode_count),
            bandwidth: kde.as_ref().map(|k| k.bandwidth),
        };
        if let Some(k) = kde {
            kdes.push((name, k));
        }
        summary
    };
    let gamma = marginal("gamma", |e| e.gamma);
    let beta = marginal("beta", |e| e.beta);
    let alpha = marginal("alpha", |e| e.alpha);
    let summary = IdentifiabilitySummary {
        plan: plan.clone(),
        gamma,
        beta,
        alpha,
        estimates,
        failures,
    };

    if let Some(dir) = &plan.outputs {
        plan.write_paths(dir, &trajs)?;
        io::write_estimates(&dir.join("estimates.csv"), &summary.estimates)?;
        for (name, k) in &kdes {
            let rows: Vec<Vec<f64>> = k.x.iter().zip(&k.density).map(|(x, d)| vec![*x, *d]).collect();
            io::write_series(&dir.join(format!("kde_{name}.csv")), &["x", "density"], &rows)?;
        }
        io::write_json(&dir.join("summary.json"), &summary)?;
    }
    if summary.estimates.is_empty() {
        return Err(CsbpError::AllFailed(format!("all {} paths failed", trajs.len())));
    }
    Ok(summary)
}

/// One point of the aliasing-parameter curve at unit state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub beta: f64,
    pub alpha: f64,
    pub modulus: f64,
    pub a: f64,
    pub refused: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityScan {
    pub delta: f64,
    pub gamma: f64,
    pub a_cap: f64,
    pub points: Vec<ScanPoint>,
    /// Per `beta`, the largest scanned `alpha` that the inverter refuses.
    pub refusal_alpha: Vec<(f64, Option<f64>)>,
}

/// Evaluates the aliasing parameter `A = 2 * safety * R * ell * s` demanded by the
/// singularity modulus `R` at `s = 1`, and whether inversion from state 1 is refused.
pub fn run_stability_region_scan(
    delta: f64,
    gamma: f64,
    beta_values: &[f64],
    alphas: &[f64],
    cfg: &InversionConfig,
) -> Result<StabilityScan> {
    let inverter = Inverter::new(cfg.clone())?;
    let mut points = Vec::new();
    let mut refusal_alpha = Vec::new();
    for &beta in beta_values {
        let mut largest = None;
        for &alpha in alphas {
            let params = ModelParams::new(gamma, beta, alpha)?;
            let modulus = params.singularity_modulus(delta);
            let ctx = TransitionContext::new(1.0, delta, params)?;
            let refused = match ConditionalTransform::conditional(ctx) {
                Ok(h) => inverter.effective_a(&h, 1.0).is_err(),
                Err(_) => true,
            };
            if refused {
                largest = Some(largest.map_or(alpha, |l: f64| l.max(alpha)));
            }
            points.push(ScanPoint {
                beta,
                alpha,
                modulus,
                a: 2.0 * cfg.abscissa_safety * modulus * f64::from(cfg.ell),
                refused,
            });
        }
        refusal_alpha.push((beta, largest));
    }
    Ok(StabilityScan {
        delta,
        gamma,
        a_cap: cfg.a_cap,
        points,
        refusal_alpha,
    })
}

/// Writes the scan as `beta, alpha, modulus, a, refused` rows.
pub fn write_scan(dir: &Path, scan: &StabilityScan) -> Result<()> {
    let rows: Vec<Vec<f64>> = scan
        .points
        .iter()
        .map(|p| vec![p.beta, p.alpha, p.modulus, p.a, f64::from(u8::from(p.refused))])
        .collect();
    io::write_series(&dir.join("a_curve.csv"), &["beta", "alpha", "modulus", "a", "refused"], &rows)?;
    io::write_json(&dir.join("scan.json"), scan)
}

/// Posterior moments for one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesSummary {
    pub plan: ExperimentPlan,
    pub n_draws: usize,
    pub gamma: Moments,
    pub beta: Moments,
    pub alpha: Moments,
    pub prior_alpha_sd: f64,
    pub ess: f64,
    pub failures: usize,
    pub failure_fraction: f64,
    pub weight_sum: f64,
    pub expectation_of_one: f64,
    pub observed_transitions: usize,
}

/// Simulates one path, weights prior draws by its likelihood and summarizes.
pub fn run_bayes_experiment(plan: &ExperimentPlan) -> Result<(BayesSummary, WeightedPosterior)> {
    plan.validate()?;
    let inverter = plan.inverter()?;
    let mut rng = RngStream::new(plan.seed, 0);
    let traj = simulate_path(plan.x0, plan.delta, plan.n_steps, &plan.params_true, &mut rng, &inverter)?;
    let draws = sample_prior(plan.n_draws, &plan.prior, &mut RngStream::new(plan.seed, PRIOR_STREAM))?;
    let post = compute_weights(draws, &traj, &inverter)?;
    let moments = |g: fn(&ModelParams) -> f64| {
        let variance = post.variance(g);
        Moments {
            mean: post.expectation(g),
            variance,
            sd: variance.sqrt(),
        }
    };
    let summary = BayesSummary {
        plan: plan.clone(),
        n_draws: post.len(),
        gamma: moments(|p| p.gamma()),
        beta: moments(|p| p.beta()),
        alpha: moments(|p| p.alpha()),
        prior_alpha_sd: plan.prior.alpha_sd(),
        ess: post.ess,
        failures: post.failures,
        failure_fraction: post.failure_fraction(),
        weight_sum: post.weights.iter().sum(),
        expectation_of_one: post.expectation(|_| 1.0),
        observed_transitions: traj.n_steps(),
    };
    if let Some(dir) = &plan.outputs {
        plan.write_paths(dir, std::slice::from_ref(&traj))?;
        io::write_posterior(&dir.join("posterior.csv"), &post)?;
        let marginals: [(&str, fn(&ModelParams) -> f64); 3] =
            [("gamma", |p| p.gamma()), ("beta", |p| p.beta()), ("alpha", |p| p.alpha())];
        for (name, g) in marginals {
            let rows: Vec<Vec<f64>> = post
                .histogram(g, 30)
                .into_iter()
                .map(|(c, n, w)| vec![c, n as f64, w])
                .collect();
            io::write_series(&dir.join(format!("histogram_{name}.csv")), &["center", "count", "weight"], &rows)?;
        }
        io::write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok((summary, post))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_path_interval_has_no_bounds() {
        let i = Interval::from_samples(&[2.0]).unwrap();
        assert_eq!(i.mean, 2.0);
        assert!(i.sd.is_none() && i.lower.is_none() && i.upper.is_none());
        let i = Interval::from_samples(&[1.0, 3.0]).unwrap();
        let half = 1.96 * 2f64.sqrt() / 2f64.sqrt();
        assert!((i.upper.unwrap() - 2.0 - half).abs() < 1e-12);
        assert!(Interval::from_samples(&[]).is_none());
    }

    #[test]
    fn kde_counts_modes() {
        let one: Vec<f64> = (0..50).map(|k| (k as f64 / 49.0 - 0.5) * 0.3).collect();
        assert_eq!(Kde::fit(&one, 512).unwrap().mode_count(), 1);
        let two: Vec<f64> = one.iter().map(|x| x - 5.0).chain(one.iter().map(|x| x + 5.0)).collect();
        assert_eq!(Kde::fit(&two, 512).unwrap().mode_count(), 2);
    }

    #[test]
    fn presets_resolve() {
        for name in PRESETS {
            ExperimentPlan::preset(name, false).unwrap().validate().unwrap();
        }
        assert!(ExperimentPlan::preset("nope", false).is_err());
        assert_eq!(ExperimentPlan::preset("stability", true).unwrap().n_paths, 100);
        let b = ExperimentPlan::preset("bayes", false).unwrap();
        assert_eq!((b.n_steps, b.n_draws), (50, 1000));
    }

    #[test]
    fn scan_shape() {
        let alphas: Vec<f64> = (2..10).map(|k| 1.0 + k as f64 / 10.0).collect();
        let scan = run_stability_region_scan(1.0 / 6.0, -6.0, &[6.0, 12.0], &alphas, &InversionConfig::default()).unwrap();
        assert_eq!(scan.points.len(), 16);
        let low: Vec<&ScanPoint> = scan.points.iter().filter(|p| p.beta == 6.0).collect();
        assert!(low.windows(2).all(|w| w[1].a < w[0].a));
        assert!(low[0].refused && !low[7].refused);
    }

    #[test]
    fn plan_json_round_trip() {
        let plan = ExperimentPlan::preset("alpha19", false).unwrap();
        let text = serde_json::to_string(&plan).unwrap();
        let back: ExperimentPlan = serde_json::from_str(&text).unwrap();
        assert_eq!(plan, back);
        let partial: ExperimentPlan = serde_json::from_str(r#"{"n_paths": 3}"#).unwrap();
        assert_eq!(partial.n_paths, 3);
    }
}
