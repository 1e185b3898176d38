use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use csbp_core::estimation::{joint_fit_unrestricted, two_step_fit};
use csbp_core::experiments::{
    run_bayes_experiment, run_identifiability_experiment, run_stability_experiment, run_stability_region_scan,
    write_scan, ExperimentPlan, PRESETS,
};
use csbp_core::io::{self, EstimateRow};
use csbp_core::sampler::simulate_batch;
use csbp_core::{AlphaGrid, CsbpError, Inverter, ModelParams};

#[derive(Parser)]
#[command(name = "csbp", version, about = "Simulate and estimate alpha-stable continuous-state branching processes")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON file with plan fields; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Alpha grid as `1.3,1.5,1.7` or `start:stop:step`
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Use 100 paths and 1000 prior draws
    #[arg(long, global = true)]
    paper_scale: bool,
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    x0: Option<f64>,
    /// Number of prior draws
    #[arg(long, global = true)]
    draws: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate paths and write trajectories.csv with a manifest
    Simulate,
    /// Fit every path of a trajectory CSV
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// Fit all three parameters at once instead of the two-step procedure
        #[arg(long)]
        joint: bool,
    },
    /// Importance-sampling posterior for one simulated path
    Bayes,
    /// Aliasing parameter A against alpha at unit state
    ScanStability {
        /// Comma-separated beta values
        #[arg(long = "betas", value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        /// Exit with code 3 if any scanned point is refused
        #[arg(long)]
        strict: bool,
    },
    /// Run a named study
    Experiment {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
        name: String,
    },
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

fn resolve_plan(global: &Global, preset: &str) -> Result<ExperimentPlan> {
    let mut plan = ExperimentPlan::preset(preset, global.paper_scale)?;
    if let Some(path) = &global.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CsbpError::Config(format!("cannot read {}: {e}", path.display())))?;
        let patch: Value = serde_json::from_str(&text).map_err(|e| CsbpError::Config(format!("{}: {e}", path.display())))?;
        let mut value = serde_json::to_value(&plan)?;
        merge(&mut value, patch);
        plan = serde_json::from_value(value).map_err(|e| CsbpError::Config(format!("{}: {e}", path.display())))?;
    }
    if let Some(v) = global.seed {
        plan.seed = v;
    }
    if let Some(v) = &global.out {
        plan.outputs = Some(v.clone());
    }
    if let Some(v) = global.paths {
        plan.n_paths = v;
    }
    if let Some(v) = global.delta {
        plan.delta = v;
    }
    if let Some(v) = global.steps {
        plan.n_steps = v;
    }
    if let Some(v) = &global.grid {
        plan.grid = AlphaGrid::parse(v)?;
    }
    if let Some(v) = global.x0 {
        plan.x0 = v;
    }
    if let Some(v) = global.draws {
        plan.n_draws = v;
    }
    let p = plan.params_true;
    plan.params_true = ModelParams::new(
        global.gamma.unwrap_or(p.gamma()),
        global.beta.unwrap_or(p.beta()),
        global.alpha.unwrap_or(p.alpha()),
    )
    .map_err(|e| CsbpError::Config(e.to_string()))?;
    plan.validate()?;
    Ok(plan)
}

fn out_dir(plan: &ExperimentPlan) -> Result<&Path> {
    plan.outputs
        .as_deref()
        .ok_or_else(|| CsbpError::Config("--out is required".into()).into())
}

fn simulate(plan: &ExperimentPlan) -> Result<()> {
    let dir = out_dir(plan)?;
    let inverter = Inverter::new(plan.inversion.clone())?;
    let trajs = simulate_batch(plan.x0, plan.delta, plan.n_steps, &plan.params_true, plan.seed, plan.n_paths, &inverter)?;
    io::write_trajectories(&dir.join("trajectories.csv"), &trajs)?;
    let manifest = io::TrajectoryManifest {
        params: plan.params_true,
        x0: plan.x0,
        delta: plan.delta,
        n_steps: plan.n_steps,
        n_paths: trajs.len(),
        seed: plan.seed,
        inversion: plan.inversion.clone(),
    };
    io::write_json(&dir.join("manifest.json"), &manifest)?;
    let extinct = trajs.iter().filter(|t| t.extinction_step().is_some()).count();
    println!("simulated {} paths ({} extinct) into {}", trajs.len(), extinct, dir.display());
    Ok(())
}

fn estimate(plan: &ExperimentPlan, global: &Global, input: &Path, joint: bool) -> Result<()> {
    let dir = out_dir(plan)?;
    let trajs = io::read_trajectories(input, global.delta, plan.seed)
        .with_context(|| format!("reading {}", input.display()))?;
    let inverter = Inverter::new(plan.inversion.clone())?;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for t in &trajs {
        let row = if joint {
            let f = joint_fit_unrestricted(t, &inverter, &plan.optimizer, None)?;
            EstimateRow {
                path_id: t.stream_id,
                gamma: f.gamma,
                beta: f.beta,
                alpha: f.alpha,
                loglik: f.loglik,
                converged: f.converged,
            }
        } else {
            let f = two_step_fit(t, &plan.grid, &inverter, &plan.optimizer)?;
            let s = f.selected_fit().clone();
            io::write_json(&dir.join(format!("fit_{}.json", t.stream_id)), &f)?;
            fits.push((t.stream_id, f));
            EstimateRow {
                path_id: t.stream_id,
                gamma: s.gamma,
                beta: s.beta,
                alpha: s.alpha,
                loglik: s.loglik,
                converged: s.converged,
            }
        };
        println!(
            "path {}: gamma {:.4} beta {:.4} alpha {:.3} loglik {:.4}",
            row.path_id, row.gamma, row.beta, row.alpha, row.loglik
        );
        rows.push(row);
    }
    if !joint {
        io::write_fit_table(&dir.join("fits.csv"), &fits)?;
    }
    io::write_estimates(&dir.join("estimates.csv"), &rows)?;
    Ok(())
}

fn bayes(plan: &ExperimentPlan) -> Result<()> {
    let (s, _) = run_bayes_experiment(plan)?;
    println!(
        "posterior mean gamma {:.4} beta {:.4} alpha {:.4}; sd alpha {:.4} (prior {:.4}); ess {:.1}; failures {}",
        s.gamma.mean, s.beta.mean, s.alpha.mean, s.alpha.sd, s.prior_alpha_sd, s.ess, s.failures
    );
    Ok(())
}

fn scan(plan: &ExperimentPlan, global: &Global, betas: Option<&[f64]>, strict: bool) -> Result<()> {
    let gamma = global.gamma.unwrap_or(-1.0 / plan.delta);
    let betas = betas.map(<[f64]>::to_vec).unwrap_or_else(|| vec![plan.params_true.beta()]);
    let alphas: Vec<f64> = match &global.grid {
        Some(_) => plan.grid.values().to_vec(),
        None => (1..=18).map(|k| 1.0 + k as f64 / 20.0).collect(),
    };
    let result = run_stability_region_scan(plan.delta, gamma, &betas, &alphas, &plan.inversion)?;
    for p in &result.points {
        println!(
            "beta {:>8.4} alpha {:.3} A {:>14.6e}{}",
            p.beta,
            p.alpha,
            p.a,
            if p.refused { "  refused" } else { "" }
        );
    }
    if let Some(dir) = &plan.outputs {
        write_scan(dir, &result)?;
    }
    if strict {
        if let Some(p) = result.points.iter().find(|p| p.refused) {
            return Err(CsbpError::Instability {
                required: p.a,
                cap: result.a_cap,
            }
            .into());
        }
    }
    Ok(())
}

fn experiment(plan: &ExperimentPlan) -> Result<()> {
    match plan.name.as_str() {
        "identifiability" => {
            let s = run_identifiability_experiment(plan)?;
            let show = |name: &str, m: &csbp_core::experiments::MarginalSummary| {
                if let Some(i) = &m.interval {
                    println!("{name}: mean {:.4} over {} paths, {} kernel modes", i.mean, i.n, m.modes);
                }
            };
            show("gamma", &s.gamma);
            show("beta", &s.beta);
            show("alpha", &s.alpha);
            println!("failed paths: {}", s.failures.len());
        }
        "bayes" => bayes(plan)?,
        _ => {
            let s = run_stability_experiment(plan)?;
            for p in &s.profile {
                match p.mean_loglik {
                    Some(m) => println!("alpha {:.2}: mean loglik {m:.4}, selected {}", p.alpha, p.selected_count),
                    None => println!("alpha {:.2}: no successful fits", p.alpha),
                }
            }
            let show = |name: &str, i: &Option<csbp_core::experiments::Interval>| {
                if let Some(i) = i {
                    match (i.lower, i.upper) {
                        (Some(l), Some(u)) => println!("{name}: {:.4} [{l:.4}, {u:.4}]", i.mean),
                        _ => println!("{name}: {:.4}", i.mean),
                    }
                }
            };
            show("gamma", &s.gamma);
            show("beta", &s.beta);
            println!(
                "modal alpha {:?}, true alpha selected on {:.0}% of paths, {} failed paths",
                s.modal_alpha,
                100.0 * s.true_alpha_fraction,
                s.failures.len()
            );
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let preset = match &cli.command {
        Command::Experiment { name } => name.as_str(),
        Command::Bayes => "bayes",
        _ => "stability",
    };
    let plan = resolve_plan(&cli.global, preset)?;
    match &cli.command {
        Command::Simulate => simulate(&plan),
        Command::Estimate { input, joint } => estimate(&plan, &cli.global, input, *joint),
        Command::Bayes => bayes(&plan),
        Command::ScanStability { betas, strict } => scan(&plan, &cli.global, betas.as_deref(), *strict),
        Command::Experiment { .. } => experiment(&plan),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<CsbpError>()) {
        Some(CsbpError::Instability { .. }) => 3,
        Some(
            CsbpError::Config(_)
            | CsbpError::InvalidParams(_)
            | CsbpError::Domain(_)
            | CsbpError::InvalidTrajectory(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
