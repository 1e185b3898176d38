//! CSV and JSON artifacts.
//!
//! Column sets:
//! - trajectories: `path_id, step_index, time, value`
//! - fit table: `path_id, alpha, gamma, beta, loglik, converged, evaluations, status, message`
//! - fit summary: `path_id, gamma, beta, alpha, loglik, converged`
//! - posterior: `gamma, beta, alpha, log_weight, weight`
//! - plot series: caller-chosen header, numeric rows

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bayes::WeightedPosterior;
use crate::error::{CsbpError, Result};
use crate::estimation::FitResult;
use crate::inversion::InversionConfig;
use crate::model::ModelParams;
use crate::sampler::Trajectory;

/// Sidecar describing how a trajectory batch was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub params: ModelParams,
    pub x0: f64,
    pub delta: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub inversion: InversionConfig,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrajectoryRow {
    path_id: u64,
    step_index: usize,
    time: f64,
    value: f64,
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    ensure_parent(path)?;
    Ok(csv::Writer::from_path(path)?)
}

/// Writes paths in long format; `path_id` is the stream id of each path.
pub fn write_trajectories(path: &Path, trajs: &[Trajectory]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for t in trajs {
        for (i, v) in t.values.iter().enumerate() {
            w.serialize(TrajectoryRow {
                path_id: t.stream_id,
                step_index: i,
                time: t.time(i),
                value: *v,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads long-format paths. The step is taken from `delta` or else inferred from the times.
pub fn read_trajectories(path: &Path, delta: Option<f64>, seed: u64) -> Result<Vec<Trajectory>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut paths: BTreeMap<u64, Vec<TrajectoryRow>> = BTreeMap::new();
    for row in r.deserialize() {
        let row: TrajectoryRow = row?;
        paths.entry(row.path_id).or_default().push(row);
    }
    if paths.is_empty() {
        return Err(CsbpError::InvalidTrajectory(format!("{} holds no observations", path.display())));
    }
    let inferred = paths
        .values()
        .flat_map(|rows| rows.iter())
        .find(|row| row.step_index > 0)
        .map(|row| row.time / row.step_index as f64);
    let delta = delta
        .or(inferred)
        .ok_or_else(|| CsbpError::InvalidTrajectory("cannot infer the step from single-point paths".into()))?;
    paths
        .into_iter()
        .map(|(id, mut rows)| {
            rows.sort_by_key(|row| row.step_index);
            if rows.iter().enumerate().any(|(i, row)| row.step_index != i) {
                return Err(CsbpError::InvalidTrajectory(format!("path {id} has missing steps")));
            }
            Trajectory::from_values(delta, rows.iter().map(|row| row.value).collect(), seed, id)
        })
        .collect()
}

#[derive(Serialize)]
struct FitRow<'a> {
    path_id: u64,
    alpha: f64,
    gamma: Option<f64>,
    beta: Option<f64>,
    loglik: Option<f64>,
    converged: bool,
    evaluations: usize,
    status: &'a str,
    message: &'a str,
}

/// One row per `(path_id, alpha)`, failed grid points included.
pub fn write_fit_table(path: &Path, fits: &[(u64, FitResult)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (id, fit) in fits {
        for f in &fit.per_alpha {
            w.serialize(FitRow {
                path_id: *id,
                alpha: f.alpha,
                gamma: Some(f.gamma),
                beta: Some(f.beta),
                loglik: Some(f.loglik),
                converged: f.converged,
                evaluations: f.evaluations,
                status: "ok",
                message: "",
            })?;
        }
        for f in &fit.failures {
            w.serialize(FitRow {
                path_id: *id,
                alpha: f.alpha,
                gamma: None,
                beta: None,
                loglik: None,
                converged: false,
                evaluations: 0,
                status: "failed",
                message: &f.message,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// A selected or jointly estimated triple for one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub path_id: u64,
    pub gamma: f64,
    pub beta: f64,
    pub alpha: f64,
    pub loglik: f64,
    pub converged: bool,
}

pub fn write_estimates(path: &Path, rows: &[EstimateRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PosteriorRow {
    gamma: f64,
    beta: f64,
    alpha: f64,
    log_weight: f64,
    weight: f64,
}

pub fn write_posterior(path: &Path, post: &WeightedPosterior) -> Result<()> {
    let mut w = csv_writer(path)?;
    for ((d, lw), wt) in post.draws.iter().zip(&post.log_weights).zip(&post.weights) {
        w.serialize(PosteriorRow {
            gamma: d.gamma(),
            beta: d.beta(),
            alpha: d.alpha(),
            log_weight: *lw,
            weight: *wt,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Writes numeric plot data under the given header.
pub fn write_series(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(CsbpError::Io(format!("row width {} does not match header width {}", row.len(), header.len())));
        }
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("paths.csv");
        let a = Trajectory::from_values(1.0 / 6.0, vec![1.0, 2.718281828459045, 1e-17, 0.0], 4, 0).unwrap();
        let b = Trajectory::from_values(1.0 / 6.0, vec![0.3, 0.1 + 0.2], 4, 1).unwrap();
        write_trajectories(&file, &[a.clone(), b.clone()]).unwrap();
        let back = read_trajectories(&file, Some(1.0 / 6.0), 4).unwrap();
        assert_eq!(back, vec![a, b]);
        let inferred = read_trajectories(&file, None, 4).unwrap();
        assert!((inferred[0].delta - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn series_width_checked() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("s.csv");
        assert!(write_series(&file, &["x", "y"], &[vec![1.0]]).is_err());
        write_series(&file, &["x", "y"], &[vec![1.0, 2.0]]).unwrap();
        assert_eq!(fs::read_to_string(&file).unwrap(), "x,y\n1,2\n");
    }
}
