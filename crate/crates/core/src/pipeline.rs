//! End-to-end batch runs: raster → superpixels → features → clustering,
//! selection or grid search → maps and tables.
//!
//! Every artifact is computed in memory first and written at the end, so a
//! run that fails leaves the output directory untouched.
//!
//! | mode | files |
//! |---|---|
//! | all | `manifest.json`, `superpixels.png` |
//! | `features` | `features.csv` |
//! | `fit` | `membership_<c>.png`, `typicality_<c>.png`, `product_<c>.png`, `labels.png`, `summary.json`, `partition.json`, `scores.csv` |
//! | `select` | `trace.json`, `progression.csv`, `candidates.csv` |
//! | `grid` | `grid.csv`, `grid.json` |
//! | `baseline` | `baseline.json`, `baseline.csv` |
//!
//! Typicality and product maps are only written for possibilistic algorithms.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::clustering::{fit, objective, Partition};
use crate::config::{Manifest, Mode, RunConfig};
use crate::error::{Error, Result};
use crate::features::{aggregate, extract_bank, FeatureMatrix};
use crate::raster::{load_raster, load_raster_with_mask, write_map, Raster};
use crate::selection::{
    compare_with_random, forward_select, grid_search, write_grid_csv, SubsetScore,
};
use crate::superpixel::{slic, SuperpixelMap};
use crate::synthetic::generate;
use crate::validity::{index, write_scores_csv, IndexKind, ValidityScore};

enum Artifact {
    Text(String),
    Map(Vec<f64>),
    Overlay,
}

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub output: PathBuf,
    /// Written files, relative to `output`, in write order.
    pub files: Vec<String>,
}

#[derive(Serialize)]
struct FitSummary<'a> {
    algorithm: &'a str,
    features: &'a [String],
    n_superpixels: usize,
    n_valid_pixels: usize,
    iterations_run: usize,
    converged: bool,
    objective: f64,
    centers: Vec<Vec<f64>>,
    gammas: &'a [f64],
    scores: Vec<ValidityScore>,
}

#[derive(Serialize)]
struct BaselineOut<'a> {
    index: IndexKind,
    selected: &'a SubsetScore,
    random: &'a [SubsetScore],
    random_mean: f64,
}

/// Loads the input raster or renders the configured scene.
pub fn load_input(config: &RunConfig) -> Result<Raster> {
    match (&config.input, &config.scene) {
        (_, Some(scene)) => Ok(generate(&scene.spec, scene.seed)?.raster),
        (Some(input), None) => match &config.mask {
            Some(mask) => load_raster_with_mask(input, Some(mask)),
            None => load_raster(input),
        },
        (None, None) => Err(Error::Config("no input".into())),
    }
}

/// Superpixels, their graph and the standardized feature matrix of a config.
pub fn prepare(config: &RunConfig) -> Result<(Raster, SuperpixelMap, FeatureMatrix)> {
    let raster = load_input(config).map_err(|e| e.in_stage("load"))?;
    let sp = &config.superpixels;
    let superpixels = slic(&raster, sp.target_count, sp.compactness, sp.max_iters)
        .map_err(|e| e.in_stage("superpixels"))?;
    let features = extract_bank(&raster, &config.features)
        .and_then(|maps| aggregate(&maps, &superpixels))
        .map_err(|e| e.in_stage("features"))?;
    Ok((raster, superpixels, features))
}

fn seed_range(base: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| base + i).collect()
}

/// Executes a run and writes its artifacts into `config.output`.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let (raster, superpixels, features) = prepare(config)?;
    let graph = superpixels.graph();
    let solver = &config.solver;
    let sel = &config.selection;
    let mut artifacts: Vec<(String, Artifact)> = vec![("superpixels.png".into(), Artifact::Overlay)];
    let mut seeds = Vec::new();

    match config.mode {
        Mode::Features => {
            let mut buf = Vec::new();
            features.write_csv(&mut buf)?;
            artifacts.push(("features.csv".into(), Artifact::Text(utf8(buf)?)));
        }
        Mode::Fit => {
            seeds.push(solver.seed);
            let names = config.subset();
            let x = features.select(&names).map_err(|e| e.in_stage("clustering"))?;
            let p = fit(&x, Some(&graph), solver).map_err(|e| e.in_stage("clustering"))?;
            fit_artifacts(&mut artifacts, &x, &p, config, &raster, &superpixels, &graph)?;
        }
        Mode::Select => {
            seeds = seed_range(solver.seed, sel.n_seeds);
            let trace = forward_select(&features, Some(&graph), solver, sel.index, sel.n_seeds)
                .map_err(|e| e.in_stage("selection"))?;
            artifacts.push(("trace.json".into(), Artifact::Text(trace.to_json()? + "\n")));
            let mut buf = Vec::new();
            trace.write_progression_csv(&mut buf)?;
            artifacts.push(("progression.csv".into(), Artifact::Text(utf8(buf)?)));
            let mut buf = Vec::new();
            trace.write_candidates_csv(&mut buf)?;
            artifacts.push(("candidates.csv".into(), Artifact::Text(utf8(buf)?)));
        }
        Mode::Grid => {
            seeds = seed_range(solver.seed, sel.n_seeds);
            let rows = grid_search(
                &features,
                Some(&graph),
                solver,
                &config.grid,
                &config.subset(),
                sel.index,
                sel.n_seeds,
            )
            .map_err(|e| e.in_stage("grid"))?;
            let mut buf = Vec::new();
            write_grid_csv(&mut buf, &rows)?;
            artifacts.push(("grid.csv".into(), Artifact::Text(utf8(buf)?)));
            let json = serde_json::to_string_pretty(&rows)? + "\n";
            artifacts.push(("grid.json".into(), Artifact::Text(json)));
        }
        Mode::Baseline => {
            seeds = seed_range(solver.seed, sel.n_seeds);
            let pool = sel.pool.clone().unwrap_or_else(|| config.feature_names());
            let report = compare_with_random(
                &features,
                Some(&graph),
                solver,
                sel.index,
                sel.n_seeds,
                &config.subset(),
                &pool,
                sel.trials,
                sel.baseline_seed,
            )
            .map_err(|e| e.in_stage("baseline"))?;
            let out = BaselineOut {
                index: sel.index,
                selected: &report.selected,
                random: &report.random,
                random_mean: report.random_mean,
            };
            let json = serde_json::to_string_pretty(&out)? + "\n";
            artifacts.push(("baseline.json".into(), Artifact::Text(json)));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["label", "subset", "mean", "std"])?;
            let rows = std::iter::once(("selected".to_string(), &report.selected)).chain(
                report
                    .random
                    .iter()
                    .enumerate()
                    .map(|(i, r)| (format!("random_{i}"), r)),
            );
            for (label, s) in rows {
                w.write_record([label, s.subset.join(";"), s.mean.to_string(), s.std.to_string()])?;
            }
            let buf = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
            artifacts.push(("baseline.csv".into(), Artifact::Text(utf8(buf)?)));
        }
    }

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seeds,
        config: config.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    artifacts.push(("manifest.json".into(), Artifact::Text(json)));

    write_all(&config.output, &artifacts, &raster, &superpixels).map_err(|e| e.in_stage("write"))
}

fn fit_artifacts(
    artifacts: &mut Vec<(String, Artifact)>,
    x: &FeatureMatrix,
    p: &Partition,
    config: &RunConfig,
    raster: &Raster,
    superpixels: &SuperpixelMap,
    graph: &crate::superpixel::SpatialGraph,
) -> Result<()> {
    for c in 0..p.n_clusters() {
        let u = p.memberships.row(c).to_vec();
        artifacts.push((format!("membership_{c}.png"), Artifact::Map(superpixels.project(&u))));
        if p.is_possibilistic() {
            let t = p.typicalities.row(c).to_vec();
            artifacts.push((format!("typicality_{c}.png"), Artifact::Map(superpixels.project(&t))));
            let prod = superpixels.project(&p.product(c));
            artifacts.push((format!("product_{c}.png"), Artifact::Map(prod)));
        }
    }
    let denom = (p.n_clusters().max(2) - 1) as f64;
    let labels: Vec<f64> = p.hard_labels().iter().map(|&l| l as f64 / denom).collect();
    artifacts.push(("labels.png".into(), Artifact::Map(superpixels.project(&labels))));

    let mut kinds = vec![IndexKind::Xb];
    if p.is_possibilistic() {
        kinds.push(IndexKind::Vxb);
    }
    let scores = if p.n_clusters() >= 2 {
        kinds
            .iter()
            .map(|&k| index(x, p, k))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.in_stage("validity"))?
    } else {
        Vec::new()
    };
    let summary = FitSummary {
        algorithm: p.algorithm.name(),
        features: x.names(),
        n_superpixels: superpixels.count(),
        n_valid_pixels: raster.valid_count(),
        iterations_run: p.iterations_run,
        converged: p.converged,
        objective: objective(x, Some(graph), p, &config.solver),
        centers: p.centers.rows().into_iter().map(|r| r.to_vec()).collect(),
        gammas: &p.gammas,
        scores: scores.clone(),
    };
    artifacts.push(("summary.json".into(), Artifact::Text(serde_json::to_string_pretty(&summary)? + "\n")));
    artifacts.push(("partition.json".into(), Artifact::Text(serde_json::to_string(p)? + "\n")));
    let mut buf = Vec::new();
    let rows: Vec<(String, ValidityScore)> = scores
        .into_iter()
        .map(|s| (p.algorithm.name().to_string(), s))
        .collect();
    write_scores_csv(&mut buf, &rows)?;
    artifacts.push(("scores.csv".into(), Artifact::Text(utf8(buf)?)));
    Ok(())
}

fn utf8(buf: Vec<u8>) -> Result<String> {
    String::from_utf8(buf).map_err(|e| Error::Serialize(e.to_string()))
}

fn write_all(
    dir: &Path,
    artifacts: &[(String, Artifact)],
    raster: &Raster,
    superpixels: &SuperpixelMap,
) -> Result<RunReport> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::with_capacity(artifacts.len());
    for (name, artifact) in artifacts {
        let path = dir.join(name);
        match artifact {
            Artifact::Text(text) => std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?,
            Artifact::Map(values) => write_map(values, raster, &path)?,
            Artifact::Overlay => superpixels.write_boundary_overlay(raster, &path)?,
        }
        files.push(name.clone());
    }
    Ok(RunReport {
        output: dir.to_path_buf(),
        files,
    })
}
