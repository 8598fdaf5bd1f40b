//! Wrapper feature selection driven by a validity index.
//!
//! [`forward_select`] grows a feature subset greedily. At every step each
//! remaining feature is appended to the accepted subset, the solver is run
//! once per seed (`base, base+1, …`), and the candidate with the lowest mean
//! index is accepted. The run continues until every feature has been accepted;
//! the best subset is the prefix of the accepted path with the lowest mean.
//!
//! [`grid_search`] scores a fixed subset over a Cartesian grid of `a`, `m`
//! and `q`, with `b` tied to `a` unless an explicit `b` axis is given.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{fit, SolverConfig};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::superpixel::SpatialGraph;
use crate::validity::{index, IndexKind};

/// Scores of one feature subset across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetScore {
    pub subset: Vec<String>,
    pub seeds: Vec<u64>,
    /// Index value per seed; `inf` when the run failed or degenerated.
    pub per_seed_scores: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation across seeds.
    pub std: f64,
}

fn mean_std(scores: &[f64]) -> (f64, f64) {
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    if !mean.is_finite() {
        return (f64::INFINITY, f64::INFINITY);
    }
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn check_kind(config: &SolverConfig, kind: IndexKind) -> Result<()> {
    if kind == IndexKind::Vxb && !config.algorithm.is_possibilistic() {
        return Err(Error::InvalidParameter(format!(
            "vxb requires a possibilistic algorithm, got {}",
            config.algorithm
        )));
    }
    Ok(())
}

/// Index value of a single seeded run; solver and index failures score `inf`.
pub fn seeded_score(
    features: &FeatureMatrix,
    graph: Option<&SpatialGraph>,
    config: &SolverConfig,
    kind: IndexKind,
) -> f64 {
    fit(features, graph, config)
        .and_then(|p| index(features, &p, kind))
        .map_or(f64::INFINITY, |s| s.value)
}

/// Runs the solver on `subset` for seeds `config.seed .. config.seed + n_seeds`.
pub fn score_subset<S: AsRef<str>>(
    features: &FeatureMatrix,
    graph: Option<&SpatialGraph>,
    config: &SolverConfig,
    subset: &[S],
    kind: IndexKind,
    n_seeds: usize,
) -> Result<SubsetScore> {
    config.validate()?;
    check_kind(config, kind)?;
    if n_seeds == 0 {
        return Err(Error::InvalidParameter("n_seeds must be positive".into()));
    }
    if config.algorithm.uses_graph() && graph.is_none() {
        return Err(Error::InvalidParameter(format!(
            "{} needs a spatial graph",
            config.algorithm
        )));
    }
    let sub = features.select(subset)?;
    let seeds: Vec<u64> = (0..n_seeds as u64).map(|i| config.seed + i).collect();
    let per_seed_scores: Vec<f64> = seeds
        .par_iter()
        .map(|&seed| seeded_score(&sub, graph, &config.with_seed(seed), kind))
        .collect();
    let (mean, std) = mean_std(&per_seed_scores);
    Ok(SubsetScore {
        subset: sub.names().to_vec(),
        seeds,
        per_seed_scores,
        mean,
        std,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateEvaluation {
    /// 1-based step; the candidate subset has `step` features.
    pub step: usize,
    pub added: String,
    #[serde(flatten)]
    pub score: SubsetScore,
}

/// One accepted step: the Table-style progression row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProgressionRow {
    pub n_features: usize,
    pub added: String,
    pub subset: Vec<String>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionTrace {
    pub index_kind: IndexKind,
    pub algorithm: crate::clustering::Algorithm,
    pub base_seed: u64,
    pub n_seeds: usize,
    /// Every candidate evaluation, in step order then bank order.
    pub steps: Vec<CandidateEvaluation>,
    pub chosen_path: Vec<String>,
    pub progression: Vec<ProgressionRow>,
    pub best_subset: Vec<String>,
    pub best_mean: f64,
}

impl SelectionTrace {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `n_features,added,mean,std`
    pub fn write_progression_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n_features", "added", "mean", "std"])?;
        for row in &self.progression {
            w.write_record([
                row.n_features.to_string(),
                row.added.clone(),
                row.mean.to_string(),
                row.std.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))?;
        Ok(())
    }

    /// `step,added,subset,mean,std,scores` with `;`-joined lists.
    pub fn write_candidates_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["step", "added", "subset", "mean", "std", "scores"])?;
        for e in &self.steps {
            w.write_record([
                e.step.to_string(),
                e.added.clone(),
                e.score.subset.join(";"),
                e.score.mean.to_string(),
                e.score.std.to_string(),
                join_floats(&e.score.per_seed_scores),
            ])?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))?;
        Ok(())
    }
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

/// Greedy forward selection over every column of `features`.
pub fn forward_select(
    features: &FeatureMatrix,
    graph: Option<&SpatialGraph>,
    config: &SolverConfig,
    kind: IndexKind,
    n_seeds: usize,
) -> Result<SelectionTrace> {
    config.validate()?;
    check_kind(config, kind)?;
    if features.dims() == 0 {
        return Err(Error::InvalidParameter("no features to select from".into()));
    }
    let mut remaining: Vec<String> = features.names().to_vec();
    let mut accepted: Vec<String> = Vec::new();
    let mut steps = Vec::new();
    let mut progression = Vec::new();
    while !remaining.is_empty() {
        let step = accepted.len() + 1;
        let evaluations = remaining
            .par_iter()
            .map(|name| {
                let mut subset = accepted.clone();
                subset.push(name.clone());
                score_subset(features, graph, config, &subset, kind, n_seeds).map(|score| {
                    CandidateEvaluation {
                        step,
                        added: name.clone(),
                        score,
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        // strict comparison keeps the earliest bank position on ties
        let best = (1..evaluations.len()).fold(0, |b, i| {
            if evaluations[i].score.mean < evaluations[b].score.mean {
                i
            } else {
                b
            }
        });
        let winner = &evaluations[best];
        accepted.push(winner.added.clone());
        remaining.retain(|n| *n != winner.added);
        progression.push(ProgressionRow {
            n_features: step,
            added: winner.added.clone(),
            subset: accepted.clone(),
            mean: winner.score.mean,
            std: winner.score.std,
        });
        steps.extend(evaluations);
    }
    let best = (1..progression.len()).fold(0, |b, i| {
        if progression[i].mean < progression[b].mean {
            i
        } else {
            b
        }
    });
    Ok(SelectionTrace {
        index_kind: kind,
        algorithm: config.algorithm,
        base_seed: config.seed,
        n_seeds,
        steps,
        chosen_path: accepted,
        best_subset: progression[best].subset.clone(),
        best_mean: progression[best].mean,
        progression,
    })
}

/// `initial, initial + increment, …` up to and including `final`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRange {
    pub initial: f64,
    #[serde(rename = "final")]
    pub last: f64,
    pub increment: f64,
}

impl ParamRange {
    pub fn new(initial: f64, last: f64, increment: f64) -> Self {
        ParamRange {
            initial,
            last,
            increment,
        }
    }

    pub fn single(value: f64) -> Self {
        ParamRange::new(value, value, 1.0)
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.increment > 0.0) || !(self.last >= self.initial) {
            return Err(Error::InvalidParameter(format!(
                "range {self:?} needs increment > 0 and final >= initial"
            )));
        }
        let steps = ((self.last - self.initial) / self.increment + 1e-9).floor() as usize;
        // rounding keeps 1.2 + 0.3 printing as 1.5
        Ok((0..=steps)
            .map(|i| ((self.initial + i as f64 * self.increment) * 1e10).round() / 1e10)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub a: ParamRange,
    pub m: ParamRange,
    pub q: ParamRange,
    /// Independent `b` axis. When absent, `b = tie_ratio · a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<ParamRange>,
    #[serde(default = "default_tie_ratio")]
    pub tie_ratio: f64,
}

fn default_tie_ratio() -> f64 {
    0.1
}

impl Default for GridSpec {
    /// a ∈ 2..12 step 2, m ∈ 1.2..3.0 step 0.3, q ∈ 1.2..2.8 step 0.2, b = 0.1·a.
    fn default() -> Self {
        GridSpec {
            a: ParamRange::new(2.0, 12.0, 2.0),
            m: ParamRange::new(1.2, 3.0, 0.3),
            q: ParamRange::new(1.2, 2.8, 0.2),
            b: None,
            tie_ratio: default_tie_ratio(),
        }
    }
}

impl GridSpec {
    /// Every `(a, b, m, q)` cell in enumeration order (a, b, m, q; last varies fastest).
    pub fn cells(&self) -> Result<Vec<[f64; 4]>> {
        let a = self.a.values()?;
        let m = self.m.values()?;
        let q = self.q.values()?;
        let b_axis = self.b.map(|b| b.values()).transpose()?;
        let mut out = Vec::new();
        for &a in &a {
            let bs = match &b_axis {
                Some(bs) => bs.clone(),
                None => vec![((self.tie_ratio * a) * 1e10).round() / 1e10],
            };
            for &b in &bs {
                for &m in &m {
                    for &q in &q {
                        out.push([a, b, m, q]);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub q: f64,
    #[serde(flatten)]
    pub score: SubsetScore,
}

/// Scores every grid cell on a fixed subset; results sorted ascending by mean
/// (ties keep enumeration order).
pub fn grid_search<S: AsRef<str> + Sync>(
    features: &FeatureMatrix,
    graph: Option<&SpatialGraph>,
    base_config: &SolverConfig,
    grid: &GridSpec,
    subset: &[S],
    kind: IndexKind,
    n_seeds: usize,
) -> Result<Vec<GridCell>> {
    let cells = grid.cells()?;
    let mut rows = cells
        .par_iter()
        .map(|&[a, b, m, q]| {
            let config = SolverConfig {
                a,
                b,
                m,
                q,
                ..*base_config
            };
            score_subset(features, graph, &config, subset, kind, n_seeds)
                .map(|score| GridCell { a, b, m, q, score })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|x, y| x.score.mean.total_cmp(&y.score.mean));
    Ok(rows)
}

/// `a,b,m,q,mean,std,seeds,scores`
pub fn write_grid_csv<W: Write>(writer: W, rows: &[GridCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["a", "b", "m", "q", "mean", "std", "seeds", "scores"])?;
    for r in rows {
        w.write_record([
            r.a.to_string(),
            r.b.to_string(),
            r.m.to_string(),
            r.q.to_string(),
            r.score.mean.to_string(),
            r.score.std.to_string(),
            r.score
                .seeds
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(";"),
            join_floats(&r.score.per_seed_scores),
        ])?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))?;
    Ok(())
}

/// Uniform `k`-subset of `pool` without replacement, returned in pool order.
pub fn random_baseline<S: AsRef<str>>(pool: &[S], k: usize, seed: u64) -> Result<Vec<String>> {
    if k > pool.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {k} features from a pool of {}",
            pool.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, pool.len(), k).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| pool[i].as_ref().to_string()).collect())
}

/// A selected subset scored against randomly drawn subsets of the same size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineReport {
    pub selected: SubsetScore,
    pub random: Vec<SubsetScore>,
    /// Mean of the random subsets' mean scores.
    pub random_mean: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn compare_with_random<S: AsRef<str>>(
    features: &FeatureMatrix,
    graph: Option<&SpatialGraph>,
    config: &SolverConfig,
    kind: IndexKind,
    n_seeds: usize,
    selected: &[S],
    pool: &[S],
    trials: usize,
    seed: u64,
) -> Result<BaselineReport> {
    let selected = score_subset(features, graph, config, selected, kind, n_seeds)?;
    let k = selected.subset.len();
    let random = (0..trials as u64)
        .map(|i| {
            let subset = random_baseline(pool, k, seed + i)?;
            score_subset(features, graph, config, &subset, kind, n_seeds)
        })
        .collect::<Result<Vec<_>>>()?;
    let random_mean = random.iter().map(|r| r.mean).sum::<f64>() / random.len().max(1) as f64;
    Ok(BaselineReport {
        selected,
        random,
        random_mean,
    })
}
