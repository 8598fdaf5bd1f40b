//! Alternating-optimization clustering: K-Means, FLICM, PFCM and PFLICM.
//!
//! All four share one loop. Each iteration updates, in order:
//!
//! 1. centers, as the weighted mean `Σ w·x / Σ w` with
//!    `w = u` (K-Means), `u^m` (FLICM) or `a·u^m + b·t^q` (PFCM, PFLICM);
//! 2. the local fuzzy factor `G` from the *previous* memberships
//!    (FLICM, PFLICM);
//! 3. memberships, `u_cn = 1 / Σ_k ((d²_cn + G_cn) / (d²_kn + G_kn))^(1/(m−1))`,
//!    or the nearest-center indicator for K-Means;
//! 4. `γ_c = Σ_n u^m d² / Σ_n u^m` and typicalities
//!    `t = 1 / (1 + ((b/γ)·d²)^(1/(q−1)))` (PFCM, PFLICM). `γ` is estimated
//!    once, from the first membership update, and held fixed afterwards so
//!    every later sweep lowers the same objective.
//!
//! Iteration stops when the largest change in any membership (and typicality,
//! where defined) drops below `epsilon`, or after `max_iters` sweeps.
//!
//! ```
//! use pflicm::clustering::{fit, Algorithm, SolverConfig};
//! use pflicm::features::FeatureMatrix;
//!
//! let x = FeatureMatrix::from_rows(&[vec![0.0], vec![0.1], vec![10.0], vec![10.1]]).unwrap();
//! let config = SolverConfig { algorithm: Algorithm::KMeans, clusters: 2, ..Default::default() };
//! let p = fit(&x, None, &config).unwrap();
//! let mut centers: Vec<f64> = p.centers.column(0).to_vec();
//! centers.sort_by(f64::total_cmp);
//! assert!((centers[0] - 0.05).abs() < 1e-12 && (centers[1] - 10.05).abs() < 1e-12);
//! ```

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::superpixel::SpatialGraph;

/// Lower bound on `γ_c`.
pub const GAMMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    KMeans,
    Flicm,
    Pfcm,
    Pflicm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Pflicm,
        Algorithm::Flicm,
        Algorithm::Pfcm,
        Algorithm::KMeans,
    ];

    /// Produces typicalities.
    pub fn is_possibilistic(self) -> bool {
        matches!(self, Algorithm::Pfcm | Algorithm::Pflicm)
    }

    /// Uses the spatial fuzzy factor `G`.
    pub fn uses_graph(self) -> bool {
        matches!(self, Algorithm::Flicm | Algorithm::Pflicm)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::Flicm => "flicm",
            Algorithm::Pfcm => "pfcm",
            Algorithm::Pflicm => "pflicm",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub clusters: usize,
    /// Weight on the membership term.
    pub a: f64,
    /// Weight on the typicality term.
    pub b: f64,
    /// Membership fuzzifier.
    pub m: f64,
    /// Typicality fuzzifier.
    pub q: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            algorithm: Algorithm::Pflicm,
            clusters: 3,
            a: 14.0,
            b: 1.4,
            m: 1.8,
            q: 2.8,
            epsilon: 1e-6,
            max_iters: 500,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.clusters == 0 {
            return bad("clusters must be positive".into());
        }
        if !(self.m > 1.0 && self.m.is_finite()) {
            return bad(format!("m must exceed 1, got {}", self.m));
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return bad(format!("q must exceed 1, got {}", self.q));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return bad(format!("b must be non-negative, got {}", self.b));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Full clustering state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub algorithm: Algorithm,
    /// `C × d`
    pub centers: Array2<f64>,
    /// `C × N`; columns sum to one.
    pub memberships: Array2<f64>,
    /// `C × N`; all ones for algorithms without typicality.
    pub typicalities: Array2<f64>,
    pub gammas: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
}

impl Partition {
    /// Assembles a partition from explicit parts. `typicalities = None` marks a
    /// non-possibilistic partition (all-ones placeholder).
    pub fn from_parts(
        algorithm: Algorithm,
        centers: Array2<f64>,
        memberships: Array2<f64>,
        typicalities: Option<Array2<f64>>,
    ) -> Result<Self> {
        let (c, n) = memberships.dim();
        if centers.nrows() != c {
            return Err(Error::DimensionMismatch(format!(
                "{} centers for {c} membership rows",
                centers.nrows()
            )));
        }
        if algorithm.is_possibilistic() != typicalities.is_some() {
            return Err(Error::InvalidParameter(format!(
                "{algorithm} partitions {} typicalities",
                if algorithm.is_possibilistic() { "need" } else { "do not carry" }
            )));
        }
        let typicalities = typicalities.unwrap_or_else(|| Array2::ones((c, n)));
        if typicalities.dim() != (c, n) {
            return Err(Error::DimensionMismatch("typicality shape".into()));
        }
        Ok(Partition {
            algorithm,
            centers,
            memberships,
            typicalities,
            gammas: vec![0.0; c],
            iterations_run: 0,
            converged: false,
        })
    }

    pub fn n_clusters(&self) -> usize {
        self.memberships.nrows()
    }

    pub fn n_points(&self) -> usize {
        self.memberships.ncols()
    }

    pub fn is_possibilistic(&self) -> bool {
        self.algorithm.is_possibilistic()
    }

    /// Cluster with the largest membership for each point (lowest index on ties).
    pub fn hard_labels(&self) -> Vec<usize> {
        (0..self.n_points())
            .map(|n| {
                let col = self.memberships.column(n);
                let mut best = 0;
                for c in 1..col.len() {
                    if col[c] > col[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }

    /// `u_cn · t_cn` for one cluster.
    pub fn product(&self, c: usize) -> Vec<f64> {
        self.memberships
            .row(c)
            .iter()
            .zip(self.typicalities.row(c))
            .map(|(u, t)| u * t)
            .collect()
    }
}

#[inline]
fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `C × N` squared distances between every center and every point.
pub fn squared_distances(features: &FeatureMatrix, centers: &Array2<f64>) -> Array2<f64> {
    let (c, n) = (centers.nrows(), features.n_points());
    Array2::from_shape_fn((c, n), |(i, j)| {
        squared_distance(centers.row(i), features.row(j))
    })
}

/// Random initial memberships: uniform draws in `(0, 1]`, each column normalized.
pub fn initial_memberships(n_points: usize, clusters: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Array2::zeros((clusters, n_points));
    for n in 0..n_points {
        for c in 0..clusters {
            u[[c, n]] = 1.0 - rng.random::<f64>();
        }
        let s: f64 = u.column(n).sum();
        u.column_mut(n).mapv_inplace(|v| v / s);
    }
    u
}

/// Local fuzzy factor for cluster `c` at point `n`:
/// `Σ_{k∈N(n)} (1/(d_nk+1)) · (1 − u_ck)^m · ‖x_k − center‖²`.
pub fn g_factor(
    features: &FeatureMatrix,
    graph: &SpatialGraph,
    memberships_prev: &Array2<f64>,
    center: ArrayView1<f64>,
    c: usize,
    n: usize,
    m: f64,
) -> f64 {
    graph
        .neighbors(n)
        .iter()
        .filter(|&&(k, _)| k != n)
        .map(|&(k, d_nk)| {
            (1.0 - memberships_prev[[c, k]]).powf(m) / (d_nk + 1.0)
                * squared_distance(features.row(k), center)
        })
        .sum()
}

fn g_matrix(
    d2: &Array2<f64>,
    graph: &SpatialGraph,
    memberships_prev: &Array2<f64>,
    m: f64,
) -> Array2<f64> {
    let (c, n) = d2.dim();
    Array2::from_shape_fn((c, n), |(ci, ni)| {
        graph
            .neighbors(ni)
            .iter()
            .filter(|&&(k, _)| k != ni)
            .map(|&(k, d_nk)| (1.0 - memberships_prev[[ci, k]]).powf(m) / (d_nk + 1.0) * d2[[ci, k]])
            .sum()
    })
}

/// One membership column from the per-cluster dissimilarities `d² + G`.
///
/// Points sitting exactly on one or more centers split their membership
/// evenly among those clusters.
pub fn membership_column(dissimilarity: &[f64], m: f64) -> Vec<f64> {
    let zeros = dissimilarity.iter().filter(|&&d| d <= 0.0).count();
    if zeros > 0 {
        return dissimilarity
            .iter()
            .map(|&d| if d <= 0.0 { 1.0 / zeros as f64 } else { 0.0 })
            .collect();
    }
    let exponent = 1.0 / (m - 1.0);
    dissimilarity
        .iter()
        .map(|&dc| {
            let s: f64 = dissimilarity
                .iter()
                .map(|&dk| (dc / dk).powf(exponent))
                .sum();
            1.0 / s
        })
        .collect()
}

/// `1 / (1 + ((b/γ)·d²)^(1/(q−1)))`.
///
/// With `γ = 0` the limit is used: 1 on the center, 0 elsewhere.
pub fn update_typicality(d2: f64, gamma_c: f64, b: f64, q: f64) -> f64 {
    if gamma_c <= 0.0 {
        return if d2 == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 / (1.0 + (b / gamma_c * d2).powf(1.0 / (q - 1.0)))
}

/// `γ_c = Σ_n u^m d² / Σ_n u^m`, floored at [`GAMMA_FLOOR`].
pub fn gamma_estimates(memberships: &Array2<f64>, d2: &Array2<f64>, m: f64) -> Vec<f64> {
    memberships
        .rows()
        .into_iter()
        .zip(d2.rows())
        .map(|(u, d)| {
            let (mut num, mut den) = (0.0, 0.0);
            for (&u, &d) in u.iter().zip(d.iter()) {
                let w = u.powf(m);
                num += w * d;
                den += w;
            }
            if den > 0.0 {
                (num / den).max(GAMMA_FLOOR)
            } else {
                GAMMA_FLOOR
            }
        })
        .collect()
}

/// Clusters `features`. `graph` is required for FLICM and PFLICM and ignored otherwise.
pub fn fit(
    features: &FeatureMatrix,
    graph: Option<&SpatialGraph>,
    config: &SolverConfig,
) -> Result<Partition> {
    fit_with_observer(features, graph, config, |_| {})
}

/// Like [`fit`], calling `observer` with the state after every iteration.
pub fn fit_with_observer(
    features: &FeatureMatrix,
    graph: Option<&SpatialGraph>,
    config: &SolverConfig,
    mut observer: impl FnMut(&Partition),
) -> Result<Partition> {
    config.validate()?;
    let (n, d) = (features.n_points(), features.dims());
    let clusters = config.clusters;
    if d == 0 {
        return Err(Error::InvalidParameter("feature matrix has no columns".into()));
    }
    if clusters > n {
        return Err(Error::InvalidParameter(format!(
            "{clusters} clusters for {n} points"
        )));
    }
    let algorithm = config.algorithm;
    let graph = if algorithm.uses_graph() {
        let g = graph.ok_or_else(|| {
            Error::InvalidParameter(format!("{algorithm} needs a spatial graph"))
        })?;
        if g.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} nodes for {n} points",
                g.len()
            )));
        }
        Some(g)
    } else {
        None
    };

    let mut u = initial_memberships(n, clusters, config.seed);
    if algorithm == Algorithm::KMeans {
        u = crisp(&u);
    }
    let mut t = Array2::<f64>::ones((clusters, n));
    let mut state = Partition {
        algorithm,
        centers: Array2::zeros((clusters, d)),
        memberships: u.clone(),
        typicalities: t.clone(),
        gammas: vec![0.0; clusters],
        iterations_run: 0,
        converged: false,
    };

    for iteration in 1..=config.max_iters {
        let centers = match algorithm {
            Algorithm::KMeans => kmeans_centers(features, &u),
            _ => weighted_centers(features, &u, &t, config),
        };
        check_finite(centers.iter(), "centers", iteration)?;
        let d2 = squared_distances(features, &centers);

        let g = graph.map(|g| g_matrix(&d2, g, &u, config.m));
        let new_u = match algorithm {
            Algorithm::KMeans => nearest_center(&d2),
            _ => {
                let mut out = Array2::zeros((clusters, n));
                let mut col = vec![0.0; clusters];
                for j in 0..n {
                    for c in 0..clusters {
                        col[c] = d2[[c, j]] + g.as_ref().map_or(0.0, |g| g[[c, j]]);
                    }
                    for (c, v) in membership_column(&col, config.m).into_iter().enumerate() {
                        out[[c, j]] = v;
                    }
                }
                out
            }
        };
        check_finite(new_u.iter(), "memberships", iteration)?;

        let (new_t, gammas) = if algorithm.is_possibilistic() {
            let gammas = if iteration == 1 {
                gamma_estimates(&new_u, &d2, config.m)
            } else {
                state.gammas.clone()
            };
            let t = Array2::from_shape_fn((clusters, n), |(c, j)| {
                update_typicality(d2[[c, j]], gammas[c], config.b, config.q)
                    .max(f64::MIN_POSITIVE)
            });
            check_finite(t.iter(), "typicalities", iteration)?;
            (t, gammas)
        } else {
            (t.clone(), vec![0.0; clusters])
        };

        let mut delta = max_abs_diff(&new_u, &u);
        if algorithm.is_possibilistic() {
            delta = delta.max(max_abs_diff(&new_t, &t));
        }
        u = new_u;
        t = new_t;
        state = Partition {
            algorithm,
            centers,
            memberships: u.clone(),
            typicalities: t.clone(),
            gammas,
            iterations_run: iteration,
            converged: delta < config.epsilon,
        };
        observer(&state);
        if state.converged {
            break;
        }
    }
    Ok(state)
}

fn check_finite<'a>(
    mut values: impl Iterator<Item = &'a f64>,
    stage: &'static str,
    iteration: usize,
) -> Result<()> {
    if values.all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { stage, iteration })
    }
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn crisp(u: &Array2<f64>) -> Array2<f64> {
    let (c, n) = u.dim();
    let mut out = Array2::zeros((c, n));
    for j in 0..n {
        let col = u.column(j);
        let best = (0..c).fold(0, |b, i| if col[i] > col[b] { i } else { b });
        out[[best, j]] = 1.0;
    }
    out
}

fn nearest_center(d2: &Array2<f64>) -> Array2<f64> {
    let (c, n) = d2.dim();
    let mut out = Array2::zeros((c, n));
    for j in 0..n {
        let best = (0..c).fold(0, |b, i| if d2[[i, j]] < d2[[b, j]] { i } else { b });
        out[[best, j]] = 1.0;
    }
    out
}

fn weighted_centers(
    features: &FeatureMatrix,
    u: &Array2<f64>,
    t: &Array2<f64>,
    config: &SolverConfig,
) -> Array2<f64> {
    let (clusters, n) = u.dim();
    let mut centers = Array2::zeros((clusters, features.dims()));
    for c in 0..clusters {
        let mut total = 0.0;
        for j in 0..n {
            let w = match config.algorithm {
                Algorithm::Flicm => u[[c, j]].powf(config.m),
                _ => config.a * u[[c, j]].powf(config.m) + config.b * t[[c, j]].powf(config.q),
            };
            total += w;
            centers
                .row_mut(c)
                .scaled_add(w, &features.row(j));
        }
        centers.row_mut(c).mapv_inplace(|v| v / total);
    }
    centers
}

/// Cluster means; an empty cluster is re-seeded at the point farthest from
/// its nearest center.
fn kmeans_centers(features: &FeatureMatrix, u: &Array2<f64>) -> Array2<f64> {
    let (clusters, n) = u.dim();
    let mut centers = Array2::zeros((clusters, features.dims()));
    let mut empty = Vec::new();
    for c in 0..clusters {
        let mut count = 0.0;
        for j in 0..n {
            if u[[c, j]] > 0.0 {
                centers.row_mut(c).scaled_add(u[[c, j]], &features.row(j));
                count += u[[c, j]];
            }
        }
        if count > 0.0 {
            centers.row_mut(c).mapv_inplace(|v| v / count);
        } else {
            empty.push(c);
        }
    }
    let mut placed: Vec<usize> = (0..clusters).filter(|c| !empty.contains(c)).collect();
    for c in empty {
        let farthest = (0..n)
            .map(|j| {
                let nearest = placed
                    .iter()
                    .map(|&p| squared_distance(features.row(j), centers.row(p)))
                    .fold(f64::INFINITY, f64::min);
                (j, nearest)
            })
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0;
        let row = features.row(farthest).to_owned();
        centers.row_mut(c).assign(&row);
        placed.push(c);
    }
    centers
}

/// Objective value of a partition.
///
/// * K-Means: within-cluster sum of squares `Σ u·d²`.
/// * FLICM: `Σ u^m (d² + G)`.
/// * PFCM: `Σ (a·u^m + b·t^q)·d² + Σ_c γ_c Σ_n (1 − t)^q`.
/// * PFLICM: `Σ a·u^m (d² + G) + b·t^q·d² + Σ_c γ_c Σ_n (1 − t)^q`.
///
/// `G` is evaluated from the partition's own memberships; a missing graph
/// means `G = 0`.
pub fn objective(
    features: &FeatureMatrix,
    graph: Option<&SpatialGraph>,
    partition: &Partition,
    config: &SolverConfig,
) -> f64 {
    let d2 = squared_distances(features, &partition.centers);
    let u = &partition.memberships;
    let t = &partition.typicalities;
    let g = match (partition.algorithm.uses_graph(), graph) {
        (true, Some(graph)) => Some(g_matrix(&d2, graph, u, config.m)),
        _ => None,
    };
    let g_at = |c: usize, j: usize| g.as_ref().map_or(0.0, |g| g[[c, j]]);
    let (clusters, n) = u.dim();
    let mut total = 0.0;
    for c in 0..clusters {
        for j in 0..n {
            total += match partition.algorithm {
                Algorithm::KMeans => u[[c, j]] * d2[[c, j]],
                Algorithm::Flicm => u[[c, j]].powf(config.m) * (d2[[c, j]] + g_at(c, j)),
                Algorithm::Pfcm | Algorithm::Pflicm => {
                    config.a * u[[c, j]].powf(config.m) * (d2[[c, j]] + g_at(c, j))
                        + config.b * t[[c, j]].powf(config.q) * d2[[c, j]]
                        + partition.gammas[c] * (1.0 - t[[c, j]]).powf(config.q)
                }
            };
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn line(points: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(&points.iter().map(|&p| vec![p]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn kmeans_two_well_separated_pairs() {
        let x = line(&[0.0, 0.1, 10.0, 10.1]);
        for seed in 0..10 {
            let cfg = SolverConfig {
                algorithm: Algorithm::KMeans,
                clusters: 2,
                seed,
                ..Default::default()
            };
            let p = fit(&x, None, &cfg).unwrap();
            let labels = p.hard_labels();
            assert_eq!(labels[0], labels[1]);
            assert_eq!(labels[2], labels[3]);
            assert_ne!(labels[0], labels[2]);
            assert!((p.centers[[labels[0], 0]] - 0.05).abs() < 1e-12);
            assert!((p.centers[[labels[2], 0]] - 10.05).abs() < 1e-12);
            assert!(p.converged);
            assert!(p.memberships.iter().all(|&u| u == 0.0 || u == 1.0));
            assert!(p.typicalities.iter().all(|&t| t == 1.0));
        }
    }

    #[test]
    fn kmeans_reseeds_empty_cluster() {
        // three identical points and one far point; random crisp init can
        // leave a cluster empty, which must be re-seeded at the far point
        let x = line(&[0.0, 0.0, 0.0, 5.0]);
        for seed in 0..20 {
            let cfg = SolverConfig {
                algorithm: Algorithm::KMeans,
                clusters: 2,
                seed,
                ..Default::default()
            };
            let p = fit(&x, None, &cfg).unwrap();
            let l = p.hard_labels();
            assert_ne!(l[0], l[3], "seed {seed}");
        }
    }

    #[test]
    fn g_factor_cases() {
        let x = line(&[0.0, 2.0]);
        let u = array![[0.5, 0.5], [0.5, 0.5]];
        let center = array![0.0];
        let empty = SpatialGraph::empty(2);
        assert_eq!(g_factor(&x, &empty, &u, center.view(), 0, 0, 2.0), 0.0);

        let graph = SpatialGraph::new(vec![vec![(1, 1.0)], vec![(0, 1.0)]]);
        // (1/2)·(1−0.5)²·‖2−0‖² = 0.5
        assert_eq!(g_factor(&x, &graph, &u, center.view(), 0, 0, 2.0), 0.5);

        let full = array![[1.0, 1.0], [0.0, 0.0]];
        let far = array![100.0];
        assert_eq!(g_factor(&x, &graph, &full, far.view(), 0, 0, 1.8), 0.0);
    }

    #[test]
    fn typicality_values() {
        assert_eq!(update_typicality(0.0, 2.0, 1.4, 2.8), 1.0);
        for q in [1.2, 2.0, 2.8, 5.0] {
            assert_eq!(update_typicality(2.0, 4.0, 2.0, q), 0.5);
        }
        let t = update_typicality(2.0, 2.0, 1.4, 2.8);
        assert!((t - 1.0 / (1.0 + 1.4f64.powf(1.0 / 1.8))).abs() < 1e-15);
        assert!((t - 0.4534).abs() < 5e-5);
        assert_eq!(update_typicality(0.0, 0.0, 1.4, 2.8), 1.0);
        assert_eq!(update_typicality(1.0, 0.0, 1.4, 2.8), 0.0);
    }

    #[test]
    fn membership_on_center_splits_evenly() {
        assert_eq!(membership_column(&[0.0, 3.0, 0.0], 2.0), vec![0.5, 0.0, 0.5]);
        let u = membership_column(&[1.0, 3.0], 2.0);
        assert!((u[0] - 0.75).abs() < 1e-15 && (u[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_cluster_objective() {
        let x = line(&[1.0, 2.0, 4.0]);
        let cfg = SolverConfig {
            algorithm: Algorithm::Pflicm,
            clusters: 1,
            ..Default::default()
        };
        let graph = SpatialGraph::new(vec![vec![(1, 1.0)], vec![(0, 1.0), (2, 1.0)], vec![(1, 1.0)]]);
        let p = fit(&x, Some(&graph), &cfg).unwrap();
        assert!(p.memberships.iter().all(|&u| u == 1.0));
        let c = p.centers[[0, 0]];
        let d2: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|v: &f64| (v - c).powi(2)).collect();
        // G vanishes because (1 − u)^m = 0
        let expect: f64 = (0..3)
            .map(|j| {
                let t = p.typicalities[[0, j]];
                cfg.a * d2[j] + cfg.b * t.powf(cfg.q) * d2[j] + p.gammas[0] * (1.0 - t).powf(cfg.q)
            })
            .sum();
        assert!((objective(&x, Some(&graph), &p, &cfg) - expect).abs() < 1e-12);
    }

    #[test]
    fn objective_zero_on_centers() {
        let x = line(&[0.0, 3.0]);
        let p = Partition::from_parts(
            Algorithm::Pfcm,
            array![[0.0], [3.0]],
            array![[1.0, 0.0], [0.0, 1.0]],
            Some(Array2::ones((2, 2))),
        )
        .unwrap();
        let cfg = SolverConfig {
            algorithm: Algorithm::Pfcm,
            b: 0.0,
            ..Default::default()
        };
        assert_eq!(objective(&x, None, &p, &cfg), 0.0);
    }

    #[test]
    fn graph_required_for_local_algorithms() {
        let x = line(&[0.0, 1.0, 2.0]);
        for algorithm in [Algorithm::Flicm, Algorithm::Pflicm] {
            let cfg = SolverConfig { algorithm, clusters: 2, ..Default::default() };
            assert!(fit(&x, None, &cfg).is_err());
            assert!(fit(&x, Some(&SpatialGraph::empty(2)), &cfg).is_err());
        }
    }

    #[test]
    fn invalid_configs() {
        let x = line(&[0.0, 1.0, 2.0]);
        let base = SolverConfig { algorithm: Algorithm::Pfcm, clusters: 2, ..Default::default() };
        for cfg in [
            SolverConfig { m: 1.0, ..base },
            SolverConfig { q: 0.5, ..base },
            SolverConfig { a: 0.0, ..base },
            SolverConfig { b: -1.0, ..base },
            SolverConfig { epsilon: 0.0, ..base },
            SolverConfig { clusters: 4, ..base },
        ] {
            assert!(fit(&x, None, &cfg).is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("fcm".parse::<Algorithm>().is_err());
    }
}
