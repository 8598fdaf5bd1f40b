//! Xie-Beni style validity indices.
//!
//! Both indices divide a compactness term by `N · min_{i≠k} ‖c_i − c_k‖²`:
//!
//! * XB: compactness `Σ_i Σ_j u_ij² ‖x_j − c_i‖²`
//! * VXB: compactness `Σ_i Σ_j (u_ij · t_ij)² ‖x_j − c_i‖²`
//!
//! Lower is better. VXB down-weights points with low typicality, so outliers
//! that sit far from every center contribute little.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::clustering::{squared_distances, Partition};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    Xb,
    Vxb,
}

impl IndexKind {
    pub fn name(self) -> &'static str {
        match self {
            IndexKind::Xb => "xb",
            IndexKind::Vxb => "vxb",
        }
    }
}

impl std::fmt::Display for IndexKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityScore {
    pub index_kind: IndexKind,
    pub value: f64,
    /// Compactness.
    pub numerator: f64,
    /// `N` times the minimum squared center separation.
    pub denominator: f64,
    pub n_points: usize,
    /// Strictly positive terms in the numerator.
    pub nonzero_terms: usize,
}

/// Xie-Beni index.
pub fn xb(features: &FeatureMatrix, partition: &Partition) -> Result<ValidityScore> {
    score(features, partition, IndexKind::Xb)
}

/// Typicality-weighted variant; requires a possibilistic partition.
pub fn vxb(features: &FeatureMatrix, partition: &Partition) -> Result<ValidityScore> {
    if !partition.is_possibilistic() {
        return Err(Error::InvalidParameter(format!(
            "vxb needs typicalities; {} does not produce them",
            partition.algorithm
        )));
    }
    score(features, partition, IndexKind::Vxb)
}

pub fn index(features: &FeatureMatrix, partition: &Partition, kind: IndexKind) -> Result<ValidityScore> {
    match kind {
        IndexKind::Xb => xb(features, partition),
        IndexKind::Vxb => vxb(features, partition),
    }
}

fn score(features: &FeatureMatrix, partition: &Partition, kind: IndexKind) -> Result<ValidityScore> {
    let (c, n) = partition.memberships.dim();
    if c < 2 {
        return Err(Error::InvalidParameter(
            "validity indices need at least two clusters".into(),
        ));
    }
    if n != features.n_points() || partition.centers.ncols() != features.dims() {
        return Err(Error::DimensionMismatch(
            "partition does not match feature matrix".into(),
        ));
    }
    let d2 = squared_distances(features, &partition.centers);
    let (mut numerator, mut nonzero_terms) = (0.0, 0);
    for i in 0..c {
        for j in 0..n {
            let w = match kind {
                IndexKind::Xb => partition.memberships[[i, j]],
                IndexKind::Vxb => partition.memberships[[i, j]] * partition.typicalities[[i, j]],
            };
            let term = w * w * d2[[i, j]];
            if term > 0.0 {
                nonzero_terms += 1;
            }
            numerator += term;
        }
    }
    let centers = &partition.centers;
    let mut min_sep = f64::INFINITY;
    for i in 0..c {
        for k in (i + 1)..c {
            let s: f64 = centers
                .row(i)
                .iter()
                .zip(centers.row(k))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            min_sep = min_sep.min(s);
        }
    }
    let denominator = n as f64 * min_sep;
    if !(denominator > 0.0) {
        return Err(Error::Degenerate("coincident cluster centers".into()));
    }
    Ok(ValidityScore {
        index_kind: kind,
        value: numerator / denominator,
        numerator,
        denominator,
        n_points: n,
        nonzero_terms,
    })
}

/// Writes scores as CSV rows `label,kind,value,numerator,denominator,n_points,nonzero_terms`.
pub fn write_scores_csv<W: Write>(writer: W, rows: &[(String, ValidityScore)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "label",
        "kind",
        "value",
        "numerator",
        "denominator",
        "n_points",
        "nonzero_terms",
    ])?;
    for (label, s) in rows {
        w.write_record([
            label.clone(),
            s.index_kind.to_string(),
            s.value.to_string(),
            s.numerator.to_string(),
            s.denominator.to_string(),
            s.n_points.to_string(),
            s.nonzero_terms.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))?;
    Ok(())
}
