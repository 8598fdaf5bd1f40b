use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::superpixel::SuperpixelMap;

use super::FeatureMap;

/// Columns whose population std falls below this are treated as constant.
const CONSTANT_STD: f64 = 1e-12;

/// Per-superpixel feature vectors, one row per point and one named column per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
    names: Vec<String>,
    standardization: Option<Vec<ColumnScale>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnScale {
    pub mean: f64,
    pub std: f64,
}

impl FeatureMatrix {
    /// Wraps raw values as-is (no standardization).
    pub fn new(values: Array2<f64>, names: Vec<String>) -> Result<Self> {
        if names.len() != values.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} columns",
                names.len(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "feature matrix contains non-finite values".into(),
            ));
        }
        Ok(FeatureMatrix {
            values,
            names,
            standardization: None,
        })
    }

    /// Convenience constructor from row vectors with generated names `f0, f1, …`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let flat = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        FeatureMatrix::new(values, (0..d).map(|j| format!("f{j}")).collect())
    }

    /// Column-wise z-scores with population std; constant columns become zero.
    pub fn standardized(&self) -> FeatureMatrix {
        let n = self.values.nrows() as f64;
        let mut values = self.values.clone();
        let mut scales = Vec::with_capacity(values.ncols());
        for mut col in values.axis_iter_mut(Axis(1)) {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let std = var.sqrt();
            if std < CONSTANT_STD {
                col.fill(0.0);
                scales.push(ColumnScale { mean, std: 0.0 });
            } else {
                col.mapv_inplace(|v| (v - mean) / std);
                scales.push(ColumnScale { mean, std });
            }
        }
        FeatureMatrix {
            values,
            names: self.names.clone(),
            standardization: Some(scales),
        }
    }

    pub fn n_points(&self) -> usize {
        self.values.nrows()
    }

    pub fn dims(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn row(&self, n: usize) -> ArrayView1<'_, f64> {
        self.values.row(n)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn standardization(&self) -> Option<&[ColumnScale]> {
        self.standardization.as_deref()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Sub-matrix with the named columns, in the order given.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<FeatureMatrix> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_index(n.as_ref())
                    .ok_or_else(|| Error::UnknownFeature(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.select_indices(&idx))
    }

    pub fn select_indices(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(Axis(1), idx),
            names: idx.iter().map(|&i| self.names[i].clone()).collect(),
            standardization: self
                .standardization
                .as_ref()
                .map(|s| idx.iter().map(|&i| s[i]).collect()),
        }
    }

    /// Appends the columns of `other` (same number of rows).
    pub fn hstack(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        if self.n_points() != other.n_points() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows vs {} rows",
                self.n_points(),
                other.n_points()
            )));
        }
        let values = ndarray::concatenate(Axis(1), &[self.values.view(), other.values.view()])
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        let names: Vec<String> = self.names.iter().chain(&other.names).cloned().collect();
        let standardization = match (&self.standardization, &other.standardization) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = names.iter().find(|n: &&String| !seen.insert(n.as_str())) {
            return Err(Error::InvalidParameter(format!("duplicate column `{dup}`")));
        }
        Ok(FeatureMatrix {
            values,
            names,
            standardization,
        })
    }

    /// CSV with a header row of feature names, one row per superpixel.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for row in self.values.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Averages each per-pixel map over every superpixel's valid pixels, then standardizes.
pub fn aggregate(maps: &[FeatureMap], superpixels: &SuperpixelMap) -> Result<FeatureMatrix> {
    let n = superpixels.count();
    if let Some(empty) = superpixels.sizes().iter().position(|&s| s == 0) {
        return Err(Error::EmptySuperpixel(empty));
    }
    let n_pixels = superpixels.labels().len();
    let mut values = Array2::zeros((n, maps.len()));
    for (j, map) in maps.iter().enumerate() {
        if map.values.len() != n_pixels {
            return Err(Error::DimensionMismatch(format!(
                "feature `{}` has {} values for {n_pixels} pixels",
                map.name,
                map.values.len()
            )));
        }
        for (label, &v) in superpixels.labels().iter().zip(&map.values) {
            if let Some(l) = label {
                values[[*l as usize, j]] += v;
            }
        }
        for (i, &size) in superpixels.sizes().iter().enumerate() {
            values[[i, j]] /= size as f64;
        }
    }
    let names = maps.iter().map(|m| m.name.clone()).collect();
    Ok(FeatureMatrix::new(values, names)?.standardized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_block_map() -> SuperpixelMap {
        SuperpixelMap::from_labels(4, 1, vec![Some(0), Some(0), Some(1), Some(1)]).unwrap()
    }

    #[test]
    fn two_point_standardization() {
        let maps = [FeatureMap {
            name: "x".into(),
            values: vec![1.0, 1.0, 3.0, 3.0],
        }];
        let fm = aggregate(&maps, &two_block_map()).unwrap();
        assert_eq!(fm.values().column(0).to_vec(), vec![-1.0, 1.0]);
        let s = fm.standardization().unwrap()[0];
        assert_eq!((s.mean, s.std), (2.0, 1.0));
    }

    #[test]
    fn constant_column_is_zero() {
        let maps = [FeatureMap {
            name: "c".into(),
            values: vec![0.7; 4],
        }];
        let fm = aggregate(&maps, &two_block_map()).unwrap();
        assert!(fm.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn three_point_population_std() {
        let map = SuperpixelMap::from_labels(3, 1, vec![Some(0), Some(1), Some(2)]).unwrap();
        let maps = [FeatureMap {
            name: "x".into(),
            values: vec![0.0, 1.0, 2.0],
        }];
        let fm = aggregate(&maps, &map).unwrap();
        // std = sqrt(2/3), so the outer points sit at ±sqrt(3/2)
        let expect = 1.5f64.sqrt();
        let col = fm.values().column(0).to_vec();
        assert!((col[0] + expect).abs() < 1e-12);
        assert_eq!(col[1], 0.0);
        assert!((col[2] - expect).abs() < 1e-12);
        assert!((col[2] - 1.2247).abs() < 1e-4);
    }

    #[test]
    fn masked_pixels_do_not_count() {
        let map = SuperpixelMap::from_labels(3, 1, vec![Some(0), None, Some(1)]).unwrap();
        let maps = [FeatureMap {
            name: "x".into(),
            values: vec![1.0, 100.0, 3.0],
        }];
        let fm = aggregate(&maps, &map).unwrap();
        assert_eq!(fm.values().column(0).to_vec(), vec![-1.0, 1.0]);
    }

    #[test]
    fn empty_superpixel_is_an_error() {
        let map = SuperpixelMap::from_labels(2, 1, vec![Some(0), Some(2)]).unwrap();
        let maps = [FeatureMap {
            name: "x".into(),
            values: vec![0.0, 1.0],
        }];
        assert!(matches!(aggregate(&maps, &map), Err(Error::EmptySuperpixel(1))));
    }

    #[test]
    fn csv_has_header() {
        let fm = FeatureMatrix::from_rows(&[vec![1.0, 2.5], vec![3.0, 4.0]]).unwrap();
        let mut out = Vec::new();
        fm.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "f0,f1\n1,2.5\n3,4\n");
    }

    #[test]
    fn select_and_stack() {
        let fm = FeatureMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let s = fm.select(&["f2", "f0"]).unwrap();
        assert_eq!(s.names(), &["f2".to_string(), "f0".to_string()]);
        assert_eq!(s.row(0).to_vec(), vec![3.0, 1.0]);
        assert!(fm.select(&["nope"]).is_err());
        assert!(fm.hstack(&fm).is_err(), "duplicate names");
    }

    proptest! {
        #[test]
        fn standardized_columns_have_unit_moments(
            rows in proptest::collection::vec(proptest::collection::vec(-50.0f64..50.0, 3), 2..40)
        ) {
            let fm = FeatureMatrix::from_rows(&rows).unwrap().standardized();
            let n = fm.n_points() as f64;
            for col in fm.values().columns() {
                let mean = col.sum() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-9);
                prop_assert!(col.iter().all(|&v| v == 0.0) || (var.sqrt() - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn aggregation_is_permutation_equivariant(
            values in proptest::collection::vec(0.0f64..1.0, 12),
            perm_seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let labels: Vec<u32> = (0..12).map(|i| (i / 3) as u32).collect();
            let mut perm: Vec<u32> = (0..4).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
            let a = SuperpixelMap::from_labels(12, 1, labels.iter().map(|&l| Some(l)).collect()).unwrap();
            let b = SuperpixelMap::from_labels(12, 1, labels.iter().map(|&l| Some(perm[l as usize])).collect()).unwrap();
            let maps = [FeatureMap { name: "v".into(), values }];
            let fa = aggregate(&maps, &a).unwrap();
            let fb = aggregate(&maps, &b).unwrap();
            for (old, &new) in perm.iter().enumerate() {
                let new = new as usize;
                prop_assert!((fa.values()[[old, 0]] - fb.values()[[new, 0]]).abs() < 1e-12);
            }
        }
    }
}
