//! Texture feature bank.
//!
//! Each [`FeatureSpec`] names one registered extractor and its parameters.
//! [`extract`] turns a raster into a per-pixel scalar map; [`aggregate`]
//! averages every map over each superpixel and standardizes the columns into a
//! [`FeatureMatrix`].
//!
//! | extractor | parameters (default) |
//! |---|---|
//! | `sobel` | |
//! | `hog` | `window` (9), `bins` (9) |
//! | `lbp` | |
//! | `mean`, `variance` | `window` (9) |
//! | `shape` | `window` (9) |
//! | `haralick_contrast`, `haralick_correlation`, `haralick_energy`, `haralick_homogeneity` | `window` (9), `levels` (8), `offset_row` (0), `offset_col` (1) |
//! | `gabor` | `theta` (0), `frequency` (0.25), `sigma` (2) |
//! | `gaussian`, `log` | `sigma` (2) |
//! | `lacunarity` | `window` (9), `box` (3) |
//! | `intensity` | |
//!
//! `shape` is structure-tensor anisotropy, a stand-in for dedicated
//! shape descriptors. `hog` is reduced to the L2 norm of the local histogram
//! and `lbp` to its rotation-invariant uniform code so both yield scalars.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

mod filters;
pub mod glcm;
mod matrix;

pub use matrix::{aggregate, FeatureMatrix};

/// Registered extractor names, in default bank order.
pub const EXTRACTORS: [&str; 15] = [
    "sobel",
    "hog",
    "lbp",
    "mean",
    "variance",
    "shape",
    "haralick_contrast",
    "haralick_correlation",
    "haralick_energy",
    "haralick_homogeneity",
    "gabor",
    "gaussian",
    "lacunarity",
    "log",
    "intensity",
];

const DEFAULT_WINDOW: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    /// Column name; unique within a bank.
    pub name: String,
    /// Extractor to run. Defaults to `name`, so several parameterizations of
    /// one extractor can coexist under different names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl FeatureSpec {
    pub fn new(name: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn with_kind(mut self, kind: impl Into<String>) -> Self {
        self.kind = Some(kind.into());
        self
    }

    pub fn extractor(&self) -> &str {
        self.kind.as_deref().unwrap_or(&self.name)
    }
}

/// All fifteen extractors with default parameters.
pub fn default_bank() -> Vec<FeatureSpec> {
    EXTRACTORS.iter().map(|&n| FeatureSpec::new(n)).collect()
}

/// Checks extractor names, parameter keys and name uniqueness without touching pixels.
pub fn validate_bank(bank: &[FeatureSpec]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for spec in bank {
        if !seen.insert(spec.name.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "duplicate feature name `{}`",
                spec.name
            )));
        }
        let allowed = allowed_params(spec.extractor())?;
        if let Some(key) = spec.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!(
                "feature `{}` does not take parameter `{key}`",
                spec.name
            )));
        }
    }
    Ok(())
}

fn allowed_params(extractor: &str) -> Result<&'static [&'static str]> {
    Ok(match extractor {
        "sobel" | "lbp" | "intensity" => &[],
        "hog" => &["window", "bins"],
        "mean" | "variance" | "shape" => &["window"],
        "haralick_contrast" | "haralick_correlation" | "haralick_energy"
        | "haralick_homogeneity" => &["window", "levels", "offset_row", "offset_col"],
        "gabor" => &["theta", "frequency", "sigma"],
        "gaussian" | "log" => &["sigma"],
        "lacunarity" => &["window", "box"],
        other => return Err(Error::UnknownFeature(other.to_string())),
    })
}

struct Params<'a>(&'a FeatureSpec);

impl Params<'_> {
    fn real(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.0.params.get(key).copied().unwrap_or(default);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!(
                "{}.{key} must be finite",
                self.0.name
            )))
        }
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.real(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!(
                "{}.{key} must be positive, got {v}",
                self.0.name
            )))
        }
    }

    fn integer(&self, key: &str, default: usize) -> Result<i64> {
        let v = self.real(key, default as f64)?;
        if v.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{}.{key} must be an integer, got {v}",
                self.0.name
            )));
        }
        Ok(v as i64)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.integer(key, default)?;
        if v < 1 {
            return Err(Error::InvalidParameter(format!(
                "{}.{key} must be at least 1, got {v}",
                self.0.name
            )));
        }
        Ok(v as usize)
    }

    /// Odd window side that fits inside the raster.
    fn window(&self, raster: &Raster) -> Result<usize> {
        let w = self.count("window", DEFAULT_WINDOW)?;
        if w % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "{}.window must be odd, got {w}",
                self.0.name
            )));
        }
        if w > raster.width() || w > raster.height() {
            return Err(Error::WindowTooLarge {
                window: w,
                width: raster.width(),
                height: raster.height(),
            });
        }
        Ok(w)
    }
}

/// Runs one extractor. The result has one value per pixel; masked pixels hold 0.
pub fn extract(raster: &Raster, spec: &FeatureSpec) -> Result<Vec<f64>> {
    validate_bank(std::slice::from_ref(spec))?;
    let p = Params(spec);
    let map = match spec.extractor() {
        "sobel" => filters::sobel(raster),
        "hog" => filters::hog(raster, p.window(raster)?, p.count("bins", 9)?),
        "lbp" => filters::lbp(raster),
        "mean" => filters::local_mean(raster, p.window(raster)?),
        "variance" => filters::local_variance(raster, p.window(raster)?),
        "shape" => filters::shape_anisotropy(raster, p.window(raster)?),
        name @ ("haralick_contrast"
        | "haralick_correlation"
        | "haralick_energy"
        | "haralick_homogeneity") => {
            let window = p.window(raster)?;
            let levels = p.count("levels", 8)?;
            if !(2..=256).contains(&levels) {
                return Err(Error::InvalidParameter(format!(
                    "{}.levels must lie in [2, 256]",
                    spec.name
                )));
            }
            let offset = (
                p.integer("offset_row", 0)? as isize,
                p.integer("offset_col", 1)? as isize,
            );
            if offset == (0, 0) {
                return Err(Error::InvalidParameter(format!(
                    "{}: GLCM offset must be nonzero",
                    spec.name
                )));
            }
            match name {
                "haralick_contrast" => filters::haralick(raster, window, levels, offset, |s| s.contrast),
                "haralick_correlation" => {
                    filters::haralick(raster, window, levels, offset, |s| s.correlation)
                }
                "haralick_energy" => filters::haralick(raster, window, levels, offset, |s| s.energy),
                _ => filters::haralick(raster, window, levels, offset, |s| s.homogeneity),
            }
        }
        "gabor" => filters::gabor(
            raster,
            p.real("theta", 0.0)?,
            p.positive("frequency", 0.25)?,
            p.positive("sigma", 2.0)?,
        ),
        "gaussian" => filters::gaussian(raster, p.positive("sigma", 2.0)?),
        "lacunarity" => {
            let window = p.window(raster)?;
            let box_size = p.count("box", 3)?;
            if box_size > window {
                return Err(Error::InvalidParameter(format!(
                    "{}.box ({box_size}) exceeds window ({window})",
                    spec.name
                )));
            }
            filters::lacunarity(raster, window, box_size)
        }
        "log" => filters::laplacian_of_gaussian(raster, p.positive("sigma", 2.0)?),
        "intensity" => filters::intensity(raster),
        other => return Err(Error::UnknownFeature(other.to_string())),
    };
    debug_assert!(map.iter().all(|v| v.is_finite()));
    Ok(map)
}

/// A named per-pixel feature map.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub name: String,
    pub values: Vec<f64>,
}

/// Runs a whole bank. Extractors are independent and run in parallel; the
/// output order follows the bank.
pub fn extract_bank(raster: &Raster, bank: &[FeatureSpec]) -> Result<Vec<FeatureMap>> {
    validate_bank(bank)?;
    bank.par_iter()
        .map(|spec| {
            Ok(FeatureMap {
                name: spec.name.clone(),
                values: extract(raster, spec)?,
            })
        })
        .collect()
}
