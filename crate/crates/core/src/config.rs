//! Run configuration for the batch pipeline.
//!
//! A run is described by one TOML file:
//!
//! ```toml
//! mode = "select"
//! input = "seabed.png"
//! output = "out"
//!
//! [superpixels]
//! target_count = 300
//!
//! [[features]]
//! name = "mean"
//!
//! [[features]]
//! name = "gabor_45"
//! kind = "gabor"
//! params = { theta = 0.785 }
//!
//! [solver]
//! algorithm = "pflicm"
//! clusters = 3
//!
//! [selection]
//! index = "xb"
//! n_seeds = 5
//! ```
//!
//! Relative paths are resolved against the directory holding the file.
//! Instead of `input`, a `[scene]` table renders a synthetic image.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clustering::SolverConfig;
use crate::error::{Error, Result};
use crate::features::{default_bank, validate_bank, FeatureSpec};
use crate::selection::GridSpec;
use crate::superpixel::SlicParams;
use crate::synthetic::SceneSpec;
use crate::validity::IndexKind;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Fit,
    Select,
    Grid,
    Baseline,
    Features,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Fit => "fit",
            Mode::Select => "select",
            Mode::Grid => "grid",
            Mode::Baseline => "baseline",
            Mode::Features => "features",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionSettings {
    pub index: IndexKind,
    pub n_seeds: usize,
    /// Fixed subset for `fit`, `grid` and `baseline`; all features when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<String>>,
    /// Pool the random baseline draws from; all features when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pool: Option<Vec<String>>,
    pub trials: usize,
    pub baseline_seed: u64,
}

impl Default for SelectionSettings {
    fn default() -> Self {
        SelectionSettings {
            index: IndexKind::Xb,
            n_seeds: 5,
            subset: None,
            pool: None,
            trials: 10,
            baseline_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneInput {
    pub seed: u64,
    pub spec: SceneSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Mask image; defaults to the `<stem>.mask.png` sidecar when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneInput>,
    #[serde(default)]
    pub superpixels: SlicParams,
    #[serde(default = "default_bank")]
    pub features: Vec<FeatureSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub selection: SelectionSettings,
    #[serde(default)]
    pub grid: GridSpec,
}

/// Config echo written next to the outputs; loading it replays the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: String,
    /// Every solver seed the run used, ascending.
    pub seeds: Vec<u64>,
    pub config: RunConfig,
}

impl RunConfig {
    /// Default settings for an image file; every other field takes its default.
    pub fn for_input(input: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        RunConfig {
            mode: Mode::default(),
            input: Some(input.into()),
            mask: None,
            output: output.into(),
            scene: None,
            superpixels: SlicParams::default(),
            features: default_bank(),
            solver: SolverConfig::default(),
            selection: SelectionSettings::default(),
            grid: GridSpec::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML config, or a JSON manifest written by an earlier run.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str::<Manifest>(&text)
                .map(|m| m.config)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            Self::from_toml_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        if let Some(dir) = path.parent() {
            config.resolve_relative_to(dir);
        }
        Ok(config)
    }

    fn resolve_relative_to(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        self.input.as_mut().map(fix);
        self.mask.as_mut().map(fix);
        fix(&mut self.output);
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    /// The subset used by `fit`, `grid` and `baseline`.
    pub fn subset(&self) -> Vec<String> {
        self.selection
            .subset
            .clone()
            .unwrap_or_else(|| self.feature_names())
    }

    /// Checks everything that can be checked without reading pixels.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match (&self.input, &self.scene) {
            (None, None) => return bad("either `input` or `[scene]` is required".into()),
            (Some(_), Some(_)) => return bad("`input` and `[scene]` are exclusive".into()),
            _ => {}
        }
        if self.scene.is_some() && self.mask.is_some() {
            return bad("`mask` cannot be combined with `[scene]`".into());
        }
        if self.features.is_empty() {
            return bad("feature bank is empty".into());
        }
        validate_bank(&self.features)?;
        self.solver.validate()?;
        if self.selection.n_seeds == 0 {
            return bad("selection.n_seeds must be positive".into());
        }
        if self.selection.index == IndexKind::Vxb && !self.solver.algorithm.is_possibilistic() {
            return bad(format!(
                "vxb needs a possibilistic algorithm, got {}",
                self.solver.algorithm
            ));
        }
        let names: BTreeSet<String> = self.feature_names().into_iter().collect();
        let check = |list: &Option<Vec<String>>, what: &str| -> Result<()> {
            if let Some(list) = list {
                if list.is_empty() {
                    return bad(format!("selection.{what} is empty"));
                }
                let mut seen = BTreeSet::new();
                for n in list {
                    if !names.contains(n) {
                        return bad(format!("selection.{what} names unknown feature `{n}`"));
                    }
                    if !seen.insert(n) {
                        return bad(format!("selection.{what} repeats `{n}`"));
                    }
                }
            }
            Ok(())
        };
        check(&self.selection.subset, "subset")?;
        check(&self.selection.pool, "pool")?;
        if self.mode == Mode::Baseline {
            let k = self.subset().len();
            let pool = self.selection.pool.as_ref().map_or(names.len(), Vec::len);
            if k > pool {
                return bad(format!("baseline subset of {k} exceeds pool of {pool}"));
            }
            if self.selection.trials == 0 {
                return bad("selection.trials must be positive".into());
            }
        }
        if self.mode == Mode::Grid {
            self.grid.cells()?;
        }
        if self.superpixels.target_count == 0 {
            return bad("superpixels.target_count must be positive".into());
        }
        Ok(())
    }
}
