//! Texture segmentation with possibilistic fuzzy local-information c-means.
//!
//! The crate runs a grayscale raster through SLIC superpixels, a bank of
//! texture features aggregated per superpixel, and one of four clustering
//! algorithms (K-Means, FLICM, PFCM, PFLICM). Xie-Beni style validity indices
//! score partitions and drive greedy forward feature selection and parameter
//! grid search.

// `!(x > 0.0)` style checks are kept because they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod config;
pub mod error;
pub mod features;
pub mod pipeline;
pub mod raster;
pub mod selection;
pub mod superpixel;
pub mod synthetic;
pub mod validity;

pub use clustering::{fit, Algorithm, Partition, SolverConfig};
pub use config::{Mode, RunConfig};
pub use error::{Error, Result};
pub use features::{FeatureMatrix, FeatureSpec};
pub use raster::Raster;
pub use superpixel::{slic, SpatialGraph, SuperpixelMap};
pub use validity::{IndexKind, ValidityScore};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/superpixels.md")]
    mod superpixels {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/clustering.md")]
    mod clustering {}
    #[doc = include_str!("../../../book/src/validity.md")]
    mod validity {}
    #[doc = include_str!("../../../book/src/selection.md")]
    mod selection {}
    #[doc = include_str!("../../../book/src/synthetic.md")]
    mod synthetic {}
    #[doc = include_str!("../../../book/src/batch.md")]
    mod batch {}
}
