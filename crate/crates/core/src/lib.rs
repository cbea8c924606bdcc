//! Training-free full-reference image quality assessment.
//!
//! A distorted image is compared against its reference through the
//! activations of a pretrained vision backbone: both images are cut into
//! overlapping square tiles, every tile is pushed through the backbone, and a
//! distance or distribution measure is evaluated between the two activation
//! stacks (`feats` mode) or between the two final embeddings (`emb` mode).
//! Lower scores mean more similar images.
//!
//! The [`harness`] module turns these scores into PLCC/SRCC/KRCC against
//! subjective scores of an IQA dataset, optionally after a small geometric
//! perturbation of the distorted image.

pub mod backbone;
mod error;
pub mod harness;
pub mod image;
pub mod measures;
pub mod perturb;
pub mod pipeline;
pub mod tensor;
pub mod tile;

pub use crate::backbone::{BackboneSession, BackboneSpec, Embedding, FeatureStack};
pub use crate::error::{Error, Result};
pub use crate::image::RgbImage;
pub use crate::measures::{MeasureConfig, MeasureKind};
pub use crate::pipeline::{PairScore, ScoreMode, ScoreRequest};
pub use crate::tensor::Tensor;
