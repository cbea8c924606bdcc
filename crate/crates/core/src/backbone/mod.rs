//! Vision backbones loaded from ONNX graphs.
//!
//! A [`BackboneSpec`] names the graph file, the input geometry and
//! normalization, the intermediate tensors to tap and the tensor holding the
//! final embedding. [`load_backbone`] turns it into a [`BackboneSession`]
//! that runs forward passes on preprocessed tiles. Any tensor of the graph can
//! be tapped, not only declared graph outputs.
//!
//! Tap outputs with a leading batch axis of one have it removed, so
//! convolutional taps arrive as `(channels, h, w)` and token taps as
//! `(tokens, dim)`.

mod session;
mod spec;
pub mod toy;

pub use session::{load_backbone, BackboneSession, Embedding, FeatureStack};
pub use spec::{BackboneSpec, DEFAULT_INPUT_SIZE, DEFAULT_TILE_STRIDE};
pub use toy::{toy_backbone, ToyBackbone, TOY_GRAPH_FILE, TOY_SPEC_FILE};
