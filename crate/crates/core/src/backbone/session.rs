use std::sync::Arc;

use tract_onnx::prelude::*;

use super::BackboneSpec;
use crate::{Error, Result, Tensor};

/// Activations of every tap point for one input tile, in tap order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStack {
    pub layers: Vec<(String, Tensor)>,
}

impl FeatureStack {
    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.layers.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// A model's final representation of a tile, flattened to one vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub vector: Tensor,
}

type Plan = Arc<TypedRunnableModel>;

/// A loaded backbone, immutable after construction and shareable across
/// threads; every forward pass spawns its own execution state.
pub struct BackboneSession {
    spec: BackboneSpec,
    plan: Plan,
    /// Plan output index of each tap point.
    tap_outputs: Vec<usize>,
    embedding_output: usize,
}

impl std::fmt::Debug for BackboneSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BackboneSession")
            .field("spec", &self.spec)
            .finish_non_exhaustive()
    }
}

fn graph_err(e: impl std::fmt::Display) -> Error {
    Error::Graph(format!("{e:#}"))
}

fn resolve(model: &InferenceModel, name: &str) -> Option<OutletId> {
    model
        .find_outlet_label(name)
        .or_else(|| model.node_by_name(name).ok().map(|n| OutletId::new(n.id, 0)))
}

/// Loads the graph named by `spec` and exposes its tap points as outputs.
pub fn load_backbone(spec: &BackboneSpec) -> Result<BackboneSession> {
    spec.validate()?;
    let bytes = std::fs::read(&spec.graph_path).map_err(|e| Error::io(&spec.graph_path, e))?;
    let mut model = tract_onnx::onnx()
        .model_for_read(&mut bytes.as_slice())
        .map_err(graph_err)?;

    let s = spec.input_size;
    model
        .set_input_fact(0, f32::fact([1, 3, s, s]).into())
        .map_err(graph_err)?;

    // Deduplicated output list; taps may coincide with the embedding.
    let mut outlets: Vec<OutletId> = Vec::new();
    let mut index_of = |outlet: OutletId| -> usize {
        match outlets.iter().position(|o| *o == outlet) {
            Some(i) => i,
            None => {
                outlets.push(outlet);
                outlets.len() - 1
            }
        }
    };
    let mut tap_outputs = Vec::with_capacity(spec.tap_points.len());
    for name in &spec.tap_points {
        let outlet = resolve(&model, name)
            .ok_or_else(|| Error::Spec(format!("unresolvable tap point {name:?}")))?;
        tap_outputs.push(index_of(outlet));
    }
    let embedding_outlet = resolve(&model, &spec.embedding_tap).ok_or_else(|| {
        Error::Spec(format!("unresolvable embedding tap {:?}", spec.embedding_tap))
    })?;
    let embedding_output = index_of(embedding_outlet);

    model.select_output_outlets(&outlets).map_err(graph_err)?;
    let plan = model
        .into_optimized()
        .and_then(|m| m.into_runnable())
        .map_err(graph_err)?;

    Ok(BackboneSession {
        spec: spec.clone(),
        plan,
        tap_outputs,
        embedding_output,
    })
}

/// Drops a leading batch axis of size one.
fn to_tensor(value: &tract_onnx::prelude::Tensor, what: &str) -> Result<Tensor> {
    let cast = value.cast_to::<f32>().map_err(graph_err)?;
    let view = cast.to_plain_array_view::<f32>().map_err(graph_err)?;
    let mut shape = value.shape().to_vec();
    if shape.len() > 1 && shape[0] == 1 {
        shape.remove(0);
    }
    let data: Vec<f32> = view.iter().copied().collect();
    Tensor::new(shape, data).map_err(|e| match e {
        Error::DegenerateInput(msg) => Error::DegenerateInput(format!("{what}: {msg}")),
        other => other,
    })
}

impl BackboneSession {
    pub fn spec(&self) -> &BackboneSpec {
        &self.spec
    }

    pub fn input_size(&self) -> usize {
        self.spec.input_size
    }

    fn run(&self, tile: &Tensor) -> Result<TVec<TValue>> {
        let s = self.spec.input_size;
        if tile.shape() != [3, s, s] {
            return Err(Error::Shape(format!(
                "backbone {} expects a (3, {s}, {s}) tile, got {:?}",
                self.spec.name,
                tile.shape()
            )));
        }
        let input = tract_ndarray::Array4::from_shape_vec((1, 3, s, s), tile.data().to_vec())
            .expect("tile length checked by shape")
            .into_tensor();
        self.plan.run(tvec!(input.into())).map_err(graph_err)
    }

    fn stack_from(&self, outputs: &[TValue]) -> Result<FeatureStack> {
        let layers = self
            .spec
            .tap_points
            .iter()
            .zip(&self.tap_outputs)
            .map(|(name, &ix)| Ok((name.clone(), to_tensor(&outputs[ix], name)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureStack { layers })
    }

    fn embedding_from(&self, outputs: &[TValue]) -> Result<Embedding> {
        let t = to_tensor(&outputs[self.embedding_output], &self.spec.embedding_tap)?;
        Ok(Embedding {
            vector: Tensor::from_vec(t.into_data())?,
        })
    }

    /// Intermediate activations of every tap point for one preprocessed tile.
    pub fn forward_features(&self, tile: &Tensor) -> Result<FeatureStack> {
        let outputs = self.run(tile)?;
        self.stack_from(&outputs)
    }

    /// The embedding of one preprocessed tile, flattened to a vector.
    pub fn forward_embedding(&self, tile: &Tensor) -> Result<Embedding> {
        let outputs = self.run(tile)?;
        self.embedding_from(&outputs)
    }

    /// Features and embedding from a single forward pass.
    pub fn forward(&self, tile: &Tensor) -> Result<(FeatureStack, Embedding)> {
        let outputs = self.run(tile)?;
        Ok((self.stack_from(&outputs)?, self.embedding_from(&outputs)?))
    }
}
