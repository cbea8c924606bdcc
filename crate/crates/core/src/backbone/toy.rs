//! A small seeded convolutional backbone serialized as ONNX, used as a
//! stand-in for pretrained models in dataset-free tests.
//!
//! Architecture for a `(1, 3, 224, 224)` input:
//!
//! ```text
//! stem     AveragePool 2x2/2                        -> (3, 112, 112)
//! stage k  Conv 3x3 pad 1 -> AveragePool 2x2/2 -> Tanh
//!          channels 8, 16, 32, 64                   -> 56, 28, 14, 7
//! embedding ReduceMean over the spatial axes of stage4 -> (64)
//! ```

use std::path::Path;

use prost::Message;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tract_onnx::pb;

use super::BackboneSpec;
use crate::{Error, Result};

pub const TOY_INPUT_SIZE: usize = 224;
pub const TOY_CHANNELS: [usize; 4] = [8, 16, 32, 64];
pub const TOY_GRAPH_FILE: &str = "toy.onnx";
pub const TOY_SPEC_FILE: &str = "backbone.toml";
const OPSET: i64 = 13;

/// Generated toy graph plus the spec describing it.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyBackbone {
    pub spec: BackboneSpec,
    pub graph: Vec<u8>,
}

impl ToyBackbone {
    /// Writes `toy.onnx` and `backbone.toml` into `dir` (created if needed)
    /// and returns the spec with its graph path resolved.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<BackboneSpec> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let graph_path = dir.join(TOY_GRAPH_FILE);
        std::fs::write(&graph_path, &self.graph).map_err(|e| Error::io(&graph_path, e))?;
        let spec_path = dir.join(TOY_SPEC_FILE);
        std::fs::write(&spec_path, self.spec.to_toml_string()?)
            .map_err(|e| Error::io(&spec_path, e))?;
        let mut spec = self.spec.clone();
        spec.graph_path = graph_path;
        Ok(spec)
    }
}

fn attr_ints(name: &str, ints: &[i64]) -> pb::AttributeProto {
    pb::AttributeProto {
        name: name.into(),
        r#type: pb::attribute_proto::AttributeType::Ints as i32,
        ints: ints.to_vec(),
        ..Default::default()
    }
}

fn attr_int(name: &str, i: i64) -> pb::AttributeProto {
    pb::AttributeProto {
        name: name.into(),
        r#type: pb::attribute_proto::AttributeType::Int as i32,
        i,
        ..Default::default()
    }
}

fn node(op: &str, name: &str, inputs: &[&str], output: &str, attrs: Vec<pb::AttributeProto>) -> pb::NodeProto {
    pb::NodeProto {
        op_type: op.into(),
        name: name.into(),
        input: inputs.iter().map(|s| s.to_string()).collect(),
        output: vec![output.into()],
        attribute: attrs,
        ..Default::default()
    }
}

fn initializer(name: &str, dims: &[usize], values: &[f32]) -> pb::TensorProto {
    pb::TensorProto {
        name: name.into(),
        dims: dims.iter().map(|d| *d as i64).collect(),
        data_type: pb::tensor_proto::DataType::Float as i32,
        raw_data: values.iter().flat_map(|v| v.to_le_bytes()).collect(),
        ..Default::default()
    }
}

fn value_info(name: &str, dims: &[usize]) -> pb::ValueInfoProto {
    use pb::tensor_shape_proto::{dimension::Value, Dimension};
    pb::ValueInfoProto {
        name: name.into(),
        r#type: Some(pb::TypeProto {
            value: Some(pb::type_proto::Value::TensorType(pb::type_proto::Tensor {
                elem_type: pb::tensor_proto::DataType::Float as i32,
                shape: Some(pb::TensorShapeProto {
                    dim: dims
                        .iter()
                        .map(|d| Dimension {
                            value: Some(Value::DimValue(*d as i64)),
                            ..Default::default()
                        })
                        .collect(),
                }),
            })),
            ..Default::default()
        }),
        ..Default::default()
    }
}

/// Builds the toy backbone for `seed`. Equal seeds give byte-identical graphs.
pub fn toy_backbone(seed: u64) -> ToyBackbone {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = || vec![attr_ints("kernel_shape", &[2, 2]), attr_ints("strides", &[2, 2])];

    let mut nodes = vec![node("AveragePool", "stem", &["image"], "stem", pool())];
    let mut inits = Vec::new();
    let mut outputs = Vec::new();
    let mut prev = "stem".to_string();
    let mut in_ch = 3;
    let mut side = TOY_INPUT_SIZE / 2;
    let mut taps = Vec::new();

    for (k, &out_ch) in TOY_CHANNELS.iter().enumerate() {
        let stage = format!("stage{}", k + 1);
        let fan_in = (in_ch * 9) as f32;
        // He-uniform weights, small uniform biases
        let bound = (6.0 / fan_in).sqrt();
        let weights: Vec<f32> = (0..out_ch * in_ch * 9)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        let bias: Vec<f32> = (0..out_ch).map(|_| rng.random_range(-0.1..0.1)).collect();
        let (w_name, b_name) = (format!("{stage}.weight"), format!("{stage}.bias"));
        inits.push(initializer(&w_name, &[out_ch, in_ch, 3, 3], &weights));
        inits.push(initializer(&b_name, &[out_ch], &bias));

        let conv = format!("{stage}.conv");
        let down = format!("{stage}.pool");
        nodes.push(node(
            "Conv",
            &conv,
            &[&prev, &w_name, &b_name],
            &conv,
            vec![attr_ints("kernel_shape", &[3, 3]), attr_ints("pads", &[1, 1, 1, 1])],
        ));
        nodes.push(node("AveragePool", &down, &[&conv], &down, pool()));
        nodes.push(node("Tanh", &stage, &[&down], &stage, vec![]));

        side /= 2;
        outputs.push(value_info(&stage, &[1, out_ch, side, side]));
        taps.push(stage.clone());
        prev = stage;
        in_ch = out_ch;
    }

    nodes.push(node(
        "ReduceMean",
        "embedding",
        &[&prev],
        "embedding",
        vec![attr_ints("axes", &[2, 3]), attr_int("keepdims", 0)],
    ));
    outputs.push(value_info("embedding", &[1, in_ch]));

    let model = pb::ModelProto {
        ir_version: 7,
        opset_import: vec![pb::OperatorSetIdProto {
            domain: String::new(),
            version: OPSET,
        }],
        producer_name: "zsiqa-toy".into(),
        graph: Some(pb::GraphProto {
            name: format!("toy-{seed}"),
            node: nodes,
            initializer: inits,
            input: vec![value_info("image", &[1, 3, TOY_INPUT_SIZE, TOY_INPUT_SIZE])],
            output: outputs,
            ..Default::default()
        }),
        ..Default::default()
    };

    let spec = BackboneSpec {
        name: format!("toy-{seed}"),
        graph_path: TOY_GRAPH_FILE.into(),
        input_size: TOY_INPUT_SIZE,
        tile_stride: super::DEFAULT_TILE_STRIDE,
        mean: [0.5; 3],
        std: [0.25; 3],
        tap_points: taps,
        embedding_tap: "embedding".into(),
    };
    ToyBackbone {
        spec,
        graph: model.encode_to_vec(),
    }
}
