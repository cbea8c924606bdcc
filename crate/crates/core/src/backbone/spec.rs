use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::tensor::Normalization;
use crate::{Error, Result};

pub const DEFAULT_INPUT_SIZE: usize = 224;
pub const DEFAULT_TILE_STRIDE: usize = 200;

fn default_input_size() -> usize {
    DEFAULT_INPUT_SIZE
}

fn default_tile_stride() -> usize {
    DEFAULT_TILE_STRIDE
}

/// Declarative description of a backbone graph and how to feed it.
///
/// Stored on disk as a flat TOML document:
///
/// ```toml
/// name = "dino-vitb16"
/// graph_path = "dino_vitb16.onnx"
/// input_size = 224
/// tile_stride = 200
/// mean = [0.485, 0.456, 0.406]
/// std = [0.229, 0.224, 0.225]
/// tap_points = ["block0", "block1"]
/// embedding_tap = "embedding"
/// ```
///
/// A relative `graph_path` is resolved against the directory of the spec file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackboneSpec {
    pub name: String,
    pub graph_path: PathBuf,
    /// Side of the square model input, also the tile window.
    #[serde(default = "default_input_size")]
    pub input_size: usize,
    #[serde(default = "default_tile_stride")]
    pub tile_stride: usize,
    pub mean: [f64; 3],
    pub std: [f64; 3],
    /// Intermediate tensors, shallow to deep.
    pub tap_points: Vec<String>,
    pub embedding_tap: String,
}

impl BackboneSpec {
    pub fn normalization(&self) -> Normalization {
        Normalization {
            mean: self.mean,
            std: self.std,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Spec("name is empty".into()));
        }
        if self.input_size == 0 {
            return Err(Error::Spec("input_size must be at least 1".into()));
        }
        if self.tile_stride == 0 {
            return Err(Error::Spec("tile_stride must be at least 1".into()));
        }
        if self.tap_points.is_empty() {
            return Err(Error::Spec("tap_points is empty".into()));
        }
        if let Some(t) = self.tap_points.iter().find(|t| t.trim().is_empty()) {
            return Err(Error::Spec(format!("blank tap point name {t:?}")));
        }
        if self.embedding_tap.trim().is_empty() {
            return Err(Error::Spec("embedding_tap is empty".into()));
        }
        self.normalization()
            .validate()
            .map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: BackboneSpec = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Reads a spec file, resolving `graph_path` relative to its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec = Self::from_toml_str(&text)
            .map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
        if spec.graph_path.is_relative() {
            if let Some(dir) = path.parent() {
                spec.graph_path = dir.join(&spec.graph_path);
            }
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "toy"
graph_path = "toy.onnx"
input_size = 224
tile_stride = 200
mean = [0.5, 0.5, 0.5]
std = [0.25, 0.25, 0.25]
tap_points = ["stage1", "stage2"]
embedding_tap = "embedding"
"#;

    #[test]
    fn parses_and_round_trips() {
        let spec = BackboneSpec::from_toml_str(SAMPLE).unwrap();
        assert_eq!(spec.tap_points, vec!["stage1", "stage2"]);
        let again = BackboneSpec::from_toml_str(&spec.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn defaults_for_geometry() {
        let text = SAMPLE
            .lines()
            .filter(|l| !l.starts_with("input_size") && !l.starts_with("tile_stride"))
            .collect::<Vec<_>>()
            .join("\n");
        let spec = BackboneSpec::from_toml_str(&text).unwrap();
        assert_eq!((spec.input_size, spec.tile_stride), (224, 200));
    }

    #[test]
    fn invariant_violations() {
        for (from, to) in [
            ("input_size = 224", "input_size = 0"),
            ("tile_stride = 200", "tile_stride = 0"),
            (r#"tap_points = ["stage1", "stage2"]"#, "tap_points = []"),
            (r#"embedding_tap = "embedding""#, r#"embedding_tap = """#),
            ("std = [0.25, 0.25, 0.25]", "std = [0.25, 0.0, 0.25]"),
        ] {
            let err = BackboneSpec::from_toml_str(&SAMPLE.replace(from, to)).unwrap_err();
            assert!(matches!(err, Error::Spec(_)), "{to}: {err:?}");
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{SAMPLE}\nextra = 1\n");
        assert!(matches!(BackboneSpec::from_toml_str(&text), Err(Error::Spec(_))));
    }

    #[test]
    fn graph_path_is_resolved_against_spec_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("backbone.toml");
        std::fs::write(&path, SAMPLE).unwrap();
        let spec = BackboneSpec::from_file(&path).unwrap();
        assert_eq!(spec.graph_path, dir.path().join("toy.onnx"));
    }
}
