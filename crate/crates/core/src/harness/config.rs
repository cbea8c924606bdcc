use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::measures::{MeasureConfig, MeasureKind, DEFAULT_EPSILON, DEFAULT_EUCLID_WEIGHT};
use crate::perturb::{Fill, Transform};
use crate::pipeline::ScoreMode;
use crate::{Error, Result};

/// Geometric condition under which the distorted images are scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perturbation {
    Original,
    Translation,
    Dilation,
    Rotation,
}

impl Perturbation {
    pub const ALL: [Perturbation; 4] = [
        Perturbation::Original,
        Perturbation::Translation,
        Perturbation::Dilation,
        Perturbation::Rotation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Perturbation::Original => "original",
            Perturbation::Translation => "translation",
            Perturbation::Dilation => "dilation",
            Perturbation::Rotation => "rotation",
        }
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Perturbation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Perturbation::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown perturbation `{s}`")))
    }
}

/// Magnitudes of the perturbations: 1% shift right, 1% zoom, 1° clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationParams {
    pub translate_fraction: f64,
    pub dilate_factor: f64,
    pub rotate_degrees: f64,
    pub fill: Fill,
}

impl Default for PerturbationParams {
    fn default() -> Self {
        Self {
            translate_fraction: 0.01,
            dilate_factor: 1.01,
            rotate_degrees: 1.0,
            fill: Fill::Edge,
        }
    }
}

impl PerturbationParams {
    /// The transform for `p`; `None` for [`Perturbation::Original`], which
    /// never touches the image.
    pub fn transform(&self, p: Perturbation) -> Option<Transform> {
        match p {
            Perturbation::Original => None,
            Perturbation::Translation => Some(Transform::Translate {
                fraction: self.translate_fraction,
                fill: self.fill,
            }),
            Perturbation::Dilation => Some(Transform::Dilate {
                factor: self.dilate_factor,
            }),
            Perturbation::Rotation => Some(Transform::Rotate {
                degrees: self.rotate_degrees,
                fill: self.fill,
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.translate_fraction) {
            return Err(Error::RunConfig(format!(
                "translate_fraction must lie in [0, 1), got {}",
                self.translate_fraction
            )));
        }
        if !(self.dilate_factor >= 1.0) || !self.dilate_factor.is_finite() {
            return Err(Error::RunConfig(format!(
                "dilate_factor must be >= 1, got {}",
                self.dilate_factor
            )));
        }
        if !(self.rotate_degrees.abs() < 45.0) {
            return Err(Error::RunConfig(format!(
                "rotate_degrees must lie in (-45, 45), got {}",
                self.rotate_degrees
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// JSON for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension() {
            Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

/// One evaluation run. Stored on disk as a flat TOML document; relative
/// paths are resolved against the config file's directory.
///
/// ```toml
/// manifest = "tid2013.csv"
/// backbone_spec = "models/dino_vitb16.toml"
/// mode = "feats"
/// kind = "cos"                # l2 | cos | skld | jsd | wsd
/// epsilon = 1e-10
/// euclid_weight = 1.0
/// perturbations = ["original", "translation", "dilation", "rotation"]
/// logistic_fit = false
/// workers = 4
/// output = "reports/dino_tid2013.csv"
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub backbone_spec: PathBuf,
    pub mode: ScoreMode,
    pub measure: MeasureConfig,
    pub perturbations: Vec<Perturbation>,
    pub logistic_fit: bool,
    pub workers: usize,
    pub output: PathBuf,
    /// Dataset label used in reports; defaults to the manifest file stem.
    pub dataset: Option<String>,
    /// Report format; defaults to the output file extension.
    pub format: Option<ReportFormat>,
    pub params: PerturbationParams,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_euclid_weight() -> f64 {
    DEFAULT_EUCLID_WEIGHT
}
fn default_workers() -> usize {
    1
}
fn default_perturbations() -> Vec<Perturbation> {
    vec![Perturbation::Original]
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    manifest: PathBuf,
    backbone_spec: PathBuf,
    mode: ScoreMode,
    #[serde(alias = "measure")]
    kind: MeasureKind,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_euclid_weight")]
    euclid_weight: f64,
    #[serde(default = "default_perturbations")]
    perturbations: Vec<Perturbation>,
    #[serde(default)]
    logistic_fit: bool,
    #[serde(default = "default_workers")]
    workers: usize,
    output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<ReportFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    translate_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dilate_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotate_degrees: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fill: Option<Fill>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.perturbations.is_empty() {
            return Err(Error::RunConfig("perturbations must not be empty".into()));
        }
        for (i, p) in self.perturbations.iter().enumerate() {
            if self.perturbations[..i].contains(p) {
                return Err(Error::RunConfig(format!("perturbation `{p}` listed twice")));
            }
        }
        self.measure
            .validate()
            .map_err(|e| Error::RunConfig(e.to_string()))?;
        self.params.validate()
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawRunConfig =
            toml::from_str(text).map_err(|e| Error::RunConfig(e.to_string()))?;
        let defaults = PerturbationParams::default();
        let cfg = RunConfig {
            manifest: base_dir.join(raw.manifest),
            backbone_spec: base_dir.join(raw.backbone_spec),
            mode: raw.mode,
            measure: MeasureConfig {
                kind: raw.kind,
                epsilon: raw.epsilon,
                euclid_weight: raw.euclid_weight,
            },
            perturbations: raw.perturbations,
            logistic_fit: raw.logistic_fit,
            workers: raw.workers,
            output: base_dir.join(raw.output),
            dataset: raw.dataset,
            format: raw.format,
            params: PerturbationParams {
                translate_fraction: raw.translate_fraction.unwrap_or(defaults.translate_fraction),
                dilate_factor: raw.dilate_factor.unwrap_or(defaults.dilate_factor),
                rotate_degrees: raw.rotate_degrees.unwrap_or(defaults.rotate_degrees),
                fill: raw.fill.unwrap_or(defaults.fill),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path.parent().unwrap_or_else(|| Path::new("")))
    }

    /// Serializes the config with paths as stored (no relativization).
    pub fn to_toml_string(&self) -> Result<String> {
        let raw = RawRunConfig {
            manifest: self.manifest.clone(),
            backbone_spec: self.backbone_spec.clone(),
            mode: self.mode,
            kind: self.measure.kind,
            epsilon: self.measure.epsilon,
            euclid_weight: self.measure.euclid_weight,
            perturbations: self.perturbations.clone(),
            logistic_fit: self.logistic_fit,
            workers: self.workers,
            output: self.output.clone(),
            dataset: self.dataset.clone(),
            format: self.format,
            translate_fraction: Some(self.params.translate_fraction),
            dilate_factor: Some(self.params.dilate_factor),
            rotate_degrees: Some(self.params.rotate_degrees),
            fill: Some(self.params.fill),
        };
        toml::to_string(&raw).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn dataset_name(&self) -> String {
        self.dataset.clone().unwrap_or_else(|| {
            self.manifest
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into())
        })
    }

    pub fn report_format(&self) -> ReportFormat {
        self.format
            .unwrap_or_else(|| ReportFormat::from_path(&self.output))
    }
}
