//! Pair scoring: tile both images on the same grid, run the backbone on every
//! tile and pool the per-layer distances into one score.
//!
//! Pooling is uniform: the per-layer distances of a tile are averaged into
//! the tile score, and the tile scores are averaged into the pair score. No
//! image is ever resized; images smaller than the backbone input are
//! reflect-padded by the tiler.

use std::borrow::Cow;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::measures::layer_distance;
use crate::perturb::Transform;
use crate::tensor::preprocess;
use crate::tile::tile;
use crate::{BackboneSession, Error, MeasureConfig, Result, RgbImage};

/// Compare intermediate features or final embeddings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    Feats,
    Emb,
}

impl ScoreMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScoreMode::Feats => "feats",
            ScoreMode::Emb => "emb",
        }
    }
}

impl fmt::Display for ScoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "feats" => Ok(ScoreMode::Feats),
            "emb" => Ok(ScoreMode::Emb),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected feats or emb)"
            ))),
        }
    }
}

/// Where an image of a request comes from. File sources are decoded lazily
/// by the worker that scores the pair.
#[derive(Clone, Debug)]
pub enum ImageSource {
    Decoded(Arc<RgbImage>),
    File(PathBuf),
}

impl ImageSource {
    fn load(&self) -> Result<Cow<'_, RgbImage>> {
        match self {
            ImageSource::Decoded(img) => Ok(Cow::Borrowed(img.as_ref())),
            ImageSource::File(path) => RgbImage::open(path).map(Cow::Owned),
        }
    }
}

impl From<RgbImage> for ImageSource {
    fn from(img: RgbImage) -> Self {
        ImageSource::Decoded(Arc::new(img))
    }
}

impl From<PathBuf> for ImageSource {
    fn from(path: PathBuf) -> Self {
        ImageSource::File(path)
    }
}

#[derive(Clone, Debug)]
pub struct ScoreRequest {
    pub reference: ImageSource,
    pub distorted: ImageSource,
    pub mode: ScoreMode,
    pub measure: MeasureConfig,
    /// Geometric transform applied to the distorted image only.
    pub transform: Option<Transform>,
}

impl ScoreRequest {
    pub fn new(
        reference: impl Into<ImageSource>,
        distorted: impl Into<ImageSource>,
        mode: ScoreMode,
        measure: MeasureConfig,
    ) -> Self {
        Self {
            reference: reference.into(),
            distorted: distorted.into(),
            mode,
            measure,
            transform: None,
        }
    }

    pub fn with_transform(mut self, transform: Option<Transform>) -> Self {
        self.transform = transform;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerScore {
    pub layer: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileScore {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// A pair score with its decomposition. Lower means more similar.
///
/// `value` is the mean of the tile scores; in `feats` mode each tile score is
/// the mean of that tile's layer distances, and `per_layer` holds each
/// layer's distance averaged over tiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub value: f64,
    pub per_layer: Vec<LayerScore>,
    pub per_tile: Vec<TileScore>,
}

pub(crate) fn check_mode(mode: ScoreMode, measure: &MeasureConfig) -> Result<()> {
    measure.validate()?;
    if mode == ScoreMode::Emb && measure.kind.is_distributional() {
        return Err(Error::Config(format!(
            "measure {} is not defined on embeddings; use l2 or cos",
            measure.kind
        )));
    }
    Ok(())
}

/// Scores one decoded pair.
pub fn score_images(
    session: &BackboneSession,
    reference: &RgbImage,
    distorted: &RgbImage,
    mode: ScoreMode,
    measure: &MeasureConfig,
) -> Result<PairScore> {
    check_mode(mode, measure)?;
    if (reference.width(), reference.height()) != (distorted.width(), distorted.height()) {
        return Err(Error::Shape(format!(
            "reference is {}x{}, distorted is {}x{}",
            reference.width(),
            reference.height(),
            distorted.width(),
            distorted.height()
        )));
    }
    let spec = session.spec();
    let window = spec.input_size;
    let ref_tiles = tile(&preprocess(reference, spec.mean, spec.std)?, window, spec.tile_stride)?;
    let dist_tiles = tile(&preprocess(distorted, spec.mean, spec.std)?, window, spec.tile_stride)?;
    debug_assert_eq!(ref_tiles.origins, dist_tiles.origins);

    let layer_names: Vec<String> = match mode {
        ScoreMode::Feats => spec.tap_points.clone(),
        ScoreMode::Emb => vec![spec.embedding_tap.clone()],
    };
    let mut layer_sums = vec![0.0f64; layer_names.len()];
    let mut per_tile = Vec::with_capacity(ref_tiles.len());

    for ((r, d), &(row, col)) in ref_tiles
        .tiles
        .iter()
        .zip(&dist_tiles.tiles)
        .zip(&ref_tiles.origins)
    {
        let distances: Vec<f64> = match mode {
            ScoreMode::Feats => {
                let (fr, fd) = (session.forward_features(r)?, session.forward_features(d)?);
                fr.layers
                    .iter()
                    .zip(&fd.layers)
                    .map(|((_, a), (_, b))| layer_distance(a, b, measure))
                    .collect::<Result<_>>()?
            }
            ScoreMode::Emb => {
                let (er, ed) = (session.forward_embedding(r)?, session.forward_embedding(d)?);
                vec![layer_distance(&er.vector, &ed.vector, measure)?]
            }
        };
        for (sum, v) in layer_sums.iter_mut().zip(&distances) {
            *sum += v;
        }
        per_tile.push(TileScore {
            row,
            col,
            value: distances.iter().sum::<f64>() / distances.len() as f64,
        });
    }

    let tiles = per_tile.len() as f64;
    let value = per_tile.iter().map(|t| t.value).sum::<f64>() / tiles;
    let per_layer = layer_names
        .into_iter()
        .zip(layer_sums)
        .map(|(layer, sum)| LayerScore {
            layer,
            value: sum / tiles,
        })
        .collect();
    Ok(PairScore {
        value,
        per_layer,
        per_tile,
    })
}

/// Loads (and perturbs) the images of `req` and scores them.
pub fn score_pair(session: &BackboneSession, req: &ScoreRequest) -> Result<PairScore> {
    check_mode(req.mode, &req.measure)?;
    let reference = req.reference.load()?;
    let mut distorted = req.distorted.load()?;
    if let Some(t) = &req.transform {
        distorted = Cow::Owned(t.apply(&distorted));
    }
    score_images(session, &reference, &distorted, req.mode, &req.measure)
}

/// Scores many pairs on a pool of `workers` threads (0 is treated as 1).
///
/// Results keep the input order and do not depend on the worker count; a
/// failing pair yields an error in its slot without affecting the others.
pub fn score_batch(
    session: &BackboneSession,
    requests: &[ScoreRequest],
    workers: usize,
) -> Vec<Result<PairScore>> {
    let workers = workers.max(1);
    if workers == 1 || requests.len() <= 1 {
        return requests.iter().map(|r| score_pair(session, r)).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| {
            requests
                .par_iter()
                .map(|r| score_pair(session, r))
                .collect()
        }),
        Err(e) => {
            log::warn!("could not start {workers} workers ({e}); scoring sequentially");
            requests.iter().map(|r| score_pair(session, r)).collect()
        }
    }
}
