//! Dense row-major float tensors and image normalization.

use crate::{Error, RgbImage, Result};

/// A dense row-major `f32` tensor whose values are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput(format!(
                "non-finite value {} at flat index {i}",
                data[i]
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn from_vec(data: Vec<f32>) -> Result<Self> {
        Self::new(vec![data.len()], data)
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub(crate) fn ensure_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }
}

/// Normalization constants applied per RGB channel after scaling to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl Normalization {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.std.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
            return Err(Error::Config(format!(
                "normalization std must be strictly positive, got {s}"
            )));
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Config("normalization mean must be finite".into()));
        }
        Ok(())
    }
}

/// Converts an image into a `(3, H, W)` tensor holding
/// `(sample / 255 - mean[c]) / std[c]`.
pub fn preprocess(img: &RgbImage, mean: [f64; 3], std: [f64; 3]) -> Result<Tensor> {
    Normalization { mean, std }.validate()?;
    let (w, h) = (img.width(), img.height());
    let plane = w * h;
    // Lookup table per channel: 256 possible samples.
    let lut: Vec<[f32; 256]> = (0..3)
        .map(|c| {
            let mut t = [0f32; 256];
            for (s, v) in t.iter_mut().enumerate() {
                *v = ((s as f64 / 255.0 - mean[c]) / std[c]) as f32;
            }
            t
        })
        .collect();
    let mut data = vec![0f32; 3 * plane];
    for (i, px) in img.data().chunks_exact(3).enumerate() {
        for c in 0..3 {
            data[c * plane + i] = lut[c][px[c] as usize];
        }
    }
    Tensor::new(vec![3, h, w], data)
}
