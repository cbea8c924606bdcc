//! Seeded synthetic datasets with a known quality order: smooth references
//! distorted by additive Gaussian noise, with MOS = −σ.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::manifest::{write_manifest, EvalSample, Manifest, MosConvention};
use crate::{Error, Result, RgbImage};

/// A smooth random image: per channel, a sum of low-frequency plane waves
/// around mid-gray.
pub fn smooth_reference(width: usize, height: usize, seed: u64) -> RgbImage {
    const WAVES: usize = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut waves = [[(0.0f64, 0.0f64, 0.0f64, 0.0f64); WAVES]; 3];
    for channel in &mut waves {
        for w in channel.iter_mut() {
            let cycles: f64 = rng.random_range(0.5..4.0);
            let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let amplitude: f64 = rng.random_range(0.3..1.0);
            w.0 = cycles * angle.cos() * std::f64::consts::TAU / width as f64;
            w.1 = cycles * angle.sin() * std::f64::consts::TAU / height as f64;
            w.2 = phase;
            w.3 = amplitude;
        }
    }
    RgbImage::from_fn(width, height, |x, y| {
        let mut px = [0u8; 3];
        for (c, channel) in waves.iter().enumerate() {
            let norm: f64 = channel.iter().map(|w| w.3).sum();
            let v: f64 = channel
                .iter()
                .map(|w| w.3 * (w.0 * x as f64 + w.1 * y as f64 + w.2).sin())
                .sum::<f64>()
                / norm;
            px[c] = (127.5 + 90.0 * v).round().clamp(0.0, 255.0) as u8;
        }
        px
    })
}

/// A field of independent standard normal values, one per sample.
pub fn gaussian_field(len: usize, seed: u64) -> Vec<f64> {
    let rng = ChaCha8Rng::seed_from_u64(seed);
    rng.sample_iter(StandardNormal).take(len).collect()
}

/// `clamp(round(v + σ·255·z))` per sample; `z` must match the image length.
pub fn add_noise(img: &RgbImage, sigma: f64, z: &[f64]) -> RgbImage {
    assert_eq!(z.len(), img.data().len(), "noise field length");
    let data = img
        .data()
        .iter()
        .zip(z)
        .map(|(v, z)| (*v as f64 + sigma * 255.0 * z).round().clamp(0.0, 255.0) as u8)
        .collect();
    RgbImage::new(img.width(), img.height(), data).expect("same dimensions")
}

/// Layout of a synthetic dataset.
///
/// Reference `k` is distorted at `σ = level · spread^k` for every level, so
/// all pairs have distinct σ. `spread^(references−1)` must stay below the
/// ratio between consecutive levels for the levels to stay separated.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticPlan {
    pub references: usize,
    pub levels: Vec<f64>,
    pub spread: f64,
    pub size: usize,
    pub seed: u64,
}

impl Default for SyntheticPlan {
    /// 4 references × 5 noise levels = 20 pairs.
    fn default() -> Self {
        Self {
            references: 4,
            levels: vec![0.01, 0.02, 0.04, 0.08, 0.16],
            spread: 1.15,
            size: 64,
            seed: 7,
        }
    }
}

impl SyntheticPlan {
    pub fn sigma(&self, reference: usize, level: usize) -> f64 {
        self.levels[level] * self.spread.powi(reference as i32)
    }
}

/// Writes the images of `plan` under `dir` plus `dir/manifest.csv`, and
/// returns the manifest path.
pub fn write_synthetic_dataset(dir: impl AsRef<Path>, plan: &SyntheticPlan) -> Result<PathBuf> {
    let dir = dir.as_ref();
    for sub in ["ref", "dist"] {
        let d = dir.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let mut samples = Vec::new();
    for r in 0..plan.references {
        let seed = plan.seed.wrapping_add(r as u64);
        let reference = smooth_reference(plan.size, plan.size, seed);
        let z = gaussian_field(reference.data().len(), seed ^ 0x9e37_79b9_7f4a_7c15);
        let ref_path = dir.join(format!("ref/r{r}.png"));
        reference.save_png(&ref_path)?;
        for l in 0..plan.levels.len() {
            let sigma = plan.sigma(r, l);
            let dist_path = dir.join(format!("dist/r{r}_l{l}.png"));
            add_noise(&reference, sigma, &z).save_png(&dist_path)?;
            samples.push(EvalSample {
                ref_path: ref_path.clone(),
                dist_path,
                mos: -sigma,
            });
        }
    }
    let path = dir.join("manifest.csv");
    write_manifest(
        &Manifest {
            samples,
            convention: MosConvention::HigherBetter,
        },
        &path,
    )?;
    Ok(path)
}
