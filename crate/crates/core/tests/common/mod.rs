#![allow(dead_code)]

use std::path::Path;

use zsiqa::backbone::{load_backbone, toy_backbone};
use zsiqa::harness::synthetic::{add_noise, gaussian_field, smooth_reference};
use zsiqa::{BackboneSession, BackboneSpec, RgbImage};

pub const TOY_SEED: u64 = 42;

/// Writes the toy backbone into `dir` and returns its spec.
pub fn toy_spec(dir: &Path) -> BackboneSpec {
    toy_backbone(TOY_SEED).write_to(dir).unwrap()
}

pub fn toy_session(dir: &Path) -> BackboneSession {
    load_backbone(&toy_spec(dir)).unwrap()
}

/// One seeded reference plus its noisy versions for each σ, all sharing one
/// noise field.
pub fn noise_ladder(size: usize, sigmas: &[f64]) -> (RgbImage, Vec<RgbImage>) {
    let reference = smooth_reference(size, size, 11);
    let z = gaussian_field(reference.data().len(), 12);
    let noisy = sigmas.iter().map(|s| add_noise(&reference, *s, &z)).collect();
    (reference, noisy)
}
