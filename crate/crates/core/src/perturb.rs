//! Small geometric perturbations applied to distorted images: horizontal
//! translation, dilation (zoom with center crop) and rotation.
//!
//! All three keep the image dimensions and return a bit-exact copy for their
//! identity parameter (`0`, `1`, `0°`).

use serde::{Deserialize, Serialize};

use crate::RgbImage;

/// How pixels whose source location falls outside the image are filled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fill {
    /// Replicate the nearest edge pixel.
    #[default]
    Edge,
    /// Fill with black.
    Black,
}

/// A parameterized geometric transform of the distorted image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    Translate { fraction: f64, fill: Fill },
    Dilate { factor: f64 },
    Rotate { degrees: f64, fill: Fill },
}

impl Transform {
    pub fn apply(&self, img: &RgbImage) -> RgbImage {
        match *self {
            Transform::Translate { fraction, fill } => translate_with(img, fraction, fill),
            Transform::Dilate { factor } => dilate(img, factor),
            Transform::Rotate { degrees, fill } => rotate_with(img, degrees, fill),
        }
    }
}

#[inline]
fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

#[inline]
fn to_u8(v: f64) -> u8 {
    round_half_up(v).clamp(0.0, 255.0) as u8
}

/// Number of pixels a `fraction` shift moves an image of `width` columns.
pub fn shift_pixels(width: usize, fraction: f64) -> usize {
    round_half_up(fraction * width as f64).max(0.0) as usize
}

/// Shifts the image content right by `round(fraction · width)` pixels,
/// filling the vacated left band by replicating the first column.
pub fn translate(img: &RgbImage, fraction: f64) -> RgbImage {
    translate_with(img, fraction, Fill::Edge)
}

pub fn translate_with(img: &RgbImage, fraction: f64, fill: Fill) -> RgbImage {
    assert!(
        (0.0..1.0).contains(&fraction),
        "translation fraction must lie in [0, 1), got {fraction}"
    );
    let shift = shift_pixels(img.width(), fraction);
    if shift == 0 {
        return img.clone();
    }
    RgbImage::from_fn(img.width(), img.height(), |x, y| {
        if x >= shift {
            img.pixel(x - shift, y)
        } else {
            match fill {
                Fill::Edge => img.pixel(0, y),
                Fill::Black => [0; 3],
            }
        }
    })
}

/// Size of the rescaled image and the offsets of the centered crop taken
/// back out of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DilationGeometry {
    pub scaled_width: usize,
    pub scaled_height: usize,
    pub crop_row: usize,
    pub crop_col: usize,
}

pub fn dilation_geometry(width: usize, height: usize, factor: f64) -> DilationGeometry {
    let scaled_width = (round_half_up(width as f64 * factor) as usize).max(width);
    let scaled_height = (round_half_up(height as f64 * factor) as usize).max(height);
    DilationGeometry {
        scaled_width,
        scaled_height,
        crop_row: (scaled_height - height) / 2,
        crop_col: (scaled_width - width) / 2,
    }
}

/// Bilinear sample at a fractional position with coordinates clamped to the
/// image, which replicates edge pixels.
fn sample_clamped(img: &RgbImage, sx: f64, sy: f64) -> [f64; 3] {
    let max_x = (img.width() - 1) as f64;
    let max_y = (img.height() - 1) as f64;
    let sx = sx.clamp(0.0, max_x);
    let sy = sy.clamp(0.0, max_y);
    let x0 = sx.floor();
    let y0 = sy.floor();
    let fx = sx - x0;
    let fy = sy - y0;
    let x0 = x0 as usize;
    let y0 = y0 as usize;
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let p00 = img.pixel(x0, y0);
    let p10 = img.pixel(x1, y0);
    let p01 = img.pixel(x0, y1);
    let p11 = img.pixel(x1, y1);
    let mut out = [0.0; 3];
    for c in 0..3 {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        out[c] = top * (1.0 - fy) + bottom * fy;
    }
    out
}

/// Enlarges the image by `factor` with bilinear interpolation and crops the
/// center back to the original size.
pub fn dilate(img: &RgbImage, factor: f64) -> RgbImage {
    assert!(factor >= 1.0, "dilation factor must be >= 1, got {factor}");
    if factor == 1.0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let geo = dilation_geometry(w, h, factor);
    let scale_x = w as f64 / geo.scaled_width as f64;
    let scale_y = h as f64 / geo.scaled_height as f64;
    RgbImage::from_fn(w, h, |x, y| {
        // pixel-center alignment between the scaled grid and the source grid
        let sx = ((x + geo.crop_col) as f64 + 0.5) * scale_x - 0.5;
        let sy = ((y + geo.crop_row) as f64 + 0.5) * scale_y - 0.5;
        sample_clamped(img, sx, sy).map(to_u8)
    })
}

/// Rotates the image clockwise (as displayed, rows growing downwards) by
/// `degrees` about its center. Negative angles rotate counter-clockwise.
pub fn rotate(img: &RgbImage, degrees: f64) -> RgbImage {
    rotate_with(img, degrees, Fill::Edge)
}

pub fn rotate_with(img: &RgbImage, degrees: f64, fill: Fill) -> RgbImage {
    assert!(degrees.is_finite(), "rotation angle must be finite");
    if degrees == 0.0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let (sin, cos) = degrees.to_radians().sin_cos();
    let max_x = (w - 1) as f64;
    let max_y = (h - 1) as f64;
    RgbImage::from_fn(w, h, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        // inverse of the clockwise rotation
        let sx = cx + dx * cos + dy * sin;
        let sy = cy - dx * sin + dy * cos;
        let outside = sx < 0.0 || sy < 0.0 || sx > max_x || sy > max_y;
        if outside && fill == Fill::Black {
            return [0; 3];
        }
        sample_clamped(img, sx, sy).map(to_u8)
    })
}
