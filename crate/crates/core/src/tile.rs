//! Sliding-window tiling of `(3, H, W)` tensors.
//!
//! Window starts along an axis are `0, stride, 2·stride, …`; when the last
//! regular window stops short of the edge, one more window is placed flush
//! against it (start `dim - window`). Axes shorter than the window are
//! reflect-padded on the far side first, so every tile is full-sized and
//! every pixel is covered.

use crate::{Error, Result, Tensor};

/// Tiles cut from one image together with their `(row, col)` origins.
#[derive(Clone, Debug, PartialEq)]
pub struct TileSet {
    pub window: usize,
    pub tiles: Vec<Tensor>,
    pub origins: Vec<(usize, usize)>,
}

impl TileSet {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }
}

/// Window start offsets along one axis of length `dim`.
///
/// `dim` smaller than `window` yields `[0]` (the axis gets padded).
pub fn axis_starts(dim: usize, window: usize, stride: usize) -> Vec<usize> {
    assert!(window >= 1 && stride >= 1);
    if dim <= window {
        return vec![0];
    }
    let last = dim - window;
    let mut starts: Vec<usize> = (0..=last).step_by(stride).collect();
    if *starts.last().unwrap() != last {
        starts.push(last);
    }
    starts
}

/// Row-major list of tile origins for an `height × width` image.
pub fn tile_origins(height: usize, width: usize, window: usize, stride: usize) -> Vec<(usize, usize)> {
    let rows = axis_starts(height, window, stride);
    let cols = axis_starts(width, window, stride);
    rows.iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
        .collect()
}

/// Mirror index into `0..n` without repeating the edge sample (`dcb|abcd|cba`).
fn reflect(i: usize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let m = i % period;
    if m < n {
        m
    } else {
        period - m
    }
}

/// Cuts `t` (shaped `(C, H, W)`) into `window × window` tiles.
pub fn tile(t: &Tensor, window: usize, stride: usize) -> Result<TileSet> {
    if window == 0 || stride == 0 {
        return Err(Error::Config(format!(
            "tile window and stride must be positive, got window={window} stride={stride}"
        )));
    }
    let &[channels, height, width] = t.shape() else {
        return Err(Error::Shape(format!(
            "tiling expects a (C, H, W) tensor, got {:?}",
            t.shape()
        )));
    };
    let padded_h = height.max(window);
    let padded_w = width.max(window);
    let origins = tile_origins(padded_h, padded_w, window, stride);
    let data = t.data();
    let mut tiles = Vec::with_capacity(origins.len());
    for &(row, col) in &origins {
        let mut out = Vec::with_capacity(channels * window * window);
        for c in 0..channels {
            let plane = &data[c * height * width..(c + 1) * height * width];
            for y in row..row + window {
                let sy = reflect(y, height);
                let src = &plane[sy * width..(sy + 1) * width];
                if col + window <= width {
                    out.extend_from_slice(&src[col..col + window]);
                } else {
                    out.extend((col..col + window).map(|x| src[reflect(x, width)]));
                }
            }
        }
        tiles.push(Tensor::new(vec![channels, window, window], out)?);
    }
    Ok(TileSet {
        window,
        tiles,
        origins,
    })
}
