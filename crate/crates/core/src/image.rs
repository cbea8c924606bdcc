//! 8-bit RGB images and decoding of PNG, BMP and baseline JPEG streams.

use std::path::Path;

use crate::{Error, Result};

/// An interleaved, row-major 8-bit RGB image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!(
                "image dimensions must be nonzero, got {width}x{height}"
            )));
        }
        if data.len() != width * height * 3 {
            return Err(Error::Shape(format!(
                "{width}x{height} RGB image needs {} samples, got {}",
                width * height * 3,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be nonzero");
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Decodes an encoded PNG, BMP or JPEG stream.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        decode_image(bytes)
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        decode_image(&bytes).map_err(|e| match e {
            Error::Decode(msg) => Error::Decode(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Writes the image as PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let buf = image::RgbImage::from_raw(self.width as u32, self.height as u32, self.data.clone())
            .expect("buffer length checked at construction");
        buf.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(path, io),
                other => Error::Decode(other.to_string()),
            })
    }
}

/// Decodes an encoded image, dropping any alpha channel.
///
/// Only PNG, BMP and JPEG are accepted; the container is sniffed from the
/// stream header rather than trusted from a file extension.
pub fn decode_image(bytes: &[u8]) -> Result<RgbImage> {
    let format = image::guess_format(bytes).map_err(|e| Error::Decode(e.to_string()))?;
    match format {
        image::ImageFormat::Png | image::ImageFormat::Bmp | image::ImageFormat::Jpeg => {}
        other => {
            return Err(Error::Decode(format!("unsupported image format {other:?}")));
        }
    }
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::Decode(e.to_string()))?
        .to_rgb8();
    let (w, h) = decoded.dimensions();
    RgbImage::new(w as usize, h as usize, decoded.into_raw())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode(img: &RgbImage, format: image::ImageFormat) -> Vec<u8> {
        let buf =
            image::RgbImage::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
                .unwrap();
        let mut out = std::io::Cursor::new(Vec::new());
        buf.write_to(&mut out, format).unwrap();
        out.into_inner()
    }

    #[test]
    fn white_png_pixel() {
        let img = RgbImage::new(1, 1, vec![255, 255, 255]).unwrap();
        let decoded = decode_image(&encode(&img, image::ImageFormat::Png)).unwrap();
        assert_eq!(decoded, img);
    }

    #[test]
    fn bmp_is_pixel_exact() {
        let img = RgbImage::new(2, 1, vec![0, 0, 0, 255, 0, 0]).unwrap();
        let bytes = encode(&img, image::ImageFormat::Bmp);
        assert_eq!(&bytes[..2], b"BM");
        let decoded = decode_image(&bytes).unwrap();
        assert_eq!(decoded.data(), &[0, 0, 0, 255, 0, 0]);
    }

    #[test]
    fn truncated_png_is_decode_error() {
        let img = RgbImage::from_fn(16, 16, |x, y| [x as u8, y as u8, 7]);
        let bytes = encode(&img, image::ImageFormat::Png);
        let err = decode_image(&bytes[..bytes.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::Decode(_)), "{err:?}");
    }

    #[test]
    fn jpeg_decodes_close_to_source() {
        let img = RgbImage::from_fn(8, 8, |_, _| [120, 60, 200]);
        let decoded = decode_image(&encode(&img, image::ImageFormat::Jpeg)).unwrap();
        assert_eq!((decoded.width(), decoded.height()), (8, 8));
        for (a, b) in decoded.data().iter().zip(img.data()) {
            assert!((*a as i32 - *b as i32).abs() <= 4);
        }
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(matches!(decode_image(b"not an image"), Err(Error::Decode(_))));
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(RgbImage::new(2, 2, vec![0; 11]).is_err());
        assert!(RgbImage::new(0, 2, vec![]).is_err());
    }
}
