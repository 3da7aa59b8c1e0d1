//! Pixel-level primitives: the `Image` container, cropping, grayscale
//! conversion, PPM/PGM I/O and resizing.
//!
//! Images are stored row-major as `f64` in `[0, 1]`, 1 or 3 channels.

mod ppm;
mod resize;

pub use ppm::{load_image, save_image, save_pgm};
pub use resize::{resize, ResizeFilter};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt file: {0}")]
    CorruptFile(String),
    #[error("image has a zero dimension")]
    ZeroDimension,
    #[error("io failure: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("ideal low-pass resize unsupported: {0}")]
    IdealLowPassUnsupported(String),
    #[error("crop window out of bounds")]
    OutOfBounds,
    #[error("expected {expected} channels, got {got}")]
    WrongChannelCount { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, ImageError>;

/// A real-valued raster, row-major by (row, column, channel), values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    /// All-zero image. `channels` must be 1 or 3.
    pub fn new(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::validate_dims(height, width, channels)?;
        Ok(Self {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        })
    }

    /// Builds an image by evaluating `f(row, col, channel)`. Values are
    /// clamped into `[0, 1]`.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        Self::validate_dims(height, width, channels)?;
        let mut data = Vec::with_capacity(height * width * channels);
        for r in 0..height {
            for c in 0..width {
                for ch in 0..channels {
                    data.push(f(r, c, ch).clamp(0.0, 1.0));
                }
            }
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Wraps raw data (len must be `h*w*c`); values are clamped into `[0, 1]`.
    pub fn from_data(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        Self::validate_dims(height, width, channels)?;
        if data.len() != height * width * channels {
            return Err(ImageError::InvalidDimensions(format!(
                "data length {} != {}x{}x{}",
                data.len(),
                height,
                width,
                channels
            )));
        }
        let data = data.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    fn validate_dims(height: usize, width: usize, channels: usize) -> Result<()> {
        if height == 0 || width == 0 {
            return Err(ImageError::ZeroDimension);
        }
        if channels != 1 && channels != 3 {
            return Err(ImageError::InvalidDimensions(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + ch]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ch: usize, v: f64) {
        self.data[(row * self.width + col) * self.channels + ch] = v.clamp(0.0, 1.0);
    }

    /// Mean over all samples (all channels pooled).
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Exact pixel copy of the `h x w` window with top-left `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, h: usize, w: usize) -> Result<Image> {
        if h == 0 || w == 0 {
            return Err(ImageError::ZeroDimension);
        }
        if top + h > self.height || left + w > self.width {
            return Err(ImageError::OutOfBounds);
        }
        let mut data = Vec::with_capacity(h * w * self.channels);
        for r in 0..h {
            let src = ((top + r) * self.width + left) * self.channels;
            data.extend_from_slice(&self.data[src..src + w * self.channels]);
        }
        Ok(Image {
            height: h,
            width: w,
            channels: self.channels,
            data,
        })
    }

    /// BT.601 luma: Y = 0.299 R + 0.587 G + 0.114 B.
    pub fn to_luma(&self) -> Result<Image> {
        if self.channels != 3 {
            return Err(ImageError::WrongChannelCount {
                expected: 3,
                got: self.channels,
            });
        }
        let mut data = Vec::with_capacity(self.height * self.width);
        for px in self.data.chunks_exact(3) {
            data.push(0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]);
        }
        Ok(Image {
            height: self.height,
            width: self.width,
            channels: 1,
            data,
        })
    }

    /// Replicates a single channel into an RGB image (used by synthetic
    /// texture generators that work in luma space).
    pub fn luma_to_rgb(&self) -> Result<Image> {
        if self.channels != 1 {
            return Err(ImageError::WrongChannelCount {
                expected: 1,
                got: self.channels,
            });
        }
        let mut data = Vec::with_capacity(self.height * self.width * 3);
        for &v in &self.data {
            data.extend_from_slice(&[v, v, v]);
        }
        Ok(Image {
            height: self.height,
            width: self.width,
            channels: 3,
            data,
        })
    }
}

/// Peak signal-to-noise ratio in dB between two same-shaped images
/// (peak value 1.0). Returns `f64::INFINITY` for identical images.
pub fn psnr(a: &Image, b: &Image) -> f64 {
    assert_eq!(a.data.len(), b.data.len(), "psnr: shape mismatch");
    let mse = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.data.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    }
}

/// Mean squared error between two same-shaped images.
pub fn mse(a: &Image, b: &Image) -> f64 {
    assert_eq!(a.data.len(), b.data.len(), "mse: shape mismatch");
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.data.len() as f64
}
