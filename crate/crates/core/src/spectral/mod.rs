//! Frequency-domain analysis of resizing versus cropping.
//!
//! Resizing an image is, for an ideal low-pass filter, a centered truncation
//! of its DFT: every coefficient outside the surviving block is gone for
//! good. Cropping instead multiplies by a rectangular window, which convolves
//! the spectrum with a Dirichlet kernel — content leaks but remains present,
//! and a full tile partition reconstructs the original DTFT exactly through
//! phase shifts. This module implements those identities and the real/fake
//! energy-ratio experiment built on them.

mod partition;
mod ratio;
mod window;

pub use partition::{reconstruct_spectrum, split_into_tiles, TilePartition};
pub use ratio::{
    band_mean_ratio, energy_ratio_map, write_ratio_csv, write_ratio_pgm, RatioMap, RatioMode,
};
pub use window::{tile_dtft, window_spectrum, window_spectrum_at, FrequencySample};

use num_complex::Complex64;
use thiserror::Error;

use crate::fft::{fft2, ifft2_unnormalized};
use crate::image::{Image, ImageError};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("partition does not match tile grid: {0}")]
    PartitionMismatch(String),
    #[error("image set is empty")]
    EmptySet,
    #[error("image too small: need at least {need} px on both sides, got {got_h}x{got_w}")]
    ImageTooSmall { need: usize, got_h: usize, got_w: usize },
    #[error(transparent)]
    Image(#[from] ImageError),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

/// Complex 2D spectrum with centered frequency indexing.
///
/// Frequencies run `-(n/2) <= r < n - n/2` per axis, so bin `(0, 0)` is DC.
#[derive(Debug, Clone)]
pub struct SpectrumGrid {
    rows: usize,
    cols: usize,
    values: Vec<Complex64>,
}

impl SpectrumGrid {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Inclusive lower / exclusive upper frequency bounds for an axis of
    /// length `n`.
    pub fn freq_range(n: usize) -> (i64, i64) {
        (-((n / 2) as i64), (n - n / 2) as i64)
    }

    #[inline]
    fn index(&self, r1: i64, r2: i64) -> usize {
        let i = (r1 + (self.rows / 2) as i64) as usize;
        let j = (r2 + (self.cols / 2) as i64) as usize;
        i * self.cols + j
    }

    /// Coefficient at centered frequency `(r1, r2)`.
    #[inline]
    pub fn get(&self, r1: i64, r2: i64) -> Complex64 {
        self.values[self.index(r1, r2)]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Iterates `(r1, r2, value)` over all bins.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        let (rlo, _) = Self::freq_range(self.rows);
        let (clo, _) = Self::freq_range(self.cols);
        self.values.iter().enumerate().map(move |(idx, &v)| {
            let i = (idx / self.cols) as i64;
            let j = (idx % self.cols) as i64;
            (i + rlo, j + clo, v)
        })
    }

    /// Total spectral energy, sum of |X|^2.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Max deviation from conjugate symmetry `X[-r] = conj(X[r])` (indices
    /// mod grid size). Zero for spectra of real images, up to rounding.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let (rlo, rhi) = Self::freq_range(self.rows);
        let (clo, chi) = Self::freq_range(self.cols);
        let mut worst = 0.0f64;
        for (r1, r2, v) in self.iter() {
            let mr1 = wrap(-r1, rlo, rhi, self.rows);
            let mr2 = wrap(-r2, clo, chi, self.cols);
            let mirror = self.get(mr1, mr2);
            worst = worst.max((mirror - v.conj()).norm());
        }
        worst
    }
}

fn wrap(r: i64, lo: i64, hi: i64, n: usize) -> i64 {
    if r < lo {
        r + n as i64
    } else if r >= hi {
        r - n as i64
    } else {
        r
    }
}

/// 2D DFT of a single-channel image, centered indexing, unnormalized
/// (Parseval: sum |pixel|^2 = sum |X|^2 / (rows*cols)).
pub fn dft2(img: &Image) -> SpectrumGrid {
    assert_eq!(img.channels(), 1, "dft2 expects a single-channel image");
    let (h, w) = (img.height(), img.width());
    let grid: Vec<Complex64> = img.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let spec = fft2(h, w, grid);
    SpectrumGrid {
        rows: h,
        cols: w,
        values: shift_to_centered(h, w, &spec),
    }
}

/// Inverse of [`dft2`]: real part of the inverse transform, clamped to
/// `[0, 1]` so the result is a valid image.
pub fn idft2(spec: &SpectrumGrid) -> Image {
    let (h, w) = (spec.rows, spec.cols);
    let unshifted = shift_from_centered(h, w, &spec.values);
    let back = ifft2_unnormalized(h, w, unshifted);
    let norm = (h * w) as f64;
    Image::from_data(h, w, 1, back.iter().map(|v| v.re / norm).collect())
        .expect("dimensions come from a valid spectrum")
}

/// Centered crop of a spectrum per the ideal-low-pass resize identity:
/// surviving bins are scaled by `out_area / in_area`; frequencies at or above
/// the output Nyquist rate are discarded. Truncating to the same size on an
/// axis keeps that axis intact.
pub fn truncate_spectrum(
    spec: &SpectrumGrid,
    out_rows: usize,
    out_cols: usize,
) -> Result<SpectrumGrid> {
    if out_rows > spec.rows || out_cols > spec.cols {
        return Err(SpectralError::InvalidDimensions(
            "output must not exceed input".into(),
        ));
    }
    if out_rows % 2 != 0 || out_cols % 2 != 0 || spec.rows % 2 != 0 || spec.cols % 2 != 0 {
        return Err(SpectralError::InvalidDimensions(
            "truncation requires even dimensions".into(),
        ));
    }
    let scale = (out_rows * out_cols) as f64 / (spec.rows * spec.cols) as f64;
    let mut values = vec![Complex64::default(); out_rows * out_cols];
    let (rlo, _) = SpectrumGrid::freq_range(out_rows);
    let (clo, _) = SpectrumGrid::freq_range(out_cols);
    for (idx, v) in values.iter_mut().enumerate() {
        let r1 = (idx / out_cols) as i64 + rlo;
        let r2 = (idx % out_cols) as i64 + clo;
        let keep_r = out_rows == spec.rows || (r1.unsigned_abs() as usize) < out_rows / 2;
        let keep_c = out_cols == spec.cols || (r2.unsigned_abs() as usize) < out_cols / 2;
        if keep_r && keep_c {
            *v = spec.get(r1, r2) * scale;
        }
    }
    Ok(SpectrumGrid {
        rows: out_rows,
        cols: out_cols,
        values,
    })
}

fn shift_to_centered(rows: usize, cols: usize, unshifted: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); rows * cols];
    for (k, &v) in unshifted.iter().enumerate() {
        let (kr, kc) = (k / cols, k % cols);
        let i = (kr + rows / 2) % rows;
        let j = (kc + cols / 2) % cols;
        out[i * cols + j] = v;
    }
    out
}

fn shift_from_centered(rows: usize, cols: usize, centered: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); rows * cols];
    for (idx, &v) in centered.iter().enumerate() {
        let (i, j) = (idx / cols, idx % cols);
        let kr = (i + rows - rows / 2) % rows;
        let kc = (j + cols - cols / 2) % cols;
        out[kr * cols + kc] = v;
    }
    out
}
