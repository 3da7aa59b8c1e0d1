//! Resizing with controlled frequency semantics.
//!
//! Two filters: `Bilinear` (half-pixel-center convention, general purpose)
//! and `IdealLowPass` (DFT truncation, even-sized downsampling only). The
//! ideal filter is what the spectral experiments reason about; bilinear is
//! what practical pipelines use.

use num_complex::Complex64;

use super::{Image, ImageError, Result};
use crate::fft::{fft2, ifft2_unnormalized};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResizeFilter {
    /// Exact DFT truncation. Requires even input and output dimensions with
    /// output <= input.
    IdealLowPass,
    /// Half-pixel-center bilinear interpolation.
    Bilinear,
}

/// Resizes `img` to `out_h x out_w`. Same-size calls return an exact copy.
pub fn resize(img: &Image, out_h: usize, out_w: usize, filter: ResizeFilter) -> Result<Image> {
    if out_h == 0 || out_w == 0 {
        return Err(ImageError::InvalidDimensions(
            "output dimensions must be positive".into(),
        ));
    }
    if out_h == img.height() && out_w == img.width() {
        return Ok(img.clone());
    }
    match filter {
        ResizeFilter::Bilinear => Ok(bilinear(img, out_h, out_w)),
        ResizeFilter::IdealLowPass => ideal_low_pass(img, out_h, out_w),
    }
}

fn bilinear(img: &Image, out_h: usize, out_w: usize) -> Image {
    let (h, w, ch) = (img.height(), img.width(), img.channels());
    let scale_r = h as f64 / out_h as f64;
    let scale_c = w as f64 / out_w as f64;
    Image::from_fn(out_h, out_w, ch, |r, c, k| {
        let sr = ((r as f64 + 0.5) * scale_r - 0.5).clamp(0.0, (h - 1) as f64);
        let sc = ((c as f64 + 0.5) * scale_c - 0.5).clamp(0.0, (w - 1) as f64);
        let r0 = sr.floor() as usize;
        let c0 = sc.floor() as usize;
        let r1 = (r0 + 1).min(h - 1);
        let c1 = (c0 + 1).min(w - 1);
        let fr = sr - r0 as f64;
        let fc = sc - c0 as f64;
        let top = img.get(r0, c0, k) * (1.0 - fc) + img.get(r0, c1, k) * fc;
        let bot = img.get(r1, c0, k) * (1.0 - fc) + img.get(r1, c1, k) * fc;
        top * (1.0 - fr) + bot * fr
    })
    .expect("validated dimensions")
}

/// DFT-truncation downsample, per channel: forward FFT, keep the centered
/// block of frequencies below the output Nyquist rate (scaled by
/// `out_area / in_area`), inverse FFT. The output Nyquist row/column carries
/// ambiguous content on a strictly smaller grid and is zeroed.
fn ideal_low_pass(img: &Image, out_h: usize, out_w: usize) -> Result<Image> {
    let (h, w) = (img.height(), img.width());
    if out_h > h || out_w > w {
        return Err(ImageError::IdealLowPassUnsupported(
            "ideal low-pass only downsamples".into(),
        ));
    }
    if h % 2 != 0 || w % 2 != 0 || out_h % 2 != 0 || out_w % 2 != 0 {
        return Err(ImageError::IdealLowPassUnsupported(
            "all dimensions must be even".into(),
        ));
    }
    let scale = (out_h * out_w) as f64 / (h * w) as f64;
    let mut out = Image::new(out_h, out_w, img.channels())?;
    for ch in 0..img.channels() {
        let grid: Vec<Complex64> = (0..h * w)
            .map(|i| Complex64::new(img.get(i / w, i % w, ch), 0.0))
            .collect();
        let spec = fft2(h, w, grid);

        // Gather surviving bins into the smaller grid. Unshifted index k maps
        // to signed frequency r = k for k < n/2, else k - n.
        let mut small = vec![Complex64::default(); out_h * out_w];
        for (ko, bin) in small.iter_mut().enumerate() {
            let (ro, co) = (ko / out_w, ko % out_w);
            let r_freq = signed_freq(ro, out_h);
            let c_freq = signed_freq(co, out_w);
            let keep_r = out_h == h || r_freq.unsigned_abs() < (out_h / 2) as u32;
            let keep_c = out_w == w || c_freq.unsigned_abs() < (out_w / 2) as u32;
            if keep_r && keep_c {
                let ri = r_freq.rem_euclid(h as i32) as usize;
                let ci = c_freq.rem_euclid(w as i32) as usize;
                *bin = spec[ri * w + ci] * scale;
            }
        }
        let back = ifft2_unnormalized(out_h, out_w, small);
        let norm = (out_h * out_w) as f64;
        for (ko, v) in back.iter().enumerate() {
            out.set(ko / out_w, ko % out_w, ch, v.re / norm);
        }
    }
    Ok(out)
}

#[inline]
fn signed_freq(k: usize, n: usize) -> i32 {
    if k < n - n / 2 {
        k as i32
    } else {
        k as i32 - n as i32
    }
}
