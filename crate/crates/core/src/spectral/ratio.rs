//! Real/fake spectral energy-ratio maps: the resize-vs-crop experiment.
//!
//! For each preprocessing mode the per-bin ratio
//! `mean_real |X|^2 / mean_fake |X|^2` is computed over two image sets.
//! A crop keeps the high-band gap between real and generated textures
//! visible; an ideal resize truncates exactly the band where they differ.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dft2, Result, SpectralError};
use crate::image::{resize, Image, ResizeFilter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioMode {
    /// Ideal low-pass downsample to the target size (requires images at
    /// least twice the target on both sides, even dimensions).
    Resize,
    /// Seeded random crop of the target size at native resolution.
    Crop,
}

/// Square per-frequency-bin ratio grid, centered indexing like
/// [`super::SpectrumGrid`].
#[derive(Debug, Clone)]
pub struct RatioMap {
    size: usize,
    values: Vec<f64>,
}

impl RatioMap {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(r1, r2, ratio)` over bins.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let half = (self.size / 2) as i64;
        self.values.iter().enumerate().map(move |(idx, &v)| {
            (
                (idx / self.size) as i64 - half,
                (idx % self.size) as i64 - half,
                v,
            )
        })
    }
}

/// Per-bin real/fake energy ratio after the chosen preprocessing.
///
/// Crop offsets are drawn from a ChaCha stream seeded with `seed`, so the map
/// is reproducible. Images may be RGB (luma is analyzed) or grayscale.
pub fn energy_ratio_map(
    real_set: &[Image],
    fake_set: &[Image],
    mode: RatioMode,
    out_size: usize,
    seed: u64,
) -> Result<RatioMap> {
    if real_set.is_empty() || fake_set.is_empty() {
        return Err(SpectralError::EmptySet);
    }
    if out_size == 0 {
        return Err(SpectralError::InvalidDimensions("out_size must be positive".into()));
    }
    // The crop stream restarts per set, so identical sets get identical
    // crops and the ratio map degenerates to all ones.
    let real_mean = mean_energy(real_set, mode, out_size, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let fake_mean = mean_energy(fake_set, mode, out_size, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let values = real_mean
        .iter()
        .zip(&fake_mean)
        .map(|(&r, &f)| {
            if f == 0.0 {
                // Both sides empty (e.g. a truncated Nyquist row) carries no
                // evidence either way.
                if r == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                r / f
            }
        })
        .collect();
    Ok(RatioMap { size: out_size, values })
}

fn mean_energy(
    set: &[Image],
    mode: RatioMode,
    out_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let mut acc = vec![0.0f64; out_size * out_size];
    for img in set {
        let luma = if img.channels() == 3 { img.to_luma()? } else { img.clone() };
        let view = match mode {
            RatioMode::Resize => {
                let need = 2 * out_size;
                if luma.height() < need || luma.width() < need {
                    return Err(SpectralError::ImageTooSmall {
                        need,
                        got_h: luma.height(),
                        got_w: luma.width(),
                    });
                }
                resize(&luma, out_size, out_size, ResizeFilter::IdealLowPass)?
            }
            RatioMode::Crop => {
                if luma.height() < out_size || luma.width() < out_size {
                    return Err(SpectralError::ImageTooSmall {
                        need: out_size,
                        got_h: luma.height(),
                        got_w: luma.width(),
                    });
                }
                let top = rng.gen_range(0..=luma.height() - out_size);
                let left = rng.gen_range(0..=luma.width() - out_size);
                luma.crop(top, left, out_size, out_size)?
            }
        };
        for (slot, v) in acc.iter_mut().zip(dft2(&view).values()) {
            *slot += v.norm_sqr();
        }
    }
    let n = set.len() as f64;
    Ok(acc.into_iter().map(|v| v / n).collect())
}

/// Mean ratio over bins whose Chebyshev frequency radius
/// `max(|r1|, |r2|)` strictly exceeds `min_radius`.
pub fn band_mean_ratio(map: &RatioMap, min_radius: i64) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (r1, r2, v) in map.iter() {
        if r1.abs().max(r2.abs()) > min_radius {
            sum += v;
            count += 1;
        }
    }
    sum / count.max(1) as f64
}

/// CSV export: one `(row, col, ratio)` line per frequency bin, preceded by a
/// `# seed=` header comment.
pub fn write_ratio_csv(map: &RatioMap, path: impl AsRef<Path>, seed: u64) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# seed={seed}")?;
    writeln!(w, "row,col,ratio")?;
    for (r1, r2, v) in map.iter() {
        writeln!(w, "{r1},{r2},{v}")?;
    }
    Ok(())
}

/// 8-bit PGM heatmap: log10 ratio clamped to [-2, 2] mapped onto [0, 255].
pub fn write_ratio_pgm(map: &RatioMap, path: impl AsRef<Path>, seed: u64) -> Result<()> {
    let img = Image::from_fn(map.size, map.size, 1, |r, c, _| {
        let ratio = map.values[r * map.size + c];
        let log = if ratio <= 0.0 { -2.0 } else { ratio.log10().clamp(-2.0, 2.0) };
        (log + 2.0) / 4.0
    })?;
    crate::image::save_pgm(&img, path, Some(&format!("seed={seed}")))?;
    Ok(())
}
