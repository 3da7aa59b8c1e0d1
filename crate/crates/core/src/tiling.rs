//! Tile planning for the dual-path pipeline.
//!
//! Inference uses a deterministic full-coverage grid: `ceil(L/P)` tiles per
//! axis, the first at 0, the last at `L - P`, intermediate starts at
//! `floor(L * i / N)`. Training samples tile origins uniformly at random
//! instead; both guarantee every tile lies inside the image. Images smaller
//! than the tile are first brought up to size by a short-side resize.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::image::{resize, Image, ResizeFilter};

#[derive(Debug, Error)]
pub enum TilingError {
    #[error("image side {side} is smaller than tile size {tile}")]
    ImageSmallerThanTile { side: usize, tile: usize },
}

pub type Result<T> = std::result::Result<T, TilingError>;

/// A set of `tile_size`-square tile origins inside a `source_h x source_w`
/// image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePlan {
    pub tile_size: usize,
    pub origins: Vec<(usize, usize)>,
    pub source_h: usize,
    pub source_w: usize,
}

impl TilePlan {
    /// True when every pixel of the source is inside at least one tile.
    /// Exact for plans whose origins form a Cartesian product (axis coverage
    /// implies grid coverage).
    pub fn covers_everything(&self) -> bool {
        let mut row_cov = vec![false; self.source_h];
        let mut col_cov = vec![false; self.source_w];
        for &(top, left) in &self.origins {
            for r in row_cov.iter_mut().skip(top).take(self.tile_size) {
                *r = true;
            }
            for c in col_cov.iter_mut().skip(left).take(self.tile_size) {
                *c = true;
            }
        }
        row_cov.iter().all(|&b| b) && col_cov.iter().all(|&b| b)
    }

    /// Cuts the planned tiles out of `img` in plan order.
    pub fn extract(&self, img: &Image) -> Vec<Image> {
        self.origins
            .iter()
            .map(|&(top, left)| {
                img.crop(top, left, self.tile_size, self.tile_size)
                    .expect("plan origins are in bounds")
            })
            .collect()
    }
}

/// Training-time tile count bounds (inclusive) and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
}

impl SamplingConfig {
    pub fn new(k_min: usize, k_max: usize, seed: u64) -> Self {
        assert!(k_min >= 1 && k_min <= k_max, "need 1 <= k_min <= k_max");
        Self { k_min, k_max, seed }
    }
}

impl Default for SamplingConfig {
    /// 1 to 16 tiles per image.
    fn default() -> Self {
        Self { k_min: 1, k_max: 16, seed: 0 }
    }
}

/// Tile start positions along one axis of length `L` for tile size `P`:
/// `N = ceil(L/P)` starts, `x_i = floor(L*(i-1)/N)` for the first `N-1`,
/// and the last at `L - P`.
pub fn axis_starts(len: usize, tile: usize) -> Result<Vec<usize>> {
    if len < tile {
        return Err(TilingError::ImageSmallerThanTile { side: len, tile });
    }
    let n = len.div_ceil(tile);
    let mut starts = Vec::with_capacity(n);
    for i in 1..n {
        starts.push(len * (i - 1) / n);
    }
    starts.push(len - tile);
    Ok(starts)
}

/// Deterministic full-coverage plan: the Cartesian product of per-axis
/// starts.
pub fn full_coverage_plan(h: usize, w: usize, tile: usize) -> Result<TilePlan> {
    let rows = axis_starts(h, tile)?;
    let cols = axis_starts(w, tile)?;
    let mut origins = Vec::with_capacity(rows.len() * cols.len());
    for &top in &rows {
        for &left in &cols {
            origins.push((top, left));
        }
    }
    Ok(TilePlan { tile_size: tile, origins, source_h: h, source_w: w })
}

/// Single centered tile (the center-crop evaluation baseline).
pub fn center_crop_plan(h: usize, w: usize, tile: usize) -> Result<TilePlan> {
    if h < tile || w < tile {
        return Err(TilingError::ImageSmallerThanTile { side: h.min(w), tile });
    }
    Ok(TilePlan {
        tile_size: tile,
        origins: vec![((h - tile) / 2, (w - tile) / 2)],
        source_h: h,
        source_w: w,
    })
}

/// Short-side normalization: images with both sides >= `tile` pass through;
/// smaller ones are bilinearly resized so the short side is exactly `tile`,
/// preserving aspect ratio (long side rounded to nearest, floored at `tile`).
pub fn normalize_small(img: &Image, tile: usize) -> Image {
    let (h, w) = (img.height(), img.width());
    if h.min(w) >= tile {
        return img.clone();
    }
    let ratio = tile as f64 / h.min(w) as f64;
    let out_h = ((h as f64 * ratio).round() as usize).max(tile);
    let out_w = ((w as f64 * ratio).round() as usize).max(tile);
    resize(img, out_h, out_w, ResizeFilter::Bilinear).expect("positive output dimensions")
}

/// Random training tiles: K uniform in
/// `[k_min, min(k_max, ceil(h/P)*ceil(w/P))]`, origins uniform over all valid
/// positions (not grid aligned). Exact duplicate origins are re-drawn up to
/// 10 times, then kept.
pub fn sample_training_tiles(
    h: usize,
    w: usize,
    tile: usize,
    cfg: &SamplingConfig,
) -> Result<TilePlan> {
    if h < tile {
        return Err(TilingError::ImageSmallerThanTile { side: h, tile });
    }
    if w < tile {
        return Err(TilingError::ImageSmallerThanTile { side: w, tile });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cap = h.div_ceil(tile) * w.div_ceil(tile);
    let k_hi = cfg.k_max.min(cap);
    let k_lo = cfg.k_min.min(k_hi);
    let k = rng.gen_range(k_lo..=k_hi);
    let mut origins: Vec<(usize, usize)> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut origin = (rng.gen_range(0..=h - tile), rng.gen_range(0..=w - tile));
        for _ in 0..10 {
            if !origins.contains(&origin) {
                break;
            }
            origin = (rng.gen_range(0..=h - tile), rng.gen_range(0..=w - tile));
        }
        origins.push(origin);
    }
    Ok(TilePlan { tile_size: tile, origins, source_h: h, source_w: w })
}
