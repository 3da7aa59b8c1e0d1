//! Random Patch Swap: grid-cell composites of a real/fake image pair with
//! exact pixel provenance masks, and the patch-averaged soft token labels
//! derived from them.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AugmentError, Result};
use crate::image::Image;

/// Binary provenance mask; 1 marks pixels taken from the fake source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    height: usize,
    width: usize,
    values: Vec<u8>,
}

impl PixelMask {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self { height, width, values: vec![0; height * width] }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.values[r * self.width + c]
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    /// Fraction of fake-source pixels.
    pub fn mean(&self) -> f64 {
        self.values.iter().map(|&v| v as u64).sum::<u64>() as f64 / self.values.len() as f64
    }

    /// Crops a window (used to carry provenance along with tile crops).
    pub fn crop(&self, top: usize, left: usize, h: usize, w: usize) -> PixelMask {
        assert!(top + h <= self.height && left + w <= self.width, "mask crop out of bounds");
        let mut values = Vec::with_capacity(h * w);
        for r in 0..h {
            let base = (top + r) * self.width + left;
            values.extend_from_slice(&self.values[base..base + w]);
        }
        PixelMask { height: h, width: w, values }
    }

    /// 1-channel image view for PGM export.
    pub fn to_image(&self) -> Image {
        Image::from_data(
            self.height,
            self.width,
            1,
            self.values.iter().map(|&v| v as f64).collect(),
        )
        .expect("mask dimensions are valid")
    }
}

/// Per-patch soft forgery labels in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenLabelGrid {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl TokenLabelGrid {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn uniform(rows: usize, cols: usize, v: f64) -> Self {
        Self { rows, cols, values: vec![v; rows * cols] }
    }
}

/// Swaps `floor(ratio * grid^2)` distinct grid cells of `real_img` for the
/// corresponding cells of `fake_img`. Cells are `ceil(h/grid) x ceil(w/grid)`
/// with smaller cells at the bottom/right edges. Deterministic given `seed`.
pub fn random_patch_swap(
    real_img: &Image,
    fake_img: &Image,
    ratio: f64,
    grid: usize,
    seed: u64,
) -> Result<(Image, PixelMask)> {
    if real_img.height() != fake_img.height()
        || real_img.width() != fake_img.width()
        || real_img.channels() != fake_img.channels()
    {
        return Err(AugmentError::DimensionMismatch(format!(
            "real {}x{}x{} vs fake {}x{}x{}",
            real_img.height(),
            real_img.width(),
            real_img.channels(),
            fake_img.height(),
            fake_img.width(),
            fake_img.channels()
        )));
    }
    assert!(grid >= 1, "grid must be positive");
    assert!((0.0..=1.0).contains(&ratio), "ratio must be in [0, 1]");

    let (h, w) = (real_img.height(), real_img.width());
    let cell_h = h.div_ceil(grid);
    let cell_w = w.div_ceil(grid);
    let n_swap = (ratio * (grid * grid) as f64).floor() as usize;

    let mut cells: Vec<usize> = (0..grid * grid).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cells.shuffle(&mut rng);
    cells.truncate(n_swap);

    let mut composite = real_img.clone();
    let mut mask = PixelMask::zeros(h, w);
    for cell in cells {
        let a = cell / grid;
        let b = cell % grid;
        let top = a * cell_h;
        let left = b * cell_w;
        if top >= h || left >= w {
            continue; // geometrically empty cell on tiny images
        }
        let bottom = (top + cell_h).min(h);
        let right = (left + cell_w).min(w);
        for r in top..bottom {
            for c in left..right {
                for ch in 0..real_img.channels() {
                    composite.set(r, c, ch, fake_img.get(r, c, ch));
                }
                mask.values[r * w + c] = 1;
            }
        }
    }
    Ok((composite, mask))
}

/// Soft token labels: the mean of mask values inside each
/// `patch_size x patch_size` patch. Mask dimensions must divide evenly.
pub fn token_labels(mask: &PixelMask, patch_size: usize) -> Result<TokenLabelGrid> {
    if patch_size == 0 || mask.height % patch_size != 0 || mask.width % patch_size != 0 {
        return Err(AugmentError::IndivisibleDimensions {
            h: mask.height,
            w: mask.width,
            patch: patch_size,
        });
    }
    let rows = mask.height / patch_size;
    let cols = mask.width / patch_size;
    let area = (patch_size * patch_size) as f64;
    let mut values = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut sum = 0u64;
            for r in i * patch_size..(i + 1) * patch_size {
                for c in j * patch_size..(j + 1) * patch_size {
                    sum += mask.get(r, c) as u64;
                }
            }
            values.push(sum as f64 / area);
        }
    }
    Ok(TokenLabelGrid { rows, cols, values })
}

/// Soft token labels for a token grid that does not divide the mask (the
/// global view): token (i, j) averages the mask over its receptive field
/// `[floor(i*h/rows), floor((i+1)*h/rows)) x [floor(j*w/cols), ...)`.
pub fn token_labels_resampled(mask: &PixelMask, rows: usize, cols: usize) -> TokenLabelGrid {
    assert!(rows >= 1 && cols >= 1);
    let (h, w) = (mask.height, mask.width);
    let mut values = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let r0 = i * h / rows;
        let r1 = ((i + 1) * h / rows).max(r0 + 1).min(h);
        for j in 0..cols {
            let c0 = j * w / cols;
            let c1 = ((j + 1) * w / cols).max(c0 + 1).min(w);
            let mut sum = 0u64;
            for r in r0..r1 {
                for c in c0..c1 {
                    sum += mask.get(r, c) as u64;
                }
            }
            values.push(sum as f64 / ((r1 - r0) * (c1 - c0)) as f64);
        }
    }
    TokenLabelGrid { rows, cols, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(h: usize, w: usize) -> (Image, Image) {
        let real = Image::from_fn(h, w, 3, |r, c, ch| {
            ((r * 3 + c * 5 + ch) % 13) as f64 / 13.0
        })
        .unwrap();
        let fake = Image::from_fn(h, w, 3, |r, c, ch| {
            ((r * 7 + c * 2 + ch) % 17) as f64 / 17.0 * 0.5 + 0.5
        })
        .unwrap();
        (real, fake)
    }

    #[test]
    fn ratio_zero_keeps_real_image() {
        let (real, fake) = pair(16, 16);
        let (comp, mask) = random_patch_swap(&real, &fake, 0.0, 4, 1).unwrap();
        assert_eq!(comp, real);
        assert_eq!(mask.mean(), 0.0);
    }

    #[test]
    fn ratio_one_takes_whole_fake_image() {
        let (real, fake) = pair(16, 16);
        let (comp, mask) = random_patch_swap(&real, &fake, 1.0, 4, 1).unwrap();
        assert_eq!(comp, fake);
        assert_eq!(mask.mean(), 1.0);
    }

    #[test]
    fn half_ratio_swaps_exactly_half_the_cells() {
        let (real, fake) = pair(16, 16);
        let (comp, mask) = random_patch_swap(&real, &fake, 0.5, 4, 7).unwrap();
        assert_eq!(mask.mean(), 0.5); // 8 of 16 equal-sized cells
        // Composite pixels are bit-equal to one of the two sources.
        for r in 0..16 {
            for c in 0..16 {
                let src = if mask.get(r, c) == 1 { &fake } else { &real };
                for ch in 0..3 {
                    assert_eq!(comp.get(r, c, ch), src.get(r, c, ch));
                }
            }
        }
    }

    #[test]
    fn mask_mean_equals_swapped_area_fraction_on_uneven_grid() {
        let (real, fake) = pair(10, 10);
        // grid 4 on a 10px side: cells of 3,3,3,1 pixels.
        let (_, mask) = random_patch_swap(&real, &fake, 0.55, 4, 3).unwrap();
        let mut area = 0usize;
        for a in 0..4usize {
            for b in 0..4usize {
                let top = a * 3;
                let left = b * 3;
                if top >= 10 || left >= 10 {
                    continue;
                }
                let cell_area = (10 - top).min(3) * (10 - left).min(3);
                // Recover whether the cell was swapped from the mask itself.
                if mask.get(top, left) == 1 {
                    area += cell_area;
                }
            }
        }
        assert_eq!(mask.mean(), area as f64 / 100.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let (real, _) = pair(16, 16);
        let (_, fake) = pair(16, 18);
        assert!(matches!(
            random_patch_swap(&real, &fake, 0.5, 4, 0),
            Err(AugmentError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn swap_is_deterministic() {
        let (real, fake) = pair(32, 32);
        let a = random_patch_swap(&real, &fake, 0.4, 8, 21).unwrap();
        let b = random_patch_swap(&real, &fake, 0.4, 8, 21).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn token_labels_trivial_masks() {
        let zeros = PixelMask::zeros(16, 16);
        assert!(token_labels(&zeros, 8).unwrap().values().iter().all(|&v| v == 0.0));

        let mut ones = PixelMask::zeros(16, 16);
        ones.values.fill(1);
        assert!(token_labels(&ones, 8).unwrap().values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn token_labels_respect_quadrant_position() {
        let mut mask = PixelMask::zeros(16, 16);
        for r in 0..8 {
            for c in 0..8 {
                mask.values[r * 16 + c] = 1;
            }
        }
        let labels = token_labels(&mask, 8).unwrap();
        assert_eq!(labels.values(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn token_label_sum_counts_fake_pixels_exactly() {
        let (real, fake) = pair(32, 32);
        let (_, mask) = random_patch_swap(&real, &fake, 0.37, 5, 6).unwrap();
        let labels = token_labels(&mask, 8).unwrap();
        let total_fake: u64 = mask.values().iter().map(|&v| v as u64).sum();
        let from_labels: f64 = labels.values().iter().sum::<f64>() * 64.0;
        assert_eq!(from_labels.round() as u64, total_fake);
        assert!((from_labels - total_fake as f64).abs() < 1e-9);
    }

    #[test]
    fn indivisible_dimensions_rejected() {
        let mask = PixelMask::zeros(10, 16);
        assert!(matches!(
            token_labels(&mask, 8),
            Err(AugmentError::IndivisibleDimensions { .. })
        ));
    }

    #[test]
    fn resampled_labels_cover_whole_mask() {
        let mut mask = PixelMask::zeros(30, 30);
        mask.values.fill(1);
        let labels = token_labels_resampled(&mask, 8, 8);
        assert!(labels.values().iter().all(|&v| v == 1.0));
        assert_eq!(labels.values().len(), 64);
    }
}
