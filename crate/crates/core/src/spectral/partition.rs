//! Non-overlapping tile partitions and DTFT reconstruction by phase shift.

use num_complex::Complex64;

use super::{tile_dtft, FrequencySample, Result, SpectralError};
use crate::image::Image;

/// An exact partition of an image into `n0 x n1` non-overlapping tiles with
/// per-row heights and per-column widths.
#[derive(Debug, Clone)]
pub struct TilePartition {
    row_sizes: Vec<usize>,
    col_sizes: Vec<usize>,
}

impl TilePartition {
    pub fn new(row_sizes: Vec<usize>, col_sizes: Vec<usize>) -> Result<Self> {
        if row_sizes.is_empty() || col_sizes.is_empty() {
            return Err(SpectralError::PartitionMismatch("empty partition".into()));
        }
        if row_sizes.iter().any(|&s| s == 0) || col_sizes.iter().any(|&s| s == 0) {
            return Err(SpectralError::PartitionMismatch("zero-sized tile".into()));
        }
        Ok(Self { row_sizes, col_sizes })
    }

    /// Equal `n0 x n1` split; image sides must be divisible.
    pub fn equal(height: usize, width: usize, n0: usize, n1: usize) -> Result<Self> {
        if n0 == 0 || n1 == 0 || height % n0 != 0 || width % n1 != 0 {
            return Err(SpectralError::PartitionMismatch(format!(
                "{height}x{width} does not split evenly into {n0}x{n1}"
            )));
        }
        Self::new(vec![height / n0; n0], vec![width / n1; n1])
    }

    pub fn n0(&self) -> usize {
        self.row_sizes.len()
    }

    pub fn n1(&self) -> usize {
        self.col_sizes.len()
    }

    pub fn row_sizes(&self) -> &[usize] {
        &self.row_sizes
    }

    pub fn col_sizes(&self) -> &[usize] {
        &self.col_sizes
    }

    pub fn total_height(&self) -> usize {
        self.row_sizes.iter().sum()
    }

    pub fn total_width(&self) -> usize {
        self.col_sizes.iter().sum()
    }

    /// Top-left offset of tile `(a, b)`: partial sums of the sizes before it.
    pub fn offset(&self, a: usize, b: usize) -> (usize, usize) {
        (
            self.row_sizes[..a].iter().sum(),
            self.col_sizes[..b].iter().sum(),
        )
    }
}

/// Cuts an image into the partition's tile grid, row-major over (a, b).
pub fn split_into_tiles(img: &Image, partition: &TilePartition) -> Result<Vec<Image>> {
    if partition.total_height() != img.height() || partition.total_width() != img.width() {
        return Err(SpectralError::PartitionMismatch(format!(
            "partition covers {}x{}, image is {}x{}",
            partition.total_height(),
            partition.total_width(),
            img.height(),
            img.width()
        )));
    }
    let mut tiles = Vec::with_capacity(partition.n0() * partition.n1());
    for a in 0..partition.n0() {
        for b in 0..partition.n1() {
            let (top, left) = partition.offset(a, b);
            tiles.push(img.crop(top, left, partition.row_sizes[a], partition.col_sizes[b])?);
        }
    }
    Ok(tiles)
}

/// Reconstructs the full-image DTFT at `sample` from tile DTFTs:
/// `X(w) = sum_{a,b} e^{-j (w1 d1_a + w2 d2_b)} Y_(a,b)(w)`
/// where `(d1_a, d2_b)` is tile `(a, b)`'s top-left offset.
pub fn reconstruct_spectrum(
    partition: &TilePartition,
    tiles: &[Image],
    sample: FrequencySample,
) -> Result<Complex64> {
    if tiles.len() != partition.n0() * partition.n1() {
        return Err(SpectralError::PartitionMismatch(format!(
            "expected {} tiles, got {}",
            partition.n0() * partition.n1(),
            tiles.len()
        )));
    }
    let mut acc = Complex64::default();
    for a in 0..partition.n0() {
        for b in 0..partition.n1() {
            let tile = &tiles[a * partition.n1() + b];
            if tile.height() != partition.row_sizes[a] || tile.width() != partition.col_sizes[b] {
                return Err(SpectralError::PartitionMismatch(format!(
                    "tile ({a},{b}) is {}x{}, expected {}x{}",
                    tile.height(),
                    tile.width(),
                    partition.row_sizes[a],
                    partition.col_sizes[b]
                )));
            }
            let (top, left) = partition.offset(a, b);
            let phase = -(sample.omega1() * top as f64 + sample.omega2() * left as f64);
            acc += Complex64::from_polar(1.0, phase) * tile_dtft(tile, sample);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn naive_dtft(img: &Image, w1: f64, w2: f64) -> Complex64 {
        let mut acc = Complex64::default();
        for x in 0..img.height() {
            for y in 0..img.width() {
                let phase = -(w1 * x as f64 + w2 * y as f64);
                acc += img.get(x, y, 0) * Complex64::new(phase.cos(), phase.sin());
            }
        }
        acc
    }

    fn random_image(h: usize, w: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(h, w, 1, |_, _, _| rng.gen::<f64>()).unwrap()
    }

    #[test]
    fn single_tile_partition_is_plain_dtft() {
        let img = random_image(6, 7, 1);
        let part = TilePartition::new(vec![6], vec![7]).unwrap();
        let tiles = split_into_tiles(&img, &part).unwrap();
        let sample = FrequencySample::new(0.9, -1.4).unwrap();
        let recon = reconstruct_spectrum(&part, &tiles, sample).unwrap();
        assert!((recon - tile_dtft(&img, sample)).norm() < 1e-12);
    }

    #[test]
    fn equal_2x2_partition_reconstructs_full_dtft() {
        let img = random_image(8, 8, 2);
        let part = TilePartition::equal(8, 8, 2, 2).unwrap();
        let tiles = split_into_tiles(&img, &part).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let w1 = rng.gen_range(-PI..PI);
            let w2 = rng.gen_range(-PI..PI);
            let sample = FrequencySample::new(w1, w2).unwrap();
            let recon = reconstruct_spectrum(&part, &tiles, sample).unwrap();
            let full = naive_dtft(&img, w1, w2);
            let rel = (recon - full).norm() / full.norm().max(1.0);
            assert!(rel < 1e-9, "({w1},{w2}): rel {rel}");
        }
    }

    #[test]
    fn uneven_partition_reconstructs_too() {
        let img = random_image(10, 9, 3);
        let part = TilePartition::new(vec![3, 7], vec![2, 4, 3]).unwrap();
        let tiles = split_into_tiles(&img, &part).unwrap();
        for &(k1, k2) in &[(1i64, 2i64), (3, -4), (0, 0)] {
            let sample = FrequencySample::dft_aligned(k1, 10, k2, 9);
            let recon = reconstruct_spectrum(&part, &tiles, sample).unwrap();
            let full = naive_dtft(&img, sample.omega1(), sample.omega2());
            assert!((recon - full).norm() / full.norm().max(1.0) < 1e-9);
        }
    }

    #[test]
    fn constant_image_reconstructs_pixel_sum_at_dc() {
        let img = Image::from_fn(9, 6, 1, |_, _, _| 0.25).unwrap();
        let part = TilePartition::new(vec![4, 5], vec![6]).unwrap();
        let tiles = split_into_tiles(&img, &part).unwrap();
        let dc = FrequencySample::new(0.0, 0.0).unwrap();
        let recon = reconstruct_spectrum(&part, &tiles, dc).unwrap();
        assert!((recon.re - 0.25 * 54.0).abs() < 1e-12 && recon.im.abs() < 1e-12);
    }

    #[test]
    fn mismatched_tiles_are_rejected() {
        let img = random_image(8, 8, 4);
        let part = TilePartition::equal(8, 8, 2, 2).unwrap();
        let mut tiles = split_into_tiles(&img, &part).unwrap();
        tiles.pop();
        let sample = FrequencySample::new(0.1, 0.2).unwrap();
        assert!(matches!(
            reconstruct_spectrum(&part, &tiles, sample),
            Err(SpectralError::PartitionMismatch(_))
        ));
    }
}
