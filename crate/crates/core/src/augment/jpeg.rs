//! In-memory JPEG-style degradation: 8x8 block DCT, quantization with the
//! standard luma table scaled by the quality factor, dequantization, inverse
//! DCT. No entropy coding and no chroma subsampling — entropy coding is
//! lossless and contributes no pixel artifacts; quantization is the artifact
//! source. All channels use the luma table.

use std::sync::OnceLock;

/// Standard luminance quantization table (quality 50 baseline), row-major.
#[rustfmt::skip]
const BASE_LUMA_TABLE: [u32; 64] = [
    16, 11, 10, 16,  24,  40,  51,  61,
    12, 12, 14, 19,  26,  58,  60,  55,
    14, 13, 16, 24,  40,  57,  69,  56,
    14, 17, 22, 29,  51,  87,  80,  62,
    18, 22, 37, 56,  68, 109, 103,  77,
    24, 35, 55, 64,  81, 104, 113,  92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103,  99,
];

use super::QualityFactor;
use crate::image::Image;

/// Table scale percentage for a quality factor: `5000/qf` below 50,
/// `200 - 2*qf` at 50 and above. Quality 50 maps to 100, i.e. the base table.
pub fn quality_scale(qf: QualityFactor) -> u32 {
    let q = qf.get() as u32;
    if q < 50 {
        5000 / q
    } else {
        200 - 2 * q
    }
}

/// Base table entries scaled by the quality factor and clamped to `[1, 255]`.
pub fn scaled_quant_table(qf: QualityFactor) -> [u32; 64] {
    let scale = quality_scale(qf);
    let mut out = [0u32; 64];
    for (slot, &base) in out.iter_mut().zip(BASE_LUMA_TABLE.iter()) {
        *slot = ((base * scale + 50) / 100).clamp(1, 255);
    }
    out
}

/// Orthonormal 8-point DCT-II basis: `m[u][x] = c(u)/2 * cos((2x+1)u pi/16)`.
fn dct_basis() -> &'static [[f64; 8]; 8] {
    static BASIS: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; 8]; 8];
        for (u, row) in m.iter_mut().enumerate() {
            let c = if u == 0 { 1.0 / 2f64.sqrt() } else { 1.0 };
            for (x, v) in row.iter_mut().enumerate() {
                *v = 0.5 * c * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        m
    })
}

/// `F = M f M^T` (forward) or `f = M^T F M` (inverse).
fn transform_block(block: &[f64; 64], inverse: bool) -> [f64; 64] {
    let m = dct_basis();
    let mut tmp = [0.0f64; 64];
    // rows
    for i in 0..8 {
        for j in 0..8 {
            let mut acc = 0.0;
            for k in 0..8 {
                let coeff = if inverse { m[k][j] } else { m[j][k] };
                acc += block[i * 8 + k] * coeff;
            }
            tmp[i * 8 + j] = acc;
        }
    }
    let mut out = [0.0f64; 64];
    // columns
    for j in 0..8 {
        for i in 0..8 {
            let mut acc = 0.0;
            for k in 0..8 {
                let coeff = if inverse { m[k][i] } else { m[i][k] };
                acc += tmp[k * 8 + j] * coeff;
            }
            out[i * 8 + j] = acc;
        }
    }
    out
}

/// Applies the quantization round trip to an image, per channel. Dimensions
/// are unchanged: edge blocks are padded by replication and cropped back.
pub fn jpeg_degrade(img: &Image, qf: QualityFactor) -> Image {
    let table = scaled_quant_table(qf);
    let (h, w, channels) = (img.height(), img.width(), img.channels());
    let ph = h.div_ceil(8) * 8;
    let pw = w.div_ceil(8) * 8;
    let mut out_data = vec![0.0f64; h * w * channels];

    let mut plane = vec![0.0f64; ph * pw];
    for ch in 0..channels {
        // Level-shifted, replication-padded channel plane.
        for (r, row) in plane.chunks_exact_mut(pw).enumerate() {
            let sr = r.min(h - 1);
            for (c, v) in row.iter_mut().enumerate() {
                let sc = c.min(w - 1);
                *v = img.get(sr, sc, ch) * 255.0 - 128.0;
            }
        }
        for block_r in (0..ph).step_by(8) {
            for block_c in (0..pw).step_by(8) {
                let mut block = [0.0f64; 64];
                for i in 0..8 {
                    for j in 0..8 {
                        block[i * 8 + j] = plane[(block_r + i) * pw + block_c + j];
                    }
                }
                let mut freq = transform_block(&block, false);
                for (v, &q) in freq.iter_mut().zip(table.iter()) {
                    *v = (*v / q as f64).round() * q as f64;
                }
                let rebuilt = transform_block(&freq, true);
                for i in 0..8 {
                    for j in 0..8 {
                        plane[(block_r + i) * pw + block_c + j] = rebuilt[i * 8 + j];
                    }
                }
            }
        }
        for r in 0..h {
            for c in 0..w {
                let v = ((plane[r * pw + c] + 128.0) / 255.0).clamp(0.0, 1.0);
                out_data[(r * w + c) * channels + ch] = v;
            }
        }
    }
    Image::from_data(h, w, channels, out_data).expect("same dimensions as input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{mse, psnr};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quality_50_scale_is_exactly_100() {
        assert_eq!(quality_scale(QualityFactor::new(50).unwrap()), 100);
        assert_eq!(
            scaled_quant_table(QualityFactor::new(50).unwrap()),
            BASE_LUMA_TABLE
        );
    }

    #[test]
    fn quality_100_table_is_all_ones() {
        assert!(scaled_quant_table(QualityFactor::new(100).unwrap())
            .iter()
            .all(|&q| q == 1));
    }

    #[test]
    fn dct_round_trip_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let block: [f64; 64] = std::array::from_fn(|_| rng.gen_range(-128.0..128.0));
        let back = transform_block(&transform_block(&block, false), true);
        for (a, b) in block.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_image_survives_any_quality() {
        let img = Image::from_fn(16, 24, 3, |_, _, _| 0.5).unwrap();
        for q in [1, 10, 50, 90, 100] {
            let out = jpeg_degrade(&img, QualityFactor::new(q).unwrap());
            assert!(psnr(&img, &out) >= 45.0, "qf {q}: psnr {}", psnr(&img, &out));
        }
    }

    #[test]
    fn distortion_monotone_in_quality() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for i in 0..20 {
            let img = Image::from_fn(24, 24, 3, |_, _, _| rng.gen::<f64>()).unwrap();
            let d60 = mse(&img, &jpeg_degrade(&img, QualityFactor::new(60).unwrap()));
            let d95 = mse(&img, &jpeg_degrade(&img, QualityFactor::new(95).unwrap()));
            assert!(d60 >= d95, "image {i}: {d60} < {d95}");
        }
    }

    #[test]
    fn requantization_adds_no_more_error_than_first_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let img = Image::from_fn(17, 19, 3, |_, _, _| rng.gen::<f64>()).unwrap();
            let qf = QualityFactor::new(rng.gen_range(40..=95)).unwrap();
            let once = jpeg_degrade(&img, qf);
            let twice = jpeg_degrade(&once, qf);
            assert!(mse(&once, &twice) <= mse(&img, &once) + 1e-12);
        }
    }

    #[test]
    fn dimensions_preserved_for_non_multiples_of_eight() {
        let img = Image::from_fn(13, 21, 1, |r, c, _| ((r + c) % 7) as f64 / 7.0).unwrap();
        let out = jpeg_degrade(&img, QualityFactor::new(75).unwrap());
        assert_eq!((out.height(), out.width(), out.channels()), (13, 21, 1));
    }
}
