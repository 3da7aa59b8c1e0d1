//! Training-time perturbations with exact ground truth: JPEG-style
//! compression with a known quality factor, Gaussian blur, scaling, and
//! Random Patch Swap composites with provenance masks.

mod jpeg;
mod rps;

pub use jpeg::{jpeg_degrade, quality_scale, scaled_quant_table};
pub use rps::{random_patch_swap, token_labels, token_labels_resampled, PixelMask, TokenLabelGrid};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::image::{resize, Image, ResizeFilter};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("paired images have different shapes: {0}")]
    DimensionMismatch(String),
    #[error("mask {h}x{w} not divisible by patch size {patch}")]
    IndivisibleDimensions { h: usize, w: usize, patch: usize },
    #[error("scaling would produce an empty image")]
    DegenerateOutput,
}

pub type Result<T> = std::result::Result<T, AugmentError>;

/// JPEG quality factor, integer in `[1, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct QualityFactor(u8);

impl QualityFactor {
    pub fn new(qf: u8) -> Option<Self> {
        (1..=100).contains(&qf).then_some(Self(qf))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Normalized to `[0, 1]` for the regression head.
    pub fn normalized(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

/// Per-augmentation firing probability and parameter ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationPolicy {
    pub p_each: f64,
    pub jpeg_qf_range: (u8, u8),
    pub blur_sigma_range: (f64, f64),
    pub scale_range: (f64, f64),
    pub rps_ratio_range: (f64, f64),
    pub rps_grid: usize,
    pub seed: u64,
}

impl Default for AugmentationPolicy {
    fn default() -> Self {
        Self {
            p_each: 0.10,
            jpeg_qf_range: (60, 100),
            blur_sigma_range: (0.1, 2.5),
            scale_range: (0.25, 2.0),
            rps_ratio_range: (0.2, 0.98),
            rps_grid: 14,
            seed: 0,
        }
    }
}

/// What [`apply_policy`] did to a sample.
#[derive(Debug, Clone)]
pub struct AugmentOutcome {
    pub image: Image,
    /// Provenance mask when Random Patch Swap fired (dims match `image`).
    pub mask: Option<PixelMask>,
    /// Applied JPEG quality when compression fired; `None` means never
    /// compressed (ground-truth quality 100).
    pub qf: Option<QualityFactor>,
    pub scale: Option<f64>,
    pub blur_sigma: Option<f64>,
    pub rps_ratio: Option<f64>,
}

/// Separable Gaussian blur, kernel radius `ceil(3 sigma)`, normalized to sum
/// 1, half-sample symmetric mirroring at the edges (mass preserving).
pub fn gaussian_blur(img: &Image, sigma: f64) -> Image {
    assert!(sigma > 0.0, "sigma must be positive");
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity(2 * radius as usize + 1);
    for k in -radius..=radius {
        kernel.push((-(k * k) as f64 / (2.0 * sigma * sigma)).exp());
    }
    let total: f64 = kernel.iter().sum();
    for v in &mut kernel {
        *v /= total;
    }

    let (h, w, channels) = (img.height(), img.width(), img.channels());
    // Horizontal then vertical pass.
    let mut mid = vec![0.0f64; h * w * channels];
    for r in 0..h {
        for c in 0..w {
            for ch in 0..channels {
                let mut acc = 0.0;
                for (ki, kv) in kernel.iter().enumerate() {
                    let cc = mirror(c as i64 + ki as i64 - radius, w);
                    acc += kv * img.get(r, cc, ch);
                }
                mid[(r * w + c) * channels + ch] = acc;
            }
        }
    }
    let mut out = vec![0.0f64; h * w * channels];
    for r in 0..h {
        for c in 0..w {
            for ch in 0..channels {
                let mut acc = 0.0;
                for (ki, kv) in kernel.iter().enumerate() {
                    let rr = mirror(r as i64 + ki as i64 - radius, h);
                    acc += kv * mid[(rr * w + c) * channels + ch];
                }
                out[(r * w + c) * channels + ch] = acc;
            }
        }
    }
    Image::from_data(h, w, channels, out).expect("dimensions unchanged")
}

/// Half-sample symmetric index fold: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
fn mirror(mut i: i64, n: usize) -> usize {
    let n = n as i64;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Bilinear rescale by `factor` (output dims rounded to nearest).
pub fn random_scale(img: &Image, factor: f64) -> Result<Image> {
    assert!(factor > 0.0, "factor must be positive");
    let out_h = (img.height() as f64 * factor).round() as usize;
    let out_w = (img.width() as f64 * factor).round() as usize;
    if out_h == 0 || out_w == 0 {
        return Err(AugmentError::DegenerateOutput);
    }
    Ok(resize(img, out_h, out_w, ResizeFilter::Bilinear).expect("positive dimensions"))
}

/// Applies the policy to a sample: each augmentation fires independently
/// with probability `p_each`, in the fixed order scale, blur, patch swap,
/// JPEG (compression artifacts are always the outermost trace). Scale and
/// blur are applied to the swap partner too so the pair stays aligned.
/// Deterministic given `seed`; the policy seed is mixed with it.
pub fn apply_policy(
    img: &Image,
    fake_partner: Option<&Image>,
    policy: &AugmentationPolicy,
    seed: u64,
) -> AugmentOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed ^ seed.wrapping_mul(0x9E3779B97F4A7C15));
    let mut image = img.clone();
    let mut partner = fake_partner.cloned();
    let mut outcome = AugmentOutcome {
        image: img.clone(),
        mask: None,
        qf: None,
        scale: None,
        blur_sigma: None,
        rps_ratio: None,
    };

    if rng.gen_bool(policy.p_each) {
        let factor = rng.gen_range(policy.scale_range.0..policy.scale_range.1);
        if let Ok(scaled) = random_scale(&image, factor) {
            image = scaled;
            partner = partner.map(|p| random_scale(&p, factor).expect("same factor fits"));
            outcome.scale = Some(factor);
        }
    }
    if rng.gen_bool(policy.p_each) {
        let sigma = rng.gen_range(policy.blur_sigma_range.0..policy.blur_sigma_range.1);
        image = gaussian_blur(&image, sigma);
        partner = partner.map(|p| gaussian_blur(&p, sigma));
        outcome.blur_sigma = Some(sigma);
    }
    if rng.gen_bool(policy.p_each) {
        if let Some(fake) = &partner {
            let ratio = rng.gen_range(policy.rps_ratio_range.0..policy.rps_ratio_range.1);
            let (composite, mask) =
                random_patch_swap(&image, fake, ratio, policy.rps_grid, rng.gen())
                    .expect("partner dims kept aligned");
            image = composite;
            outcome.mask = Some(mask);
            outcome.rps_ratio = Some(ratio);
        }
    }
    if rng.gen_bool(policy.p_each) {
        let lo = policy.jpeg_qf_range.0;
        let hi = policy.jpeg_qf_range.1;
        let qf = QualityFactor::new(rng.gen_range(lo..=hi)).expect("range within [1,100]");
        image = jpeg_degrade(&image, qf);
        outcome.qf = Some(qf);
    }

    outcome.image = image;
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::psnr;
    use rand::Rng;

    #[test]
    fn blur_preserves_constants() {
        let img = Image::from_fn(16, 16, 1, |_, _, _| 0.4).unwrap();
        let out = gaussian_blur(&img, 1.5);
        for &v in out.data() {
            assert!((v - 0.4).abs() < 1e-9);
        }
    }

    #[test]
    fn blur_preserves_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let img = Image::from_fn(20, 24, 3, |_, _, _| rng.gen::<f64>()).unwrap();
        for sigma in [0.3, 1.0, 2.5] {
            let out = gaussian_blur(&img, sigma);
            assert!((out.mean() - img.mean()).abs() < 1e-6, "sigma {sigma}");
        }
    }

    #[test]
    fn tiny_sigma_is_nearly_identity() {
        // Center kernel mass at sigma 0.1 exceeds 0.99.
        let sigma = 0.1f64;
        let center = 1.0;
        let side = (-1.0 / (2.0 * sigma * sigma)).exp();
        assert!(center / (center + 2.0 * side) > 0.99);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let img = Image::from_fn(12, 12, 1, |_, _, _| rng.gen::<f64>()).unwrap();
        let out = gaussian_blur(&img, sigma);
        let worst = img
            .data()
            .iter()
            .zip(out.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.05, "max change {worst}");
    }

    #[test]
    fn impulse_reproduces_kernel() {
        let sigma = 0.8f64;
        let radius = (3.0 * sigma).ceil() as usize; // 3
        let size = 2 * radius + 1;
        let mut img = Image::new(size, size, 1).unwrap();
        img.set(radius, radius, 0, 1.0);
        let out = gaussian_blur(&img, sigma);

        let mut kernel = Vec::new();
        for k in -(radius as i64)..=radius as i64 {
            kernel.push((-(k * k) as f64 / (2.0 * sigma * sigma)).exp());
        }
        let total: f64 = kernel.iter().sum();
        for r in 0..size {
            for c in 0..size {
                let expect = kernel[r] * kernel[c] / (total * total);
                assert!((out.get(r, c, 0) - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn scale_dimension_arithmetic() {
        let img = Image::new(448, 448, 3).unwrap();
        let half = random_scale(&img, 0.5).unwrap();
        assert_eq!((half.height(), half.width()), (224, 224));
        let same = random_scale(&img, 1.0).unwrap();
        assert_eq!((same.height(), same.width()), (448, 448));
    }

    #[test]
    fn scale_round_trip_on_smooth_gradient() {
        let img = Image::from_fn(64, 64, 1, |r, c, _| (r + c) as f64 / 126.0).unwrap();
        let up = random_scale(&img, 2.0).unwrap();
        let back = random_scale(&up, 0.5).unwrap();
        assert!(psnr(&img, &back) >= 40.0, "psnr {}", psnr(&img, &back));
    }

    #[test]
    fn degenerate_scale_rejected() {
        let img = Image::new(4, 4, 1).unwrap();
        assert!(matches!(
            random_scale(&img, 0.01),
            Err(AugmentError::DegenerateOutput)
        ));
    }

    #[test]
    fn zero_probability_policy_is_identity() {
        let img = Image::from_fn(32, 32, 3, |r, c, ch| ((r + c + ch) % 9) as f64 / 9.0).unwrap();
        let policy = AugmentationPolicy { p_each: 0.0, ..Default::default() };
        let out = apply_policy(&img, None, &policy, 5);
        assert_eq!(out.image, img);
        assert!(out.mask.is_none() && out.qf.is_none());
    }

    #[test]
    fn full_probability_policy_applies_everything_deterministically() {
        let img = Image::from_fn(40, 40, 3, |r, c, _| ((r * c) % 11) as f64 / 11.0).unwrap();
        let fake = Image::from_fn(40, 40, 3, |r, c, _| ((r + 2 * c) % 7) as f64 / 7.0).unwrap();
        let policy = AugmentationPolicy { p_each: 1.0, rps_grid: 4, ..Default::default() };
        let a = apply_policy(&img, Some(&fake), &policy, 17);
        let b = apply_policy(&img, Some(&fake), &policy, 17);
        assert!(a.scale.is_some() && a.blur_sigma.is_some());
        assert!(a.rps_ratio.is_some() && a.qf.is_some());
        assert_eq!(a.image, b.image);
        assert_eq!(a.qf, b.qf);
    }

    #[test]
    fn gate_rate_matches_probability() {
        let img = Image::from_fn(9, 9, 1, |_, _, _| 0.5).unwrap();
        let policy = AugmentationPolicy { p_each: 0.1, ..Default::default() };
        let n = 10_000;
        let mut fired = [0usize; 4];
        for seed in 0..n {
            let out = apply_policy(&img, None, &policy, seed);
            fired[0] += out.scale.is_some() as usize;
            fired[1] += out.blur_sigma.is_some() as usize;
            // RPS gate draws even without a partner; count via the rng gate
            // by checking jpeg separately and scale/blur above.
            fired[3] += out.qf.is_some() as usize;
        }
        for (i, &count) in fired.iter().enumerate() {
            if i == 2 {
                continue;
            }
            let rate = count as f64 / n as f64;
            assert!((0.08..=0.12).contains(&rate), "aug {i}: rate {rate}");
        }
    }
}
