//! Rectangular-window spectra (Dirichlet kernels) and tile DTFTs.

use num_complex::Complex64;

use crate::image::Image;

/// A continuous frequency sample in radians per sample, one per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencySample {
    omega1: f64,
    omega2: f64,
}

impl FrequencySample {
    /// Both components must lie in `[-pi, pi]`.
    pub fn new(omega1: f64, omega2: f64) -> Option<Self> {
        let ok = |w: f64| (-std::f64::consts::PI..=std::f64::consts::PI).contains(&w);
        (ok(omega1) && ok(omega2)).then_some(Self { omega1, omega2 })
    }

    /// The DFT-aligned sample (2*pi*k1/n1, 2*pi*k2/n2), wrapped into [-pi, pi].
    pub fn dft_aligned(k1: i64, n1: usize, k2: i64, n2: usize) -> Self {
        let wrap = |k: i64, n: usize| {
            let mut w = std::f64::consts::TAU * k as f64 / n as f64;
            while w > std::f64::consts::PI {
                w -= std::f64::consts::TAU;
            }
            while w < -std::f64::consts::PI {
                w += std::f64::consts::TAU;
            }
            w
        };
        Self {
            omega1: wrap(k1, n1),
            omega2: wrap(k2, n2),
        }
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }
}

/// DTFT of the one-dimensional length-`m` rectangular window starting at 0:
/// `e^{-j w (m-1)/2} * sin(m w / 2) / sin(w / 2)`, with the removable
/// singularity at `w = 2 pi k` evaluating to `m`. 2*pi-periodic in `w`.
fn rect_window_dtft(omega: f64, m: usize) -> Complex64 {
    let half = omega / 2.0;
    let s = half.sin();
    let dirichlet = if s.abs() < 1e-12 {
        // At a multiple of 2 pi the geometric sum collapses to m.
        m as f64
    } else {
        (m as f64 * half).sin() / s
    };
    Complex64::from_polar(1.0, -omega * (m as f64 - 1.0) / 2.0) * dirichlet
}

/// Spectrum of the `m1 x m2` rectangular window at any real frequency pair
/// (2*pi-periodic per axis). Magnitude is bounded by `m1 * m2`.
pub fn window_spectrum_at(omega1: f64, omega2: f64, m1: usize, m2: usize) -> Complex64 {
    assert!(m1 >= 1 && m2 >= 1, "window sides must be positive");
    rect_window_dtft(omega1, m1) * rect_window_dtft(omega2, m2)
}

/// Spectrum of the `m1 x m2` rectangular window at an in-range sample.
pub fn window_spectrum(sample: FrequencySample, m1: usize, m2: usize) -> Complex64 {
    window_spectrum_at(sample.omega1, sample.omega2, m1, m2)
}

/// DTFT of a single-channel tile at one frequency sample, tile-local
/// coordinates starting at (0, 0):
/// `Y(w1, w2) = sum_{x,y} tile[x,y] e^{-j (w1 x + w2 y)}`.
///
/// Evaluated separably: per-row sums over `y` first, then the row phases.
pub fn tile_dtft(tile: &Image, sample: FrequencySample) -> Complex64 {
    assert_eq!(tile.channels(), 1, "tile_dtft expects a single-channel tile");
    let (h, w) = (tile.height(), tile.width());
    let col_phase = Complex64::from_polar(1.0, -sample.omega2);
    let row_phase = Complex64::from_polar(1.0, -sample.omega1);
    let mut acc = Complex64::default();
    let mut rp = Complex64::new(1.0, 0.0);
    for x in 0..h {
        let mut row_sum = Complex64::default();
        let mut cp = Complex64::new(1.0, 0.0);
        for y in 0..w {
            row_sum += tile.get(x, y, 0) * cp;
            cp *= col_phase;
        }
        acc += row_sum * rp;
        rp *= row_phase;
    }
    acc
}
