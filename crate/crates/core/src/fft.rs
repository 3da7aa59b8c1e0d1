//! Thin 2D FFT helpers over `rustfft`, unshifted layout (bin k in `[0, n)`).

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward 2D FFT of a row-major complex grid, in place semantics by value.
pub(crate) fn fft2(rows: usize, cols: usize, mut grid: Vec<Complex64>) -> Vec<Complex64> {
    transform2(rows, cols, &mut grid, false);
    grid
}

/// Unnormalized inverse 2D FFT; caller divides by `rows * cols`.
pub(crate) fn ifft2_unnormalized(
    rows: usize,
    cols: usize,
    mut grid: Vec<Complex64>,
) -> Vec<Complex64> {
    transform2(rows, cols, &mut grid, true);
    grid
}

fn transform2(rows: usize, cols: usize, grid: &mut [Complex64], inverse: bool) {
    assert_eq!(grid.len(), rows * cols);
    let mut planner = FftPlanner::new();
    let row_fft = if inverse {
        planner.plan_fft_inverse(cols)
    } else {
        planner.plan_fft_forward(cols)
    };
    for row in grid.chunks_exact_mut(cols) {
        row_fft.process(row);
    }
    let col_fft = if inverse {
        planner.plan_fft_inverse(rows)
    } else {
        planner.plan_fft_forward(rows)
    };
    let mut column = vec![Complex64::default(); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = grid[r * cols + c];
        }
        col_fft.process(&mut column);
        for r in 0..rows {
            grid[r * cols + c] = column[r];
        }
    }
}
