//! Thin wrappers around rustfft for 2D row/column transforms.
//!
//! The scalar planner is used on purpose: the SIMD planners select kernels at
//! runtime from CPU features, which changes the last bits of results between
//! machines and breaks byte-identical report output.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlannerScalar};

thread_local! {
    static PLANNER: RefCell<FftPlannerScalar<f64>> = RefCell::new(FftPlannerScalar::new());
}

pub(crate) fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// Transforms every contiguous row of length `width` in place.
pub(crate) fn rows_in_place(data: &mut [Complex64], width: usize, direction: FftDirection) {
    if width <= 1 {
        return;
    }
    let fft = plan(width, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
}

/// Transforms every column of a row-major `height × width` buffer in place.
pub(crate) fn cols_in_place(data: &mut [Complex64], height: usize, width: usize, direction: FftDirection) {
    if height <= 1 {
        return;
    }
    let mut transposed = vec![Complex64::default(); height * width];
    transpose(data, &mut transposed, height, width);
    rows_in_place(&mut transposed, height, direction);
    transpose(&transposed, data, width, height);
}

/// Unnormalized 2D transform in place.
pub(crate) fn fft2_in_place(data: &mut [Complex64], height: usize, width: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), height * width);
    rows_in_place(data, width, direction);
    cols_in_place(data, height, width, direction);
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}
