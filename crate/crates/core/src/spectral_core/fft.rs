//! Thin layer over `rustfft` for square 2D transforms and strided 3D passes.
//!
//! All transforms here are unnormalized; callers apply their own scaling.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

use crate::par;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

const ROWS_PER_TASK: usize = 32;

/// Transform every contiguous row of length `len` in `data`.
pub fn fft_rows(data: &mut [Complex64], len: usize, inverse: bool) {
    debug_assert_eq!(data.len() % len, 0);
    let fft = plan(len, inverse);
    par::for_chunks(data, len * ROWS_PER_TASK, |_, chunk| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    });
}

pub fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized 2D transform of an n×n row-major array.
pub fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    fft_rows(data, n, inverse);
    transpose_square(data, n);
    fft_rows(data, n, inverse);
    transpose_square(data, n);
}

/// Transform along axis 0 of a `d0 × rest` row-major array.
pub fn fft_leading_axis(data: &mut [Complex64], d0: usize, rest: usize, inverse: bool) {
    const COLS: usize = 64;
    let fft = plan(d0, inverse);
    let blocks: Vec<Vec<Complex64>> = par::map_range(rest.div_ceil(COLS), |b| {
        let c0 = b * COLS;
        let w = COLS.min(rest - c0);
        let mut buf = vec![Complex64::new(0.0, 0.0); w * d0];
        for r in 0..d0 {
            let row = &data[r * rest + c0..r * rest + c0 + w];
            for (c, v) in row.iter().enumerate() {
                buf[c * d0 + r] = *v;
            }
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(&mut buf, &mut scratch);
        buf
    });
    for (b, buf) in blocks.iter().enumerate() {
        let c0 = b * COLS;
        let w = COLS.min(rest - c0);
        for r in 0..d0 {
            for c in 0..w {
                data[r * rest + c0 + c] = buf[c * d0 + r];
            }
        }
    }
}
