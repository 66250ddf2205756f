//! Thin wrappers over rustfft for evaluating Laurent polynomials on
//! equispaced circle grids and recovering coefficients from samples.

use std::cell::RefCell;
use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Values `sum_k c_k zeta_j^k` at `zeta_j = exp(2 pi i (j + offset) / m)`.
///
/// `coeffs` are indexed from `lowest` upward. Any `m` is valid: folding
/// frequencies modulo `m` is exact for evaluation.
pub fn evaluate_on_grid(lowest: i64, coeffs: &[C64], m: usize, offset: f64) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for (i, &c) in coeffs.iter().enumerate() {
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let k = lowest + i as i64;
        let twist = if offset == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            C64::from_polar(1.0, TAU * k as f64 * offset / m as f64)
        };
        buf[k.rem_euclid(m as i64) as usize] += c * twist;
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m).process(&mut buf));
    buf
}

/// Coefficients `c_k`, `k = -nf..=nf`, of the trigonometric interpolant of
/// `values` sampled on the shifted grid. Requires `values.len() >= 2*nf+1`.
pub fn coefficients_from_grid(values: &[C64], nf: usize, offset: f64) -> Vec<C64> {
    let m = values.len();
    debug_assert!(m > 2 * nf);
    let mut buf = values.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(m).process(&mut buf));
    let scale = 1.0 / m as f64;
    (-(nf as i64)..=nf as i64)
        .map(|k| {
            let c = buf[k.rem_euclid(m as i64) as usize] * scale;
            if offset == 0.0 {
                c
            } else {
                c * C64::from_polar(1.0, -TAU * k as f64 * offset / m as f64)
            }
        })
        .collect()
}
