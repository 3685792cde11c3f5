//! Shared spectral machinery for the time-series feature bank.
//!
//! One zero-padded FFT of the mean-centered series yields both the biased
//! autocorrelation function (via the Wiener–Khinchin theorem) and the
//! rectangular-window power spectral density, so the two families of features
//! share a single transform. A test-suite oracle recomputes both with direct
//! `O(N²)` sums and a textbook DFT.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Autocorrelation and power spectral density of one series.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Biased, normalized autocorrelation at lags `0..N`; `acf[0] == 1`
    /// except for constant series, which get `[1, 0, 0, …]` by convention.
    pub acf: Vec<f64>,
    /// One-sided power spectral density `S_k = |F_k|² / (2πN)` on the
    /// angular-frequency grid `ω_k = k·Δω`, `k = 0..=L/2`, where `L` is the
    /// padded transform length.
    pub psd: Vec<f64>,
    /// Angular-frequency grid spacing `2π/L`.
    pub delta_omega: f64,
}

/// Computes [`Spectrum`] for a series of length ≥ 2.
///
/// The series is centered by its mean, zero-padded to
/// `L = next_power_of_two(2N)`, and transformed once; the padded periodogram
/// also serves as the autocovariance generating function.
pub fn analyze(y: &[f64]) -> Spectrum {
    let n = y.len();
    assert!(n >= 2, "spectral analysis needs at least two points");
    let mean = y.iter().sum::<f64>() / n as f64;
    let padded_len = (2 * n).next_power_of_two();

    let mut buf: Vec<Complex64> = Vec::with_capacity(padded_len);
    buf.extend(y.iter().map(|&v| Complex64::new(v - mean, 0.0)));
    buf.resize(padded_len, Complex64::new(0.0, 0.0));
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(padded_len).process(&mut buf));

    let psd: Vec<f64> = (0..=padded_len / 2)
        .map(|k| buf[k].norm_sqr() / (2.0 * std::f64::consts::PI * n as f64))
        .collect();

    // Wiener–Khinchin: the inverse transform of |F|² holds the (unnormalized,
    // biased) autocovariances in its first N slots.
    for v in buf.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(padded_len).process(&mut buf));
    let c0 = buf[0].re;
    let acf = if c0 <= 0.0 {
        let mut acf = vec![0.0; n];
        acf[0] = 1.0;
        acf
    } else {
        (0..n).map(|k| buf[k].re / c0).collect()
    };

    Spectrum { acf, psd, delta_omega: 2.0 * std::f64::consts::PI / padded_len as f64 }
}

/// First lag at which the autocorrelation is no longer positive: starts at
/// `k = 1` and advances while `k < max_lag` and `acf[k] > 0`. The result lies
/// in `[1, max_lag]`; `max_lag` must not exceed `acf.len()`.
pub fn first_zero_crossing(acf: &[f64], max_lag: usize) -> usize {
    debug_assert!(max_lag <= acf.len());
    let mut k = 1;
    while k < max_lag && acf[k] > 0.0 {
        k += 1;
    }
    k
}
