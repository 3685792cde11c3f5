//! The 22 order-free summary statistics computed for every signal channel
//! and every event-count distribution.
//!
//! All quantiles use the linear-interpolation convention (the default of
//! NumPy's `quantile` and R's type 7): on a sorted sample `x[0..n]`, the
//! `p`-quantile sits at rank `h = (n−1)·p` and interpolates between
//! `x[⌊h⌋]` and `x[⌊h⌋+1]`. Variance is the population variance (divide by
//! `n`), and the coefficient of variation is defined as 0 when the mean is
//! exactly 0. An empty sample yields all-zero statistics.

/// Names of the 22 statistics, in output order.
pub const SUMMARY_NAMES: [&str; 22] = [
    "max", "min", "mean", "median", "variance", "cv", "first", "last", "q1", "q2", "q3", "d1",
    "d2", "d3", "d4", "d5", "d6", "d7", "d8", "d9", "iqr", "idr",
];

/// Number of summary statistics.
pub const N_SUMMARY: usize = SUMMARY_NAMES.len();

pub fn mean(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    y.iter().sum::<f64>() / y.len() as f64
}

/// Population variance (normalized by `n`, not `n − 1`).
pub fn population_variance(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let m = mean(y);
    y.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / y.len() as f64
}

/// Sample standard deviation (normalized by `n − 1`); 0 for fewer than two
/// points.
pub fn sample_std(y: &[f64]) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let m = mean(y);
    (y.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / (y.len() - 1) as f64).sqrt()
}

/// Linear-interpolation quantile of an ascending-sorted sample.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Median of an ascending-sorted sample.
pub fn median_sorted(sorted: &[f64]) -> f64 {
    quantile_sorted(sorted, 0.5)
}

/// Computes the 22 statistics of [`SUMMARY_NAMES`] for one sample.
pub fn summary_stats(y: &[f64]) -> [f64; N_SUMMARY] {
    let mut out = [0.0; N_SUMMARY];
    if y.is_empty() {
        return out;
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = mean(y);
    let var = population_variance(y);
    out[0] = sorted[sorted.len() - 1]; // max
    out[1] = sorted[0]; // min
    out[2] = m;
    out[3] = median_sorted(&sorted);
    out[4] = var;
    out[5] = if m == 0.0 { 0.0 } else { var.sqrt() / m }; // cv
    out[6] = y[0]; // first
    out[7] = y[y.len() - 1]; // last
    out[8] = quantile_sorted(&sorted, 0.25); // q1
    out[9] = quantile_sorted(&sorted, 0.50); // q2
    out[10] = quantile_sorted(&sorted, 0.75); // q3
    for d in 1..=9 {
        out[10 + d] = quantile_sorted(&sorted, 0.1 * d as f64); // d1..d9
    }
    out[20] = out[10] - out[8]; // iqr
    out[21] = out[19] - out[11]; // idr
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;
    use rand::Rng;

    fn stat(y: &[f64], name: &str) -> f64 {
        let idx = SUMMARY_NAMES.iter().position(|&n| n == name).unwrap();
        summary_stats(y)[idx]
    }

    #[test]
    fn names_are_distinct_and_count_matches() {
        let mut names = SUMMARY_NAMES.to_vec();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 22);
    }

    #[test]
    fn basic_statistics_on_a_known_sample() {
        let y = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(stat(&y, "max"), 9.0);
        assert_eq!(stat(&y, "min"), 2.0);
        assert_eq!(stat(&y, "mean"), 5.0);
        assert_eq!(stat(&y, "variance"), 4.0); // population variance
        assert_eq!(stat(&y, "cv"), 2.0 / 5.0);
        assert_eq!(stat(&y, "first"), 2.0);
        assert_eq!(stat(&y, "last"), 9.0);
        assert_eq!(stat(&y, "median"), 4.5);
        assert_eq!(stat(&y, "q2"), stat(&y, "median"));
    }

    #[test]
    fn quantiles_interpolate_linearly() {
        let sorted = [1.0, 2.0, 3.0, 4.0];
        // h = 3·0.25 = 0.75 → between x[0] and x[1].
        assert_eq!(quantile_sorted(&sorted, 0.25), 1.75);
        assert_eq!(quantile_sorted(&sorted, 0.5), 2.5);
        assert_eq!(quantile_sorted(&sorted, 0.75), 3.25);
        assert_eq!(quantile_sorted(&sorted, 0.0), 1.0);
        assert_eq!(quantile_sorted(&sorted, 1.0), 4.0);
        // Single point: every quantile is that point.
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn quantiles_match_a_sort_and_index_reference() {
        // Independent formulation: split h into integer and fractional parts
        // via exact rank arithmetic on a freshly sorted copy.
        for case in 0..50 {
            let mut rng = seeding::rng(case, "test/quantile", 0);
            let len = rng.gen_range(1..60);
            let y: Vec<f64> = (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let mut sorted = y.clone();
            sorted.sort_by(f64::total_cmp);
            for step in 0..=20 {
                let p = step as f64 / 20.0;
                let h = (len - 1) as f64 * p;
                let lo = h.floor() as usize;
                let hi = h.ceil() as usize;
                let expect = sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]);
                let got = quantile_sorted(&sorted, p);
                assert!((got - expect).abs() <= 1e-12, "p = {p}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn deciles_and_ranges_are_consistent() {
        let y: Vec<f64> = (0..101).map(f64::from).collect();
        // On 0..=100 the p-quantile is 100p (up to float rounding of 0.1·d).
        for d in 1..=9 {
            let got = stat(&y, &format!("d{d}"));
            assert!((got - 10.0 * d as f64).abs() < 1e-12, "d{d} = {got}");
        }
        assert!((stat(&y, "iqr") - 50.0).abs() < 1e-12);
        assert!((stat(&y, "idr") - 80.0).abs() < 1e-12);
    }

    #[test]
    fn cv_is_zero_when_the_mean_is_zero() {
        assert_eq!(stat(&[-1.0, 1.0], "cv"), 0.0);
        assert_eq!(stat(&[0.0, 0.0, 0.0], "cv"), 0.0);
    }

    #[test]
    fn empty_sample_yields_zeros() {
        assert_eq!(summary_stats(&[]), [0.0; 22]);
    }

    #[test]
    fn single_point_sample() {
        let s = summary_stats(&[3.5]);
        let idx = |n: &str| SUMMARY_NAMES.iter().position(|&x| x == n).unwrap();
        assert_eq!(s[idx("max")], 3.5);
        assert_eq!(s[idx("min")], 3.5);
        assert_eq!(s[idx("variance")], 0.0);
        assert_eq!(s[idx("median")], 3.5);
        assert_eq!(s[idx("iqr")], 0.0);
    }

    #[test]
    fn helper_moments_match_definitions() {
        let y = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&y), 2.5);
        assert_eq!(population_variance(&y), 1.25);
        assert!((sample_std(&y) - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(sample_std(&[1.0]), 0.0);
        assert_eq!(mean(&[]), 0.0);
        assert_eq!(population_variance(&[]), 0.0);
    }
}
