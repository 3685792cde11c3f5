//! A bank of 22 dynamical time-series features, computed on the z-scored
//! series.
//!
//! The bank covers distribution shape (histogram modes, outlier inclusion),
//! linear autocorrelation structure (e-folding and first-minimum timescales,
//! spectral area and centroid), nonlinear/information-theoretic structure
//! (time-reversal asymmetry, automutual information, motif entropy,
//! transition-matrix statistics), fluctuation scaling, and periodicity. Exact
//! definitions, including every tie-breaking and fallback rule, are spelled
//! out in `docs/feature-schema.md`; the integration-test oracle re-implements
//! each definition naively and must agree to high precision.
//!
//! Conventions shared by all features:
//!
//! * the input is z-scored first (population standard deviation);
//! * series shorter than 3 points, constant series, and any non-finite
//!   feature value fall back to 0.0.

use super::spectral::{self, Spectrum};
use super::summary::{mean, population_variance, quantile_sorted, sample_std};

/// Names of the 22 features, in output order.
pub const TS_NAMES: [&str; 22] = [
    "DN_HistogramMode_5",
    "DN_HistogramMode_10",
    "SB_BinaryStats_diff_longstretch0",
    "DN_OutlierInclude_p_001_mdrmd",
    "DN_OutlierInclude_n_001_mdrmd",
    "CO_f1ecac",
    "CO_FirstMin_ac",
    "SP_Summaries_welch_rect_area_5_1",
    "SP_Summaries_welch_rect_centroid",
    "FC_LocalSimple_mean3_stderr",
    "CO_trev_1_num",
    "CO_HistogramAMI_even_2_5",
    "IN_AutoMutualInfoStats_40_gaussian_fmmi",
    "MD_hrv_classic_pnn40",
    "SB_BinaryStats_mean_longstretch1",
    "SB_MotifThree_quantile_hh",
    "FC_LocalSimple_mean1_tauresrat",
    "CO_Embed2_Dist_tau_d_expfit_meandiff",
    "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1",
    "SC_FluctAnal_2_rsrangefit_50_1_logi_prop_r1",
    "SB_TransitionMatrix_3ac_sumdiagcov",
    "PD_PeriodicityWang_th0_01",
];

/// Number of time-series features.
pub const N_TS: usize = TS_NAMES.len();

/// Computes all 22 features of [`TS_NAMES`] for one series.
pub fn ts_features(y: &[f64]) -> [f64; N_TS] {
    let mut out = [0.0; N_TS];
    if y.len() < 3 {
        return out;
    }
    let mu = mean(y);
    let sigma = population_variance(y).sqrt();
    if !sigma.is_finite() || sigma <= 0.0 {
        return out;
    }
    let z: Vec<f64> = y.iter().map(|&v| (v - mu) / sigma).collect();
    let spec = spectral::analyze(&z);

    out[0] = histogram_mode(&z, 5);
    out[1] = histogram_mode(&z, 10);
    out[2] = diff_longstretch0(&z);
    out[3] = outlier_include_mdrmd(&z, true);
    out[4] = outlier_include_mdrmd(&z, false);
    out[5] = f1ecac(&spec.acf);
    out[6] = first_min_ac(&spec.acf);
    out[7] = welch_area_first_fifth(&spec);
    out[8] = welch_centroid(&spec);
    out[9] = local_simple_mean_stderr(&z, 3);
    out[10] = trev_1_num(&z);
    out[11] = histogram_ami(&z, 2, 5);
    out[12] = auto_mutual_info_first_min(&spec.acf);
    out[13] = pnn40(&z);
    out[14] = mean_longstretch1(&z);
    out[15] = motif_three_hh(&z);
    out[16] = tauresrat(&z, &spec.acf);
    out[17] = embed2_dist_expfit_meandiff(&z, &spec.acf);
    out[18] = fluct_anal_prop_r1(&z, 2, FluctKind::Dfa);
    out[19] = fluct_anal_prop_r1(&z, 1, FluctKind::RsRange);
    out[20] = transition_matrix_sumdiagcov(&z, &spec.acf);
    out[21] = periodicity_wang(&z);

    for v in &mut out {
        if !v.is_finite() {
            *v = 0.0;
        }
    }
    out
}

fn minmax(y: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in y {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Mean center of the fullest equal-width histogram bins over `[min, max]`.
fn histogram_mode(z: &[f64], bins: usize) -> f64 {
    let (lo, hi) = minmax(z);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in z {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let best = *counts.iter().max().expect("bins is nonzero");
    let centers: Vec<f64> =
        (0..bins).filter(|&i| counts[i] == best).map(|i| lo + (i as f64 + 0.5) * width).collect();
    mean(&centers)
}

/// Longest run of non-increasing steps in the first difference.
fn diff_longstretch0(z: &[f64]) -> f64 {
    let mut longest = 0usize;
    let mut run = 0usize;
    for w in z.windows(2) {
        if w[1] - w[0] > 0.0 {
            run = 0;
        } else {
            run += 1;
            longest = longest.max(run);
        }
    }
    longest as f64
}

/// Longest run of values above the series mean.
fn mean_longstretch1(z: &[f64]) -> f64 {
    let m = mean(z);
    let mut longest = 0usize;
    let mut run = 0usize;
    for &v in z {
        if v > m {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    longest as f64
}

/// Order-statistic tree over positions `0..n`: supports removing a point and
/// selecting the k-th remaining position.
struct Fenwick {
    tree: Vec<u32>,
    log: u32,
}

impl Fenwick {
    fn all_present(n: usize) -> Fenwick {
        let mut f = Fenwick { tree: vec![0; n + 1], log: usize::BITS - n.leading_zeros() };
        for i in 0..n {
            f.add(i, 1);
        }
        f
    }

    fn add(&mut self, pos: usize, delta: i32) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] = self.tree[i].wrapping_add(delta as u32);
            i += i & i.wrapping_neg();
        }
    }

    /// 0-based position of the (0-based) `k`-th present element.
    fn select(&self, k: usize) -> usize {
        let mut pos = 0usize;
        let mut remaining = k as u32 + 1;
        let mut step = 1usize << self.log;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] < remaining {
                remaining -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos // pos is 1-based prefix index; element is at 0-based `pos`
    }
}

/// Median position (1-based, type-7 convention) of the present elements.
fn median_position(f: &Fenwick, count: usize) -> f64 {
    if count % 2 == 1 {
        (f.select(count / 2) + 1) as f64
    } else {
        ((f.select(count / 2 - 1) + 1) as f64 + (f.select(count / 2) + 1) as f64) / 2.0
    }
}

/// Median (over a sweep of inclusion thresholds) of the relative median
/// position of threshold exceedances. `positive` selects the sign of the
/// exceedance direction.
///
/// For each threshold `t_j = 0.01·j` (from 0 up to the series maximum), the
/// positions with `w ≥ t_j` are collected; thresholds keeping ≤ 1 point are
/// markers that end the sweep, and the sweep is also cut after the last
/// threshold keeping more than 2% of points (scaled as `(count−1)/N·100`).
/// Each kept threshold contributes `median(positions)/(N/2) − 1`; the output
/// is the median of those contributions.
fn outlier_include_mdrmd(z: &[f64], positive: bool) -> f64 {
    let n = z.len();
    let w: Vec<f64> = if positive { z.to_vec() } else { z.iter().map(|&v| -v).collect() };
    let (_, w_max) = minmax(&w);
    if w_max <= 0.0 {
        return 0.0;
    }
    let n_thresh = (w_max / 0.01).floor() as usize + 1;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
    let mut present = Fenwick::all_present(n);
    let mut removed = 0usize;

    let mut rel_medians = Vec::with_capacity(n_thresh);
    let mut pct_included = Vec::with_capacity(n_thresh);
    let mut first_short: Option<usize> = None;
    for j in 0..n_thresh {
        let threshold = 0.01 * j as f64;
        while removed < n && w[order[removed]] < threshold {
            present.add(order[removed], -1);
            removed += 1;
        }
        let count = n - removed;
        if count <= 1 {
            first_short = Some(j);
            break;
        }
        rel_medians.push(median_position(&present, count) / (n as f64 / 2.0) - 1.0);
        pct_included.push((count - 1) as f64 / n as f64 * 100.0);
    }

    // Keep thresholds up to the last one that retains > 2% of points, and in
    // any case not past the first too-short threshold.
    let Some(last_meaningful) = pct_included.iter().rposition(|&p| p > 2.0) else {
        return 0.0;
    };
    let limit = match first_short {
        Some(0) => return 0.0,
        Some(f) => last_meaningful.min(f - 1),
        None => last_meaningful,
    };
    let mut kept = rel_medians[..=limit].to_vec();
    kept.sort_by(f64::total_cmp);
    quantile_sorted(&kept, 0.5)
}

/// Lag at which the autocorrelation decays below 1/e, linearly interpolated
/// between integer lags; the series length if it never does.
fn f1ecac(acf: &[f64]) -> f64 {
    let threshold = 1.0 / std::f64::consts::E;
    for i in 0..acf.len() - 1 {
        if acf[i + 1] < threshold {
            return i as f64 + (threshold - acf[i]) / (acf[i + 1] - acf[i]);
        }
    }
    acf.len() as f64
}

/// First local minimum of the autocorrelation; the series length if none.
fn first_min_ac(acf: &[f64]) -> f64 {
    for i in 1..acf.len().saturating_sub(1) {
        if acf[i] < acf[i - 1] && acf[i] < acf[i + 1] {
            return i as f64;
        }
    }
    acf.len() as f64
}

/// Integrated power in the lowest fifth of the spectral grid.
fn welch_area_first_fifth(spec: &Spectrum) -> f64 {
    let count = spec.psd.len() / 5;
    spec.psd[..count].iter().sum::<f64>() * spec.delta_omega
}

/// Angular frequency splitting the spectral power in half.
fn welch_centroid(spec: &Spectrum) -> f64 {
    let total: f64 = spec.psd.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut cumulative = 0.0;
    for (k, &s) in spec.psd.iter().enumerate() {
        cumulative += s;
        if cumulative > total / 2.0 {
            return k as f64 * spec.delta_omega;
        }
    }
    (spec.psd.len() - 1) as f64 * spec.delta_omega
}

/// Sample standard deviation of the residuals of a trailing-mean forecast
/// with window `train`.
fn local_simple_mean_stderr(z: &[f64], train: usize) -> f64 {
    if z.len() <= train {
        return 0.0;
    }
    let residuals: Vec<f64> =
        (0..z.len() - train).map(|i| z[i + train] - mean(&z[i..i + train])).collect();
    sample_std(&residuals)
}

/// Mean cubed first difference (time-reversal asymmetry at lag 1).
fn trev_1_num(z: &[f64]) -> f64 {
    let cubes: Vec<f64> = z.windows(2).map(|w| (w[1] - w[0]).powi(3)).collect();
    mean(&cubes)
}

/// Mutual information (natural log) between the series and its lag-`tau`
/// copy, both discretized into `bins` equal-width bins over the slightly
/// widened range `[min − 0.1, max + 0.1]`.
fn histogram_ami(z: &[f64], tau: usize, bins: usize) -> f64 {
    let n = z.len();
    if n <= tau {
        return 0.0;
    }
    let (min, max) = minmax(z);
    let lo = min - 0.1;
    let width = (max + 0.1 - lo) / bins as f64;
    let pairs = (n - tau) as f64;
    let mut joint = vec![vec![0.0f64; bins]; bins];
    for i in 0..n - tau {
        let a = (((z[i] - lo) / width) as usize).min(bins - 1);
        let b = (((z[i + tau] - lo) / width) as usize).min(bins - 1);
        joint[a][b] += 1.0;
    }
    let row_marginal: Vec<f64> = joint.iter().map(|row| row.iter().sum::<f64>() / pairs).collect();
    let col_marginal: Vec<f64> =
        (0..bins).map(|b| joint.iter().map(|row| row[b]).sum::<f64>() / pairs).collect();
    let mut info = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let p = joint[a][b] / pairs;
            if p > 0.0 {
                info += p * (p / (row_marginal[a] * col_marginal[b])).ln();
            }
        }
    }
    info
}

/// First local minimum of the Gaussian automutual information
/// `−½·ln(1 − acf²)` over lags `1..=min(40, ⌈N/2⌉)`; the lag cap if none.
fn auto_mutual_info_first_min(acf: &[f64]) -> f64 {
    let cap = 40.min(acf.len().div_ceil(2));
    let ami: Vec<f64> = (1..=cap)
        .map(|k| {
            let r2 = (acf[k] * acf[k]).min(1.0 - 1e-15);
            -0.5 * (1.0 - r2).ln()
        })
        .collect();
    for j in 1..ami.len().saturating_sub(1) {
        if ami[j] < ami[j - 1] && ami[j] < ami[j + 1] {
            return (j + 1) as f64;
        }
    }
    cap as f64
}

/// Fraction of successive differences exceeding 0.04 in magnitude.
fn pnn40(z: &[f64]) -> f64 {
    let count = z.windows(2).filter(|w| (w[1] - w[0]).abs() > 0.04).count();
    count as f64 / (z.len() - 1) as f64
}

/// Three equiprobable symbols by the ⅓ and ⅔ quantiles: `v ≤ q⅓ → 0`,
/// `v ≤ q⅔ → 1`, else 2.
fn three_symbols(v: &[f64]) -> Vec<u8> {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q13 = quantile_sorted(&sorted, 1.0 / 3.0);
    let q23 = quantile_sorted(&sorted, 2.0 / 3.0);
    v.iter()
        .map(|&x| {
            if x <= q13 {
                0
            } else if x <= q23 {
                1
            } else {
                2
            }
        })
        .collect()
}

/// Shannon entropy (natural log) of consecutive symbol pairs under the
/// three-symbol discretization.
fn motif_three_hh(z: &[f64]) -> f64 {
    let symbols = three_symbols(z);
    let mut counts = [[0usize; 3]; 3];
    for w in symbols.windows(2) {
        counts[w[0] as usize][w[1] as usize] += 1;
    }
    let total = (symbols.len() - 1) as f64;
    let mut entropy = 0.0;
    for row in &counts {
        for &c in row {
            if c > 0 {
                let p = c as f64 / total;
                entropy -= p * p.ln();
            }
        }
    }
    entropy
}

/// Ratio of the first zero-crossing lag of the differenced series'
/// autocorrelation to that of the series itself.
fn tauresrat(z: &[f64], acf: &[f64]) -> f64 {
    let residual: Vec<f64> = z.windows(2).map(|w| w[1] - w[0]).collect();
    let res_acf = spectral::analyze(&residual).acf;
    let fz_res = spectral::first_zero_crossing(&res_acf, residual.len());
    let fz_y = spectral::first_zero_crossing(acf, z.len());
    fz_res as f64 / fz_y as f64
}

/// Mean absolute difference between the histogram density of two-dimensional
/// embedding distances and an exponential fit to their mean.
fn embed2_dist_expfit_meandiff(z: &[f64], acf: &[f64]) -> f64 {
    let n = z.len();
    let tau = spectral::first_zero_crossing(acf, n).min(n / 10).max(1);
    if n < tau + 2 {
        return 0.0;
    }
    let count = n - tau - 1;
    let d: Vec<f64> = (0..count)
        .map(|i| ((z[i + 1] - z[i]).powi(2) + (z[i + tau + 1] - z[i + tau]).powi(2)).sqrt())
        .collect();
    let (lo, hi) = minmax(&d);
    if hi <= lo {
        return 0.0;
    }
    let mu = mean(&d);
    let bins = (count as f64).sqrt().ceil() as usize;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &d {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let diffs: Vec<f64> = (0..bins)
        .map(|i| {
            let density = counts[i] as f64 / (count as f64 * width);
            let center = lo + (i as f64 + 0.5) * width;
            (density - (-center / mu).exp() / mu).abs()
        })
        .collect();
    mean(&diffs)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum FluctKind {
    /// Root-mean-square residual of per-window linear detrends.
    Dfa,
    /// Root-mean-square residual range per window.
    RsRange,
}

/// Ordinary least-squares line through `(x, y)` points.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|&x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(&x, &y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = if denom == 0.0 { 0.0 } else { (n * sxy - sx * sy) / denom };
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Euclidean norm of the residuals of an OLS line through `(x, y)`.
fn line_fit_residual_norm(xs: &[f64], ys: &[f64]) -> f64 {
    let (slope, intercept) = line_fit(xs, ys);
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Proportion of the fluctuation curve captured by the first segment of a
/// two-segment piecewise-linear fit in log–log space.
///
/// The series is subsampled by `lag` and cumulatively summed; for ~50
/// log-spaced window sizes `τ ∈ [5, N'/2]` a fluctuation size `F(τ)` is
/// computed per [`FluctKind`]; the split index minimizing the summed residual
/// norms of two line fits through `(ln τ, ln F)` (each side keeping ≥ 6
/// points, sharing the split point) yields `(i+1)/nτ`. Degenerate cases
/// (too-short series, fewer than 12 distinct window sizes, non-positive `F`)
/// return 0.
fn fluct_anal_prop_r1(z: &[f64], lag: usize, kind: FluctKind) -> f64 {
    let n_cs = z.len() / lag;
    if n_cs / 2 < 5 {
        return 0.0;
    }
    let mut cumulative = Vec::with_capacity(n_cs);
    let mut acc = 0.0;
    for i in 0..n_cs {
        acc += z[i * lag];
        cumulative.push(acc);
    }

    let ln_lo = 5.0f64.ln();
    let ln_hi = ((n_cs / 2) as f64).ln();
    let mut taus: Vec<usize> = (0..50)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / 49.0).exp().round() as usize)
        .collect();
    taus.dedup();
    let n_tau = taus.len();
    if n_tau < 12 {
        return 0.0;
    }

    let mut ln_tau = Vec::with_capacity(n_tau);
    let mut ln_f = Vec::with_capacity(n_tau);
    for &tau in &taus {
        let n_win = n_cs / tau;
        let xs: Vec<f64> = (1..=tau).map(|x| x as f64).collect();
        let mut total = 0.0;
        for w in 0..n_win {
            let segment = &cumulative[w * tau..(w + 1) * tau];
            let (slope, intercept) = line_fit(&xs, segment);
            match kind {
                FluctKind::Dfa => {
                    for (j, &v) in segment.iter().enumerate() {
                        let r = v - (slope * xs[j] + intercept);
                        total += r * r;
                    }
                }
                FluctKind::RsRange => {
                    let mut r_lo = f64::INFINITY;
                    let mut r_hi = f64::NEG_INFINITY;
                    for (j, &v) in segment.iter().enumerate() {
                        let r = v - (slope * xs[j] + intercept);
                        r_lo = r_lo.min(r);
                        r_hi = r_hi.max(r);
                    }
                    total += (r_hi - r_lo) * (r_hi - r_lo);
                }
            }
        }
        let f = match kind {
            FluctKind::Dfa => (total / (n_win * tau) as f64).sqrt(),
            FluctKind::RsRange => (total / n_win as f64).sqrt(),
        };
        if f <= 0.0 {
            return 0.0;
        }
        ln_tau.push((tau as f64).ln());
        ln_f.push(f.ln());
    }

    let mut best_split = 0usize;
    let mut best_error = f64::INFINITY;
    for i in 5..=n_tau - 6 {
        let error = line_fit_residual_norm(&ln_tau[..=i], &ln_f[..=i])
            + line_fit_residual_norm(&ln_tau[i..], &ln_f[i..]);
        if error < best_error {
            best_error = error;
            best_split = i;
        }
    }
    (best_split + 1) as f64 / n_tau as f64
}

/// Sum over columns of the sample variance of the three-symbol transition
/// matrix of the series downsampled at its first autocorrelation
/// zero-crossing.
fn transition_matrix_sumdiagcov(z: &[f64], acf: &[f64]) -> f64 {
    let tau = spectral::first_zero_crossing(acf, z.len());
    let down: Vec<f64> = z.iter().copied().step_by(tau).collect();
    if down.len() < 2 {
        return 0.0;
    }
    let symbols = three_symbols(&down);
    let mut t = [[0.0f64; 3]; 3];
    for w in symbols.windows(2) {
        t[w[0] as usize][w[1] as usize] += 1.0;
    }
    let total = (symbols.len() - 1) as f64;
    for row in &mut t {
        for v in row {
            *v /= total;
        }
    }
    (0..3)
        .map(|j| {
            let column = [t[0][j], t[1][j], t[2][j]];
            let m = mean(&column);
            column.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / 2.0
        })
        .sum()
}

/// Solves a 4×4 linear system by Gaussian elimination with partial pivoting;
/// `a` is the augmented matrix.
#[allow(clippy::needless_range_loop)] // in-place row operations read a[col] while writing a[row]
fn solve4(mut a: [[f64; 5]; 4]) -> [f64; 4] {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        if p == 0.0 {
            continue; // singular; coefficient stays 0
        }
        for row in 0..4 {
            if row != col {
                let factor = a[row][col] / p;
                for k in col..5 {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    let mut x = [0.0; 4];
    for i in 0..4 {
        x[i] = if a[i][i] == 0.0 { 0.0 } else { a[i][4] / a[i][i] };
    }
    x
}

/// Least-squares cubic polynomial through `(x, y)`; returns coefficients
/// `[c₀, c₁, c₂, c₃]` of `c₀ + c₁x + c₂x² + c₃x³`.
fn cubic_fit(xs: &[f64], ys: &[f64]) -> [f64; 4] {
    let mut pow_sums = [0.0f64; 7];
    let mut rhs = [0.0f64; 4];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut p = 1.0;
        for sum in &mut pow_sums {
            *sum += p;
            p *= x;
        }
        let mut p = 1.0;
        for r in &mut rhs {
            *r += y * p;
            p *= x;
        }
    }
    let mut augmented = [[0.0f64; 5]; 4];
    for i in 0..4 {
        augmented[i][..4].copy_from_slice(&pow_sums[i..i + 4]);
        augmented[i][4] = rhs[i];
    }
    solve4(augmented)
}

/// First autocorrelation peak of the cubic-detrended series that clears the
/// deepest preceding trough by at least 0.01 (and is positive); 0 if none
/// exists within a third of the series length.
fn periodicity_wang(z: &[f64]) -> f64 {
    let n = z.len();
    let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let c = cubic_fit(&xs, z);
    let residual: Vec<f64> = (0..n)
        .map(|i| {
            let x = xs[i];
            z[i] - (c[0] + x * (c[1] + x * (c[2] + x * c[3])))
        })
        .collect();
    let r = spectral::analyze(&residual).acf;
    let max_lag = n / 3;
    if max_lag < 2 {
        return 0.0;
    }
    let mut troughs: Vec<usize> = Vec::new();
    let mut peaks: Vec<usize> = Vec::new();
    for i in 1..max_lag {
        if r[i] < r[i - 1] && r[i] < r[i + 1] {
            troughs.push(i);
        } else if r[i] > r[i - 1] && r[i] > r[i + 1] {
            peaks.push(i);
        }
    }
    for &p in &peaks {
        let deepest =
            troughs.iter().filter(|&&t| t < p).map(|&t| r[t]).fold(f64::INFINITY, f64::min);
        if deepest.is_finite() && r[p] > 0.0 && r[p] - deepest >= 0.01 {
            return p as f64;
        }
    }
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;
    use rand::Rng;
    use std::f64::consts::PI;

    fn feature(y: &[f64], name: &str) -> f64 {
        let idx = TS_NAMES.iter().position(|&n| n == name).unwrap();
        ts_features(y)[idx]
    }

    fn random_series(seed: u64, len: usize) -> Vec<f64> {
        let mut rng = seeding::rng(seed, "test/tsbank", 0);
        let mut v = 0.0;
        (0..len)
            .map(|_| {
                v = 0.8 * v + rng.gen_range(-1.0..1.0);
                v
            })
            .collect()
    }

    #[test]
    fn names_are_distinct_and_count_matches() {
        let mut names = TS_NAMES.to_vec();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 22);
    }

    #[test]
    fn degenerate_series_give_zeros() {
        assert_eq!(ts_features(&[]), [0.0; 22]);
        assert_eq!(ts_features(&[1.0, 2.0]), [0.0; 22]);
        assert_eq!(ts_features(&[3.0; 500]), [0.0; 22]);
    }

    #[test]
    fn all_features_are_finite_on_rough_random_series() {
        for seed in 0..10 {
            for len in [3, 4, 7, 10, 50, 333, 1024] {
                let y = random_series(seed, len);
                for (name, v) in TS_NAMES.iter().zip(ts_features(&y)) {
                    assert!(v.is_finite(), "{name} not finite on len {len} seed {seed}");
                }
            }
        }
    }

    #[test]
    fn features_are_invariant_under_positive_affine_maps() {
        // z-scoring makes every feature invariant to y → a·y + b for a > 0.
        let y = random_series(3, 400);
        let base = ts_features(&y);
        for (a, b) in [(0.5, -2.0), (3.7, 10.0), (1e3, 1e-3)] {
            let mapped: Vec<f64> = y.iter().map(|&v| a * v + b).collect();
            for (i, (&x, &m)) in base.iter().zip(ts_features(&mapped).iter()).enumerate() {
                assert!(
                    (x - m).abs() <= 1e-7 * (1.0 + x.abs()),
                    "{} changed under affine map: {x} vs {m}",
                    TS_NAMES[i]
                );
            }
        }
    }

    #[test]
    fn histogram_mode_picks_bin_centers() {
        // Pre-z-scored checks on the raw helper.
        assert!((histogram_mode(&[0.0, 0.0, 0.0, 1.0], 5) - 0.1).abs() < 1e-12);
        // Tied bins average their centers: values split across first and last.
        assert!((histogram_mode(&[0.0, 1.0], 5) - 0.5).abs() < 1e-12);
        assert!((histogram_mode(&[0.0, 0.0, 10.0, 10.0, 5.0], 5) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn longstretch_counts_runs() {
        assert_eq!(diff_longstretch0(&[5.0, 4.0, 3.0, 2.0, 10.0, 9.0, 8.0]), 3.0);
        assert_eq!(diff_longstretch0(&[1.0, 2.0, 3.0]), 0.0);
        // Ties count as non-increase.
        assert_eq!(diff_longstretch0(&[1.0, 1.0, 1.0, 2.0]), 2.0);
        let y = [0.0, 10.0, 10.0, 10.0, 0.0, 10.0, 0.0];
        assert_eq!(mean_longstretch1(&y), 3.0);
    }

    #[test]
    fn pnn40_counts_large_moves() {
        // After z-scoring, diffs scale; use the helper directly.
        assert_eq!(pnn40(&[0.0, 0.01, 0.1, 0.1]), 1.0 / 3.0);
        assert_eq!(pnn40(&[0.0, 0.03, 0.06]), 0.0);
    }

    #[test]
    fn motif_entropy_of_a_three_cycle_is_ln_3() {
        let y: Vec<f64> = (0..301).map(|i| f64::from(i % 3)).collect();
        let hh = feature(&y, "SB_MotifThree_quantile_hh");
        assert!((hh - 3.0f64.ln()).abs() < 1e-12, "hh = {hh}");
    }

    #[test]
    fn acf_timescales_track_the_period_of_a_sine() {
        let y: Vec<f64> = (0..400).map(|i| (2.0 * PI * i as f64 / 20.0).sin()).collect();
        // First ACF minimum near half the period.
        let first_min = feature(&y, "CO_FirstMin_ac");
        assert!((first_min - 10.0).abs() <= 1.0, "first min {first_min}");
        // 1/e crossing well before the first minimum.
        let ecac = feature(&y, "CO_f1ecac");
        assert!(ecac > 1.0 && ecac < first_min, "f1ecac {ecac}");
        // Periodicity detector finds the full period.
        let period = feature(&y, "PD_PeriodicityWang_th0_01");
        assert!((period - 20.0).abs() <= 1.0, "period {period}");
    }

    #[test]
    fn spectral_features_order_low_and_high_frequency_tones() {
        let slow: Vec<f64> = (0..512).map(|i| (2.0 * PI * i as f64 / 64.0).sin()).collect();
        let fast: Vec<f64> = (0..512).map(|i| (2.0 * PI * i as f64 / 4.0).sin()).collect();
        let c_slow = feature(&slow, "SP_Summaries_welch_rect_centroid");
        let c_fast = feature(&fast, "SP_Summaries_welch_rect_centroid");
        assert!(c_slow < c_fast, "centroids {c_slow} vs {c_fast}");
        let a_slow = feature(&slow, "SP_Summaries_welch_rect_area_5_1");
        let a_fast = feature(&fast, "SP_Summaries_welch_rect_area_5_1");
        assert!(a_slow > a_fast, "low-frequency power {a_slow} vs {a_fast}");
    }

    #[test]
    fn forecast_residuals_vanish_on_strided_data() {
        // A straight line is perfectly predicted by the trailing mean plus a
        // constant offset, so residuals are constant → stderr 0.
        let y: Vec<f64> = (0..100).map(f64::from).collect();
        assert!(feature(&y, "FC_LocalSimple_mean3_stderr").abs() < 1e-12);
        let noisy = random_series(8, 300);
        assert!(feature(&noisy, "FC_LocalSimple_mean3_stderr") > 0.0);
    }

    #[test]
    fn trev_detects_time_asymmetry() {
        // Slow rise, fast fall: reversing time flips the sign.
        let mut y = Vec::new();
        for _ in 0..40 {
            y.extend((0..9).map(f64::from)); // +1 steps
            y.push(0.0); // one −8 step
        }
        let forward = feature(&y, "CO_trev_1_num");
        let mut rev = y.clone();
        rev.reverse();
        let backward = feature(&rev, "CO_trev_1_num");
        assert!(forward < 0.0, "many small rises, few big falls → negative, got {forward}");
        assert!((forward + backward).abs() < 1e-9, "antisymmetric under reversal");
    }

    #[test]
    fn outlier_medians_mirror_under_negation() {
        let y = random_series(5, 257);
        let negated: Vec<f64> = y.iter().map(|&v| -v).collect();
        let p = feature(&y, "DN_OutlierInclude_p_001_mdrmd");
        let n_of_neg = feature(&negated, "DN_OutlierInclude_n_001_mdrmd");
        assert!((p - n_of_neg).abs() < 1e-12, "{p} vs {n_of_neg}");
    }

    #[test]
    fn outlier_include_matches_a_direct_recomputation() {
        for seed in 0..5 {
            let y = random_series(seed + 40, 173);
            let mu = mean(&y);
            let sd = population_variance(&y).sqrt();
            let z: Vec<f64> = y.iter().map(|&v| (v - mu) / sd).collect();
            for positive in [true, false] {
                let fast = outlier_include_mdrmd(&z, positive);
                // Direct version: rebuild each threshold's index list by scan.
                let w: Vec<f64> =
                    if positive { z.clone() } else { z.iter().map(|&v| -v).collect() };
                let w_max = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let slow = if w_max <= 0.0 {
                    0.0
                } else {
                    let n_thresh = (w_max / 0.01).floor() as usize + 1;
                    let mut rel = Vec::new();
                    let mut pct = Vec::new();
                    let mut short = None;
                    for j in 0..n_thresh {
                        let th = 0.01 * j as f64;
                        let kept: Vec<f64> =
                            (0..w.len()).filter(|&i| w[i] >= th).map(|i| (i + 1) as f64).collect();
                        if kept.len() <= 1 {
                            short = Some(j);
                            break;
                        }
                        rel.push(quantile_sorted(&kept, 0.5) / (w.len() as f64 / 2.0) - 1.0);
                        pct.push((kept.len() - 1) as f64 / w.len() as f64 * 100.0);
                    }
                    match pct.iter().rposition(|&p| p > 2.0) {
                        None => 0.0,
                        Some(mj) => {
                            let limit = match short {
                                Some(0) => usize::MAX,
                                Some(f) => mj.min(f - 1),
                                None => mj,
                            };
                            if limit == usize::MAX {
                                0.0
                            } else {
                                let mut kept = rel[..=limit].to_vec();
                                kept.sort_by(f64::total_cmp);
                                quantile_sorted(&kept, 0.5)
                            }
                        }
                    }
                };
                assert!(
                    (fast - slow).abs() < 1e-12,
                    "seed {seed} positive {positive}: {fast} vs {slow}"
                );
            }
        }
    }

    #[test]
    fn fenwick_select_matches_linear_scan() {
        let mut rng = seeding::rng(9, "test/fenwick", 0);
        let n = 100;
        let mut fenwick = Fenwick::all_present(n);
        let mut present: Vec<bool> = vec![true; n];
        for _ in 0..80 {
            let kill = rng.gen_range(0..n);
            if present[kill] {
                present[kill] = false;
                fenwick.add(kill, -1);
            }
            let alive: Vec<usize> = (0..n).filter(|&i| present[i]).collect();
            for (k, &expected) in alive.iter().enumerate() {
                assert_eq!(fenwick.select(k), expected);
            }
        }
    }

    #[test]
    fn cubic_fit_recovers_exact_polynomials() {
        let xs: Vec<f64> = (0..50).map(|i| -1.0 + 2.0 * i as f64 / 49.0).collect();
        let truth = [0.3, -1.2, 0.7, 2.5];
        let ys: Vec<f64> =
            xs.iter().map(|&x| truth[0] + x * (truth[1] + x * (truth[2] + x * truth[3]))).collect();
        let fit = cubic_fit(&xs, &ys);
        for (a, b) in fit.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn fluctuation_proportions_lie_in_unit_range_and_need_long_series() {
        assert_eq!(feature(&random_series(1, 15), "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1"), 0.0);
        for seed in 0..5 {
            let y = random_series(seed, 600);
            for name in [
                "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1",
                "SC_FluctAnal_2_rsrangefit_50_1_logi_prop_r1",
            ] {
                let v = feature(&y, name);
                assert!((0.0..=1.0).contains(&v), "{name} = {v}");
                assert!(v > 0.0, "{name} should engage on a 600-point series");
            }
        }
    }

    #[test]
    fn transition_variance_has_its_combinatorial_value_on_a_cycle() {
        // A 3-cycle of 301 points uses each of the transitions 0→1, 1→2,
        // 2→0 exactly 100 times out of 300, so each transition-matrix column
        // holds a single 1/3 entry and the summed column variances are
        // 3 · var([⅓, 0, 0]) = 3 · (⅓)²/3 = 1/9.
        let y: Vec<f64> = (0..301).map(|i| f64::from(i % 3)).collect();
        let v = feature(&y, "SB_TransitionMatrix_3ac_sumdiagcov");
        assert!((v - 1.0 / 9.0).abs() < 1e-12, "v = {v}");
        let rough = random_series(2, 300);
        assert!(feature(&rough, "SB_TransitionMatrix_3ac_sumdiagcov") > 0.0);
    }

    #[test]
    fn ami_first_minimum_sits_at_the_sine_quarter_period() {
        // The Gaussian automutual information −½ln(1 − acf²) is minimal where
        // |acf| is smallest, i.e. at the quarter period of a sine.
        let y: Vec<f64> = (0..300).map(|i| (2.0 * PI * i as f64 / 24.0).sin()).collect();
        let fmmi = feature(&y, "IN_AutoMutualInfoStats_40_gaussian_fmmi");
        assert!((fmmi - 6.0).abs() <= 1.0, "fmmi {fmmi}");
    }

    #[test]
    fn embed2_separates_smooth_from_rough() {
        let smooth: Vec<f64> = (0..400).map(|i| (2.0 * PI * i as f64 / 100.0).sin()).collect();
        let rough = random_series(6, 400);
        let a = feature(&smooth, "CO_Embed2_Dist_tau_d_expfit_meandiff");
        let b = feature(&rough, "CO_Embed2_Dist_tau_d_expfit_meandiff");
        assert!(a.is_finite() && b.is_finite());
        assert_ne!(a, b);
    }

    #[test]
    fn tauresrat_is_one_when_differencing_keeps_the_timescale() {
        // An alternating series and its difference both have negative lag-1
        // autocorrelation, so both zero-crossing lags are 1.
        let y: Vec<f64> = (0..500).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(feature(&y, "FC_LocalSimple_mean1_tauresrat"), 1.0);
        // A slow ramp keeps positive correlation much longer than its
        // (constant, degenerate) difference.
        let ramp: Vec<f64> = (0..500).map(|i| f64::from(i) + f64::from(i % 2)).collect();
        let v = feature(&ramp, "FC_LocalSimple_mean1_tauresrat");
        assert!(v < 0.1, "ratio {v}");
    }

    #[test]
    fn histogram_ami_is_higher_for_dependent_series() {
        let dependent: Vec<f64> = (0..400).map(|i| (2.0 * PI * i as f64 / 16.0).sin()).collect();
        let mut rng = seeding::rng(11, "test/ami", 0);
        let independent: Vec<f64> = (0..400).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = feature(&dependent, "CO_HistogramAMI_even_2_5");
        let b = feature(&independent, "CO_HistogramAMI_even_2_5");
        assert!(a > b, "{a} vs {b}");
    }
}
