//! A from-first-principles reimplementation of the time-series feature bank:
//! direct `O(N²)` autocorrelation sums, a textbook DFT, per-threshold rescans
//! instead of incremental order statistics, and Cramer's rule instead of
//! Gaussian elimination for the detrending fit. Everything is recomputed from
//! scratch at each use; nothing is shared with the library implementation
//! beyond the published definitions.

use std::f64::consts::{E, PI};

pub const N_TS: usize = 22;

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Sort-and-index quantile (NumPy/R type 7): rank `h = (n−1)·p`, linear
/// interpolation between the two bracketing order statistics.
pub fn quantile_type7(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty() && (0.0..=1.0).contains(&p));
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Direct quadratic-time autocorrelation: mean-centered, biased, normalized
/// by lag-0; constant series get `[1, 0, 0, …]`.
pub fn acf_direct(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let m = mean(y);
    let c0: f64 = y.iter().map(|&v| (v - m) * (v - m)).sum();
    if c0 <= 0.0 {
        let mut acf = vec![0.0; n];
        acf[0] = 1.0;
        return acf;
    }
    (0..n).map(|k| (0..n - k).map(|i| (y[i] - m) * (y[i + k] - m)).sum::<f64>() / c0).collect()
}

/// Textbook DFT power spectral density on the zero-padded grid
/// `L = next_power_of_two(2N)`: `S_k = |F_k|² / (2πN)` for `k = 0..=L/2`.
/// Returns `(psd, Δω)` with `Δω = 2π/L`.
pub fn psd_direct(y: &[f64]) -> (Vec<f64>, f64) {
    let n = y.len();
    let m = mean(y);
    let l = (2 * n).next_power_of_two();
    let psd = (0..=l / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, &v) in y.iter().enumerate() {
                let angle = -2.0 * PI * (k * j) as f64 / l as f64;
                re += (v - m) * angle.cos();
                im += (v - m) * angle.sin();
            }
            (re * re + im * im) / (2.0 * PI * n as f64)
        })
        .collect();
    (psd, 2.0 * PI / l as f64)
}

/// First lag at which the autocorrelation is no longer positive, capped at
/// `max_lag`.
pub fn first_zero_crossing(acf: &[f64], max_lag: usize) -> usize {
    let mut k = 1;
    while k < max_lag && acf[k] > 0.0 {
        k += 1;
    }
    k
}

/// All 22 features in the library's output order, computed naively.
pub fn ts_features_naive(y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; N_TS];
    let n = y.len();
    if n < 3 {
        return out;
    }
    let mu = mean(y);
    let sigma = (y.iter().map(|&v| (v - mu) * (v - mu)).sum::<f64>() / n as f64).sqrt();
    if !sigma.is_finite() || sigma <= 0.0 {
        return out;
    }
    let z: Vec<f64> = y.iter().map(|&v| (v - mu) / sigma).collect();
    let acf = acf_direct(&z);
    let (psd, delta_omega) = psd_direct(&z);

    out[0] = histogram_mode(&z, 5);
    out[1] = histogram_mode(&z, 10);
    out[2] = diff_longstretch0(&z);
    out[3] = outlier_include(&z, true);
    out[4] = outlier_include(&z, false);
    out[5] = f1ecac(&acf);
    out[6] = first_min_ac(&acf);
    out[7] = psd[..psd.len() / 5].iter().sum::<f64>() * delta_omega;
    out[8] = centroid(&psd, delta_omega);
    out[9] = local_mean_forecast_stderr(&z, 3);
    out[10] = trev(&z);
    out[11] = histogram_ami(&z, 2, 5);
    out[12] = auto_mutual_info_first_min(&acf, n);
    out[13] = pnn40(&z);
    out[14] = mean_longstretch1(&z);
    out[15] = motif_three_hh(&z);
    out[16] = tauresrat(&z, &acf);
    out[17] = embed2_expfit_meandiff(&z, &acf);
    out[18] = fluct_prop(&z, 2, true);
    out[19] = fluct_prop(&z, 1, false);
    out[20] = transition_matrix_sumdiagcov(&z, &acf);
    out[21] = periodicity_wang(&z);

    for v in &mut out {
        if !v.is_finite() {
            *v = 0.0;
        }
    }
    out
}

fn histogram_mode(z: &[f64], bins: usize) -> f64 {
    let lo = min_of(z);
    let width = (max_of(z) - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in z {
        let mut b = ((v - lo) / width) as usize;
        if b >= bins {
            b = bins - 1;
        }
        counts[b] += 1;
    }
    let best = *counts.iter().max().unwrap();
    let tied: Vec<f64> =
        (0..bins).filter(|&b| counts[b] == best).map(|b| lo + (b as f64 + 0.5) * width).collect();
    mean(&tied)
}

fn diff_longstretch0(z: &[f64]) -> f64 {
    // Longest run of steps that do not increase.
    let mut best = 0usize;
    let mut run = 0usize;
    for i in 1..z.len() {
        if z[i] - z[i - 1] > 0.0 {
            run = 0;
        } else {
            run += 1;
            best = best.max(run);
        }
    }
    best as f64
}

fn mean_longstretch1(z: &[f64]) -> f64 {
    let m = mean(z);
    let mut best = 0usize;
    let mut run = 0usize;
    for &v in z {
        if v > m {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best as f64
}

fn outlier_include(z: &[f64], positive: bool) -> f64 {
    let n = z.len();
    let w: Vec<f64> = if positive { z.to_vec() } else { z.iter().map(|&v| -v).collect() };
    let w_max = max_of(&w);
    if w_max <= 0.0 {
        return 0.0;
    }
    let n_thresh = (w_max / 0.01).floor() as usize + 1;
    let mut rel_medians = Vec::new();
    let mut pct_included = Vec::new();
    let mut first_short: Option<usize> = None;
    for j in 0..n_thresh {
        let threshold = 0.01 * j as f64;
        // Rescan from scratch: 1-based positions of exceedances.
        let kept: Vec<f64> =
            (0..n).filter(|&i| w[i] >= threshold).map(|i| (i + 1) as f64).collect();
        if kept.len() <= 1 {
            first_short = Some(j);
            break;
        }
        rel_medians.push(quantile_type7(&kept, 0.5) / (n as f64 / 2.0) - 1.0);
        pct_included.push((kept.len() - 1) as f64 / n as f64 * 100.0);
    }
    let Some(last_meaningful) = pct_included.iter().rposition(|&p| p > 2.0) else {
        return 0.0;
    };
    let limit = match first_short {
        Some(0) => return 0.0,
        Some(f) => last_meaningful.min(f - 1),
        None => last_meaningful,
    };
    quantile_type7(&rel_medians[..=limit], 0.5)
}

fn f1ecac(acf: &[f64]) -> f64 {
    let threshold = 1.0 / E;
    for i in 0..acf.len() - 1 {
        if acf[i + 1] < threshold {
            return i as f64 + (threshold - acf[i]) / (acf[i + 1] - acf[i]);
        }
    }
    acf.len() as f64
}

fn first_min_ac(acf: &[f64]) -> f64 {
    for i in 1..acf.len().saturating_sub(1) {
        if acf[i] < acf[i - 1] && acf[i] < acf[i + 1] {
            return i as f64;
        }
    }
    acf.len() as f64
}

fn centroid(psd: &[f64], delta_omega: f64) -> f64 {
    let total: f64 = psd.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut cumulative = 0.0;
    for (k, &s) in psd.iter().enumerate() {
        cumulative += s;
        if cumulative > total / 2.0 {
            return k as f64 * delta_omega;
        }
    }
    (psd.len() - 1) as f64 * delta_omega
}

fn local_mean_forecast_stderr(z: &[f64], train: usize) -> f64 {
    if z.len() <= train {
        return 0.0;
    }
    let residuals: Vec<f64> =
        (0..z.len() - train).map(|i| z[i + train] - mean(&z[i..i + train])).collect();
    if residuals.len() < 2 {
        return 0.0;
    }
    let m = mean(&residuals);
    (residuals.iter().map(|&r| (r - m) * (r - m)).sum::<f64>() / (residuals.len() - 1) as f64)
        .sqrt()
}

fn trev(z: &[f64]) -> f64 {
    let cubes: Vec<f64> = (1..z.len()).map(|i| (z[i] - z[i - 1]).powi(3)).collect();
    mean(&cubes)
}

fn histogram_ami(z: &[f64], tau: usize, bins: usize) -> f64 {
    let n = z.len();
    if n <= tau {
        return 0.0;
    }
    let lo = min_of(z) - 0.1;
    let width = (max_of(z) + 0.1 - lo) / bins as f64;
    let bin_of = |v: f64| (((v - lo) / width) as usize).min(bins - 1);
    let pairs = (n - tau) as f64;
    let mut joint = vec![vec![0usize; bins]; bins];
    for i in 0..n - tau {
        joint[bin_of(z[i])][bin_of(z[i + tau])] += 1;
    }
    let mut info = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let n_ab = joint[a][b];
            if n_ab == 0 {
                continue;
            }
            let n_a: usize = joint[a].iter().sum();
            let n_b: usize = joint.iter().map(|row| row[b]).sum();
            let p = n_ab as f64 / pairs;
            info += p * ((n_ab as f64 * pairs) / (n_a as f64 * n_b as f64)).ln();
        }
    }
    info
}

fn auto_mutual_info_first_min(acf: &[f64], n: usize) -> f64 {
    let cap = 40.min(n.div_ceil(2));
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

fn pnn40(z: &[f64]) -> f64 {
    let count = (1..z.len()).filter(|&i| (z[i] - z[i - 1]).abs() > 0.04).count();
    count as f64 / (z.len() - 1) as f64
}

fn three_symbols(v: &[f64]) -> Vec<u8> {
    let q13 = quantile_type7(v, 1.0 / 3.0);
    let q23 = quantile_type7(v, 2.0 / 3.0);
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

fn motif_three_hh(z: &[f64]) -> f64 {
    let symbols = three_symbols(z);
    let mut counts = [[0usize; 3]; 3];
    for i in 1..symbols.len() {
        counts[symbols[i - 1] as usize][symbols[i] as usize] += 1;
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

fn tauresrat(z: &[f64], acf: &[f64]) -> f64 {
    let diff: Vec<f64> = (1..z.len()).map(|i| z[i] - z[i - 1]).collect();
    let diff_acf = acf_direct(&diff);
    first_zero_crossing(&diff_acf, diff.len()) as f64 / first_zero_crossing(acf, z.len()) as f64
}

fn embed2_expfit_meandiff(z: &[f64], acf: &[f64]) -> f64 {
    let n = z.len();
    let tau = first_zero_crossing(acf, n).min(n / 10).max(1);
    if n < tau + 2 {
        return 0.0;
    }
    let count = n - tau - 1;
    let d: Vec<f64> = (0..count)
        .map(|i| ((z[i + 1] - z[i]).powi(2) + (z[i + tau + 1] - z[i + tau]).powi(2)).sqrt())
        .collect();
    let lo = min_of(&d);
    let hi = max_of(&d);
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
        .map(|b| {
            let density = counts[b] as f64 / (count as f64 * width);
            let center = lo + (b as f64 + 0.5) * width;
            (density - (-center / mu).exp() / mu).abs()
        })
        .collect();
    mean(&diffs)
}

/// OLS slope/intercept via the centered formulation.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (slope, my - slope * mx)
}

fn residual_norm(xs: &[f64], ys: &[f64]) -> f64 {
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

fn fluct_prop(z: &[f64], lag: usize, dfa: bool) -> f64 {
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

    let mut ln_tau = Vec::new();
    let mut ln_f = Vec::new();
    for &tau in &taus {
        let n_win = n_cs / tau;
        let xs: Vec<f64> = (1..=tau).map(|x| x as f64).collect();
        let mut total = 0.0;
        for w in 0..n_win {
            let segment = &cumulative[w * tau..(w + 1) * tau];
            let (slope, intercept) = line_fit(&xs, segment);
            if dfa {
                for (j, &v) in segment.iter().enumerate() {
                    let r = v - (slope * xs[j] + intercept);
                    total += r * r;
                }
            } else {
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
        let f =
            if dfa { (total / (n_win * tau) as f64).sqrt() } else { (total / n_win as f64).sqrt() };
        if f <= 0.0 {
            return 0.0;
        }
        ln_tau.push((tau as f64).ln());
        ln_f.push(f.ln());
    }

    let mut best_split = 0usize;
    let mut best_error = f64::INFINITY;
    for i in 5..=n_tau - 6 {
        let error =
            residual_norm(&ln_tau[..=i], &ln_f[..=i]) + residual_norm(&ln_tau[i..], &ln_f[i..]);
        if error < best_error {
            best_error = error;
            best_split = i;
        }
    }
    (best_split + 1) as f64 / n_tau as f64
}

fn transition_matrix_sumdiagcov(z: &[f64], acf: &[f64]) -> f64 {
    let tau = first_zero_crossing(acf, z.len());
    let down: Vec<f64> = z.iter().copied().step_by(tau).collect();
    if down.len() < 2 {
        return 0.0;
    }
    let symbols = three_symbols(&down);
    let mut t = [[0.0f64; 3]; 3];
    for i in 1..symbols.len() {
        t[symbols[i - 1] as usize][symbols[i] as usize] += 1.0;
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

/// 4×4 determinant by cofactor expansion along the first row.
fn det4(a: &[[f64; 4]; 4]) -> f64 {
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let mut det = 0.0;
    for col in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for (i, row) in minor.iter_mut().enumerate() {
            let mut jj = 0;
            for (j, &value) in a[i + 1].iter().enumerate() {
                if j == col {
                    continue;
                }
                row[jj] = value;
                jj += 1;
            }
        }
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * a[0][col] * det3(minor);
    }
    det
}

/// Least-squares cubic via the normal equations solved by Cramer's rule.
fn cubic_fit(xs: &[f64], ys: &[f64]) -> [f64; 4] {
    let mut pow_sums = [0.0f64; 7];
    let mut rhs = [0.0f64; 4];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut p = 1.0;
        for s in &mut pow_sums {
            *s += p;
            p *= x;
        }
        let mut p = 1.0;
        for r in &mut rhs {
            *r += y * p;
            p *= x;
        }
    }
    let mut a = [[0.0f64; 4]; 4];
    for i in 0..4 {
        a[i].copy_from_slice(&pow_sums[i..i + 4]);
    }
    let d = det4(&a);
    if d == 0.0 {
        return [0.0; 4];
    }
    let mut out = [0.0; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut ak = a;
        for i in 0..4 {
            ak[i][k] = rhs[i];
        }
        *slot = det4(&ak) / d;
    }
    out
}

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
    let r = acf_direct(&residual);
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
