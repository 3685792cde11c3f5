//! Exhaustive brute-force search for the best root split of a CART tree:
//! every feature, every midpoint threshold between adjacent distinct values,
//! each candidate scored by partitioning the rows from scratch.

/// One candidate split and its score.
#[derive(Clone, Copy, Debug)]
pub struct RootSplit {
    pub feature: usize,
    pub threshold: f64,
    pub weighted_gini: f64,
}

fn gini_of(labels: &[u8]) -> f64 {
    let mut counts = [0usize; 2];
    for &l in labels {
        counts[l as usize] += 1;
    }
    let n = counts[0] + counts[1];
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    1.0 - (counts[0] * counts[0] + counts[1] * counts[1]) as f64 / (nf * nf)
}

/// Gini impurity of the whole label set (the root's own impurity).
pub fn parent_gini(labels: &[u8]) -> f64 {
    gini_of(labels)
}

/// Every admissible root candidate `(feature, threshold, weighted gini)`,
/// feature index ascending and threshold ascending within a feature.
/// Admissible means the midpoint lies strictly between two adjacent distinct
/// values and both children hold at least `min_leaf` rows.
pub fn all_root_candidates(rows: &[Vec<f64>], labels: &[u8], min_leaf: usize) -> Vec<RootSplit> {
    let n = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for feature in 0..width {
        let mut values: Vec<f64> = rows.iter().map(|r| r[feature]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let threshold = 0.5 * (pair[0] + pair[1]);
            if !(pair[0] < threshold && threshold < pair[1]) {
                continue;
            }
            let left: Vec<u8> =
                (0..n).filter(|&i| rows[i][feature] <= threshold).map(|i| labels[i]).collect();
            let right: Vec<u8> =
                (0..n).filter(|&i| rows[i][feature] > threshold).map(|i| labels[i]).collect();
            if left.len() < min_leaf || right.len() < min_leaf {
                continue;
            }
            let weighted = (left.len() as f64 * gini_of(&left)
                + right.len() as f64 * gini_of(&right))
                / n as f64;
            out.push(RootSplit { feature, threshold, weighted_gini: weighted });
        }
    }
    out
}
