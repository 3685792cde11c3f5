//! A small CART decision-tree classifier and the evaluation protocol built
//! around it: stratified splits, repeated holdouts, stratified 5-fold
//! cross-validation, hyperparameter grid search, and greedy forward feature
//! selection.
//!
//! The reported configuration throughout the experiments is a plain depth-3
//! tree on the full feature set; the grid search and feature selection are
//! optional analysis tools. Everything is deterministic given its seed, and
//! training is invariant to row order (splits consider only boundaries
//! between distinct sorted feature values).

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::LabeledMatrix;
use crate::seeding;
use crate::{Error, Result};

/// Depth of the reported tree configuration.
pub const DEFAULT_MAX_DEPTH: usize = 3;

/// Serialized-model format version.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// How many features each split search may consider.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
    Log2,
    Fraction(f64),
}

impl MaxFeatures {
    fn resolve(self, width: usize) -> usize {
        let k = match self {
            MaxFeatures::All => width,
            MaxFeatures::Sqrt => (width as f64).sqrt().floor() as usize,
            MaxFeatures::Log2 => (width as f64).log2().floor() as usize,
            MaxFeatures::Fraction(f) => (f * width as f64).floor() as usize,
        };
        k.clamp(1, width)
    }
}

/// Minimum number of training rows each leaf must keep.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinLeaf {
    Count(usize),
    /// Resolved as `ceil(fraction · n)` against the fitted set, min 1.
    Fraction(f64),
}

impl MinLeaf {
    fn resolve(self, n: usize) -> usize {
        match self {
            MinLeaf::Count(c) => c.max(1),
            MinLeaf::Fraction(f) => ((f * n as f64).ceil() as usize).max(1),
        }
    }
}

/// Tree-training hyperparameters.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` leaves the depth unconstrained.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: MinLeaf,
    pub max_features: MaxFeatures,
    /// Seeds the per-node feature subsampling (unused under
    /// [`MaxFeatures::All`], but kept so reports can cite one seed).
    pub seed: u64,
}

impl TreeParams {
    /// The plain configuration: given depth, every feature, leaves of any
    /// size.
    pub fn depth(max_depth: Option<usize>, seed: u64) -> TreeParams {
        TreeParams {
            max_depth,
            min_samples_leaf: MinLeaf::Count(1),
            max_features: MaxFeatures::All,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(0) = self.max_depth {
            return Err(Error::invalid("max_depth 0 cannot split; use None for unconstrained"));
        }
        if let MinLeaf::Fraction(f) = self.min_samples_leaf {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::invalid(format!(
                    "min-leaf fraction must lie in [0, 1], got {f}"
                )));
            }
        }
        if let MaxFeatures::Fraction(f) = self.max_features {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::invalid(format!(
                    "max-features fraction must lie in (0, 1], got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// One tree node.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: u8,
        /// Training rows of class 0 and class 1 that reached this leaf.
        counts: [usize; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// A trained CART classifier.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct DecisionTree {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub params: TreeParams,
    /// Gini impurity of the training set at the root.
    pub root_impurity: f64,
    pub root: Node,
}

impl DecisionTree {
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Predicts one row (values in training feature order): descend left on
    /// `value ≤ threshold`.
    pub fn predict_row(&self, row: &[f64]) -> Result<u8> {
        if row.len() != self.feature_names.len() {
            return Err(Error::invalid(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.feature_names.len()
            )));
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { label, .. } => return Ok(*label),
                Node::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut payload = serde_json::to_string_pretty(self)?;
        payload.push('\n');
        fs::write(path, payload)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DecisionTree> {
        let tree: DecisionTree = serde_json::from_str(&fs::read_to_string(path)?)?;
        if tree.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {}",
                tree.format_version
            )));
        }
        Ok(tree)
    }
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

fn majority(counts: [usize; 2]) -> u8 {
    u8::from(counts[1] > counts[0])
}

fn class_counts(data: &LabeledMatrix, rows: &[usize]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for &r in rows {
        counts[data.labels[r] as usize] += 1;
    }
    counts
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    weighted_gini: f64,
}

/// Scans one feature's distinct-value boundaries for the best Gini split.
/// Candidate thresholds are midpoints between consecutive distinct sorted
/// values, skipped if rounding pushes the midpoint onto either value.
fn scan_feature(
    data: &LabeledMatrix,
    rows: &[usize],
    feature: usize,
    min_leaf: usize,
    total: [usize; 2],
) -> Option<(f64, f64)> {
    let mut values: Vec<(f64, u8)> =
        rows.iter().map(|&r| (data.rows[r][feature], data.labels[r])).collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = values.len();
    let mut best: Option<(f64, f64)> = None;
    let mut left = [0usize; 2];
    for i in 0..n - 1 {
        left[values[i].1 as usize] += 1;
        if values[i].0 == values[i + 1].0 {
            continue;
        }
        let threshold = 0.5 * (values[i].0 + values[i + 1].0);
        if !(values[i].0 < threshold && threshold < values[i + 1].0) {
            continue;
        }
        let n_left = i + 1;
        let n_right = n - n_left;
        if n_left < min_leaf || n_right < min_leaf {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let weighted = (n_left as f64 * gini(left) + n_right as f64 * gini(right)) / n as f64;
        if best.is_none_or(|(_, b)| weighted < b) {
            best = Some((threshold, weighted));
        }
    }
    best
}

fn build_node(
    data: &LabeledMatrix,
    rows: &[usize],
    depth: usize,
    params: &TreeParams,
    min_leaf: usize,
    n_features: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Node {
    let counts = class_counts(data, rows);
    let parent_gini = gini(counts);
    let at_depth_limit = params.max_depth.is_some_and(|d| depth >= d);
    if parent_gini == 0.0 || at_depth_limit || rows.len() < 2 * min_leaf {
        return Node::Leaf { label: majority(counts), counts };
    }

    let width = data.feature_names.len();
    let subset: Vec<usize> = if n_features >= width {
        (0..width).collect()
    } else {
        let mut picked: Vec<usize> =
            rand::seq::index::sample(rng, width, n_features).into_iter().collect();
        picked.sort_unstable();
        picked
    };

    let mut best: Option<BestSplit> = None;
    for feature in subset {
        if let Some((threshold, weighted)) = scan_feature(data, rows, feature, min_leaf, counts) {
            if weighted < parent_gini && best.as_ref().is_none_or(|b| weighted < b.weighted_gini) {
                best = Some(BestSplit { feature, threshold, weighted_gini: weighted });
            }
        }
    }
    let Some(split) = best else {
        return Node::Leaf { label: majority(counts), counts };
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| data.rows[r][split.feature] <= split.threshold);
    let left = build_node(data, &left_rows, depth + 1, params, min_leaf, n_features, rng);
    let right = build_node(data, &right_rows, depth + 1, params, min_leaf, n_features, rng);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

fn validate_labels(data: &LabeledMatrix) -> Result<()> {
    if data.labels.iter().any(|&l| l > 1) {
        return Err(Error::invalid("labels must be 0 or 1"));
    }
    Ok(())
}

/// Trains a CART tree by greedy Gini minimization.
///
/// At each node the (feature, threshold) pair minimizing the weighted child
/// Gini impurity is chosen, requiring a strict improvement over the node's
/// own impurity; ties go to the lower feature index, then the lower
/// threshold. Recursion stops at the depth limit, on pure nodes, and when no
/// improving split exists.
pub fn train_tree(data: &LabeledMatrix, params: &TreeParams) -> Result<DecisionTree> {
    params.validate()?;
    validate_labels(data)?;
    if data.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    if data.feature_names.is_empty() {
        return Err(Error::invalid("cannot train with zero features"));
    }
    let min_leaf = params.min_samples_leaf.resolve(data.len());
    let n_features = params.max_features.resolve(data.feature_names.len());
    let mut rng = seeding::rng(params.seed, "tree/feature-subsets", 0);
    let rows: Vec<usize> = (0..data.len()).collect();
    let root = build_node(data, &rows, 0, params, min_leaf, n_features, &mut rng);
    Ok(DecisionTree {
        format_version: MODEL_FORMAT_VERSION,
        feature_names: data.feature_names.clone(),
        params: *params,
        root_impurity: gini(class_counts(data, &rows)),
        root,
    })
}

/// Accuracy of the tree on a dataset, in percent.
pub fn evaluate(tree: &DecisionTree, data: &LabeledMatrix) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty dataset"));
    }
    if data.feature_names != tree.feature_names {
        return Err(Error::invalid("evaluation schema differs from the model's"));
    }
    let mut correct = 0usize;
    for (row, &label) in data.rows.iter().zip(&data.labels) {
        if tree.predict_row(row)? == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64 * 100.0)
}

fn rows_to_matrix(data: &LabeledMatrix, rows: &[usize]) -> LabeledMatrix {
    let mut out = LabeledMatrix::new(data.label_name.clone(), data.feature_names.clone());
    for &r in rows {
        out.push(data.labels[r], data.rows[r].clone());
    }
    out
}

fn class_indices(data: &LabeledMatrix) -> Result<[Vec<usize>; 2]> {
    validate_labels(data)?;
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in data.labels.iter().enumerate() {
        by_class[l as usize].push(i);
    }
    if by_class[0].is_empty() || by_class[1].is_empty() {
        return Err(Error::invalid("stratified operations need both classes present"));
    }
    Ok(by_class)
}

/// Splits into train and test sets, preserving class proportions.
///
/// Each class contributes `round(test_fraction · class size)` rows (half
/// up) to the test set, chosen by a seeded shuffle; both outputs keep the
/// original row order.
pub fn stratified_split(
    data: &LabeledMatrix,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledMatrix, LabeledMatrix)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    let by_class = class_indices(data)?;
    let mut test_rows = Vec::new();
    let mut train_rows = Vec::new();
    for (class, indices) in by_class.iter().enumerate() {
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut seeding::rng(seed, "split/class", class as u64));
        let n_test = (test_fraction * indices.len() as f64 + 0.5).floor() as usize;
        test_rows.extend_from_slice(&shuffled[..n_test]);
        train_rows.extend_from_slice(&shuffled[n_test..]);
    }
    test_rows.sort_unstable();
    train_rows.sort_unstable();
    Ok((rows_to_matrix(data, &train_rows), rows_to_matrix(data, &test_rows)))
}

/// Accuracy report over repeated seeded holdouts.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TrainReport {
    pub test_fraction: f64,
    pub max_depth: Option<usize>,
    pub seeds: u64,
    /// Test accuracy (percent) per holdout seed `1..=seeds`.
    pub per_seed: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of the per-seed accuracies.
    pub std: f64,
}

impl TrainReport {
    /// Per-seed accuracies as a two-column CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,accuracy\n");
        for (i, acc) in self.per_seed.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, acc));
        }
        out
    }
}

/// Runs split/train/evaluate for seeds `1..=seeds` with the plain tree of
/// the given depth, reporting mean and population standard deviation.
pub fn repeated_holdout(
    data: &LabeledMatrix,
    test_fraction: f64,
    max_depth: Option<usize>,
    seeds: u64,
) -> Result<TrainReport> {
    if seeds == 0 {
        return Err(Error::invalid("need at least one holdout seed"));
    }
    let per_seed: Vec<f64> = (1..=seeds)
        .into_par_iter()
        .map(|seed| {
            let (train, test) = stratified_split(data, test_fraction, seed)?;
            let tree = train_tree(&train, &TreeParams::depth(max_depth, seed))?;
            evaluate(&tree, &test)
        })
        .collect::<Result<_>>()?;
    let mean = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
    let std = (per_seed.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>()
        / per_seed.len() as f64)
        .sqrt();
    Ok(TrainReport { test_fraction, max_depth, seeds, per_seed, mean, std })
}

/// Mean accuracy (percent) of stratified 5-fold cross-validation.
///
/// Folds are dealt per class round-robin after a seeded shuffle, so fold
/// class balance is within one row of exact.
pub fn cv5_accuracy(data: &LabeledMatrix, params: &TreeParams, seed: u64) -> Result<f64> {
    const FOLDS: usize = 5;
    let by_class = class_indices(data)?;
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); FOLDS];
    for (class, indices) in by_class.iter().enumerate() {
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut seeding::rng(seed, "cv/class", class as u64));
        for (j, row) in shuffled.into_iter().enumerate() {
            folds[j % FOLDS].push(row);
        }
    }
    let accuracies: Vec<f64> = (0..FOLDS)
        .into_par_iter()
        .map(|fold| {
            let mut test_rows = folds[fold].clone();
            test_rows.sort_unstable();
            let mut train_rows: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != fold)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            train_rows.sort_unstable();
            let mut fold_params = *params;
            fold_params.seed = seeding::derive_seed(seed, "cv/tree", fold as u64);
            let tree = train_tree(&rows_to_matrix(data, &train_rows), &fold_params)?;
            evaluate(&tree, &rows_to_matrix(data, &test_rows))
        })
        .collect::<Result<_>>()?;
    Ok(accuracies.iter().sum::<f64>() / FOLDS as f64)
}

/// One grid-search cell.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct GridPoint {
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: MinLeaf,
}

/// The full hyperparameter grid: depth 1–10 plus unconstrained ×
/// max-features fractions 0.1–1.0 plus sqrt/log2/all × min-leaf fractions
/// 0.1–1.0 (1430 cells).
pub fn full_grid() -> Vec<GridPoint> {
    let depths: Vec<Option<usize>> = (1..=10).map(Some).chain([None]).collect();
    let mut max_features: Vec<MaxFeatures> =
        (1..=10).map(|i| MaxFeatures::Fraction(i as f64 / 10.0)).collect();
    max_features.extend([MaxFeatures::Sqrt, MaxFeatures::Log2, MaxFeatures::All]);
    let min_leaves: Vec<MinLeaf> = (1..=10).map(|i| MinLeaf::Fraction(i as f64 / 10.0)).collect();
    let mut grid = Vec::with_capacity(depths.len() * max_features.len() * min_leaves.len());
    for &depth in &depths {
        for &mf in &max_features {
            for &ml in &min_leaves {
                grid.push(GridPoint { max_depth: depth, max_features: mf, min_samples_leaf: ml });
            }
        }
    }
    grid
}

/// Grid-search outcome: the winning cell and its CV accuracy.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct GridOutcome {
    pub index: usize,
    pub params: GridPoint,
    pub cv_accuracy: f64,
}

/// Evaluates every cell by stratified 5-fold CV (same folds for all cells)
/// and returns the winner; ties go to the smaller depth (unconstrained
/// counts as infinite), then the smaller grid index.
pub fn grid_search(data: &LabeledMatrix, grid: &[GridPoint], seed: u64) -> Result<GridOutcome> {
    if grid.is_empty() {
        return Err(Error::invalid("the hyperparameter grid is empty"));
    }
    let scores: Vec<f64> = grid
        .par_iter()
        .map(|cell| {
            let params = TreeParams {
                max_depth: cell.max_depth,
                min_samples_leaf: cell.min_samples_leaf,
                max_features: cell.max_features,
                seed,
            };
            cv5_accuracy(data, &params, seed)
        })
        .collect::<Result<_>>()?;
    let depth_key = |c: &GridPoint| c.max_depth.unwrap_or(usize::MAX);
    let mut winner = 0usize;
    for i in 1..grid.len() {
        if scores[i] > scores[winner]
            || (scores[i] == scores[winner] && depth_key(&grid[i]) < depth_key(&grid[winner]))
        {
            winner = i;
        }
    }
    Ok(GridOutcome { index: winner, params: grid[winner], cv_accuracy: scores[winner] })
}

/// Greedy forward selection of `k` feature indices.
///
/// Starting empty, repeatedly adds the feature whose addition maximizes the
/// stratified 5-fold CV accuracy of a depth-3 tree on the selected columns;
/// ties go to the lower feature index.
pub fn forward_select(data: &LabeledMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    let width = data.feature_names.len();
    if k == 0 || k > width {
        return Err(Error::invalid(format!("k must lie in 1..={width} (feature count), got {k}")));
    }
    let mut selected: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..k {
        let candidates: Vec<usize> = (0..width).filter(|f| !selected.contains(f)).collect();
        let scores: Vec<f64> = candidates
            .par_iter()
            .map(|&f| {
                let mut columns = selected.clone();
                columns.push(f);
                columns.sort_unstable();
                let sub = data.select_columns(&columns);
                cv5_accuracy(&sub, &TreeParams::depth(Some(DEFAULT_MAX_DEPTH), seed), seed)
            })
            .collect::<Result<_>>()?;
        let mut best = 0usize;
        for i in 1..candidates.len() {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        selected.push(candidates[best]);
    }
    Ok(selected)
}
