//! Entropy-weight selection of one solution from a set of candidates.
//!
//! Costs are standardized per indicator to benefit scores in `[0, 1]`,
//! normalized to proportions, and each indicator is weighted by how far its
//! entropy falls below the maximum: indicators that separate the candidates
//! strongly carry more weight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw cost values, one row per solution, one column per indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl IndicatorMatrix {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidIndicators(format!("need at least 2 solutions, got {}", rows.len())));
        }
        if names.is_empty() {
            return Err(Error::InvalidIndicators("no indicators".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != names.len() {
                return Err(Error::InvalidIndicators(format!("row {i} has {} values, expected {}", r.len(), names.len())));
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidIndicators(format!("row {i} is not finite")));
            }
        }
        Ok(Self { names, rows })
    }

    pub fn unnamed(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map_or(0, |r| r.len());
        Self::new((0..k).map(|i| format!("J{i}")).collect(), rows)
    }

    pub fn solutions(&self) -> usize {
        self.rows.len()
    }

    pub fn indicators(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }
}

/// Outcome of a selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EwmResult {
    pub names: Vec<String>,
    pub entropies: Vec<f64>,
    pub weights: Vec<f64>,
    pub scores: Vec<f64>,
    pub selected: usize,
}

/// Benefit-oriented min-max scaling of one cost column. A constant column
/// maps to all ones.
pub fn standardize_column(col: &[f64]) -> Vec<f64> {
    let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = col.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > min) {
        return vec![1.0; col.len()];
    }
    col.iter().map(|x| (max - x) / (max - min)).collect()
}

/// Standardized matrix `S`, indexed `[solution][indicator]`.
pub fn standardize(m: &IndicatorMatrix) -> Vec<Vec<f64>> {
    let cols: Vec<Vec<f64>> = (0..m.indicators()).map(|k| standardize_column(&m.column(k))).collect();
    (0..m.solutions()).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

fn proportions(col: &[f64]) -> Vec<f64> {
    let total: f64 = col.iter().sum();
    if total > 0.0 {
        col.iter().map(|x| x / total).collect()
    } else {
        vec![1.0 / col.len() as f64; col.len()]
    }
}

/// Normalized Shannon entropy of a non-negative column, with `0 ln 0 = 0`.
/// A constant column (including all zeros) has entropy exactly 1.
pub fn entropy(col: &[f64]) -> f64 {
    let n = col.len();
    if n < 2 || col.iter().all(|&x| x == col[0]) {
        return 1.0;
    }
    let h: f64 = proportions(col).iter().filter(|&&p| p > 0.0).map(|p| -p * p.ln()).sum();
    (h / (n as f64).ln()).clamp(0.0, 1.0)
}

/// `w_k = (1 - E_k) / sum(1 - E)`; equal weights when every `E_k = 1`.
pub fn weights(entropies: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = entropies.iter().map(|e| (1.0 - e).max(0.0)).collect();
    let total: f64 = d.iter().sum();
    if total <= 0.0 {
        return vec![1.0 / entropies.len() as f64; entropies.len()];
    }
    d.iter().map(|x| x / total).collect()
}

/// Full pipeline: standardize, entropy, weights, score; the highest score
/// wins, ties to the lowest index.
pub fn select(m: &IndicatorMatrix) -> Result<EwmResult> {
    let m = IndicatorMatrix::new(m.names.clone(), m.rows.clone())?;
    let cols: Vec<Vec<f64>> = (0..m.indicators()).map(|k| standardize_column(&m.column(k))).collect();
    let entropies: Vec<f64> = cols.iter().map(|c| entropy(c)).collect();
    let w = weights(&entropies);
    let p: Vec<Vec<f64>> = cols.iter().map(|c| proportions(c)).collect();
    let scores: Vec<f64> = (0..m.solutions()).map(|i| (0..m.indicators()).map(|k| w[k] * p[k][i]).sum()).collect();
    let mut selected = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[selected] {
            selected = i;
        }
    }
    Ok(EwmResult { names: m.names, entropies, weights: w, scores, selected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn standardize_examples() {
        assert_eq!(standardize_column(&[0.0, 1.0]), vec![1.0, 0.0]);
        assert_eq!(standardize_column(&[1.0, 2.0, 3.0]), vec![1.0, 0.5, 0.0]);
        assert_eq!(standardize_column(&[4.0, 4.0]), vec![1.0, 1.0]);
        let scaled: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|x| 7.0 * x - 3.0).collect();
        assert_eq!(standardize_column(&scaled), vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&[0.3; 7]), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(entropy(&[1.0, 0.0]), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(entropy(&[1.0, 1.0, 0.0, 0.0]), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weights(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(weights(&[0.0, 1.0]), vec![1.0, 0.0]);
        assert_eq!(weights(&[1.0, 1.0, 1.0]), vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn two_row_example() {
        let m = IndicatorMatrix::unnamed(vec![vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        let r = select(&m).unwrap();
        assert_eq!(r.selected, 0);
        assert_abs_diff_eq!(r.scores[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.scores[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_column_gets_zero_weight() {
        let m = IndicatorMatrix::unnamed(vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let r = select(&m).unwrap();
        assert_eq!(r.weights[1], 0.0);
        assert_eq!(r.selected, 0);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let m = IndicatorMatrix::unnamed(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let r = select(&m).unwrap();
        assert_eq!(r.scores[0], r.scores[1]);
        assert_eq!(r.selected, 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(IndicatorMatrix::unnamed(vec![vec![1.0]]).is_err());
        assert!(IndicatorMatrix::unnamed(vec![vec![1.0], vec![f64::NAN]]).is_err());
        assert!(IndicatorMatrix::unnamed(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn dispersed_column_outweighs_flat_column() {
        let n = 10;
        let a: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { 1.0 }).collect();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * i as f64).collect();
        let rows = (0..n).map(|i| vec![a[i], b[i]]).collect();
        let r = select(&IndicatorMatrix::unnamed(rows).unwrap()).unwrap();
        assert!(r.weights[0] > r.weights[1], "{:?}", r.weights);
    }

    fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..12, 2usize..4).prop_flat_map(|(n, k)| prop::collection::vec(prop::collection::vec(0.0f64..10.0, k), n))
    }

    proptest! {
        #[test]
        fn weights_and_scores_are_normalized(rows in matrix_strategy()) {
            let r = select(&IndicatorMatrix::unnamed(rows).unwrap()).unwrap();
            prop_assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(r.weights.iter().all(|&w| (0.0..=1.0).contains(&w)));
            prop_assert!(r.scores.iter().all(|&s| (-1e-15..=1.0 + 1e-12).contains(&s)));
            prop_assert!(r.scores.iter().all(|&s| s <= r.scores[r.selected]));
        }

        #[test]
        fn affine_rescaling_keeps_selection(rows in matrix_strategy(), scale in 0.1f64..100.0, shift in -50.0f64..50.0) {
            let base = select(&IndicatorMatrix::unnamed(rows.clone()).unwrap()).unwrap();
            let moved: Vec<Vec<f64>> = rows.iter()
                .map(|r| r.iter().enumerate().map(|(k, x)| if k == 0 { scale * x + shift } else { *x }).collect())
                .collect();
            let r = select(&IndicatorMatrix::unnamed(moved).unwrap()).unwrap();
            for (a, b) in base.scores.iter().zip(&r.scores) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            // near-ties may flip under rounding; compare only clear winners
            let mut sorted = base.scores.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            if sorted[0] - sorted[1] > 1e-9 {
                prop_assert_eq!(base.selected, r.selected);
            }
        }

        #[test]
        fn row_permutation_relabels_selection(rows in matrix_strategy(), rot in 0usize..12) {
            let n = rows.len();
            let rot = rot % n;
            let base = select(&IndicatorMatrix::unnamed(rows.clone()).unwrap()).unwrap();
            let mut rotated = rows.clone();
            rotated.rotate_left(rot);
            let r = select(&IndicatorMatrix::unnamed(rotated).unwrap()).unwrap();
            for i in 0..n {
                prop_assert!((r.scores[i] - base.scores[(i + rot) % n]).abs() < 1e-12);
            }
        }

        #[test]
        fn planted_dominant_row_is_selected(rows in matrix_strategy(), at in 0usize..12) {
            let mut rows = rows;
            let k = rows[0].len();
            let best: Vec<f64> = (0..k)
                .map(|j| rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min) - 1.0)
                .collect();
            let at = at % (rows.len() + 1);
            rows.insert(at, best);
            let r = select(&IndicatorMatrix::unnamed(rows).unwrap()).unwrap();
            prop_assert_eq!(r.selected, at);
        }
    }
}
