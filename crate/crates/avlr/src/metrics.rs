//! Evaluation metrics used by the benchmark harness. Everything returns
//! plain numbers; quantities that can be undefined (AUC with one class,
//! precision with no positive predictions) come back as `Option` so the
//! caller can render an explicit marker instead of a silent `NaN`.

use crate::error::{Error, Result};

/// Root mean squared difference between two equal-length slices.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dim("rmse: length mismatch".into()));
    }
    if a.is_empty() {
        return Err(Error::Data("rmse: empty input".into()));
    }
    let acc: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((acc / a.len() as f64).sqrt())
}

/// RMSE over the masked (missing) cells only: how well a completion
/// recovered what the mechanism hid. `None` when nothing was masked.
pub fn imputation_rmse(completed: &[f64], truth: &[f64], mask: &[bool]) -> Result<Option<f64>> {
    if completed.len() != truth.len() || completed.len() != mask.len() {
        return Err(Error::Dim("imputation_rmse: length mismatch".into()));
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    for i in 0..mask.len() {
        if !mask[i] {
            let dv = completed[i] - truth[i];
            acc += dv * dv;
            count += 1;
        }
    }
    Ok((count > 0).then(|| (acc / count as f64).sqrt()))
}

/// Frobenius norm of the difference between two dense `d x d` matrices.
pub fn frobenius_diff(a: &[f64], b: &[f64], d: usize) -> Result<f64> {
    if a.len() != d * d || b.len() != d * d {
        return Err(Error::Dim("frobenius_diff: shape mismatch".into()));
    }
    let acc: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(acc.sqrt())
}

/// Area under the ROC curve by the rank-sum identity: sort by score,
/// assign tied scores their average rank, and normalize the positive
/// ranks. Equals concordant pairs plus half the ties over all pairs.
/// `None` when either class is absent.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<Option<f64>> {
    if scores.len() != labels.len() {
        return Err(Error::Dim("auc: length mismatch".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Data("auc: NaN score".into()));
    }
    let n = scores.len();
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Ok(None);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| scores[i].partial_cmp(&scores[j]).unwrap());

    // Average rank within each tied block (ranks are 1-based).
    let mut rank = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for k in i..=j {
            rank[order[k]] = avg;
        }
        i = j + 1;
    }

    let rank_sum: f64 = (0..n).filter(|&i| labels[i] == 1).map(|i| rank[i]).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(Some(u / (n_pos as f64 * n_neg as f64)))
}

/// Confusion counts and the derived rates. Rates whose denominator is zero
/// are `None` rather than a conventional value.
#[derive(Debug, Clone, PartialEq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn confusion_metrics(pred: &[u8], truth: &[u8]) -> Result<Confusion> {
    if pred.len() != truth.len() {
        return Err(Error::Dim("confusion: length mismatch".into()));
    }
    if pred.is_empty() {
        return Err(Error::Data("confusion: empty input".into()));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 0) => tn += 1,
            (0, 1) => fn_ += 1,
            _ => return Err(Error::Data("confusion: labels must be 0 or 1".into())),
        }
    }
    let accuracy = (tp + tn) as f64 / pred.len() as f64;
    let precision = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
    let recall = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Ok(Confusion { tp, fp, tn, fn_, accuracy, precision, recall, f1 })
}

/// Mean squared error of probabilistic predictions against binary labels.
pub fn brier(probs: &[f64], labels: &[u8]) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(Error::Dim("brier: length mismatch".into()));
    }
    if probs.is_empty() {
        return Err(Error::Data("brier: empty input".into()));
    }
    let acc: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| (p - f64::from(y)) * (p - f64::from(y)))
        .sum();
    Ok(acc / probs.len() as f64)
}

/// Mean and sample standard deviation (n - 1 denominator; zero when fewer
/// than two values).
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Data("mean_std: empty input".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use avlr_oracles::{brute_force_auc, welford_mean_std};
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn rmse_hand_value() {
        let got = rmse(&[1.0, 2.0, 3.0], &[1.0, 4.0, 3.0]).unwrap();
        assert!((got - (4.0_f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(rmse(&[5.0], &[5.0]).unwrap(), 0.0);
    }

    #[test]
    fn imputation_rmse_uses_only_masked_cells() {
        let completed = [1.0, 9.0, 3.0, 7.0];
        let truth = [1.0, 8.0, 3.0, 4.0];
        let mask = [true, false, true, false];
        let got = imputation_rmse(&completed, &truth, &mask).unwrap().unwrap();
        assert!((got - ((1.0 + 9.0) / 2.0_f64).sqrt()).abs() < 1e-15);
        assert!(imputation_rmse(&completed, &truth, &[true; 4]).unwrap().is_none());
    }

    #[test]
    fn frobenius_hand_value() {
        let a = [1.0, 0.0, 0.0, 1.0];
        let b = [0.0, 0.0, 0.0, 0.0];
        assert!((frobenius_diff(&a, &b, 2).unwrap() - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn auc_known_cases() {
        // Perfect separation, reversal, and all-tied scores.
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), Some(1.0));
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[0, 0, 1, 1]).unwrap(), Some(0.0));
        assert_eq!(auc(&[0.5, 0.5, 0.5, 0.5], &[0, 1, 0, 1]).unwrap(), Some(0.5));
        assert_eq!(auc(&[0.1, 0.9], &[1, 1]).unwrap(), None);
    }

    #[test]
    fn auc_matches_brute_force_pair_counting() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for trial in 0..30 {
            let n = 5 + (trial * 7) % 150;
            // Quantized scores force plenty of ties.
            let scores: Vec<f64> = (0..n)
                .map(|_| (rng.random_range(0.0_f64..1.0) * 8.0).round() / 8.0)
                .collect();
            let mut labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2) as u8).collect();
            // Guarantee both classes so the quadratic oracle is defined.
            labels[0] = 0;
            labels[1] = 1;
            let ours = auc(&scores, &labels).unwrap().unwrap();
            let oracle = brute_force_auc(&scores, &labels);
            assert!((ours - oracle).abs() < 1e-12, "trial {trial}: {ours} vs {oracle}");
        }
    }

    #[test]
    fn confusion_hand_example() {
        let pred = [1, 1, 0, 0, 1];
        let truth = [1, 0, 0, 1, 1];
        let c = confusion_metrics(&pred, &truth).unwrap();
        assert_eq!((c.tp, c.fp, c.tn, c.fn_), (2, 1, 1, 1));
        assert!((c.accuracy - 0.6).abs() < 1e-15);
        assert!((c.precision.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.recall.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.f1.unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn confusion_flags_undefined_rates() {
        // No positive predictions: precision undefined, recall 0.
        let c = confusion_metrics(&[0, 0, 0], &[1, 0, 1]).unwrap();
        assert_eq!(c.precision, None);
        assert_eq!(c.recall, Some(0.0));
        assert_eq!(c.f1, None);
        // No true positives at all: recall undefined.
        let c2 = confusion_metrics(&[1, 0], &[0, 0]).unwrap();
        assert_eq!(c2.recall, None);
    }

    #[test]
    fn brier_hand_value() {
        let got = brier(&[0.8, 0.3], &[1, 0]).unwrap();
        assert!((got - (0.04 + 0.09) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn mean_std_matches_streaming_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let values: Vec<f64> = (0..100).map(|_| rng.random_range(-5.0..5.0)).collect();
        let (m, s) = mean_std(&values).unwrap();
        let (om, os) = welford_mean_std(&values);
        assert!((m - om).abs() < 1e-12);
        assert!((s - os).abs() < 1e-12);
        assert_eq!(mean_std(&[3.7]).unwrap(), (3.7, 0.0));
    }

    proptest! {
        #[test]
        fn auc_score_reversal_is_complementary(seed in 0u64..200) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let n = 4 + (seed as usize % 60);
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2) as u8).collect();
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            match (auc(&scores, &labels).unwrap(), auc(&neg, &labels).unwrap()) {
                (Some(a), Some(b)) => prop_assert!((a + b - 1.0).abs() < 1e-12),
                (None, None) => {}
                other => prop_assert!(false, "disagreement {:?}", other),
            }
        }
    }
}
