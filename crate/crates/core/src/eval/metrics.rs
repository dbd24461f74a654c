use crate::error::{Error, Result};

/// Micro- and macro-averaged F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Scores {
    pub micro: f64,
    pub macro_: f64,
}

/// Micro/macro F1 over labels that occur in `y_true` or `y_pred`.
pub fn f1_scores<L: Copy + Ord>(y_true: &[L], y_pred: &[L]) -> Result<F1Scores> {
    f1_scores_with_vocabulary(y_true, y_pred, &[])
}

/// Like [`f1_scores`], but every label in `vocabulary` takes part in the
/// macro average. A vocabulary class absent from both truth and prediction
/// contributes an F1 of 0.
pub fn f1_scores_with_vocabulary<L: Copy + Ord>(
    y_true: &[L],
    y_pred: &[L],
    vocabulary: &[L],
) -> Result<F1Scores> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::Empty("f1 of empty predictions"));
    }
    let mut labels: Vec<L> = y_true.iter().chain(y_pred).chain(vocabulary).copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let idx = |l: &L| labels.binary_search(l).expect("label collected");
    let k = labels.len();
    let (mut tp, mut fp, mut fneg) = (vec![0usize; k], vec![0usize; k], vec![0usize; k]);
    for (t, p) in y_true.iter().zip(y_pred) {
        let (ti, pi) = (idx(t), idx(p));
        if ti == pi {
            tp[ti] += 1;
        } else {
            fp[pi] += 1;
            fneg[ti] += 1;
        }
    }
    let total_tp: usize = tp.iter().sum();
    let total_err: usize = fp.iter().sum::<usize>() + fneg.iter().sum::<usize>();
    let micro = total_tp as f64 / (total_tp as f64 + total_err as f64 / 2.0);
    let per_class: f64 = (0..k)
        .map(|c| {
            let denom = 2 * tp[c] + fp[c] + fneg[c];
            if denom == 0 {
                0.0
            } else {
                2.0 * tp[c] as f64 / denom as f64
            }
        })
        .sum();
    Ok(F1Scores {
        micro,
        macro_: per_class / k as f64,
    })
}

pub fn accuracy<L: PartialEq>(y_true: &[L], y_pred: &[L]) -> f64 {
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    hits as f64 / y_true.len() as f64
}

/// Average precision of a binary ranking: mean precision at each positive,
/// with tied scores grouped.
pub fn average_precision(y_true: &[bool], scores: &[f64]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: scores.len(),
        });
    }
    let positives = y_true.iter().filter(|&&t| t).count();
    if positives == 0 {
        return Err(Error::Empty("average precision needs a positive example"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut seen, mut prev_recall, mut ap) = (0usize, 0usize, 0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            tp += usize::from(y_true[order[i]]);
            seen += 1;
            i += 1;
        }
        let recall = tp as f64 / positives as f64;
        ap += (recall - prev_recall) * (tp as f64 / seen as f64);
        prev_recall = recall;
    }
    Ok(ap)
}
