//! Weighted decision stumps, the weak learner of the boosting loop.

use serde::{Deserialize, Serialize};

use crate::data::{Classifier, LabeledDataset};
use crate::error::{Error, Result};

/// Predicts `polarity` when `x[feature] > threshold`, `-polarity` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionStump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
}

impl DecisionStump {
    pub fn new(feature: usize, threshold: f64, polarity: i8) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::validation("stump threshold must be finite"));
        }
        if polarity != 1 && polarity != -1 {
            return Err(Error::validation("stump polarity must be -1 or 1"));
        }
        Ok(DecisionStump {
            feature,
            threshold,
            polarity,
        })
    }
}

impl Classifier for DecisionStump {
    fn min_dim(&self) -> usize {
        self.feature + 1
    }

    #[inline]
    fn predict_unchecked(&self, x: &[f64]) -> i8 {
        if x[self.feature] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }
}

/// Strictly positive per-example weights; they need not sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleWeights(Vec<f64>);

impl ExampleWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::validation("weights must be non-empty"));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::validation(format!(
                "weight {i} is {}, weights must be positive and finite",
                weights[i]
            )));
        }
        Ok(ExampleWeights(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

fn check_weights(dataset: &LabeledDataset, weights: &ExampleWeights) -> Result<()> {
    if weights.len() != dataset.len() {
        return Err(Error::validation(format!(
            "{} weights for {} examples",
            weights.len(),
            dataset.len()
        )));
    }
    Ok(())
}

/// Normalized weighted misclassification mass of `classifier`.
pub fn weighted_error<C: Classifier>(
    classifier: &C,
    dataset: &LabeledDataset,
    weights: &ExampleWeights,
) -> Result<f64> {
    check_weights(dataset, weights)?;
    if classifier.min_dim() > dataset.dim() {
        return Err(Error::validation("classifier dimension exceeds dataset"));
    }
    let mut wrong = 0.0;
    let mut total = 0.0;
    for ((x, &y), &w) in dataset
        .rows()
        .zip(dataset.labels())
        .zip(weights.as_slice())
    {
        if classifier.predict_unchecked(x) != y {
            wrong += w;
        }
        total += w;
    }
    Ok(wrong / total)
}

/// Candidate thresholds for one feature: one value below the minimum, then
/// the midpoints between consecutive distinct sorted values.
pub fn candidate_thresholds(sorted_distinct: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(sorted_distinct.len());
    if let Some(&lo) = sorted_distinct.first() {
        out.push(lo - lo.abs().max(1.0));
    }
    out.extend(sorted_distinct.windows(2).map(|w| midpoint(w[0], w[1])));
    out
}

fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    // adjacent floats: the midpoint may round up onto `b`
    if mid >= b {
        a
    } else {
        mid
    }
}

/// Exhaustive search for the stump with the smallest weighted error.
///
/// Ties go to the lowest feature index, then the lowest threshold, then
/// polarity `+1`.
pub fn fit_stump(dataset: &LabeledDataset, weights: &ExampleWeights) -> Result<DecisionStump> {
    check_weights(dataset, weights)?;
    let w = weights.as_slice();
    let (mut pos_total, mut neg_total) = (0.0, 0.0);
    for (&y, &wi) in dataset.labels().iter().zip(w) {
        if y == 1 {
            pos_total += wi;
        } else {
            neg_total += wi;
        }
    }

    let mut best: Option<(f64, DecisionStump)> = None;
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    for feature in 0..dataset.dim() {
        order.sort_by(|&a, &b| {
            dataset
                .feature(a, feature)
                .total_cmp(&dataset.feature(b, feature))
        });
        let lo = dataset.feature(order[0], feature);
        let hi = dataset.feature(order[order.len() - 1], feature);
        if lo == hi {
            continue;
        }

        // Masses of each class at or below the current threshold.
        let (mut pos_le, mut neg_le) = (0.0, 0.0);
        let mut threshold = lo - lo.abs().max(1.0);
        let mut next = 0;
        loop {
            let plus = pos_le + (neg_total - neg_le);
            let minus = neg_le + (pos_total - pos_le);
            for (err, polarity) in [(plus, 1i8), (minus, -1i8)] {
                if best.as_ref().is_none_or(|(e, _)| err < *e) {
                    best = Some((
                        err,
                        DecisionStump {
                            feature,
                            threshold,
                            polarity,
                        },
                    ));
                }
            }
            if next == order.len() {
                break;
            }
            // absorb the next block of equal values
            let value = dataset.feature(order[next], feature);
            while next < order.len() && dataset.feature(order[next], feature) == value {
                let i = order[next];
                if dataset.label(i) == 1 {
                    pos_le += w[i];
                } else {
                    neg_le += w[i];
                }
                next += 1;
            }
            if next == order.len() {
                break;
            }
            threshold = midpoint(value, dataset.feature(order[next], feature));
        }
    }
    best.map(|(_, s)| s).ok_or(Error::NoSplit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset_1d(points: &[(f64, i8)]) -> LabeledDataset {
        LabeledDataset::new(
            points.iter().map(|&(x, _)| vec![x]).collect(),
            points.iter().map(|&(_, y)| y).collect(),
        )
        .unwrap()
    }

    #[test]
    fn separable_pair() {
        let ds = dataset_1d(&[(-1.0, -1), (1.0, 1)]);
        let w = ExampleWeights::uniform(2).unwrap();
        let s = fit_stump(&ds, &w).unwrap();
        assert_eq!(s, DecisionStump::new(0, 0.0, 1).unwrap());
        assert_eq!(weighted_error(&s, &ds, &w).unwrap(), 0.0);
    }

    #[test]
    fn inverted_pair() {
        let ds = dataset_1d(&[(-1.0, 1), (1.0, -1)]);
        let w = ExampleWeights::uniform(2).unwrap();
        let s = fit_stump(&ds, &w).unwrap();
        assert_eq!(s.polarity, -1);
        assert_eq!(weighted_error(&s, &ds, &w).unwrap(), 0.0);
    }

    #[test]
    fn weighted_three_points_matches_enumeration() {
        let ds = dataset_1d(&[(-1.0, -1), (0.0, 1), (1.0, -1)]);
        let w = ExampleWeights::new(vec![1.0, 1.0, 4.0]).unwrap();
        // enumerate every candidate by hand
        let mut best = f64::INFINITY;
        for t in [-2.0, -0.5, 0.5] {
            for pol in [1, -1] {
                let s = DecisionStump::new(0, t, pol).unwrap();
                best = best.min(weighted_error(&s, &ds, &w).unwrap());
            }
        }
        assert_eq!(best, 1.0 / 6.0);
        let s = fit_stump(&ds, &w).unwrap();
        assert_eq!(weighted_error(&s, &ds, &w).unwrap(), 1.0 / 6.0);
        // 1/6 is reached at the constant stump (lowest threshold) and at 0.5
        assert_eq!(s, DecisionStump::new(0, -2.0, -1).unwrap());
    }

    #[test]
    fn predict_boundary_convention() {
        let s = DecisionStump::new(0, 0.0, 1).unwrap();
        assert_eq!(s.predict(&[1.0]).unwrap(), 1);
        assert_eq!(s.predict(&[-1.0]).unwrap(), -1);
        let s = DecisionStump::new(0, 0.0, -1).unwrap();
        assert_eq!(s.predict(&[0.0]).unwrap(), 1);
        let s = DecisionStump::new(2, 0.0, 1).unwrap();
        assert!(matches!(s.predict(&[1.0, 2.0]), Err(Error::Validation(_))));
    }

    #[test]
    fn weighted_error_arithmetic() {
        let ds = dataset_1d(&[(-1.0, 1), (1.0, 1)]);
        let w = ExampleWeights::new(vec![1.0, 3.0]).unwrap();
        let s = DecisionStump::new(0, 0.0, 1).unwrap();
        assert_eq!(weighted_error(&s, &ds, &w).unwrap(), 0.25);
        let perfect = DecisionStump::new(0, -5.0, 1).unwrap();
        assert_eq!(weighted_error(&perfect, &ds, &w).unwrap(), 0.0);
        let wrong = DecisionStump::new(0, -5.0, -1).unwrap();
        assert_eq!(weighted_error(&wrong, &ds, &w).unwrap(), 1.0);
    }

    #[test]
    fn constant_features_have_no_split() {
        let ds = LabeledDataset::new(vec![vec![1.0, 2.0]; 3], vec![1, -1, 1]).unwrap();
        let w = ExampleWeights::uniform(3).unwrap();
        assert!(matches!(fit_stump(&ds, &w), Err(Error::NoSplit)));
    }

    #[test]
    fn weights_validated() {
        assert!(ExampleWeights::new(vec![1.0, 0.0]).is_err());
        assert!(ExampleWeights::new(vec![1.0, f64::NAN]).is_err());
        let ds = dataset_1d(&[(-1.0, 1), (1.0, 1)]);
        let w = ExampleWeights::uniform(3).unwrap();
        assert!(fit_stump(&ds, &w).is_err());
    }

    #[test]
    fn adjacent_float_midpoint_stays_below() {
        let a = 1.0_f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let t = midpoint(a, b);
        assert!(a <= t && t < b);
        let ds = dataset_1d(&[(a, -1), (b, 1)]);
        let s = fit_stump(&ds, &ExampleWeights::uniform(2).unwrap()).unwrap();
        assert_eq!(s.predict(&[a]).unwrap(), -1);
        assert_eq!(s.predict(&[b]).unwrap(), 1);
    }
}
