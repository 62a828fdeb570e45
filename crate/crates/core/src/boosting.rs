//! The iterative two-class AdaBoost loop.
//!
//! Each step fits a weak classifier on the current example weights, sets
//! `beta_k = ln((1 - eps_k) / eps_k) / 2` and multiplies the weight of every
//! misclassified example by `exp(2 beta_k)`. Weights are never renormalized.
//! A step with `eps_k >= 1/2` still reweights the examples but is left out of
//! the final vote.

use serde::{Deserialize, Serialize};

use crate::data::{Classifier, LabeledDataset};
use crate::error::{Error, Result};
use crate::sign;
use crate::stump::{fit_stump, weighted_error, DecisionStump, ExampleWeights};

/// Fits one weak classifier against weighted examples.
pub trait WeakLearner {
    type Output: Classifier + Clone;

    fn fit(&self, dataset: &LabeledDataset, weights: &ExampleWeights) -> Result<Self::Output>;
}

/// The decision-stump learner of [`fit_stump`].
#[derive(Debug, Clone, Copy, Default)]
pub struct StumpLearner;

impl WeakLearner for StumpLearner {
    type Output = DecisionStump;

    fn fit(&self, dataset: &LabeledDataset, weights: &ExampleWeights) -> Result<DecisionStump> {
        fit_stump(dataset, weights)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostStep<C> {
    #[serde(rename = "stump")]
    pub classifier: C,
    pub beta: f64,
    pub epsilon: f64,
    pub included: bool,
}

/// Provenance of the training data when it was generated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub generator: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrainStatus {
    Completed,
    /// `eps_k = 0` at `step`; steps before it are kept.
    PerfectFit { step: usize },
    /// `eps_k = 1` at `step`.
    AntiPerfect { step: usize },
}

impl std::fmt::Display for TrainStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrainStatus::Completed => write!(f, "completed"),
            TrainStatus::PerfectFit { step } => write!(f, "perfect-fit at step {step}"),
            TrainStatus::AntiPerfect { step } => write!(f, "anti-perfect at step {step}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostModel<C = DecisionStump> {
    pub steps: Vec<BoostStep<C>>,
    pub n: usize,
    pub d: usize,
    pub seed_info: Option<SeedInfo>,
    /// Weights in force before each step, followed by the final weights.
    pub weight_history: Option<Vec<ExampleWeights>>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<C = DecisionStump> {
    pub model: BoostModel<C>,
    pub status: TrainStatus,
}

impl<C: Classifier> BoostModel<C> {
    pub fn p(&self) -> usize {
        self.steps.len()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.beta).collect()
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.epsilon).collect()
    }

    pub fn included(&self) -> Vec<bool> {
        self.steps.iter().map(|s| s.included).collect()
    }

    pub fn classifiers(&self) -> Vec<&C> {
        self.steps.iter().map(|s| &s.classifier).collect()
    }

    /// `sum over included k of beta_k G_k(x)`.
    pub fn decision_function(&self, x: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for step in self.steps.iter().filter(|s| s.included) {
            total += step.beta * f64::from(step.classifier.predict(x)?);
        }
        Ok(total)
    }

    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        self.decision_function(x).map(sign)
    }

    /// Fraction of `dataset` that `predict` gets wrong.
    pub fn training_error(&self, dataset: &LabeledDataset) -> Result<f64> {
        let mut wrong = 0usize;
        for (x, &y) in dataset.rows().zip(dataset.labels()) {
            if self.predict(x)? != y {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / dataset.len() as f64)
    }
}

/// AdaBoost with decision stumps, `p` steps, no weight history.
pub fn train_adaboost(dataset: &LabeledDataset, p: usize) -> Result<TrainOutcome> {
    train_with(dataset, p, &StumpLearner, false)
}

pub fn train_with<L: WeakLearner>(
    dataset: &LabeledDataset,
    p: usize,
    learner: &L,
    record_weights: bool,
) -> Result<TrainOutcome<L::Output>> {
    if p == 0 {
        return Err(Error::validation("number of steps must be >= 1"));
    }
    let n = dataset.len();
    let mut weights = ExampleWeights::uniform(n)?;
    let mut history = record_weights.then(Vec::new);
    let mut steps = Vec::with_capacity(p);
    let mut status = TrainStatus::Completed;
    let mut wrong = vec![false; n];

    for k in 1..=p {
        if let Some(h) = history.as_mut() {
            h.push(weights.clone());
        }
        let classifier = learner.fit(dataset, &weights)?;
        let epsilon = weighted_error(&classifier, dataset, &weights)?;
        if epsilon == 0.0 {
            status = TrainStatus::PerfectFit { step: k };
            break;
        }
        if epsilon == 1.0 {
            status = TrainStatus::AntiPerfect { step: k };
            break;
        }
        let beta = 0.5 * ((1.0 - epsilon) / epsilon).ln();

        for (i, (x, &y)) in dataset.rows().zip(dataset.labels()).enumerate() {
            wrong[i] = classifier.predict_unchecked(x) != y;
        }
        let factor = (2.0 * beta).exp();
        for (w, _) in weights
            .as_mut_slice()
            .iter_mut()
            .zip(&wrong)
            .filter(|(_, &miss)| miss)
        {
            *w *= factor;
        }

        steps.push(BoostStep {
            classifier,
            beta,
            epsilon,
            included: epsilon < 0.5,
        });
    }
    if let Some(h) = history.as_mut() {
        if status == TrainStatus::Completed {
            h.push(weights);
        }
    }

    Ok(TrainOutcome {
        model: BoostModel {
            steps,
            n,
            d: dataset.dim(),
            seed_info: None,
            weight_history: history,
        },
        status,
    })
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    steps: Vec<BoostStep<DecisionStump>>,
    seed_info: Option<SeedInfo>,
    n: usize,
    d: usize,
    p: usize,
    #[serde(default = "completed")]
    status: TrainStatus,
}

fn completed() -> TrainStatus {
    TrainStatus::Completed
}

impl BoostModel<DecisionStump> {
    /// `{steps: [{stump, beta, epsilon, included}], seed_info, n, d, p, status}`.
    pub fn to_json(&self, status: TrainStatus) -> String {
        let raw = ModelJson {
            steps: self.steps.clone(),
            seed_info: self.seed_info.clone(),
            n: self.n,
            d: self.d,
            p: self.steps.len(),
            status,
        };
        serde_json::to_string_pretty(&raw).expect("model json")
    }

    pub fn from_json(text: &str) -> Result<(Self, TrainStatus)> {
        let raw: ModelJson = serde_json::from_str(text)?;
        if raw.p != raw.steps.len() {
            return Err(Error::validation(format!(
                "model declares p = {} but has {} steps",
                raw.p,
                raw.steps.len()
            )));
        }
        for (k, s) in raw.steps.iter().enumerate() {
            DecisionStump::new(s.classifier.feature, s.classifier.threshold, s.classifier.polarity)?;
            if s.classifier.feature >= raw.d {
                return Err(Error::validation(format!(
                    "step {} uses feature {} but d = {}",
                    k + 1,
                    s.classifier.feature,
                    raw.d
                )));
            }
        }
        Ok((
            BoostModel {
                steps: raw.steps,
                n: raw.n,
                d: raw.d,
                seed_info: raw.seed_info,
                weight_history: None,
            },
            raw.status,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump(feature: usize, threshold: f64, polarity: i8) -> DecisionStump {
        DecisionStump::new(feature, threshold, polarity).unwrap()
    }

    fn model(steps: Vec<(DecisionStump, f64, bool)>) -> BoostModel {
        BoostModel {
            steps: steps
                .into_iter()
                .map(|(classifier, beta, included)| BoostStep {
                    classifier,
                    beta,
                    epsilon: 0.25,
                    included,
                })
                .collect(),
            n: 1,
            d: 1,
            seed_info: None,
            weight_history: None,
        }
    }

    #[test]
    fn perfect_first_stump_stops() {
        let ds = LabeledDataset::new(vec![vec![-1.0], vec![1.0]], vec![-1, 1]).unwrap();
        let out = train_adaboost(&ds, 3).unwrap();
        assert_eq!(out.status, TrainStatus::PerfectFit { step: 1 });
        assert_eq!(out.model.p(), 0);
        assert_eq!(out.status.to_string(), "perfect-fit at step 1");
    }

    #[test]
    fn decision_single_classifier() {
        let m = model(vec![(stump(0, 0.0, 1), 0.5, true)]);
        assert_eq!(m.decision_function(&[1.0]).unwrap(), 0.5);
        assert_eq!(m.predict(&[1.0]).unwrap(), 1);
    }

    #[test]
    fn decision_tie_maps_to_plus() {
        let m = model(vec![
            (stump(0, 0.0, 1), 1.0, true),
            (stump(0, 0.0, -1), 1.0, true),
        ]);
        assert_eq!(m.decision_function(&[1.0]).unwrap(), 0.0);
        assert_eq!(m.predict(&[1.0]).unwrap(), 1);
    }

    #[test]
    fn decision_skips_excluded() {
        let m = model(vec![
            (stump(0, 0.0, 1), 1.0, true),
            (stump(0, 0.0, 1), -0.2, false),
            (stump(0, 0.0, -1), 0.3, true),
        ]);
        assert!((m.decision_function(&[1.0]).unwrap() - 0.7).abs() < 1e-15);
        assert!(m.decision_function(&[1.0, 2.0]).is_ok());
    }

    /// Always proposes the given fixed classifiers in order.
    struct Scripted(Vec<DecisionStump>, std::cell::Cell<usize>);

    impl WeakLearner for Scripted {
        type Output = DecisionStump;
        fn fit(&self, _: &LabeledDataset, _: &ExampleWeights) -> Result<DecisionStump> {
            let k = self.1.get();
            self.1.set(k + 1);
            Ok(self.0[k % self.0.len()])
        }
    }

    #[test]
    fn worse_than_chance_step_is_discarded_but_reweights() {
        let ds = LabeledDataset::new(
            vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]],
            vec![-1, -1, 1, -1],
        )
        .unwrap();
        // after the first step the second classifier carries 2/3 of the mass wrong
        let learner = Scripted(
            vec![stump(0, 0.0, 1), stump(0, -1.5, 1), stump(0, 0.0, -1)],
            Default::default(),
        );
        let out = train_with(&ds, 3, &learner, true).unwrap();
        let m = &out.model;
        assert_eq!(out.status, TrainStatus::Completed);
        for s in &m.steps {
            if s.epsilon < 0.5 {
                assert!(s.beta > 0.0 && s.included);
            } else if s.epsilon > 0.5 {
                assert!(s.beta < 0.0 && !s.included);
            }
        }
        assert!(m.steps[1].epsilon > 0.5);
        assert!(!m.steps[1].included);
        let h = m.weight_history.as_ref().unwrap();
        assert_eq!(h.len(), 4);
        // the discarded step still changed the weights
        assert_ne!(h[1], h[2]);
        for (k, s) in m.steps.iter().enumerate() {
            let e = weighted_error(&s.classifier, &ds, &h[k + 1]).unwrap();
            assert!((e - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn anti_perfect_stops() {
        let ds = LabeledDataset::new(vec![vec![-1.0], vec![1.0]], vec![-1, 1]).unwrap();
        let learner = Scripted(vec![stump(0, 0.0, -1)], Default::default());
        let out = train_with(&ds, 2, &learner, false).unwrap();
        assert_eq!(out.status, TrainStatus::AntiPerfect { step: 1 });
    }

    #[test]
    fn model_json_round_trip() {
        let m = model(vec![(stump(0, 0.1 + 0.2, 1), 0.3, true)]);
        let text = m.to_json(TrainStatus::Completed);
        let (back, status) = BoostModel::from_json(&text).unwrap();
        assert_eq!(status, TrainStatus::Completed);
        assert_eq!(back, m);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["steps"][0]["stump"]["feature"], 0);
        assert_eq!(v["p"], 1);
        let bad = text.replace("\"p\": 1", "\"p\": 2");
        assert!(BoostModel::from_json(&bad).is_err());
    }

    #[test]
    fn zero_steps_rejected() {
        let ds = LabeledDataset::new(vec![vec![-1.0], vec![1.0]], vec![-1, 1]).unwrap();
        assert!(train_adaboost(&ds, 0).is_err());
    }
}
