//! Reduction of an ensemble into packets of three classifiers.
//!
//! Each consecutive triple `(G_3t+1, G_3t+2, G_3t+3)` is replaced by the
//! single classifier `sign(beta . G)`, with `beta` taken either from the
//! analytic AdaBoost weights of the triple or from the exact risk minimizer
//! of its depth-3 tree. Trailing classifiers that do not fill a triple pass
//! through unchanged.

use serde::Serialize;

use crate::analytic::analytic_betas;
use crate::data::{outcome_matrix, Classifier, LabeledDataset};
use crate::error::{Error, Result};
use crate::risk::{minimize_risk, WeightVector, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::sign;
use crate::tree::OutcomeTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PacketMode {
    /// AdaBoost's own weights for the triple.
    Analytic,
    /// The minimizer of the triple's exponential risk.
    Minimum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketClassifier<C> {
    pub members: [C; 3],
    pub betas: [f64; 3],
    /// Mode actually used (a `Minimum` packet may fall back to `Analytic`).
    pub mode: PacketMode,
}

impl<C: Classifier> Classifier for PacketClassifier<C> {
    fn min_dim(&self) -> usize {
        self.members.iter().map(Classifier::min_dim).max().unwrap_or(0)
    }

    fn predict_unchecked(&self, x: &[f64]) -> i8 {
        let score: f64 = self
            .members
            .iter()
            .zip(&self.betas)
            .map(|(g, b)| b * f64::from(g.predict_unchecked(x)))
            .sum();
        sign(score)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReducedClassifier<C> {
    Packet(PacketClassifier<C>),
    Single(C),
}

impl<C: Classifier> Classifier for ReducedClassifier<C> {
    fn min_dim(&self) -> usize {
        match self {
            ReducedClassifier::Packet(p) => p.min_dim(),
            ReducedClassifier::Single(c) => c.min_dim(),
        }
    }

    fn predict_unchecked(&self, x: &[f64]) -> i8 {
        match self {
            ReducedClassifier::Packet(p) => p.predict_unchecked(x),
            ReducedClassifier::Single(c) => c.predict_unchecked(x),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PacketReduction<C> {
    pub classifiers: Vec<ReducedClassifier<C>>,
    /// Packets (0-based) that fell back from `Minimum` to `Analytic`.
    pub fallbacks: Vec<usize>,
}

pub fn packet_reduce<C: Classifier + Clone>(
    dataset: &LabeledDataset,
    classifiers: &[C],
    mode: PacketMode,
) -> Result<PacketReduction<C>> {
    if classifiers.is_empty() {
        return Err(Error::validation("nothing to reduce"));
    }
    let mut out = Vec::with_capacity(classifiers.len().div_ceil(3));
    let mut fallbacks = Vec::new();
    let mut chunks = classifiers.chunks_exact(3);
    for (t, triple) in chunks.by_ref().enumerate() {
        let tree = OutcomeTree::build(&outcome_matrix(dataset, triple)?)?;
        let (betas, used) = match mode {
            PacketMode::Analytic => (analytic_betas(&tree)?, PacketMode::Analytic),
            PacketMode::Minimum => {
                match minimize_risk(&tree, &WeightVector::zeros(3), DEFAULT_TOL, DEFAULT_MAX_ITERS) {
                    Ok((beta, _)) => (beta.betas, PacketMode::Minimum),
                    Err(Error::Coercivity { index }) => {
                        log::warn!(
                            "packet {t}: leaf {index} is empty, using the analytic weights instead"
                        );
                        fallbacks.push(t);
                        (analytic_betas(&tree)?, PacketMode::Analytic)
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        out.push(ReducedClassifier::Packet(PacketClassifier {
            members: [triple[0].clone(), triple[1].clone(), triple[2].clone()],
            betas: [betas[0], betas[1], betas[2]],
            mode: used,
        }));
    }
    out.extend(chunks.remainder().iter().cloned().map(ReducedClassifier::Single));
    Ok(PacketReduction {
        classifiers: out,
        fallbacks,
    })
}

/// Training error of `sign(beta . G')` where `G'` are the reduced
/// classifiers and `beta` their own analytic AdaBoost weights.
pub fn recombined_training_error<C: Classifier>(
    dataset: &LabeledDataset,
    reduced: &[C],
) -> Result<f64> {
    let outcomes = outcome_matrix(dataset, reduced)?;
    let betas = analytic_betas(&OutcomeTree::build(&outcomes)?)?;
    let wrong = dataset
        .rows()
        .zip(dataset.labels())
        .filter(|(x, &y)| {
            let score: f64 = reduced
                .iter()
                .zip(&betas)
                .map(|(g, b)| b * f64::from(g.predict_unchecked(x)))
                .sum();
            sign(score) != y
        })
        .count();
    Ok(wrong as f64 / dataset.len() as f64)
}
