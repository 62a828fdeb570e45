//! Truth-table analysis of two-class AdaBoost.
//!
//! Given the joint correctness pattern of `p` weak classifiers on a training
//! set, the weights that AdaBoost assigns to those classifiers are a closed
//! function of the configuration counts alone. This crate provides:
//!
//! * [`data`]: labeled datasets, seeded Gaussian generation, CSV I/O and
//!   outcome matrices,
//! * [`stump`]: weighted decision stumps used as the weak learner,
//! * [`boosting`]: the iterative AdaBoost loop (discarding steps whose
//!   error is at least one half from the final vote),
//! * [`tree`]: the binary configuration tree of counts `c_j`,
//! * [`analytic`]: the weights recovered from the tree without touching
//!   example weights,
//! * [`risk`]: the exponential risk, its gradient, the three-classifier
//!   stationarity system and a damped Newton minimizer,
//! * [`packet`]: reduction of a long ensemble into packets of three.
//!
//! ```
//! use truthboost::{analytic_betas, generate_gaussian, minimize_risk, outcome_matrix, train_adaboost};
//! use truthboost::{GaussianSpec, OutcomeTree, WeightVector};
//!
//! let ds = generate_gaussian(&GaussianSpec::new(1000, 2, 3))?;
//! let model = train_adaboost(&ds, 3)?.model;
//! let tree = OutcomeTree::build(&outcome_matrix(&ds, &model.classifiers())?)?;
//! let analytic = analytic_betas(&tree)?;
//! let (beta_min, report) = minimize_risk(&tree, &WeightVector::zeros(3), 1e-12, 100)?;
//! assert!(report.converged);
//! for (a, b) in model.betas().iter().zip(&analytic) {
//!     assert!((a - b).abs() < 1e-12);
//! }
//! assert_eq!(beta_min.len(), 3);
//! # Ok::<(), truthboost::Error>(())
//! ```

pub mod analytic;
pub mod boosting;
pub mod data;
mod error;
pub mod packet;
pub mod risk;
pub mod stump;
pub mod tree;

pub use analytic::{analytic_betas, closed_form_p3, AnalyticState};
pub use boosting::{train_adaboost, BoostModel, TrainOutcome, TrainStatus};
pub use data::{
    generate_gaussian, outcome_matrix, Classifier, GaussianSpec, LabeledDataset, OutcomeMatrix,
};
pub use error::{Error, Result};
pub use risk::{minimize_risk, RiskReport, WeightVector};
pub use stump::{fit_stump, DecisionStump, ExampleWeights};
pub use tree::{Genealogy, OutcomeTree};

/// `sign` with the convention `sign(0) = +1`.
#[inline]
pub fn sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}
