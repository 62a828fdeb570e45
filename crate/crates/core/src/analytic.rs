//! AdaBoost weights recovered from the configuration tree alone.
//!
//! At step `k` every node `j` of level `k - 1` carries the multiplier
//! `exp(-eps(j) . beta^(k-1))`, a product of `tau_i = exp(beta_i)` or its
//! inverse along the genealogy of `j`. The reweighted masses of its children
//! are `C~_2j = c_2j * mult_j` and `C~_2j+1 = c_2j+1 * mult_j`; with
//! `a_k = sum C~_2j` (misclassified by `G_k`) and `b_k = sum C~_2j+1`,
//! the step minimizes `a_k e^beta + b_k e^-beta`, giving
//! `beta_k = ln(b_k / a_k) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::OutcomeTree;

/// Above this magnitude of any accumulated weight the level sums switch to
/// log-sum-exp over log-multipliers.
pub const LOG_SPACE_THRESHOLD: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMasses {
    /// `a_k`, reweighted mass misclassified by classifier `k`.
    pub a: f64,
    /// `b_k`, reweighted mass classified correctly by classifier `k`.
    pub b: f64,
}

/// Everything the recursion produces on its way to `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticState {
    pub betas: Vec<f64>,
    pub taus: Vec<f64>,
    pub per_level: Vec<LevelMasses>,
    /// `C~_j` for `j >= 2`, flat with the tree layout; slots 0 and 1 unused.
    pub tilde: Vec<f64>,
    /// Whether any level was summed in log space.
    pub used_log_space: bool,
}

/// Report fragment `{betas_analytic, taus, per_level}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub betas_analytic: Vec<f64>,
    pub taus: Vec<f64>,
    pub per_level: Vec<LevelMasses>,
}

impl AnalyticState {
    pub fn report(&self) -> AnalyticReport {
        AnalyticReport {
            betas_analytic: self.betas.clone(),
            taus: self.taus.clone(),
            per_level: self.per_level.clone(),
        }
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Runs the level recursion over the whole tree.
pub fn analytic_state(tree: &OutcomeTree) -> Result<AnalyticState> {
    analytic_state_with(tree, LOG_SPACE_THRESHOLD)
}

fn analytic_state_with(tree: &OutcomeTree, log_threshold: f64) -> Result<AnalyticState> {
    let p = tree.depth();
    let counts = tree.counts();
    let mut betas = Vec::with_capacity(p);
    let mut taus = Vec::with_capacity(p);
    let mut per_level = Vec::with_capacity(p);
    let mut tilde = vec![0.0; counts.len()];

    // multipliers of the nodes of the previous level, indexed like the tree
    let mut mult = vec![0.0; counts.len()];
    let mut log_mult = vec![0.0; counts.len()];
    mult[1] = 1.0;
    let mut log_space = false;
    let mut used_log_space = false;

    for k in 1..=p {
        let parents = (1usize << (k - 1))..(1usize << k);
        let wrong_count: u64 = parents.clone().map(|j| counts[2 * j]).sum();
        let right_count: u64 = parents.clone().map(|j| counts[2 * j + 1]).sum();

        for j in parents.clone() {
            tilde[2 * j] = counts[2 * j] as f64 * mult[j];
            tilde[2 * j + 1] = counts[2 * j + 1] as f64 * mult[j];
        }
        let (a, b, beta) = if log_space {
            used_log_space = true;
            let log_mass = |child: usize| {
                log_sum_exp(
                    parents
                        .clone()
                        .filter(|&j| counts[2 * j + child] > 0)
                        .map(|j| (counts[2 * j + child] as f64).ln() + log_mult[j]),
                )
            };
            let (log_a, log_b) = (log_mass(0), log_mass(1));
            (log_a.exp(), log_b.exp(), 0.5 * (log_b - log_a))
        } else {
            let a: f64 = parents.clone().map(|j| tilde[2 * j]).sum();
            let b: f64 = parents.clone().map(|j| tilde[2 * j + 1]).sum();
            (a, b, 0.5 * (b / a).ln())
        };
        if wrong_count == 0 || right_count == 0 {
            return Err(Error::InfiniteWeight {
                level: k,
                misclassified_mass: a,
                correct_mass: b,
            });
        }
        let tau = beta.exp();

        for j in parents {
            mult[2 * j] = mult[j] * tau;
            mult[2 * j + 1] = mult[j] / tau;
            log_mult[2 * j] = log_mult[j] + beta;
            log_mult[2 * j + 1] = log_mult[j] - beta;
        }
        if beta.abs() > log_threshold {
            log_space = true;
        }
        betas.push(beta);
        taus.push(tau);
        per_level.push(LevelMasses { a, b });
    }

    Ok(AnalyticState {
        betas,
        taus,
        per_level,
        tilde,
        used_log_space,
    })
}

/// `(beta_1, ..., beta_p)` as computed by AdaBoost, from counts only.
pub fn analytic_betas(tree: &OutcomeTree) -> Result<Vec<f64>> {
    analytic_state(tree).map(|s| s.betas)
}

/// The explicit three-classifier formulas, evaluated term by term.
pub fn closed_form_p3(tree: &OutcomeTree) -> Result<[f64; 3]> {
    if tree.depth() != 3 {
        return Err(Error::validation(format!(
            "closed form needs depth 3, got {}",
            tree.depth()
        )));
    }
    let c = |j: usize| tree.count(j) as f64;
    let check = |level: usize, wrong: f64, right: f64| {
        if wrong == 0.0 || right == 0.0 {
            Err(Error::InfiniteWeight {
                level,
                misclassified_mass: wrong,
                correct_mass: right,
            })
        } else {
            Ok(())
        }
    };

    check(1, c(2), c(3))?;
    let tau1 = (c(3) / c(2)).sqrt();
    let beta1 = tau1.ln();

    check(2, c(4) + c(6), c(5) + c(7))?;
    let tau2 = ((c(5) * tau1 + c(7) / tau1) / (c(4) * tau1 + c(6) / tau1)).sqrt();
    let beta2 = tau2.ln();

    check(3, c(8) + c(10) + c(12) + c(14), c(9) + c(11) + c(13) + c(15))?;
    let num = c(9) * tau1 * tau2 + c(11) * tau1 / tau2 + c(13) * tau2 / tau1 + c(15) / (tau1 * tau2);
    let den = c(8) * tau1 * tau2 + c(10) * tau1 / tau2 + c(12) * tau2 / tau1 + c(14) / (tau1 * tau2);
    let beta3 = (num / den).sqrt().ln();

    Ok([beta1, beta2, beta3])
}
