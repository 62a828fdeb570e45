//! Convexified empirical risk `R(beta) = (1/n) sum_i exp(-y_i beta . G(x_i))`.
//!
//! Evaluated from the tree, every leaf `j` contributes
//! `c_j exp(-eps(j) . beta)`; all values use the `1/n` normalization.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::OutcomeMatrix;
use crate::error::{Error, Result};
use crate::tree::OutcomeTree;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITERS: usize = 100;
const MAX_HALVINGS: usize = 60;
const ARMIJO_C: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector {
    pub betas: Vec<f64>,
}

/// The three-classifier coordinates `X_0..X_3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XCoords {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl WeightVector {
    pub fn new(betas: Vec<f64>) -> Self {
        WeightVector { betas }
    }

    pub fn zeros(p: usize) -> Self {
        WeightVector::new(vec![0.0; p])
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn x_coords(&self) -> Result<XCoords> {
        let [b1, b2, b3] = self.betas[..] else {
            return Err(Error::validation(format!(
                "X coordinates need 3 weights, got {}",
                self.betas.len()
            )));
        };
        let (x1, x2, x3) = (-b1 + b2 + b3, b1 - b2 + b3, b1 + b2 - b3);
        let x0 = b1 + b2 + b3;
        debug_assert!((x0 - (x1 + x2 + x3)).abs() <= 1e-12 * (1.0 + x0.abs()));
        Ok(XCoords { x0, x1, x2, x3 })
    }
}

impl From<Vec<f64>> for WeightVector {
    fn from(betas: Vec<f64>) -> Self {
        WeightVector::new(betas)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub risk_value: f64,
    pub gradient: Vec<f64>,
    /// Max-norm of `gradient`.
    pub gradient_norm: f64,
    pub euler_residual: Option<[f64; 3]>,
    pub converged: bool,
    pub iterations: usize,
}

fn check_dims(tree: &OutcomeTree, beta: &WeightVector) -> Result<()> {
    if beta.len() != tree.depth() {
        return Err(Error::validation(format!(
            "weight vector has {} entries, tree depth is {}",
            beta.len(),
            tree.depth()
        )));
    }
    if beta.betas.iter().any(|b| !b.is_finite()) {
        return Err(Error::validation("weights must be finite"));
    }
    Ok(())
}

/// `-eps(j) . beta` for every leaf, in leaf order.
fn leaf_exponents(p: usize, beta: &[f64]) -> Vec<f64> {
    let mut level = vec![0.0];
    for &b in &beta[..p] {
        level = level.iter().flat_map(|&e| [e + b, e - b]).collect();
    }
    level
}

/// `eps(j)_k` for leaf offset `leaf` (0-based within the last level) and
/// classifier `k` (0-based).
#[inline]
fn leaf_sign(p: usize, leaf: usize, k: usize) -> f64 {
    if (leaf >> (p - 1 - k)) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

pub fn risk_from_tree(tree: &OutcomeTree, beta: &WeightVector) -> Result<f64> {
    check_dims(tree, beta)?;
    Ok(risk_unchecked(tree, &beta.betas))
}

fn risk_unchecked(tree: &OutcomeTree, beta: &[f64]) -> f64 {
    let exps = leaf_exponents(tree.depth(), beta);
    let sum: f64 = tree
        .leaves()
        .iter()
        .zip(&exps)
        .map(|(&c, &e)| c as f64 * e.exp())
        .sum();
    sum / tree.n() as f64
}

/// Per-example evaluation of the risk, independent of the tree.
pub fn risk_bruteforce(outcomes: &OutcomeMatrix, beta: &WeightVector) -> Result<f64> {
    if beta.len() != outcomes.p() {
        return Err(Error::validation("weight vector does not match outcome columns"));
    }
    let sum: f64 = outcomes
        .rows()
        .map(|row| {
            let margin: f64 = row.iter().zip(&beta.betas).map(|(&o, &b)| f64::from(o) * b).sum();
            (-margin).exp()
        })
        .sum();
    Ok(sum / outcomes.n() as f64)
}

pub fn risk_gradient(tree: &OutcomeTree, beta: &WeightVector) -> Result<Vec<f64>> {
    check_dims(tree, beta)?;
    Ok(gradient_unchecked(tree, &beta.betas))
}

fn gradient_unchecked(tree: &OutcomeTree, beta: &[f64]) -> Vec<f64> {
    let p = tree.depth();
    let n = tree.n() as f64;
    let exps = leaf_exponents(p, beta);
    (0..p)
        .map(|k| {
            tree.leaves()
                .iter()
                .zip(&exps)
                .enumerate()
                .map(|(leaf, (&c, &e))| -leaf_sign(p, leaf, k) * c as f64 * e.exp())
                .sum::<f64>()
                / n
        })
        .collect()
}

pub fn risk_hessian(tree: &OutcomeTree, beta: &WeightVector) -> Result<Vec<Vec<f64>>> {
    check_dims(tree, beta)?;
    let h = hessian_unchecked(tree, &beta.betas);
    Ok(h.row_iter().map(|r| r.iter().copied().collect()).collect())
}

fn hessian_unchecked(tree: &OutcomeTree, beta: &[f64]) -> DMatrix<f64> {
    let p = tree.depth();
    let n = tree.n() as f64;
    let exps = leaf_exponents(p, beta);
    let mut h = DMatrix::zeros(p, p);
    for (leaf, (&c, &e)) in tree.leaves().iter().zip(&exps).enumerate() {
        let mass = c as f64 * e.exp() / n;
        for k in 0..p {
            for l in 0..p {
                h[(k, l)] += leaf_sign(p, leaf, k) * leaf_sign(p, leaf, l) * mass;
            }
        }
    }
    h
}

/// Left-hand sides of the three stationarity equations in `X` coordinates,
/// with raw counts (no `1/n`).
pub fn euler_residual_p3(tree: &OutcomeTree, beta: &WeightVector) -> Result<[f64; 3]> {
    if tree.depth() != 3 {
        return Err(Error::validation(format!(
            "Euler system needs depth 3, got {}",
            tree.depth()
        )));
    }
    check_dims(tree, beta)?;
    let XCoords { x0, x1, x2, x3 } = beta.x_coords()?;
    let c = |j: usize| tree.count(j) as f64;
    let shared = -c(15) * (-x0).exp() + c(8) * x0.exp();
    Ok([
        -c(11) * (-x1).exp() + c(12) * x1.exp() + shared,
        -c(13) * (-x2).exp() + c(10) * x2.exp() + shared,
        -c(14) * (-x3).exp() + c(9) * x3.exp() + shared,
    ])
}

/// Linear map taking the (normalized) gradient in `beta` to the Euler
/// residual: `residual = n * M^-1 grad` where `X = M beta`.
pub fn euler_from_gradient(n: u64, gradient: &[f64; 3]) -> [f64; 3] {
    let [g1, g2, g3] = *gradient;
    let half_n = n as f64 / 2.0;
    [half_n * (g2 + g3), half_n * (g1 + g3), half_n * (g1 + g2)]
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton on the risk.
///
/// Requires every leaf count to be positive; otherwise the risk may be
/// unbounded below along some direction and [`Error::Coercivity`] is
/// returned. Exceeding `max_iters` yields a report with `converged = false`.
pub fn minimize_risk(
    tree: &OutcomeTree,
    init: &WeightVector,
    tol: f64,
    max_iters: usize,
) -> Result<(WeightVector, RiskReport)> {
    check_dims(tree, init)?;
    let p = tree.depth();
    if let Some(leaf) = tree.leaves().iter().position(|&c| c == 0) {
        return Err(Error::Coercivity {
            index: (1 << p) + leaf,
        });
    }

    let mut beta = init.betas.clone();
    let mut risk = risk_unchecked(tree, &beta);
    let mut grad = gradient_unchecked(tree, &beta);
    let mut iterations = 0;
    let mut converged = max_norm(&grad) <= tol;

    while !converged && iterations < max_iters {
        let g = DVector::from_column_slice(&grad);
        let h = hessian_unchecked(tree, &beta);
        let direction = match h.cholesky() {
            Some(chol) => -chol.solve(&g),
            None => -g.clone(),
        };
        let slope = g.dot(&direction);

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate: Vec<f64> = beta
                .iter()
                .zip(direction.iter())
                .map(|(b, d)| b + step * d)
                .collect();
            let r = risk_unchecked(tree, &candidate);
            // slack absorbs rounding once the decrease is below machine precision
            if r <= risk + ARMIJO_C * step * slope + 4.0 * f64::EPSILON * risk {
                accepted = Some((candidate, r));
                break;
            }
            step *= 0.5;
        }
        let Some((candidate, r)) = accepted else {
            break;
        };
        iterations += 1;
        if candidate == beta {
            break;
        }
        beta = candidate;
        risk = r;
        grad = gradient_unchecked(tree, &beta);
        converged = max_norm(&grad) <= tol;
    }

    let weights = WeightVector::new(beta);
    let euler_residual = if p == 3 {
        Some(euler_residual_p3(tree, &weights)?)
    } else {
        None
    };
    let report = RiskReport {
        risk_value: risk,
        gradient_norm: max_norm(&grad),
        gradient: grad,
        euler_residual,
        converged,
        iterations,
    };
    Ok((weights, report))
}

/// `{risk_at_analytic, risk_at_min, gap, euler_residual_at_analytic,
/// euler_residual_at_min, beta_min, converged, iterations}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskComparison {
    pub risk_at_analytic: f64,
    pub risk_at_min: f64,
    pub gap: f64,
    pub euler_residual_at_analytic: Option<[f64; 3]>,
    pub euler_residual_at_min: Option<[f64; 3]>,
    pub beta_min: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimizes from zero with the default settings and measures how far the
/// given (AdaBoost) weights are from the minimum.
pub fn compare_with_minimum(tree: &OutcomeTree, analytic: &WeightVector) -> Result<RiskComparison> {
    let risk_at_analytic = risk_from_tree(tree, analytic)?;
    let (beta_min, report) = minimize_risk(
        tree,
        &WeightVector::zeros(tree.depth()),
        DEFAULT_TOL,
        DEFAULT_MAX_ITERS,
    )?;
    let euler_residual_at_analytic = if tree.depth() == 3 {
        Some(euler_residual_p3(tree, analytic)?)
    } else {
        None
    };
    Ok(RiskComparison {
        risk_at_analytic,
        risk_at_min: report.risk_value,
        gap: risk_at_analytic - report.risk_value,
        euler_residual_at_analytic,
        euler_residual_at_min: report.euler_residual,
        beta_min: beta_min.betas,
        converged: report.converged,
        iterations: report.iterations,
    })
}
