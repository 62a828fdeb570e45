use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use truthboost::analytic::AnalyticReport;
use truthboost::boosting::SeedInfo;
use truthboost::risk::{RiskComparison, RiskReport};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub generate_ns: Option<u64>,
    pub train_ns: u64,
    pub table_ns: u64,
    pub analytic_ns: u64,
    pub minimize_ns: u64,
}

/// Output of `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub tool_version: String,
    /// SHA-256 of the dataset CSV the run used.
    pub input_digest: String,
    pub seed_info: Option<SeedInfo>,
    pub n: usize,
    pub d: usize,
    pub p: usize,
    pub betas_iterative: Vec<f64>,
    pub betas_analytic: Vec<f64>,
    pub betas_min: Vec<f64>,
    pub mae_iter_vs_analytic: f64,
    pub risk: RiskComparison,
    pub analytic: AnalyticReport,
    /// Tree JSON `{p, counts}`.
    pub tree: serde_json::Value,
    pub timings: Timings,
    /// `(table_ns + analytic_ns) / train_ns`; informational only.
    pub analytic_time_fraction: f64,
}

/// Output of `minimize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub input_digest: String,
    pub beta_min: Vec<f64>,
    pub report: RiskReport,
}

/// Output of `analytic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticOutput {
    pub schema_version: u32,
    pub tool_version: String,
    pub input_digest: String,
    #[serde(flatten)]
    pub analytic: AnalyticReport,
    /// Three-classifier closed form, present when `p = 3`.
    pub closed_form_p3: Option<[f64; 3]>,
}

pub fn mean_abs_error(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use truthboost::analytic::LevelMasses;

    #[test]
    fn compare_report_round_trips() {
        let r = CompareReport {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.into(),
            input_digest: sha256_hex(b"x1,y\n1,1\n"),
            seed_info: Some(SeedInfo {
                generator: "g".into(),
                seed: 42,
            }),
            n: 2,
            d: 1,
            p: 1,
            betas_iterative: vec![0.1 + 0.2],
            betas_analytic: vec![0.3],
            betas_min: vec![0.30000000000000004],
            mae_iter_vs_analytic: 5.551115123125783e-17,
            risk: RiskComparison {
                risk_at_analytic: 0.9,
                risk_at_min: 0.9,
                gap: 0.0,
                euler_residual_at_analytic: None,
                euler_residual_at_min: Some([1e-17, -2.5, 3.0]),
                beta_min: vec![0.3],
                converged: true,
                iterations: 4,
            },
            analytic: AnalyticReport {
                betas_analytic: vec![0.3],
                taus: vec![1.3498588075760032],
                per_level: vec![LevelMasses { a: 1.0, b: 1.8221188003905089 }],
            },
            tree: serde_json::json!({"p": 1, "counts": [null, 2, 1, 1]}),
            timings: Timings {
                generate_ns: None,
                train_ns: 10,
                table_ns: 1,
                analytic_ns: 1,
                minimize_ns: 3,
            },
            analytic_time_fraction: 0.2,
        };
        let text = serde_json::to_string(&r).unwrap();
        let back: CompareReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn mae_definition() {
        assert_eq!(mean_abs_error(&[1.0, 2.0], &[1.5, 1.0]), 0.75);
        assert_eq!(mean_abs_error(&[], &[]), 0.0);
    }
}
