use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use truthboost::analytic::{analytic_state, closed_form_p3};
use truthboost::boosting::{BoostModel, SeedInfo, TrainStatus};
use truthboost::data::{generate_gaussian, outcome_matrix, GaussianSpec, LabeledDataset, OutcomeMatrix, GENERATOR_NAME};
use truthboost::packet::{packet_reduce, recombined_training_error, PacketMode, ReducedClassifier};
use truthboost::risk::{compare_with_minimum, minimize_risk, WeightVector, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use truthboost::tree::OutcomeTree;
use truthboost::{train_adaboost, DecisionStump, Error};

use crate::report::{
    mean_abs_error, sha256_hex, AnalyticOutput, CompareReport, MinimizeReport, Timings, SCHEMA_VERSION,
    TOOL_VERSION,
};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl CliError {
    fn numerical(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            kind: kind.into(),
            message: message.into(),
        }
    }

    fn context(self, what: &str) -> Self {
        CliError {
            message: format!("{what}: {}", self.message),
            ..self
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: if e.is_numerical() { 3 } else { 2 },
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "truthboost", version, about = "Truth-table analysis of AdaBoost weights")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a two-class Gaussian dataset and write it as CSV.
    Generate(GenerateArgs),
    /// Run AdaBoost with decision stumps and write the model JSON.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        out: PathBuf,
        /// Seed the dataset was generated with, recorded as provenance.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the outcome matrix `y_i G_k(x_i)` of a model on a dataset.
    Outcomes {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the configuration tree from a dataset and model, or from an
    /// outcome-matrix CSV.
    Table {
        #[arg(long, requires = "model", conflicts_with = "outcomes")]
        data: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, required_unless_present = "data")]
        outcomes: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also export the three-classifier truth table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compute the AdaBoost weights from a tree JSON.
    Analytic {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the exponential risk of a tree with damped Newton.
    Minimize {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train, tabulate, recover the weights analytically and minimize.
    Compare(CompareArgs),
    /// Collapse a model into packets of three classifiers.
    Reduce {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Analytic)]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Analytic,
    Minimum,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    seed: u64,
    /// Comma-separated mean of the +1 class (default `1,1,...`).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mean_pos: Option<Vec<f64>>,
    /// Comma-separated mean of the -1 class (default `-1,-1,...`).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mean_neg: Option<Vec<f64>>,
    /// Per-coordinate variance.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    out: PathBuf,
}

impl GenerateArgs {
    fn spec(&self) -> GaussianSpec {
        let mut spec = GaussianSpec::new(self.n, self.d, self.seed);
        if let Some(m) = &self.mean_pos {
            spec.mean_pos = m.clone();
        }
        if let Some(m) = &self.mean_neg {
            spec.mean_neg = m.clone();
        }
        spec.covariance_scale = self.scale;
        spec
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Existing dataset; otherwise one is generated from `--n/--d/--seed`.
    #[arg(long, conflicts_with_all = ["n", "d", "seed"])]
    data: Option<PathBuf>,
    #[arg(long, required_unless_present = "data")]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, required_unless_present = "data")]
    seed: Option<u64>,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(args) => {
            let ds = generate_gaussian(&args.spec())?;
            ds.write_file(&args.out)?;
            Ok(())
        }
        Command::Train { data, p, out, seed } => cmd_train(&data, p, &out, seed),
        Command::Outcomes { data, model, out } => {
            let ds = LabeledDataset::read_file(&data)?;
            let (model, _) = read_model(&model)?;
            model_outcomes(&ds, &model)?.write_file(&out)?;
            Ok(())
        }
        Command::Table {
            data,
            model,
            outcomes,
            out,
            csv,
        } => {
            let matrix = match (data, model, outcomes) {
                (Some(d), Some(m), None) => {
                    let ds = LabeledDataset::read_file(&d)?;
                    let (model, _) = read_model(&m)?;
                    model_outcomes(&ds, &model)?
                }
                (None, None, Some(o)) => OutcomeMatrix::read_file(&o)?,
                _ => return Err(usage("give either --data with --model, or --outcomes")),
            };
            let tree = OutcomeTree::build(&matrix)?;
            std::fs::write(&out, tree.to_json()).map_err(Error::from)?;
            if let Some(csv) = csv {
                let file = std::fs::File::create(csv).map_err(Error::from)?;
                tree.write_table_p3_csv(std::io::BufWriter::new(file))?;
            }
            Ok(())
        }
        Command::Analytic { tree, out } => {
            let (tree, digest) = read_tree(&tree)?;
            let state = analytic_state(&tree)?;
            let closed = if tree.depth() == 3 {
                Some(closed_form_p3(&tree)?)
            } else {
                None
            };
            emit(
                &AnalyticOutput {
                    schema_version: SCHEMA_VERSION,
                    tool_version: TOOL_VERSION.into(),
                    input_digest: digest,
                    analytic: state.report(),
                    closed_form_p3: closed,
                },
                out.as_deref(),
            )
        }
        Command::Minimize {
            tree,
            tol,
            max_iters,
            out,
        } => {
            let (tree, digest) = read_tree(&tree)?;
            let (beta, report) = minimize_risk(&tree, &WeightVector::zeros(tree.depth()), tol, max_iters)?;
            let converged = report.converged;
            let iterations = report.iterations;
            emit(
                &MinimizeReport {
                    schema_version: SCHEMA_VERSION,
                    tool_version: TOOL_VERSION.into(),
                    input_digest: digest,
                    beta_min: beta.betas,
                    report,
                },
                out.as_deref(),
            )?;
            if !converged {
                return Err(CliError::numerical(
                    "non-convergence",
                    format!("Newton did not converge in {iterations} iterations"),
                ));
            }
            Ok(())
        }
        Command::Compare(args) => {
            let report = cmd_compare(&args)?;
            emit(&report, args.out.as_deref())
        }
        Command::Reduce {
            data,
            model,
            mode,
            out,
        } => {
            let ds = LabeledDataset::read_file(&data)?;
            let (model, _) = read_model(&model)?;
            let stumps: Vec<DecisionStump> = model.steps.iter().map(|s| s.classifier).collect();
            let mode = match mode {
                ModeArg::Analytic => PacketMode::Analytic,
                ModeArg::Minimum => PacketMode::Minimum,
            };
            let reduced = packet_reduce(&ds, &stumps, mode)?;
            let recombined = recombined_training_error(&ds, &reduced.classifiers)
                .map_err(|e| CliError::from(e).context("recombining packets"))?;
            let packets: Vec<serde_json::Value> = reduced
                .classifiers
                .iter()
                .map(|c| match c {
                    ReducedClassifier::Packet(pk) => serde_json::json!({
                        "stumps": pk.members,
                        "betas": pk.betas,
                        "mode": pk.mode,
                    }),
                    ReducedClassifier::Single(s) => serde_json::json!({ "stump": s }),
                })
                .collect();
            emit(
                &serde_json::json!({
                    "schema_version": SCHEMA_VERSION,
                    "tool_version": TOOL_VERSION,
                    "packets": packets,
                    "fallbacks": reduced.fallbacks,
                    "full_training_error": model.training_error(&ds)?,
                    "recombined_training_error": recombined,
                }),
                out.as_deref(),
            )
        }
    }
}

fn usage(msg: &str) -> CliError {
    CliError {
        code: 2,
        kind: "usage".into(),
        message: msg.into(),
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(Error::from)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read_model(path: &Path) -> CliResult<(BoostModel, TrainStatus)> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    Ok(BoostModel::from_json(&text)?)
}

fn read_tree(path: &Path) -> CliResult<(OutcomeTree, String)> {
    let bytes = std::fs::read(path).map_err(Error::from)?;
    let text = String::from_utf8(bytes).map_err(|e| usage(&format!("tree file is not UTF-8: {e}")))?;
    let tree = OutcomeTree::from_json(&text)?;
    Ok((tree, sha256_hex(text.as_bytes())))
}

fn model_outcomes(ds: &LabeledDataset, model: &BoostModel) -> CliResult<OutcomeMatrix> {
    let stumps: Vec<DecisionStump> = model.steps.iter().map(|s| s.classifier).collect();
    Ok(outcome_matrix(ds, &stumps)?)
}

fn status_error(status: TrainStatus) -> CliError {
    CliError::numerical(
        "infinite-weight",
        format!("{status}: the weak learner's weight is unbounded"),
    )
}

fn cmd_train(data: &Path, p: usize, out: &Path, seed: Option<u64>) -> CliResult<()> {
    let ds = LabeledDataset::read_file(data)?;
    let mut outcome = train_adaboost(&ds, p)?;
    outcome.model.seed_info = seed.map(|seed| SeedInfo {
        generator: GENERATOR_NAME.into(),
        seed,
    });
    std::fs::write(out, outcome.model.to_json(outcome.status)).map_err(Error::from)?;
    if outcome.status != TrainStatus::Completed {
        return Err(status_error(outcome.status));
    }
    Ok(())
}

fn elapsed_ns(start: Instant) -> u64 {
    start.elapsed().as_nanos() as u64
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult<CompareReport> {
    let (ds, seed_info, generate_ns) = match &args.data {
        Some(path) => (LabeledDataset::read_file(path)?, None, None),
        None => {
            let n = args.n.ok_or_else(|| usage("--n is required without --data"))?;
            let seed = args.seed.ok_or_else(|| usage("--seed is required without --data"))?;
            let start = Instant::now();
            let ds = generate_gaussian(&GaussianSpec::new(n, args.d, seed))?;
            let info = SeedInfo {
                generator: GENERATOR_NAME.into(),
                seed,
            };
            (ds, Some(info), Some(elapsed_ns(start)))
        }
    };
    let mut csv = Vec::new();
    ds.write_csv(&mut csv)?;
    let input_digest = sha256_hex(&csv);

    let start = Instant::now();
    let trained = train_adaboost(&ds, args.p).map_err(|e| CliError::from(e).context("training"))?;
    let train_ns = elapsed_ns(start);
    if trained.status != TrainStatus::Completed {
        return Err(status_error(trained.status));
    }
    let model = trained.model;

    let start = Instant::now();
    let tree = OutcomeTree::build(&model_outcomes(&ds, &model)?)?;
    let table_ns = elapsed_ns(start);

    let start = Instant::now();
    let state = analytic_state(&tree).map_err(|e| CliError::from(e).context("analytic weights"))?;
    let analytic_ns = elapsed_ns(start);

    let start = Instant::now();
    let risk = compare_with_minimum(&tree, &WeightVector::new(state.betas.clone()))
        .map_err(|e| CliError::from(e).context("risk minimization"))?;
    let minimize_ns = elapsed_ns(start);
    if !risk.converged {
        return Err(CliError::numerical(
            "non-convergence",
            format!("Newton did not converge in {} iterations", risk.iterations),
        ));
    }

    let betas_iterative = model.betas();
    Ok(CompareReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        input_digest,
        seed_info,
        n: ds.len(),
        d: ds.dim(),
        p: model.p(),
        mae_iter_vs_analytic: mean_abs_error(&betas_iterative, &state.betas),
        betas_iterative,
        betas_analytic: state.betas.clone(),
        betas_min: risk.beta_min.clone(),
        risk,
        analytic: state.report(),
        tree: tree.to_json_value(),
        analytic_time_fraction: (table_ns + analytic_ns) as f64 / train_ns.max(1) as f64,
        timings: Timings {
            generate_ns,
            train_ns,
            table_ns,
            analytic_ns,
            minimize_ns,
        },
    })
}
