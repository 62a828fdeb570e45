use truthboost::analytic::analytic_betas;
use truthboost::boosting::{train_with, StumpLearner, TrainStatus};
use truthboost::data::{generate_gaussian, outcome_matrix, Classifier, GaussianSpec};
use truthboost::packet::{packet_reduce, PacketMode};
use truthboost::risk::{risk_from_tree, WeightVector};
use truthboost::stump::weighted_error;
use truthboost::tree::OutcomeTree;
use truthboost::train_adaboost;

fn mae(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

#[test]
fn iterative_and_analytic_weights_agree() {
    for (seed, p) in [(1u64, 3usize), (2, 3), (3, 5), (42, 3), (99, 8)] {
        let ds = generate_gaussian(&GaussianSpec::new(1000, 2, seed)).unwrap();
        let out = train_adaboost(&ds, p).unwrap();
        assert_eq!(out.status, TrainStatus::Completed);
        let stumps: Vec<_> = out.model.steps.iter().map(|s| s.classifier).collect();
        let tree = OutcomeTree::build(&outcome_matrix(&ds, &stumps).unwrap()).unwrap();
        let analytic = analytic_betas(&tree).unwrap();
        let err = mae(&out.model.betas(), &analytic);
        assert!(err <= 1e-12, "seed {seed}: mae {err:e}");
    }
}

#[test]
fn leaf_counts_agree_with_per_example_loop() {
    let ds = generate_gaussian(&GaussianSpec::new(1000, 2, 42)).unwrap();
    let out = train_adaboost(&ds, 3).unwrap();
    let stumps: Vec<_> = out.model.steps.iter().map(|s| s.classifier).collect();
    let tree = OutcomeTree::build(&outcome_matrix(&ds, &stumps).unwrap()).unwrap();
    let mut counts = [0u64; 8];
    for (x, &y) in ds.rows().zip(ds.labels()) {
        let mut leaf = 0;
        for s in &stumps {
            leaf = 2 * leaf + usize::from(s.predict(x).unwrap() == y);
        }
        counts[leaf] += 1;
    }
    assert_eq!(tree.leaves(), &counts);
    assert_eq!(counts.iter().sum::<u64>(), 1000);
}

#[test]
fn weights_stay_positive_and_balance() {
    let ds = generate_gaussian(&GaussianSpec::new(600, 3, 5)).unwrap();
    let out = train_with(&ds, 6, &StumpLearner, true).unwrap();
    let history = out.model.weight_history.as_ref().unwrap();
    assert_eq!(history.len(), 7);
    for (k, step) in out.model.steps.iter().enumerate() {
        assert!(history[k + 1].as_slice().iter().all(|&w| w > 0.0));
        let e = weighted_error(&step.classifier, &ds, &history[k + 1]).unwrap();
        assert!((e - 0.5).abs() <= 1e-12, "step {k}: {e}");
        assert_eq!(step.included, step.epsilon < 0.5);
        if step.epsilon < 0.5 {
            assert!(step.beta > 0.0);
        }
    }
}

#[test]
fn per_step_risk_drop_on_trained_run() {
    let ds = generate_gaussian(&GaussianSpec::new(1000, 2, 11)).unwrap();
    let out = train_adaboost(&ds, 3).unwrap();
    let stumps: Vec<_> = out.model.steps.iter().map(|s| s.classifier).collect();
    let tree = OutcomeTree::build(&outcome_matrix(&ds, &stumps).unwrap()).unwrap();
    let betas = out.model.betas();
    let n = tree.n() as f64;
    let mut before = 1.0;
    for k in 1..=3 {
        let prefix = tree.truncate(k).unwrap();
        let after = risk_from_tree(&prefix, &WeightVector::new(betas[..k].to_vec())).unwrap();
        let eps = out.model.steps[k - 1].epsilon;
        // a_k = eps * n R_{k-1}, b_k = (1 - eps) * n R_{k-1}
        let (a, b) = (eps * before * n, (1.0 - eps) * before * n);
        assert!((after * n - 2.0 * (a * b).sqrt()).abs() <= 1e-9);
        assert!(after <= before);
        before = after;
    }
}

#[test]
fn analytic_packet_matches_full_ensemble_error() {
    let ds = generate_gaussian(&GaussianSpec::new(1000, 2, 42)).unwrap();
    let out = train_adaboost(&ds, 3).unwrap();
    let stumps: Vec<_> = out.model.steps.iter().map(|s| s.classifier).collect();
    let red = packet_reduce(&ds, &stumps, PacketMode::Analytic).unwrap();
    assert_eq!(red.classifiers.len(), 1);
    for x in ds.rows() {
        assert_eq!(red.classifiers[0].predict(x).unwrap(), out.model.predict(x).unwrap());
    }
}
