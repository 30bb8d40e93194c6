use std::collections::BTreeMap;

use planted_core::detectors::DetectorRegistry;
use planted_core::distributions::{make_stream, Arm, ProblemKind, ProblemSpec};
use planted_core::divergence::{bound_prediction, BoundFormula};
use planted_core::harness::{
    assign_arms, compare_to_bound, multi_pass_run, multi_pass_run_with, run_trials, AdvantageReport, ExperimentConfig,
    MemoryReport, RunOptions, SummaryRow, TrialRecord,
};
use planted_core::table::{merge_csv, write_records, Format};
use planted_core::Error;

fn small_config(detector: &str, trials: usize) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(&ProblemSpec::biclique(32, 32, 16, 0.25), detector, "", trials);
    config.seed = 7;
    config
}

#[test]
fn constant_null_has_no_advantage() {
    let outcome = run_trials(&small_config("constant-null", 40)).unwrap();
    let a = &outcome.advantage;
    assert_eq!(a.acc_null, 1.0);
    assert_eq!(a.acc_planted, 0.0);
    assert_eq!(a.advantage, 0.5);
    assert_eq!(a.false_alarm_rate(), 0.0);
    assert_eq!(a.miss_rate(), 1.0);
}

#[test]
fn revealed_oracle_is_perfect() {
    let mut config = small_config("oracle", 40);
    config.reveal = true;
    let outcome = run_trials(&config).unwrap();
    assert_eq!(outcome.advantage.advantage, 1.0);
    assert!(outcome.advantage.ci99_low > 0.7);
    assert!(outcome.records.iter().all(|r| r.arm == r.decision));
}

#[test]
fn edge_count_detects_a_large_plant() {
    let outcome = run_trials(&small_config("edge-count", 30)).unwrap();
    assert!(outcome.advantage.advantage >= 0.9, "{:?}", outcome.advantage);
}

#[test]
fn stratified_arms_are_balanced() {
    for trials in [1, 2, 9, 100] {
        let arms = assign_arms(trials, 3, true);
        let planted = arms.iter().filter(|a| a.is_planted()).count();
        assert_eq!(planted, trials - trials / 2);
    }
    let coins = assign_arms(2000, 3, false);
    let planted = coins.iter().filter(|a| a.is_planted()).count();
    assert!((900..=1100).contains(&planted));
    assert_eq!(assign_arms(50, 9, true), assign_arms(50, 9, true));
}

fn summary_csv(config: &ExperimentConfig) -> Vec<u8> {
    let outcome = run_trials(config).unwrap();
    let mut buf = Vec::new();
    write_records(&[SummaryRow::new(config, &outcome)], Format::Csv, &mut buf).unwrap();
    write_records(&outcome.records, Format::Csv, &mut buf).unwrap();
    buf
}

#[test]
fn reports_are_reproducible_across_runs_and_workers() {
    let mut config = small_config("edge-count", 24);
    let first = summary_csv(&config);
    assert_eq!(first, summary_csv(&config));
    config.workers = Some(1);
    assert_eq!(first, summary_csv(&config));
    config.workers = Some(3);
    assert_eq!(first, summary_csv(&config));
    config.seed = 8;
    assert_ne!(first, summary_csv(&config));
}

#[test]
fn reruns_produce_identical_state_traces() {
    let spec = ProblemSpec::biclique(24, 24, 4, 0.5);
    let registry = DetectorRegistry::default();
    let run = || {
        let (mut source, _) = make_stream(&spec, Arm::Planted, 11).unwrap();
        let mut det = registry.create("edge-count", &spec, "", 0).unwrap();
        let out =
            multi_pass_run_with(det.as_mut(), &mut source, RunOptions { passes: 1, stride: 1, trace: true }).unwrap();
        (out.verdict, out.trace.iter().map(|s| s.encode()).collect::<Vec<_>>())
    };
    let (v1, t1) = run();
    let (v2, t2) = run();
    assert_eq!(v1, v2);
    assert_eq!(t1, t2);
    assert_eq!(t1.len(), 25);
}

#[test]
fn single_pass_matches_plain_run() {
    let spec = ProblemSpec::biclique(24, 24, 4, 0.5);
    let registry = DetectorRegistry::default();
    let (mut a, _) = make_stream(&spec, Arm::Planted, 5).unwrap();
    let (b, _) = make_stream(&spec, Arm::Planted, 5).unwrap();
    let mut d1 = registry.create("edge-count", &spec, "", 0).unwrap();
    let mut d2 = registry.create("edge-count", &spec, "", 0).unwrap();
    let (v1, m1) = multi_pass_run(d1.as_mut(), &mut a, 1).unwrap();
    d2.begin_pass(0).unwrap();
    for row in b.collect_rows().unwrap() {
        d2.observe(&row).unwrap();
    }
    let decision = d2.decide().unwrap();
    assert_eq!(v1.statistic, decision.statistic);
    assert_eq!(v1.decision, decision.decision);
    assert_eq!(m1.per_pass.len(), 1);
}

#[test]
fn two_pass_detector_needs_two_passes() {
    let spec = ProblemSpec::new(ProblemKind::SparseMean, 50, 8).with_ell(2).with_q(0.5);
    let registry = DetectorRegistry::default();
    let (mut source, _) = make_stream(&spec, Arm::Null, 1).unwrap();
    let mut det = registry.create("two-pass-variance", &spec, "threshold=2", 0).unwrap();
    assert!(matches!(multi_pass_run(det.as_mut(), &mut source, 1), Err(Error::InvalidParams { field: "passes", .. })));
    let mut det = registry.create("two-pass-variance", &spec, "threshold=2", 0).unwrap();
    let (verdict, memory) = multi_pass_run(det.as_mut(), &mut source, 2).unwrap();
    assert_eq!(verdict.passes, 2);
    assert_eq!(memory.per_pass.len(), 2);
    assert!((verdict.statistic - 1.0).abs() < 0.1, "{}", verdict.statistic);
}

#[test]
fn trial_failures_carry_the_index() {
    let mut config = small_config("two-pass-variance", 4);
    config.passes = 1;
    assert!(matches!(run_trials(&config), Err(Error::TrialFailed { .. })));
    config.trials = 0;
    assert!(run_trials(&config).is_err());
    let mismatched = ExperimentConfig::new(&ProblemSpec::biclique(8, 8, 2, 0.5), "coordinate-sum", "", 4);
    assert!(matches!(run_trials(&mismatched), Err(Error::IncompatibleDetector { .. })));
}

#[test]
fn advantage_from_handmade_records() {
    let record = |trial, arm, decision| TrialRecord {
        trial,
        seed: 0,
        arm,
        decision,
        statistic: 0.0,
        threshold: 0.0,
        max_state_bits: 8,
    };
    let mut records = Vec::new();
    for i in 0..100 {
        records.push(record(i, Arm::Null, if i < 50 { Arm::Null } else { Arm::Planted }));
        records.push(record(100 + i, Arm::Planted, Arm::Planted));
    }
    let a = AdvantageReport::from_records(&records).unwrap();
    assert_eq!(a.acc_null, 0.5);
    assert_eq!(a.acc_planted, 1.0);
    assert_eq!(a.advantage, 0.75);
    let null_ci = (0.375_279_625_044_839_8, 0.624_720_374_955_160_2);
    let planted_low = planted_core::harness::wilson_interval(100, 100, 0.99).unwrap().low;
    assert!((a.ci99_low - (null_ci.0 + planted_low) / 2.0).abs() < 1e-9);
    assert!((a.ci99_high - (null_ci.1 + 1.0) / 2.0).abs() < 1e-9);
}

#[test]
fn config_round_trips_through_toml() {
    let text = r#"
kind = "Biclique"
rows = 64
cols = 64
k = 8
q = 0.25
detector = "edge-count"
trials = 10
seed = 3
"#;
    let config = ExperimentConfig::from_toml(text).unwrap();
    assert_eq!(config.passes, 1);
    assert!(config.stratified);
    assert_eq!(config.spec(), ProblemSpec::biclique(64, 64, 8, 0.25));
    let again = ExperimentConfig::from_toml(&config.to_toml().unwrap()).unwrap();
    assert_eq!(again.spec(), config.spec());
    assert_eq!(again.seed, 3);
    assert!(matches!(ExperimentConfig::from_toml("rows = 3"), Err(Error::InvalidParams { field: "config", .. })));
}

#[test]
fn bound_comparison_sentinels() {
    let inputs: BTreeMap<String, f64> =
        [("p", 1.0), ("s", 0.0), ("n", 10.0)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let zero = bound_prediction(BoundFormula::MicBudget, &inputs).unwrap();
    let measured = MemoryReport { max_state_bits: 40, ..Default::default() };
    assert_eq!(compare_to_bound(&measured, &zero).ratio, f64::INFINITY);
    assert!(compare_to_bound(&MemoryReport::default(), &zero).ratio.is_nan());
    let json = serde_json::to_string(&compare_to_bound(&measured, &zero)).unwrap();
    assert!(json.contains("\"inf\""), "{json}");

    let inputs: BTreeMap<String, f64> =
        [("p", 1.0), ("s", 2.0), ("n", 10.0)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let cmp = compare_to_bound(&measured, &bound_prediction(BoundFormula::MicBudget, &inputs).unwrap());
    assert_eq!(cmp.ratio, 1.0);
}

#[test]
fn csv_reports_merge_under_one_header() {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let config = small_config("constant-null", 4);
    let outcome = run_trials(&config).unwrap();
    write_records(&[SummaryRow::new(&config, &outcome)], Format::Csv, &mut a).unwrap();
    write_records(&[SummaryRow::new(&config, &outcome)], Format::Csv, &mut b).unwrap();
    let mut merged = Vec::new();
    assert_eq!(merge_csv(vec![a.as_slice(), b.as_slice()], &mut merged).unwrap(), 2);
    let text = String::from_utf8(merged).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("kind,detector,params"));

    let other = b"x,y\n1,2\n".to_vec();
    assert!(merge_csv(vec![a.as_slice(), other.as_slice()], &mut Vec::new()).is_err());
}
