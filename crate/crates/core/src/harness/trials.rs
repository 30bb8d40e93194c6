use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{multi_pass_run_with, MemoryReport, RunOptions};
use crate::detectors::DetectorRegistry;
use crate::distributions::{apply_monotone_adversary, consistent_permute, make_stream, Arm};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, derived_rng, Domain};
use crate::stats::{wilson_interval, Interval};

pub const REPORT_CONFIDENCE: f64 = 0.99;

/// Per-arm accuracies and their average, with a 99% interval.
///
/// The interval endpoints are the averages of the per-arm Wilson endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageReport {
    pub trials: usize,
    pub null_trials: usize,
    pub planted_trials: usize,
    pub null_correct: usize,
    pub planted_correct: usize,
    pub acc_null: f64,
    pub acc_planted: f64,
    pub advantage: f64,
    pub ci99_low: f64,
    pub ci99_high: f64,
}

impl AdvantageReport {
    pub fn from_records(records: &[TrialRecord]) -> Result<Self> {
        let count = |arm: Arm| records.iter().filter(|r| r.arm == arm).count();
        let correct = |arm: Arm| records.iter().filter(|r| r.arm == arm && r.decision == arm).count();
        let (nt, pt) = (count(Arm::Null), count(Arm::Planted));
        let (nc, pc) = (correct(Arm::Null), correct(Arm::Planted));
        let arm_interval = |c: usize, t: usize| -> Result<(f64, Interval)> {
            if t == 0 {
                Ok((0.5, Interval { low: 0.0, high: 1.0 }))
            } else {
                Ok((c as f64 / t as f64, wilson_interval(c as u64, t as u64, REPORT_CONFIDENCE)?))
            }
        };
        let (acc_null, ni) = arm_interval(nc, nt)?;
        let (acc_planted, pi) = arm_interval(pc, pt)?;
        Ok(AdvantageReport {
            trials: records.len(),
            null_trials: nt,
            planted_trials: pt,
            null_correct: nc,
            planted_correct: pc,
            acc_null,
            acc_planted,
            advantage: (acc_null + acc_planted) / 2.0,
            ci99_low: (ni.low + pi.low) / 2.0,
            ci99_high: (ni.high + pi.high) / 2.0,
        })
    }

    pub fn wilson_ci_99(&self) -> Interval {
        Interval { low: self.ci99_low, high: self.ci99_high }
    }

    /// Error rate on null streams.
    pub fn false_alarm_rate(&self) -> f64 {
        1.0 - self.acc_null
    }

    /// Error rate on planted streams.
    pub fn miss_rate(&self) -> f64 {
        1.0 - self.acc_planted
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub arm: Arm,
    pub decision: Arm,
    pub statistic: f64,
    pub threshold: f64,
    pub max_state_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialsOutcome {
    pub advantage: AdvantageReport,
    pub memory: MemoryReport,
    pub records: Vec<TrialRecord>,
}

/// Arm of every trial: exactly balanced and shuffled when stratified, fair coins otherwise.
pub fn assign_arms(trials: usize, seed: u64, stratified: bool) -> Vec<Arm> {
    if stratified {
        let mut arms: Vec<Arm> = (0..trials).map(|i| if i < trials / 2 { Arm::Null } else { Arm::Planted }).collect();
        arms.shuffle(&mut derived_rng(seed, Domain::Arm, 0));
        arms
    } else {
        (0..trials)
            .map(|i| if derived_rng(seed, Domain::Arm, i as u64 + 1).gen::<bool>() { Arm::Planted } else { Arm::Null })
            .collect()
    }
}

/// Runs one trial: its own stream, detector and seeds, all derived from the experiment seed and the index.
pub fn run_one_trial(
    config: &ExperimentConfig,
    registry: &DetectorRegistry,
    trial: usize,
    arm: Arm,
) -> Result<(TrialRecord, MemoryReport)> {
    let spec = config.spec();
    let seed = derive_seed(config.seed, Domain::Trial, trial as u64);
    let (mut source, instance) = make_stream(&spec, arm, seed)?;
    if let Some(kp) = config.adversary_k_prime {
        source = apply_monotone_adversary(source, &instance, kp)?;
    }
    if config.permute {
        source = consistent_permute(source, derive_seed(seed, Domain::Permutation, 0));
    }
    let mut det = registry.create(&config.detector, &spec, &config.params, derive_seed(seed, Domain::Detector, 0))?;
    if config.reveal {
        det.reveal(&instance);
    }
    let opts = RunOptions { passes: config.passes, stride: config.stride, trace: false };
    let out = multi_pass_run_with(det.as_mut(), &mut source, opts)?;
    let record = TrialRecord {
        trial,
        seed,
        arm,
        decision: out.verdict.decision,
        statistic: out.verdict.statistic,
        threshold: out.verdict.threshold,
        max_state_bits: out.memory.max_state_bits,
    };
    Ok((record, out.memory))
}

/// Runs every trial of `config` and aggregates them in trial order.
///
/// Any failing trial aborts the whole run; no partial report is produced.
pub fn run_trials(config: &ExperimentConfig) -> Result<TrialsOutcome> {
    config.validate()?;
    let registry = DetectorRegistry::default();
    let spec = config.spec();
    let entry = registry.entry(&config.detector)?;
    if !(entry.supports)(spec.kind) {
        return Err(Error::IncompatibleDetector { detector: config.detector.clone(), kind: spec.kind.to_string() });
    }
    let arms = assign_arms(config.trials, config.seed, config.stratified);
    let run = || -> Vec<Result<(TrialRecord, MemoryReport)>> {
        arms.par_iter().enumerate().map(|(i, &arm)| run_one_trial(config, &registry, i, arm)).collect()
    };
    let results = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Format(e.to_string()))?
            .install(run),
        None => run(),
    };
    let mut records = Vec::with_capacity(results.len());
    let mut memory = MemoryReport::default();
    for (trial, r) in results.into_iter().enumerate() {
        let (rec, mem) = r.map_err(|e| Error::TrialFailed { trial, source: Box::new(e) })?;
        memory.merge(&mem);
        records.push(rec);
    }
    Ok(TrialsOutcome { advantage: AdvantageReport::from_records(&records)?, memory, records })
}
