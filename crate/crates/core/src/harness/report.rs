use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::run::MemoryReport;
use super::trials::TrialsOutcome;
use super::ExperimentConfig;
use crate::divergence::{BoundFormula, BoundPrediction};

/// Serialises non-finite values as the strings `inf`, `-inf` and `nan`.
pub mod sentinel_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_str("nan")
        } else if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => other.parse().map_err(serde::de::Error::custom),
            },
        }
    }
}

/// Measured peak state against a lower-bound formula. Informational only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub formula: BoundFormula,
    pub measured_bits: u64,
    #[serde(with = "sentinel_f64")]
    pub predicted_bits: f64,
    /// `measured / predicted`; `inf` when the prediction is zero.
    #[serde(with = "sentinel_f64")]
    pub ratio: f64,
    pub inputs: BTreeMap<String, f64>,
}

pub fn compare_to_bound(memory: &MemoryReport, prediction: &BoundPrediction) -> BoundComparison {
    let measured = memory.max_state_bits as f64;
    let ratio = if prediction.value_bits == 0.0 {
        if measured == 0.0 {
            f64::NAN
        } else {
            f64::INFINITY
        }
    } else {
        measured / prediction.value_bits
    };
    BoundComparison {
        formula: prediction.formula,
        measured_bits: memory.max_state_bits,
        predicted_bits: prediction.value_bits,
        ratio,
        inputs: prediction.inputs.clone(),
    }
}

/// One summary line per experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub kind: String,
    pub detector: String,
    pub params: String,
    pub seed: u64,
    pub trials: usize,
    pub passes: usize,
    pub acc_null: f64,
    pub acc_planted: f64,
    pub advantage: f64,
    pub ci99_low: f64,
    pub ci99_high: f64,
    pub max_state_bits: u64,
}

impl SummaryRow {
    pub fn new(config: &ExperimentConfig, outcome: &TrialsOutcome) -> Self {
        let a = &outcome.advantage;
        SummaryRow {
            kind: config.kind.to_string(),
            detector: config.detector.clone(),
            params: config.params.clone(),
            seed: config.seed,
            trials: a.trials,
            passes: config.passes,
            acc_null: a.acc_null,
            acc_planted: a.acc_planted,
            advantage: a.advantage,
            ci99_low: a.ci99_low,
            ci99_high: a.ci99_high,
            max_state_bits: outcome.memory.max_state_bits,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_prediction_gives_infinite_ratio() {
        let mem = MemoryReport { max_state_bits: 85, per_pass: vec![85], checkpoints: 3 };
        let pred = BoundPrediction { formula: BoundFormula::MicBudget, value_bits: 0.0, inputs: BTreeMap::new() };
        let c = compare_to_bound(&mem, &pred);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"ratio\":\"inf\""));
        let back: BoundComparison = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }
}
