use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::{ProblemKind, ProblemSpec, RowMode, TruncationConstants, TypicalVariant};
use crate::error::{Error, Result};

/// One experiment, stored as flat TOML keyed by `kind`.
///
/// Problem parameters left out take the defaults of [`ProblemSpec::new`].
/// Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ProblemKind,
    pub rows: usize,
    pub cols: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_mode: Option<RowMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<TypicalVariant>,

    pub detector: String,
    #[serde(default)]
    pub params: String,
    pub trials: usize,
    #[serde(default = "one")]
    pub passes: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub reveal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "yes")]
    pub stratified: bool,
    /// Apply the monotone adversary with this `k'` to every planted stream.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary_k_prime: Option<usize>,
    /// Permute the columns of every stream consistently.
    #[serde(default)]
    pub permute: bool,
    /// Meter the detector state every this many rows.
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(spec: &ProblemSpec, detector: &str, params: &str, trials: usize) -> Self {
        let c = &spec.constants;
        ExperimentConfig {
            kind: spec.kind,
            rows: spec.rows,
            cols: spec.cols,
            block: Some(spec.block),
            k: Some(spec.k),
            ell: Some(spec.ell),
            q: Some(spec.q),
            alpha: Some(spec.alpha),
            beta: Some(spec.beta),
            row_mode: Some(spec.row_mode),
            truncated: Some(spec.truncated),
            c: Some(c.c),
            c1: Some(c.c1),
            epsilon: Some(c.epsilon),
            variant: Some(c.variant),
            detector: detector.to_string(),
            params: params.to_string(),
            trials,
            passes: 1,
            seed: 0,
            out: None,
            reveal: false,
            workers: None,
            stratified: true,
            adversary_k_prime: None,
            permute: false,
            stride: 1,
        }
    }

    pub fn spec(&self) -> ProblemSpec {
        let base = ProblemSpec::new(self.kind, self.rows, self.cols);
        let d = TruncationConstants::default();
        ProblemSpec {
            block: self.block.unwrap_or(base.block),
            k: self.k.unwrap_or(base.k),
            ell: self.ell.unwrap_or(base.ell),
            q: self.q.unwrap_or(base.q),
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta.unwrap_or(base.beta),
            row_mode: self.row_mode.unwrap_or(base.row_mode),
            truncated: self.truncated.unwrap_or(base.truncated),
            constants: TruncationConstants {
                c: self.c.unwrap_or(d.c),
                c1: self.c1.unwrap_or(d.c1),
                epsilon: self.epsilon.unwrap_or(d.epsilon),
                variant: self.variant.unwrap_or(d.variant),
            },
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.passes == 0 {
            return Err(Error::invalid("passes", "must be at least 1"));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers", "must be at least 1"));
        }
        self.spec().validate()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParams { field: "config", reason: e.message().to_string() })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let spec = ProblemSpec::biclique(64, 64, 8, 0.25);
        let mut cfg = ExperimentConfig::new(&spec, "edge-count", "k=8", 10);
        cfg.adversary_k_prime = Some(4);
        cfg.out = Some("x.csv".into());
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(cfg.spec(), spec);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "kind = \"Biclique\"\nrows = 4\ncols = 4\ndetector = \"edge-count\"\ntrials = 2\ntrails = 3\n";
        let err = ExperimentConfig::from_toml(text).unwrap_err();
        assert!(err.to_string().contains("trails"));
        let ok = text.replace("trails = 3\n", "");
        let cfg = ExperimentConfig::from_toml(&ok).unwrap();
        assert_eq!(cfg.passes, 1);
        assert!(cfg.stratified);
    }
}
