use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which distinguishing problem a stream instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    Biclique,
    DistributionalBiclique,
    PartitionBiclique,
    PatternBiclique,
    SemiRandomBiclique,
    SparseMean,
    PartitionSparseMean,
    #[serde(rename = "SparsePCA")]
    SparsePca,
    #[serde(rename = "BlockSparsePCA")]
    BlockSparsePca,
    #[serde(rename = "PartitionPCA")]
    PartitionPca,
    #[serde(rename = "GeneralDP")]
    GeneralDp,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 11] = [
        ProblemKind::Biclique,
        ProblemKind::DistributionalBiclique,
        ProblemKind::PartitionBiclique,
        ProblemKind::PatternBiclique,
        ProblemKind::SemiRandomBiclique,
        ProblemKind::SparseMean,
        ProblemKind::PartitionSparseMean,
        ProblemKind::SparsePca,
        ProblemKind::BlockSparsePca,
        ProblemKind::PartitionPca,
        ProblemKind::GeneralDp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Biclique => "Biclique",
            ProblemKind::DistributionalBiclique => "DistributionalBiclique",
            ProblemKind::PartitionBiclique => "PartitionBiclique",
            ProblemKind::PatternBiclique => "PatternBiclique",
            ProblemKind::SemiRandomBiclique => "SemiRandomBiclique",
            ProblemKind::SparseMean => "SparseMean",
            ProblemKind::PartitionSparseMean => "PartitionSparseMean",
            ProblemKind::SparsePca => "SparsePCA",
            ProblemKind::BlockSparsePca => "BlockSparsePCA",
            ProblemKind::PartitionPca => "PartitionPCA",
            ProblemKind::GeneralDp => "GeneralDP",
        }
    }

    /// Kinds whose rows are bit vectors.
    pub fn is_boolean(self) -> bool {
        matches!(
            self,
            ProblemKind::Biclique
                | ProblemKind::DistributionalBiclique
                | ProblemKind::PartitionBiclique
                | ProblemKind::PatternBiclique
                | ProblemKind::SemiRandomBiclique
                | ProblemKind::GeneralDp
        )
    }

    pub fn is_gaussian_mean(self) -> bool {
        matches!(self, ProblemKind::SparseMean | ProblemKind::PartitionSparseMean)
    }

    pub fn is_pca(self) -> bool {
        matches!(self, ProblemKind::SparsePca | ProblemKind::BlockSparsePca | ProblemKind::PartitionPca)
    }

    /// Kinds whose columns are split into blocks of width `t`.
    pub fn is_partitioned(self) -> bool {
        matches!(
            self,
            ProblemKind::PartitionBiclique
                | ProblemKind::PartitionSparseMean
                | ProblemKind::PartitionPca
                | ProblemKind::GeneralDp
        )
    }

    pub fn tag(self) -> u8 {
        ProblemKind::ALL.iter().position(|k| *k == self).unwrap() as u8
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        ProblemKind::ALL.get(tag as usize).copied()
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnsupportedKind(s.to_string()))
    }
}

/// How planted rows are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowMode {
    /// Exactly `k` rows, chosen uniformly.
    ExactK,
    /// Each row independently with the kind's plant rate.
    IidQ,
}

/// The two readings of the truncated typical-weight law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypicalVariant {
    /// `Ber(q)^t` conditioned on the weight window (plant forced before conditioning).
    Conditional,
    /// Uniform over the window set (and over `T_S` for planted draws).
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationConstants {
    pub c: f64,
    pub c1: f64,
    pub epsilon: f64,
    pub variant: TypicalVariant,
}

impl Default for TruncationConstants {
    fn default() -> Self {
        TruncationConstants { c: 20.0, c1: 20.0, epsilon: 0.01, variant: TypicalVariant::Conditional }
    }
}

/// A fully parameterised distinguishing problem.
///
/// Streams have `rows` rows of width `cols`. For the biclique kinds a row is
/// the adjacency list of one left vertex, so `rows` plays the role of the
/// left-vertex count and `cols` the right-vertex count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub rows: usize,
    pub cols: usize,
    /// Partition width `t`; ignored by unpartitioned kinds.
    pub block: usize,
    pub k: usize,
    pub ell: usize,
    pub q: f64,
    pub alpha: f64,
    pub beta: usize,
    pub row_mode: RowMode,
    /// Draw partitioned kinds from their truncated laws.
    pub truncated: bool,
    pub constants: TruncationConstants,
}

impl ProblemSpec {
    /// A spec with every optional parameter at a neutral default.
    pub fn new(kind: ProblemKind, rows: usize, cols: usize) -> Self {
        let row_mode = match kind {
            ProblemKind::DistributionalBiclique | ProblemKind::SparseMean => RowMode::IidQ,
            _ => RowMode::ExactK,
        };
        ProblemSpec {
            kind,
            rows,
            cols,
            block: 0,
            k: 1,
            ell: 1,
            q: 0.5,
            alpha: 0.5,
            beta: 1,
            row_mode,
            truncated: matches!(kind, ProblemKind::PartitionBiclique),
            constants: TruncationConstants::default(),
        }
    }

    pub fn biclique(rows: usize, cols: usize, k: usize, q: f64) -> Self {
        ProblemSpec { k, q, ..ProblemSpec::new(ProblemKind::Biclique, rows, cols) }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }
    pub fn with_ell(mut self, ell: usize) -> Self {
        self.ell = ell;
        self
    }
    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
    pub fn with_block(mut self, block: usize) -> Self {
        self.block = block;
        self
    }
    pub fn with_beta(mut self, beta: usize) -> Self {
        self.beta = beta;
        self
    }
    pub fn with_row_mode(mut self, mode: RowMode) -> Self {
        self.row_mode = mode;
        self
    }
    pub fn with_truncated(mut self, truncated: bool) -> Self {
        self.truncated = truncated;
        self
    }
    pub fn with_constants(mut self, constants: TruncationConstants) -> Self {
        self.constants = constants;
        self
    }

    /// Probability that a row is planted in `IidQ` mode.
    pub fn plant_rate(&self) -> f64 {
        if self.kind.is_boolean() {
            self.k as f64 / self.cols as f64
        } else {
            self.q
        }
    }

    /// Active width `t * floor(cols / t)` for partitioned kinds, `cols` otherwise.
    pub fn active_cols(&self) -> usize {
        if self.kind.is_partitioned() && self.block > 0 {
            self.block * (self.cols / self.block)
        } else {
            self.cols
        }
    }

    pub fn num_blocks(&self) -> usize {
        if self.kind.is_partitioned() && self.block > 0 {
            self.cols / self.block
        } else {
            1
        }
    }

    /// `log2(rows * cols)`, the log factor used by every truncation window.
    pub fn log_context(&self) -> f64 {
        ((self.rows as f64) * (self.cols as f64)).log2()
    }

    /// Number of planted rows when it is fixed in advance.
    pub fn planted_row_count(&self) -> Option<usize> {
        if self.kind.is_pca() {
            return Some(self.rows);
        }
        match self.row_mode {
            RowMode::ExactK => Some(self.k),
            RowMode::IidQ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.kind;
        if self.rows == 0 {
            return Err(Error::invalid("rows", "must be at least 1"));
        }
        if self.cols == 0 {
            return Err(Error::invalid("cols", "must be at least 1"));
        }
        let fin = |v: f64| v.is_finite();
        if !fin(self.q) || !fin(self.alpha) {
            return Err(Error::invalid("q", "q and alpha must be finite"));
        }
        let c = &self.constants;
        if !(c.c > 0.0 && c.c1 > 0.0 && c.epsilon > 0.0) {
            return Err(Error::invalid("constants", "C, C1 and epsilon must be positive"));
        }

        if kind.is_boolean() {
            if !(self.q > 0.0 && self.q <= 0.5) {
                return Err(Error::invalid("q", format!("{} is outside (0, 1/2]", self.q)));
            }
        } else {
            if !(self.alpha > 0.0 && self.alpha <= 1.0) {
                return Err(Error::invalid("alpha", format!("{} is outside (0, 1]", self.alpha)));
            }
            if kind.is_gaussian_mean() && !(self.q > 0.0 && self.q <= 1.0) {
                return Err(Error::invalid("q", format!("{} is outside (0, 1]", self.q)));
            }
        }

        if kind.is_boolean() && (self.k == 0 || self.k > self.rows.min(self.cols)) {
            return Err(Error::invalid(
                "k",
                format!("{} is outside [1, min(rows, cols)] = [1, {}]", self.k, self.rows.min(self.cols)),
            ));
        }
        let gaussian_fixed_k = kind == ProblemKind::PartitionSparseMean
            || (kind == ProblemKind::SparseMean && self.row_mode == RowMode::ExactK);
        if gaussian_fixed_k && (self.k == 0 || self.k > self.rows) {
            return Err(Error::invalid("k", format!("{} is outside [1, rows = {}]", self.k, self.rows)));
        }
        if kind.is_boolean() && self.row_mode == RowMode::IidQ && self.k > self.cols {
            return Err(Error::invalid("k", "plant rate k/cols exceeds 1"));
        }

        if kind.is_partitioned() && (self.block == 0 || self.block > self.cols) {
            return Err(Error::invalid("block", format!("{} is outside [1, cols = {}]", self.block, self.cols)));
        }

        match kind {
            ProblemKind::PartitionBiclique if self.k > self.block => {
                Err(Error::invalid("k", "plant size exceeds the partition width"))
            }
            ProblemKind::SemiRandomBiclique if self.ell == 0 || self.ell > self.cols => {
                Err(Error::invalid("ell", "column plant size must be in [1, cols]"))
            }
            ProblemKind::GeneralDp if self.ell == 0 || self.ell > self.block => {
                Err(Error::invalid("ell", "plant size must be in [1, block]"))
            }
            ProblemKind::SparseMean | ProblemKind::SparsePca if self.ell == 0 || self.ell > self.cols => {
                Err(Error::invalid("ell", "sparsity must be in [1, cols]"))
            }
            ProblemKind::BlockSparsePca if self.ell == 0 || !self.cols.is_multiple_of(self.ell) => {
                Err(Error::invalid("ell", "sparsity must divide cols"))
            }
            ProblemKind::PartitionSparseMean if self.ell == 0 || self.ell > self.block => {
                Err(Error::invalid("ell", "sparsity must be in [1, block]"))
            }
            ProblemKind::PartitionPca if self.ell == 0 || !self.block.is_multiple_of(self.ell) => {
                Err(Error::invalid("ell", "sparsity must divide the partition width"))
            }
            ProblemKind::PartitionPca if self.truncated && self.alpha >= 1.0 => {
                Err(Error::invalid("alpha", "the PCA truncation set needs alpha < 1"))
            }
            _ => Ok(()),
        }
    }
}

/// Which columns of a partitioned stream are active and which are filler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Padding {
    pub block: usize,
    pub active: usize,
    pub filler: usize,
}

impl Padding {
    pub fn is_filler(&self, col: usize) -> bool {
        col >= self.active
    }

    pub fn filler_columns(&self) -> std::ops::Range<usize> {
        self.active..self.active + self.filler
    }
}

/// Splits `cols` into `floor(cols / t)` blocks plus null-distributed filler columns.
pub fn pad_dimension(spec: &ProblemSpec) -> Result<(ProblemSpec, Padding)> {
    let t = spec.block;
    if t == 0 || t > spec.cols {
        return Err(Error::invalid("block", format!("{} is outside [1, cols = {}]", t, spec.cols)));
    }
    let active = t * (spec.cols / t);
    Ok((spec.clone(), Padding { block: t, active, filler: spec.cols - active }))
}
