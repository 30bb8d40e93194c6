//! Seeded samplers for every null/planted pair, truncated laws, and stream transforms.

mod codec;
mod spec;
mod stream;
mod transform;
mod truncation;

pub use codec::{read_instance, read_stream, write_instance, write_stream, StreamHeader};
pub use spec::{pad_dimension, Padding, ProblemKind, ProblemSpec, RowMode, TruncationConstants, TypicalVariant};
pub use stream::{make_stream, StreamSource};
pub use transform::{apply_monotone_adversary, consistent_permute, consistent_permute_with, Permutation};
pub use truncation::{
    in_truncation_set, sample_truncated, BaseLaw, BlockSampler, TruncationKind, TruncationSpec, REJECTION_BUDGET,
};

use serde::{Deserialize, Serialize};

use crate::bits::BitRow;

/// Which hypothesis generated a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    Null,
    Planted,
}

impl Arm {
    pub fn is_planted(self) -> bool {
        self == Arm::Planted
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RowData {
    Bits(BitRow),
    Real(Vec<f64>),
}

impl RowData {
    pub fn len(&self) -> usize {
        match self {
            RowData::Bits(b) => b.len(),
            RowData::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_bits(&self) -> Option<&BitRow> {
        match self {
            RowData::Bits(b) => Some(b),
            RowData::Real(_) => None,
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            RowData::Real(v) => Some(v),
            RowData::Bits(_) => None,
        }
    }

    /// Entry `j` as a number (bits map to 0.0 / 1.0).
    pub fn value(&self, j: usize) -> f64 {
        match self {
            RowData::Bits(b) => b.get(j) as u8 as f64,
            RowData::Real(v) => v[j],
        }
    }
}

/// One element of a stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub index: usize,
    pub data: RowData,
}

/// The hidden plant of one draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Pattern {
    Bits(Vec<bool>),
    Real(Vec<f64>),
}

/// Hidden structure of a single draw. All fields are empty on the null arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedInstance {
    pub arm: Arm,
    /// Planted column set `S`, sorted.
    pub columns: Vec<usize>,
    /// Planted row set `R`, sorted.
    pub rows: Vec<usize>,
    /// Pattern or mean values, aligned with `columns`.
    pub pattern: Option<Pattern>,
    /// Index of the partition block that carries the plant.
    pub block: Option<usize>,
}

impl PlantedInstance {
    pub fn null() -> Self {
        PlantedInstance { arm: Arm::Null, columns: Vec::new(), rows: Vec::new(), pattern: None, block: None }
    }
}
