//! Streaming detectors, their memory accounting, and the graph reductions.
//!
//! Detectors are created by name through [`DetectorRegistry`], consume rows
//! pass by pass, and expose their memory as a canonical bit encoding
//! ([`DetectorState`]).

mod counting;
mod gaussian;
pub mod graph;
mod params;
mod reduction;
mod registry;
mod state;

use serde::{Deserialize, Serialize};

pub use counting::{ConstantNull, EdgeCount, OracleDetector, PartitionWeight, TwoPassVariance};
pub use gaussian::{subset_scan_tau, BlockSquare, CoordinateSum, ScanMode, SubsetScan, SubsetScanConfig};
pub use graph::{
    densest_at_most_beta_exact, densest_peeling, densest_sampled, max_biclique_exact, Graph, VertexArrival,
    VertexArrivalEvent,
};
pub use params::DetectorParams;
pub use reduction::{
    density_witness, reduction_to_density, reduction_to_max_biclique, BicliqueEstimator, DensityEstimator,
    DensityReduction, MaxBicliqueReduction,
};
pub use registry::{DetectorEntry, DetectorRegistry};
pub use state::{bits_for, quantize, real_precision, BitWriter, DetectorState, HEADER_BITS};

use crate::distributions::{Arm, PlantedInstance, Row};
use crate::error::Result;

/// A detector's statistic, the threshold it is compared with, and the resulting call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub statistic: f64,
    pub threshold: f64,
    pub decision: Arm,
    /// The statistic recomputed from the quantized state, where that differs from the full-precision path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantized_statistic: Option<f64>,
}

impl Decision {
    /// Planted iff `statistic > threshold`.
    pub fn above(statistic: f64, threshold: f64) -> Self {
        let decision = if statistic > threshold { Arm::Planted } else { Arm::Null };
        Decision { statistic, threshold, decision, quantized_statistic: None }
    }

    /// Planted iff `statistic >= threshold`.
    pub fn at_least(statistic: f64, threshold: f64) -> Self {
        let decision = if statistic >= threshold { Arm::Planted } else { Arm::Null };
        Decision { statistic, threshold, decision, quantized_statistic: None }
    }

    pub fn with_quantized(mut self, q: f64) -> Self {
        self.quantized_statistic = Some(q);
        self
    }
}

/// One-line report of a finished detector run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub detector: String,
    pub params: String,
    pub statistic: f64,
    pub threshold: f64,
    pub decision: Arm,
    pub max_state_bits: u64,
    pub passes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantized_statistic: Option<f64>,
}

impl Verdict {
    pub fn new(detector: &dyn Detector, decision: Decision, max_state_bits: u64, passes: usize) -> Self {
        Verdict {
            detector: detector.name().to_string(),
            params: detector.params(),
            statistic: decision.statistic,
            threshold: decision.threshold,
            decision: decision.decision,
            max_state_bits,
            passes,
            quantized_statistic: decision.quantized_statistic,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("verdicts always serialise")
    }
}

/// A streaming state machine that reads rows pass by pass and then decides.
///
/// The driver calls [`begin_pass`](Detector::begin_pass) before each pass,
/// [`observe`](Detector::observe) for each row in order, and
/// [`decide`](Detector::decide) once all passes are done. Whatever the detector
/// carries between rows must be captured by [`encode`](Detector::encode).
pub trait Detector: Send {
    fn name(&self) -> &'static str;

    /// Canonical `key=value` list of the parameters in force.
    fn params(&self) -> String;

    /// Identifies the detector in the state header.
    fn tag(&self) -> u8;

    fn passes_required(&self) -> usize {
        1
    }

    /// Hands over the hidden structure; only oracle-style detectors use it.
    fn reveal(&mut self, _instance: &PlantedInstance) {}

    fn begin_pass(&mut self, _pass: usize) -> Result<()> {
        Ok(())
    }

    fn observe(&mut self, row: &Row) -> Result<()>;

    /// Writes the memory contents in canonical form.
    fn encode(&self, out: &mut BitWriter);

    /// Length of the payload written by [`encode`](Detector::encode).
    ///
    /// Detectors with large states override this with a closed form that
    /// must equal the encoded length.
    fn payload_bits(&self) -> u64 {
        let mut w = BitWriter::new();
        self.encode(&mut w);
        w.len()
    }

    fn decide(&self) -> Result<Decision>;

    fn state(&self, pass: usize, row_index: u64) -> DetectorState {
        let mut w = BitWriter::new();
        self.encode(&mut w);
        DetectorState::new(self.tag(), pass, row_index, w)
    }

    fn state_bits(&self) -> u64 {
        HEADER_BITS + self.payload_bits()
    }
}
