use serde::{Deserialize, Serialize};

use super::graph::{
    densest_at_most_beta_exact, densest_peeling, densest_sampled, max_biclique_exact, Graph, VertexArrivalEvent,
    DENSEST_EXACT_CAP,
};
use super::state::BitWriter;
use super::{Decision, Detector, Verdict};
use crate::distributions::{PlantedInstance, Row, StreamSource};
use crate::error::{Error, Result};
use crate::harness::multi_pass_run;

/// Consumes vertex-arrival events and keeps the lower triangle seen so far.
#[derive(Debug, Clone)]
struct ArrivedGraph {
    graph: Graph,
    arrived: usize,
}

impl ArrivedGraph {
    fn new(n: usize) -> Self {
        ArrivedGraph { graph: Graph::new(n), arrived: 0 }
    }

    fn observe(&mut self, row: &Row) -> Result<()> {
        if row.data.len() != self.graph.len() {
            return Err(Error::ShapeMismatch(format!(
                "row of length {} in a graph on {} vertices",
                row.data.len(),
                self.graph.len()
            )));
        }
        let ev = VertexArrivalEvent::from_row(row)?;
        self.graph.add_event(&ev);
        self.arrived = self.arrived.max(row.index + 1);
        Ok(())
    }

    fn encode(&self, out: &mut BitWriter) {
        for i in 0..self.arrived {
            for j in 0..=i {
                out.push_bool(self.graph.has_edge(i, j));
            }
        }
    }

    fn payload_bits(&self) -> u64 {
        let a = self.arrived as u64;
        a * (a + 1) / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BicliqueEstimator {
    Exact,
    /// `A = R in the upper half`, `B = S in the lower half`; needs the revealed instance.
    Witness,
}

/// Decides Planted iff the maximum biclique of the arrival graph reaches `threshold`.
#[derive(Debug, Clone)]
pub struct MaxBicliqueReduction {
    pub threshold: f64,
    pub estimator: BicliqueEstimator,
    g: ArrivedGraph,
    instance: Option<PlantedInstance>,
}

impl MaxBicliqueReduction {
    /// The default threshold `3.5 log2 n` sits in the middle of the `3 log n` / `4 log n` gap.
    pub fn default_threshold(n: usize) -> f64 {
        3.5 * (n as f64).log2()
    }

    pub fn new(n: usize, threshold: f64, estimator: BicliqueEstimator) -> Self {
        MaxBicliqueReduction { threshold, estimator, g: ArrivedGraph::new(n), instance: None }
    }

    pub fn graph(&self) -> &Graph {
        &self.g.graph
    }

    pub fn estimate(&self) -> Result<usize> {
        match self.estimator {
            BicliqueEstimator::Exact => max_biclique_exact(&self.g.graph),
            BicliqueEstimator::Witness => {
                let inst = self
                    .instance
                    .as_ref()
                    .ok_or_else(|| Error::NotApplicable("the witness estimator needs the revealed instance".into()))?;
                let n = self.g.graph.len();
                let a: Vec<usize> = inst.rows.iter().copied().filter(|&i| i >= n / 2).collect();
                let b = inst
                    .columns
                    .iter()
                    .filter(|&&j| j < n / 2 && a.iter().all(|&i| self.g.graph.has_edge(i, j)))
                    .count();
                Ok(a.len().min(b))
            }
        }
    }
}

impl Detector for MaxBicliqueReduction {
    fn name(&self) -> &'static str {
        "max-biclique-reduction"
    }

    fn params(&self) -> String {
        format!("estimator={:?},n={},threshold={}", self.estimator, self.g.graph.len(), self.threshold)
    }

    fn tag(&self) -> u8 {
        9
    }

    fn reveal(&mut self, instance: &PlantedInstance) {
        self.instance = Some(instance.clone());
    }

    fn begin_pass(&mut self, pass: usize) -> Result<()> {
        if pass > 0 {
            return Err(Error::NotApplicable("the reduction reads the stream once".into()));
        }
        Ok(())
    }

    fn observe(&mut self, row: &Row) -> Result<()> {
        self.g.observe(row)
    }

    fn encode(&self, out: &mut BitWriter) {
        self.g.encode(out)
    }

    fn payload_bits(&self) -> u64 {
        self.g.payload_bits()
    }

    fn decide(&self) -> Result<Decision> {
        Ok(Decision::at_least(self.estimate()? as f64, self.threshold))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DensityEstimator {
    /// Exhaustive search; at most 20 vertices.
    Exact,
    /// Best of `samples` uniformly drawn subsets.
    Sampled { samples: usize },
    /// Greedy minimum-degree peeling.
    Peeling,
    /// The larger of the sampled and peeling estimates.
    SampledPeeling { samples: usize },
    /// Density of the planted cross witness; needs the revealed instance.
    Witness { cap: usize },
}

/// Density of `H = A u B` with `A = R in the upper half` and `B = S in the lower half`, each cut to `cap`.
///
/// Every `a in A`, `b in B` has `b < a` with `x^a_b = 1`, so the pairs are edges
/// of the arrival graph. The returned density counts all induced edges.
pub fn density_witness(g: &Graph, instance: &PlantedInstance, cap: usize) -> f64 {
    let n = g.len();
    let a = instance.rows.iter().copied().filter(|&i| i >= n / 2).take(cap);
    let b = instance.columns.iter().copied().filter(|&j| j < n / 2).take(cap);
    let h: Vec<usize> = a.chain(b).collect();
    if h.is_empty() {
        return 0.0;
    }
    g.induced_edges(&h) as f64 / h.len() as f64
}

/// Decides Planted iff the densest at-most-`beta` subgraph estimate reaches `threshold`.
#[derive(Debug, Clone)]
pub struct DensityReduction {
    pub beta: usize,
    pub threshold: f64,
    pub estimator: DensityEstimator,
    pub seed: u64,
    g: ArrivedGraph,
    instance: Option<PlantedInstance>,
}

impl DensityReduction {
    /// `200 log2 n`, the planted side of the density gap.
    pub fn default_threshold(n: usize) -> f64 {
        200.0 * (n as f64).log2()
    }

    pub fn default_estimator(n: usize) -> DensityEstimator {
        if n <= DENSEST_EXACT_CAP {
            DensityEstimator::Exact
        } else {
            DensityEstimator::SampledPeeling { samples: 100_000 }
        }
    }

    pub fn new(n: usize, beta: usize, threshold: f64, estimator: DensityEstimator, seed: u64) -> Result<Self> {
        if beta == 0 {
            return Err(Error::invalid("beta", "must be at least 1"));
        }
        Ok(DensityReduction { beta, threshold, estimator, seed, g: ArrivedGraph::new(n), instance: None })
    }

    pub fn graph(&self) -> &Graph {
        &self.g.graph
    }

    pub fn estimate(&self) -> Result<f64> {
        let g = &self.g.graph;
        Ok(match self.estimator {
            DensityEstimator::Exact => {
                let r = densest_at_most_beta_exact(g, self.beta)?;
                *r.numer() as f64 / *r.denom() as f64
            }
            DensityEstimator::Sampled { samples } => densest_sampled(g, self.beta, samples, self.seed),
            DensityEstimator::Peeling => densest_peeling(g, self.beta),
            DensityEstimator::SampledPeeling { samples } => {
                densest_sampled(g, self.beta, samples, self.seed).max(densest_peeling(g, self.beta))
            }
            DensityEstimator::Witness { cap } => {
                let inst = self
                    .instance
                    .as_ref()
                    .ok_or_else(|| Error::NotApplicable("the witness estimator needs the revealed instance".into()))?;
                density_witness(g, inst, cap)
            }
        })
    }
}

impl Detector for DensityReduction {
    fn name(&self) -> &'static str {
        "density-reduction"
    }

    fn params(&self) -> String {
        format!(
            "beta={},estimator={:?},n={},threshold={}",
            self.beta,
            self.estimator,
            self.g.graph.len(),
            self.threshold
        )
    }

    fn tag(&self) -> u8 {
        10
    }

    fn reveal(&mut self, instance: &PlantedInstance) {
        self.instance = Some(instance.clone());
    }

    fn begin_pass(&mut self, pass: usize) -> Result<()> {
        if pass > 0 {
            return Err(Error::NotApplicable("the reduction reads the stream once".into()));
        }
        Ok(())
    }

    fn observe(&mut self, row: &Row) -> Result<()> {
        self.g.observe(row)
    }

    fn encode(&self, out: &mut BitWriter) {
        self.g.encode(out)
    }

    fn payload_bits(&self) -> u64 {
        self.g.payload_bits()
    }

    fn decide(&self) -> Result<Decision> {
        Ok(Decision::at_least(self.estimate()?, self.threshold))
    }
}

fn check_square(source: &StreamSource) -> Result<usize> {
    let spec = source.spec();
    if !spec.kind.is_boolean() || spec.rows != spec.cols {
        return Err(Error::ShapeMismatch(format!("need a square Boolean stream, got {} x {}", spec.rows, spec.cols)));
    }
    Ok(spec.rows)
}

/// Runs the max-biclique reduction over `source` in one pass.
pub fn reduction_to_max_biclique(
    source: &mut StreamSource,
    threshold: Option<f64>,
    estimator: BicliqueEstimator,
    instance: Option<&PlantedInstance>,
) -> Result<Verdict> {
    let n = check_square(source)?;
    let mut det =
        MaxBicliqueReduction::new(n, threshold.unwrap_or(MaxBicliqueReduction::default_threshold(n)), estimator);
    if let Some(inst) = instance {
        det.reveal(inst);
    }
    Ok(multi_pass_run(&mut det, source, 1)?.0)
}

/// Runs the density reduction over `source` in one pass.
pub fn reduction_to_density(
    source: &mut StreamSource,
    beta: usize,
    threshold: Option<f64>,
    estimator: Option<DensityEstimator>,
    instance: Option<&PlantedInstance>,
    seed: u64,
) -> Result<Verdict> {
    let n = check_square(source)?;
    let mut det = DensityReduction::new(
        n,
        beta,
        threshold.unwrap_or(DensityReduction::default_threshold(n)),
        estimator.unwrap_or(DensityReduction::default_estimator(n)),
        seed,
    )?;
    if let Some(inst) = instance {
        det.reveal(inst);
    }
    Ok(multi_pass_run(&mut det, source, 1)?.0)
}
