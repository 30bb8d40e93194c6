use std::collections::BTreeMap;

use super::counting::{ConstantNull, EdgeCount, OracleDetector, PartitionWeight, TwoPassVariance};
use super::gaussian::{BlockSquare, CoordinateSum, ScanMode, SubsetScan, SubsetScanConfig};
use super::params::DetectorParams;
use super::reduction::{BicliqueEstimator, DensityEstimator, DensityReduction, MaxBicliqueReduction};
use super::Detector;
use crate::distributions::{ProblemKind, ProblemSpec, TruncationSpec};
use crate::error::{Error, Result};

pub type Factory = fn(&ProblemSpec, &DetectorParams, u64) -> Result<Box<dyn Detector>>;

/// A named detector constructor and the problem kinds it accepts.
#[derive(Clone, Copy)]
pub struct DetectorEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub supports: fn(ProblemKind) -> bool,
    pub build: Factory,
}

impl std::fmt::Debug for DetectorEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DetectorEntry").field("name", &self.name).finish()
    }
}

/// Name-keyed table of detector factories.
///
/// Parameters not given explicitly are taken from the problem spec.
#[derive(Debug, Clone)]
pub struct DetectorRegistry {
    entries: BTreeMap<&'static str, DetectorEntry>,
}

impl Default for DetectorRegistry {
    fn default() -> Self {
        let mut r = DetectorRegistry { entries: BTreeMap::new() };
        for e in builtin() {
            r.register(e);
        }
        r
    }
}

impl DetectorRegistry {
    pub fn empty() -> Self {
        DetectorRegistry { entries: BTreeMap::new() }
    }

    pub fn register(&mut self, entry: DetectorEntry) {
        self.entries.insert(entry.name, entry);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn entry(&self, name: &str) -> Result<&DetectorEntry> {
        self.entries.get(name).ok_or_else(|| Error::UnknownDetector(name.to_string()))
    }

    /// Builds `name` for `spec` from a `key=value,...` parameter string.
    pub fn create(&self, name: &str, spec: &ProblemSpec, params: &str, seed: u64) -> Result<Box<dyn Detector>> {
        self.create_with(name, spec, &DetectorParams::parse(params)?, seed)
    }

    pub fn create_with(
        &self,
        name: &str,
        spec: &ProblemSpec,
        params: &DetectorParams,
        seed: u64,
    ) -> Result<Box<dyn Detector>> {
        let entry = self.entry(name)?;
        if !(entry.supports)(spec.kind) {
            return Err(Error::IncompatibleDetector { detector: name.to_string(), kind: spec.kind.to_string() });
        }
        let det = (entry.build)(spec, params, seed)?;
        params.finish(name)?;
        Ok(det)
    }
}

fn any_kind(_: ProblemKind) -> bool {
    true
}

fn boolean(k: ProblemKind) -> bool {
    k.is_boolean()
}

fn gaussian_mean(k: ProblemKind) -> bool {
    k.is_gaussian_mean()
}

fn pca(k: ProblemKind) -> bool {
    k.is_pca()
}

fn builtin() -> Vec<DetectorEntry> {
    vec![
        DetectorEntry {
            name: "edge-count",
            summary: "one counter of ones; Planted iff count >= mnq + k^2(1-q)/2",
            supports: boolean,
            build: |s, p, _| {
                Ok(Box::new(EdgeCount::new(
                    p.get_or("rows", s.rows)?,
                    p.get_or("cols", s.cols)?,
                    p.get_or("q", s.q)?,
                    p.get_or("k", s.k)?,
                )))
            },
        },
        DetectorEntry {
            name: "partition-weight",
            summary: "flags rows with a block heavier than the typical window plus the plant margin",
            supports: boolean,
            build: |s, p, _| {
                let t = p.get_or("t", s.block)?;
                let q = p.get_or("q", s.q)?;
                let k: usize = p.get_or("k", s.k)?;
                let rows = p.get_or("rows", s.rows)?;
                let cols = p.get_or("cols", s.cols)?;
                if t == 0 {
                    return Err(Error::invalid("t", "partition width must be positive"));
                }
                let window = match p.get::<f64>("half_width")? {
                    Some(h) => TruncationSpec::typical_weight_with_half_width(t, q, h),
                    None => TruncationSpec::typical_weight(t, q, p.get_or("c", s.constants.c)?, rows, cols),
                };
                let margin = p.get_or("margin", k as f64 * (1.0 - q) / 2.0)?;
                Ok(Box::new(PartitionWeight::new(window, rows, cols, margin)?))
            },
        },
        DetectorEntry {
            name: "coordinate-sum",
            summary: "grand sum of entries; Planted iff sum > n q ell alpha / 2",
            supports: gaussian_mean,
            build: |s, p, _| {
                Ok(Box::new(CoordinateSum::new(
                    p.get_or("n", s.rows)?,
                    p.get_or("d", s.cols)?,
                    p.get_or("q", s.plant_rate())?,
                    p.get_or("ell", s.ell)?,
                    p.get_or("alpha", s.alpha)?,
                )))
            },
        },
        DetectorEntry {
            name: "block-square",
            summary: "sum of squared block sums; Planted iff total > n d + n alpha ell / 2",
            supports: pca,
            build: |s, p, _| {
                Ok(Box::new(BlockSquare::new(
                    p.get_or("n", s.rows)?,
                    p.get_or("d", s.cols)?,
                    p.get_or("ell", s.ell)?,
                    p.get_or("alpha", s.alpha)?,
                )?))
            },
        },
        DetectorEntry {
            name: "subset-scan",
            summary: "stores a random coordinate subset, then scans for the heaviest s1 x s2 block",
            supports: gaussian_mean,
            build: |s, p, seed| {
                let mut c = SubsetScanConfig::with_defaults(
                    p.get_or("n", s.rows)?,
                    p.get_or("d", s.cols)?,
                    p.get_or("ell", s.ell)?,
                    p.get_or("alpha", s.alpha)?,
                    p.get_or("q", s.plant_rate())?,
                    p.get_or("delta", 0.1)?,
                    p.get_or("seed", seed)?,
                );
                c.rcols = p.get_or("rcols", c.rcols)?;
                c.s1 = p.get_or("s1", c.s1.min(c.n))?;
                c.s2 = p.get_or("s2", c.s2.min(c.rcols))?;
                c.mode = p.get_or("mode", ScanMode::Auto)?;
                c.restarts = p.get_or("restarts", c.restarts)?;
                c.cap = p.get_or("cap", c.cap)?;
                c.tau = p.get("tau")?;
                Ok(Box::new(SubsetScan::new(c)?))
            },
        },
        DetectorEntry {
            name: "constant-null",
            summary: "always answers Null",
            supports: any_kind,
            build: |_, _, _| Ok(Box::new(ConstantNull)),
        },
        DetectorEntry {
            name: "oracle",
            summary: "answers with the arm of the revealed instance",
            supports: any_kind,
            build: |_, _, _| Ok(Box::new(OracleDetector::default())),
        },
        DetectorEntry {
            name: "two-pass-variance",
            summary: "mean in pass one, variance in pass two; Planted iff variance > threshold",
            supports: any_kind,
            build: |s, p, _| Ok(Box::new(TwoPassVariance::new(s.rows, s.cols, p.get_or("threshold", 1.0)?))),
        },
        DetectorEntry {
            name: "max-biclique-reduction",
            summary: "vertex-arrival graph, exact maximum biclique, Planted iff it reaches the threshold",
            supports: boolean,
            build: |s, p, _| {
                let estimator = match p.get_or("estimator", "exact".to_string())?.as_str() {
                    "exact" => BicliqueEstimator::Exact,
                    "witness" => BicliqueEstimator::Witness,
                    other => return Err(Error::invalid("estimator", format!("unknown estimator `{other}`"))),
                };
                let threshold = p.get_or("threshold", MaxBicliqueReduction::default_threshold(s.rows))?;
                Ok(Box::new(MaxBicliqueReduction::new(s.rows, threshold, estimator)))
            },
        },
        DetectorEntry {
            name: "density-reduction",
            summary: "vertex-arrival graph, densest at-most-beta subgraph, Planted iff it reaches the threshold",
            supports: boolean,
            build: |s, p, seed| {
                let samples = p.get_or("samples", 100_000usize)?;
                let estimator = match p.get::<String>("estimator")?.as_deref() {
                    None => DensityReduction::default_estimator(s.rows),
                    Some("exact") => DensityEstimator::Exact,
                    Some("sampled") => DensityEstimator::Sampled { samples },
                    Some("peeling") => DensityEstimator::Peeling,
                    Some("sampled-peeling") => DensityEstimator::SampledPeeling { samples },
                    Some("witness") => DensityEstimator::Witness { cap: p.get_or("cap", s.k.div_ceil(3))? },
                    Some(other) => return Err(Error::invalid("estimator", format!("unknown estimator `{other}`"))),
                };
                let _ = p.get::<usize>("cap")?;
                Ok(Box::new(DensityReduction::new(
                    s.rows,
                    p.get_or("beta", s.beta)?,
                    p.get_or("threshold", DensityReduction::default_threshold(s.rows))?,
                    estimator,
                    p.get_or("seed", seed)?,
                )?))
            },
        },
    ]
}
