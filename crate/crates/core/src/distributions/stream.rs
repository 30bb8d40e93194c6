use std::sync::Arc;

use rand::seq::index::sample as sample_indices;
use rand::Rng;

use super::transform::Transform;
use super::truncation::{add_spike, bernoulli_bits, normal_vec, BaseLaw, BlockSampler, TruncationSpec};
use super::{Arm, Pattern, PlantedInstance, ProblemKind, ProblemSpec, Row, RowData, RowMode};
use crate::bits::BitRow;
use crate::error::{Error, Result};
use crate::rng::{derived_rng, Domain, StreamRng};

/// A rewindable, replayable stream of rows.
///
/// Synthetic sources regenerate row `i` from `(spec, seed, i)` on demand, so
/// every pass sees identical rows and memory use does not grow with the
/// stream length. Recorded sources hold rows read from a file.
#[derive(Clone)]
pub struct StreamSource {
    backend: Arc<Backend>,
    transforms: Vec<Transform>,
    position: usize,
}

enum Backend {
    Synthetic(Box<Generator>),
    Recorded { spec: ProblemSpec, seed: u64, rows: Vec<RowData> },
}

impl std::fmt::Debug for StreamSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StreamSource")
            .field("kind", &self.spec().kind)
            .field("rows", &self.len())
            .field("cols", &self.spec().cols)
            .field("seed", &self.seed())
            .field("position", &self.position)
            .field("transforms", &self.transforms.len())
            .finish()
    }
}

impl StreamSource {
    /// Wraps explicit rows as a stream. Every row must have width `spec.cols`.
    pub fn from_rows(spec: ProblemSpec, seed: u64, rows: Vec<RowData>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != spec.cols) {
            return Err(Error::DimensionMismatch { expected: spec.cols, got: bad.len() });
        }
        let spec = ProblemSpec { rows: rows.len(), ..spec };
        Ok(StreamSource {
            backend: Arc::new(Backend::Recorded { spec, seed, rows }),
            transforms: Vec::new(),
            position: 0,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        match &*self.backend {
            Backend::Synthetic(g) => &g.spec,
            Backend::Recorded { spec, .. } => spec,
        }
    }

    pub fn seed(&self) -> u64 {
        match &*self.backend {
            Backend::Synthetic(g) => g.seed,
            Backend::Recorded { seed, .. } => *seed,
        }
    }

    pub fn len(&self) -> usize {
        match &*self.backend {
            Backend::Synthetic(g) => g.spec.rows,
            Backend::Recorded { rows, .. } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn rewind(&mut self) {
        self.position = 0;
    }

    /// Row `index`, independent of the cursor.
    pub fn row_at(&self, index: usize) -> Result<Row> {
        if index >= self.len() {
            return Err(Error::invalid("index", format!("row {index} is past the end of the stream")));
        }
        let mut data = match &*self.backend {
            Backend::Synthetic(g) => g.row(index)?,
            Backend::Recorded { rows, .. } => rows[index].clone(),
        };
        for t in &self.transforms {
            t.apply(index, &mut data);
        }
        Ok(Row { index, data })
    }

    /// The row at the cursor, advancing it; `None` at the end of a pass.
    pub fn next_row(&mut self) -> Result<Option<Row>> {
        if self.position >= self.len() {
            return Ok(None);
        }
        let row = self.row_at(self.position)?;
        self.position += 1;
        Ok(Some(row))
    }

    pub fn collect_rows(&self) -> Result<Vec<Row>> {
        (0..self.len()).map(|i| self.row_at(i)).collect()
    }

    pub(crate) fn with_transform(mut self, transform: Transform) -> Self {
        self.transforms.push(transform);
        self.position = 0;
        self
    }
}

/// Builds a stream for one arm of `spec`, returning it with its hidden structure.
pub fn make_stream(spec: &ProblemSpec, arm: Arm, seed: u64) -> Result<(StreamSource, PlantedInstance)> {
    spec.validate()?;
    let instance = draw_instance(spec, arm, seed)?;
    let generator = Generator::new(spec.clone(), seed, instance.clone())?;
    let source = StreamSource {
        backend: Arc::new(Backend::Synthetic(Box::new(generator))),
        transforms: Vec::new(),
        position: 0,
    };
    Ok((source, instance))
}

fn sorted_subset(rng: &mut StreamRng, n: usize, k: usize) -> Vec<usize> {
    let mut v = sample_indices(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

fn draw_instance(spec: &ProblemSpec, arm: Arm, seed: u64) -> Result<PlantedInstance> {
    if arm == Arm::Null {
        return Ok(PlantedInstance::null());
    }
    let mut rng = derived_rng(seed, Domain::Instance, 0);
    let kind = spec.kind;

    let rows = if kind.is_pca() {
        (0..spec.rows).collect()
    } else {
        match spec.row_mode {
            RowMode::ExactK => sorted_subset(&mut rng, spec.rows, spec.k),
            RowMode::IidQ => {
                let p = spec.plant_rate();
                (0..spec.rows).filter(|_| rng.gen::<f64>() < p).collect()
            }
        }
    };

    let t = spec.block;
    let mut block = None;
    let mut pattern = None;
    let columns = match kind {
        ProblemKind::Biclique | ProblemKind::DistributionalBiclique => sorted_subset(&mut rng, spec.cols, spec.k),
        ProblemKind::PatternBiclique => {
            let cols = sorted_subset(&mut rng, spec.cols, spec.k);
            pattern = Some(Pattern::Bits((0..spec.k).map(|_| rng.gen::<bool>()).collect()));
            cols
        }
        ProblemKind::SemiRandomBiclique => sorted_subset(&mut rng, spec.cols, spec.ell),
        ProblemKind::PartitionBiclique | ProblemKind::GeneralDp => {
            let r = rng.gen_range(0..spec.num_blocks());
            block = Some(r);
            let size = if kind == ProblemKind::PartitionBiclique { spec.k } else { spec.ell };
            sorted_subset(&mut rng, t, size).into_iter().map(|j| r * t + j).collect()
        }
        ProblemKind::SparseMean | ProblemKind::SparsePca => {
            let cols = sorted_subset(&mut rng, spec.cols, spec.ell);
            if kind == ProblemKind::SparseMean {
                pattern = Some(Pattern::Real(vec![spec.alpha; cols.len()]));
            }
            cols
        }
        ProblemKind::PartitionSparseMean => {
            let r = rng.gen_range(0..spec.num_blocks());
            block = Some(r);
            let p = spec.ell as f64 / t as f64;
            let cap = 100 * spec.ell;
            let mut support: Vec<usize>;
            let mut attempts = 0;
            loop {
                support = (0..t).filter(|_| rng.gen::<f64>() < p).map(|j| r * t + j).collect();
                attempts += 1;
                if !spec.truncated || support.len() <= cap {
                    break;
                }
                if attempts >= super::REJECTION_BUDGET {
                    return Err(Error::RejectionBudgetExceeded { attempts });
                }
            }
            pattern = Some(Pattern::Real(vec![spec.alpha; support.len()]));
            support
        }
        ProblemKind::BlockSparsePca => {
            let b = rng.gen_range(0..spec.cols / spec.ell);
            block = Some(b);
            (b * spec.ell..(b + 1) * spec.ell).collect()
        }
        ProblemKind::PartitionPca => {
            let r = rng.gen_range(0..spec.num_blocks());
            let b = rng.gen_range(0..t / spec.ell);
            block = Some(r);
            (r * t + b * spec.ell..r * t + (b + 1) * spec.ell).collect()
        }
    };

    Ok(PlantedInstance { arm, columns, rows, pattern, block })
}

/// Pure row generator: row `i` depends only on `(spec, seed, instance, i)`.
struct Generator {
    spec: ProblemSpec,
    seed: u64,
    instance: PlantedInstance,
    planted: Vec<bool>,
    null_block: Option<BlockSampler>,
    planted_block: Option<BlockSampler>,
}

impl Generator {
    fn new(spec: ProblemSpec, seed: u64, instance: PlantedInstance) -> Result<Self> {
        let mut planted = vec![false; spec.rows];
        for &r in &instance.rows {
            planted[r] = true;
        }
        let (null_block, planted_block) = Self::block_samplers(&spec, &instance)?;
        Ok(Generator { spec, seed, instance, planted, null_block, planted_block })
    }

    fn block_samplers(
        spec: &ProblemSpec,
        inst: &PlantedInstance,
    ) -> Result<(Option<BlockSampler>, Option<BlockSampler>)> {
        let t = spec.block;
        let c = &spec.constants;
        let offset = inst.block.unwrap_or(0) * t;
        let relative: Vec<usize> = inst.columns.iter().map(|j| j - offset).collect();
        let trunc =
            |tr: TruncationSpec| if spec.truncated { Some(tr.with_constants(c.c, c.c1, c.epsilon)) } else { None };
        let planted_arm = inst.arm == Arm::Planted;
        let pair = match spec.kind {
            ProblemKind::PartitionBiclique => {
                let tr =
                    trunc(TruncationSpec::typical_weight(t, spec.q, c.c, spec.rows, spec.cols).with_variant(c.variant));
                let null = BlockSampler::new(BaseLaw::Bernoulli { width: t, q: spec.q, forced: vec![] }, tr.clone())?;
                let plant = planted_arm
                    .then(|| {
                        BlockSampler::new(BaseLaw::Bernoulli { width: t, q: spec.q, forced: relative.clone() }, tr)
                    })
                    .transpose()?;
                (Some(null), plant)
            }
            ProblemKind::PartitionSparseMean => {
                let tr = trunc(TruncationSpec::gaussian_exp_sum(t, spec.alpha, spec.rows, spec.cols));
                let null = BlockSampler::new(BaseLaw::Gaussian { mean: vec![0.0; t] }, tr.clone())?;
                let plant = planted_arm
                    .then(|| {
                        let mut mean = vec![0.0; t];
                        for &j in &relative {
                            mean[j] = spec.alpha;
                        }
                        BlockSampler::new(BaseLaw::Gaussian { mean }, tr)
                    })
                    .transpose()?;
                (Some(null), plant)
            }
            ProblemKind::PartitionPca => {
                let tr = trunc(TruncationSpec::pca_block_exp_sum(t, spec.ell, spec.alpha, spec.rows, spec.cols));
                let null = BlockSampler::new(BaseLaw::Gaussian { mean: vec![0.0; t] }, tr.clone())?;
                let plant = planted_arm
                    .then(|| {
                        BlockSampler::new(
                            BaseLaw::Spiked { width: t, alpha: spec.alpha, support: relative.clone() },
                            tr,
                        )
                    })
                    .transpose()?;
                (Some(null), plant)
            }
            _ => (None, None),
        };
        Ok(pair)
    }

    fn row(&self, i: usize) -> Result<RowData> {
        let mut rng = derived_rng(self.seed, Domain::Row, i as u64);
        let spec = &self.spec;
        let planted = self.planted[i];
        let inst = &self.instance;
        let data = match spec.kind {
            ProblemKind::Biclique
            | ProblemKind::DistributionalBiclique
            | ProblemKind::SemiRandomBiclique
            | ProblemKind::GeneralDp => {
                let mut bits = bernoulli_bits(spec.cols, spec.q, &mut rng);
                if planted {
                    for &j in &inst.columns {
                        bits.set(j, true);
                    }
                }
                RowData::Bits(bits)
            }
            ProblemKind::PatternBiclique => {
                let mut bits = bernoulli_bits(spec.cols, spec.q, &mut rng);
                if let (true, Some(Pattern::Bits(v))) = (planted, &inst.pattern) {
                    for (&j, &b) in inst.columns.iter().zip(v) {
                        bits.set(j, b);
                    }
                }
                RowData::Bits(bits)
            }
            ProblemKind::SparseMean => {
                let mut x = normal_vec(spec.cols, &mut rng);
                if planted {
                    for &j in &inst.columns {
                        x[j] += spec.alpha;
                    }
                }
                RowData::Real(x)
            }
            ProblemKind::SparsePca | ProblemKind::BlockSparsePca => {
                let mut x = normal_vec(spec.cols, &mut rng);
                if planted {
                    add_spike(&mut x, spec.alpha, &inst.columns, &mut rng);
                }
                RowData::Real(x)
            }
            ProblemKind::PartitionBiclique => {
                let mut bits = BitRow::zeros(spec.cols);
                self.fill_blocks(planted, &mut rng, |offset, block| {
                    let block = block.as_bits().expect("boolean block");
                    for j in block.ones() {
                        bits.set(offset + j, true);
                    }
                })?;
                let active = spec.active_cols();
                let filler = bernoulli_bits(spec.cols - active, spec.q, &mut rng);
                for j in filler.ones() {
                    bits.set(active + j, true);
                }
                RowData::Bits(bits)
            }
            ProblemKind::PartitionSparseMean | ProblemKind::PartitionPca => {
                let mut x = vec![0.0; spec.cols];
                self.fill_blocks(planted, &mut rng, |offset, block| {
                    let block = block.as_real().expect("real block");
                    x[offset..offset + block.len()].copy_from_slice(block);
                })?;
                let active = spec.active_cols();
                let filler = normal_vec(spec.cols - active, &mut rng);
                x[active..].copy_from_slice(&filler);
                RowData::Real(x)
            }
        };
        Ok(data)
    }

    fn fill_blocks(&self, planted: bool, rng: &mut StreamRng, mut put: impl FnMut(usize, &RowData)) -> Result<()> {
        let t = self.spec.block;
        let null = self.null_block.as_ref().expect("partitioned kinds carry a null sampler");
        for r in 0..self.spec.num_blocks() {
            let sampler = match (&self.planted_block, self.instance.block) {
                (Some(p), Some(b)) if planted && b == r => p,
                _ => null,
            };
            let block = sampler.draw(rng)?;
            put(r * t, &block);
        }
        Ok(())
    }
}
