//! Truncation sets and samplers for the restricted laws.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use super::{RowData, TypicalVariant};
use crate::bits::BitRow;
use crate::error::{Error, Result};
use crate::rng::{rng_from, StreamRng};

/// Attempts allowed per draw before rejection sampling gives up.
pub const REJECTION_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TruncationKind {
    TypicalWeight,
    GaussianExpSum,
    PcaBlockExpSum,
}

/// One of the three truncation sets together with the constants it is evaluated with.
///
/// `rows` and `cols` give the stream context `(n, d)` that enters the log
/// factors and the `d^{eps/2}` slack; `width` is the block width `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub kind: TruncationKind,
    pub width: usize,
    pub rows: usize,
    pub cols: usize,
    pub q: f64,
    pub alpha: f64,
    pub ell: usize,
    pub c: f64,
    pub c1: f64,
    pub epsilon: f64,
    pub variant: TypicalVariant,
    /// Explicit half-width for the typical-weight window, replacing `C * sqrt(tq log(nm))`.
    pub half_width: Option<f64>,
}

impl TruncationSpec {
    fn base(kind: TruncationKind, width: usize, rows: usize, cols: usize) -> Self {
        TruncationSpec {
            kind,
            width,
            rows,
            cols,
            q: 0.5,
            alpha: 0.5,
            ell: 1,
            c: 20.0,
            c1: 20.0,
            epsilon: 0.01,
            variant: TypicalVariant::Conditional,
            half_width: None,
        }
    }

    pub fn typical_weight(width: usize, q: f64, c: f64, rows: usize, cols: usize) -> Self {
        TruncationSpec { q, c, ..Self::base(TruncationKind::TypicalWeight, width, rows, cols) }
    }

    /// Typical-weight window `[tq - h, tq + h]` with the half-width given directly.
    pub fn typical_weight_with_half_width(width: usize, q: f64, half_width: f64) -> Self {
        TruncationSpec { q, half_width: Some(half_width), ..Self::base(TruncationKind::TypicalWeight, width, 1, width) }
    }

    pub fn gaussian_exp_sum(width: usize, alpha: f64, rows: usize, cols: usize) -> Self {
        TruncationSpec { alpha, ..Self::base(TruncationKind::GaussianExpSum, width, rows, cols) }
    }

    pub fn pca_block_exp_sum(width: usize, ell: usize, alpha: f64, rows: usize, cols: usize) -> Self {
        TruncationSpec { alpha, ell, ..Self::base(TruncationKind::PcaBlockExpSum, width, rows, cols) }
    }

    pub fn with_variant(mut self, variant: TypicalVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_constants(mut self, c: f64, c1: f64, epsilon: f64) -> Self {
        self.c = c;
        self.c1 = c1;
        self.epsilon = epsilon;
        self
    }

    fn log_nm(&self) -> f64 {
        (self.rows as f64 * self.cols as f64).log2()
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::invalid("width", "truncation width must be positive"));
        }
        match self.kind {
            TruncationKind::TypicalWeight if !(self.q > 0.0 && self.q <= 1.0) => {
                Err(Error::invalid("q", "must lie in (0, 1]"))
            }
            TruncationKind::PcaBlockExpSum if self.ell == 0 || !self.width.is_multiple_of(self.ell) => {
                Err(Error::invalid("ell", "must divide the truncation width"))
            }
            TruncationKind::PcaBlockExpSum if !(self.alpha > 0.0 && self.alpha < 1.0) => {
                Err(Error::invalid("alpha", "the PCA set needs 0 < alpha < 1"))
            }
            _ => Ok(()),
        }
    }

    /// The real window `[tq - h, tq + h]` of the typical-weight set.
    pub fn window(&self) -> (f64, f64) {
        let tq = self.width as f64 * self.q;
        let h = self.half_width.unwrap_or_else(|| self.c * (tq * self.log_nm()).sqrt());
        (tq - h, tq + h)
    }

    /// Integer weights inside the window, clipped to `[0, t]`; `None` if there are none.
    pub fn weight_range(&self) -> Option<(usize, usize)> {
        let (lo, hi) = self.window();
        let lo = lo.ceil().max(0.0);
        let hi = hi.floor().min(self.width as f64);
        if lo > hi {
            None
        } else {
            Some((lo as usize, hi as usize))
        }
    }

    pub fn contains_weight(&self, weight: usize) -> bool {
        let (lo, hi) = self.window();
        let w = weight as f64;
        lo <= w && w <= hi
    }

    /// Right-hand side of the Gaussian exp-sum inequality.
    pub fn exp_sum_bound(&self) -> f64 {
        let t = self.width as f64;
        let a = self.alpha;
        t * (a * a / 2.0).exp()
            + self.c1
                * a
                * t.sqrt()
                * (self.cols as f64).powf(self.epsilon / 2.0)
                * (200.0 * self.rows as f64 * self.cols as f64).log2()
    }

    /// The slack `delta` of the PCA block set.
    pub fn pca_delta(&self) -> f64 {
        let blocks = (self.width / self.ell) as f64;
        self.c
            * (self.cols as f64).powf(self.epsilon / 2.0)
            * (blocks * (400.0 * self.rows as f64 * self.cols as f64).log2()).sqrt()
    }

    pub fn pca_bound(&self) -> f64 {
        let blocks = (self.width / self.ell) as f64;
        blocks / (1.0 - self.alpha).sqrt() + self.pca_delta()
    }

    /// `sum_j exp(alpha x_j)`.
    pub fn exp_sum(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| (self.alpha * v).exp()).sum()
    }

    /// `sum_R exp(alpha / (2(alpha + 1)) * (x . 1_R)^2 / ell)` over the width/ell blocks.
    pub fn pca_block_sum(&self, x: &[f64]) -> f64 {
        let coef = self.alpha / (2.0 * (self.alpha + 1.0)) / self.ell as f64;
        x.chunks(self.ell)
            .map(|block| {
                let s: f64 = block.iter().sum();
                (coef * s * s).exp()
            })
            .sum()
    }

    pub fn contains(&self, x: &RowData) -> Result<bool> {
        if x.len() != self.width {
            return Err(Error::DimensionMismatch { expected: self.width, got: x.len() });
        }
        match (self.kind, x) {
            (TruncationKind::TypicalWeight, RowData::Bits(bits)) => Ok(self.contains_weight(bits.count_ones())),
            (TruncationKind::GaussianExpSum, RowData::Real(v)) => Ok(self.exp_sum(v) <= self.exp_sum_bound()),
            (TruncationKind::PcaBlockExpSum, RowData::Real(v)) => {
                self.validate()?;
                Ok(self.pca_block_sum(v) <= self.pca_bound())
            }
            (kind, _) => Err(Error::NotApplicable(format!("{kind:?} set does not accept this row type"))),
        }
    }
}

/// Whether `x` lies in the truncation set.
pub fn in_truncation_set(trunc: &TruncationSpec, x: &RowData) -> Result<bool> {
    trunc.contains(x)
}

/// An untruncated block law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BaseLaw {
    /// `Ber(q)^t` with the listed positions forced to one.
    Bernoulli { width: usize, q: f64, forced: Vec<usize> },
    /// `N(mean, I)`.
    Gaussian { mean: Vec<f64> },
    /// `N(0, I + alpha v v^T)` with `v = 1_S / sqrt(|S|)`.
    Spiked { width: usize, alpha: f64, support: Vec<usize> },
}

impl BaseLaw {
    pub fn width(&self) -> usize {
        match self {
            BaseLaw::Bernoulli { width, .. } | BaseLaw::Spiked { width, .. } => *width,
            BaseLaw::Gaussian { mean } => mean.len(),
        }
    }

    fn draw(&self, rng: &mut StreamRng) -> RowData {
        match self {
            BaseLaw::Bernoulli { width, q, forced } => {
                let mut row = bernoulli_bits(*width, *q, rng);
                for &j in forced {
                    row.set(j, true);
                }
                RowData::Bits(row)
            }
            BaseLaw::Gaussian { mean } => {
                RowData::Real(mean.iter().map(|m| m + rng.sample::<f64, _>(StandardNormal)).collect())
            }
            BaseLaw::Spiked { width, alpha, support } => {
                let mut x = normal_vec(*width, rng);
                add_spike(&mut x, *alpha, support, rng);
                RowData::Real(x)
            }
        }
    }
}

pub(crate) fn normal_vec(len: usize, rng: &mut StreamRng) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Adds `sqrt(alpha / |S|) * g * 1_S` for one shared standard normal `g`.
pub(crate) fn add_spike(x: &mut [f64], alpha: f64, support: &[usize], rng: &mut StreamRng) {
    let g: f64 = rng.sample(StandardNormal);
    let scale = (alpha / support.len() as f64).sqrt() * g;
    for &j in support {
        x[j] += scale;
    }
}

pub(crate) fn bernoulli_bits(width: usize, q: f64, rng: &mut StreamRng) -> BitRow {
    if q == 0.5 {
        let words = (0..width.div_ceil(64)).map(|_| rng.gen::<u64>()).collect();
        return BitRow::from_words(width, words);
    }
    let threshold = (q * 2f64.powi(64)) as u64;
    let mut row = BitRow::zeros(width);
    for j in 0..width {
        if rng.gen::<u64>() < threshold {
            row.set(j, true);
        }
    }
    row
}

/// Cumulative weight-class table for exact sampling from the uniform-over-window law.
#[derive(Debug, Clone)]
struct WeightTable {
    weights: Vec<usize>,
    cumulative: Vec<f64>,
}

impl WeightTable {
    /// Weights `w` with `P(w)` proportional to `C(t - f, w - f)`, the count of
    /// window strings with `f` fixed ones.
    fn new(width: usize, forced: usize, range: (usize, usize)) -> Option<Self> {
        let lo = range.0.max(forced);
        let hi = range.1.min(width);
        if lo > hi {
            return None;
        }
        let free = (width - forced) as u64;
        let logs: Vec<f64> = (lo..=hi).map(|w| ln_binomial(free, (w - forced) as u64)).collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut acc = 0.0;
        let cumulative = logs
            .iter()
            .map(|l| {
                acc += (l - top).exp();
                acc
            })
            .collect();
        Some(WeightTable { weights: (lo..=hi).collect(), cumulative })
    }

    fn draw(&self, rng: &mut StreamRng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.gen::<f64>() * total;
        let idx = self.cumulative.partition_point(|c| *c <= u).min(self.weights.len() - 1);
        self.weights[idx]
    }
}

/// A block law, optionally restricted to a truncation set, ready to draw from repeatedly.
#[derive(Debug, Clone)]
pub struct BlockSampler {
    base: BaseLaw,
    trunc: Option<TruncationSpec>,
    table: Option<WeightTable>,
}

impl BlockSampler {
    pub fn new(base: BaseLaw, trunc: Option<TruncationSpec>) -> Result<Self> {
        let mut table = None;
        if let Some(tr) = &trunc {
            tr.validate()?;
            if tr.width != base.width() {
                return Err(Error::DimensionMismatch { expected: tr.width, got: base.width() });
            }
            match (&base, tr.kind) {
                (BaseLaw::Bernoulli { width, forced, .. }, TruncationKind::TypicalWeight) => {
                    let range = tr.weight_range().ok_or(Error::EmptyTruncationWindow)?;
                    if tr.variant == TypicalVariant::Uniform {
                        table =
                            Some(WeightTable::new(*width, forced.len(), range).ok_or(Error::EmptyTruncationWindow)?);
                    }
                }
                (BaseLaw::Gaussian { .. }, TruncationKind::GaussianExpSum) => {}
                (BaseLaw::Spiked { .. } | BaseLaw::Gaussian { .. }, TruncationKind::PcaBlockExpSum) => {}
                (_, kind) => {
                    return Err(Error::NotApplicable(format!("{kind:?} truncation does not match the base law")))
                }
            }
        }
        Ok(BlockSampler { base, trunc, table })
    }

    pub fn base(&self) -> &BaseLaw {
        &self.base
    }

    pub fn draw(&self, rng: &mut StreamRng) -> Result<RowData> {
        let Some(trunc) = &self.trunc else {
            return Ok(self.base.draw(rng));
        };
        if let (Some(table), BaseLaw::Bernoulli { width, forced, .. }) = (&self.table, &self.base) {
            return Ok(RowData::Bits(uniform_with_weight(*width, forced, table.draw(rng), rng)));
        }
        for _ in 0..REJECTION_BUDGET {
            let x = self.base.draw(rng);
            if trunc.contains(&x)? {
                return Ok(x);
            }
        }
        Err(Error::RejectionBudgetExceeded { attempts: REJECTION_BUDGET })
    }
}

/// A uniformly random string with the `forced` positions set and total weight `weight`.
fn uniform_with_weight(width: usize, forced: &[usize], weight: usize, rng: &mut StreamRng) -> BitRow {
    let mut row = BitRow::zeros(width);
    for &j in forced {
        row.set(j, true);
    }
    let free: Vec<usize> = (0..width).filter(|j| !row.get(*j)).collect();
    for idx in sample_indices(rng, free.len(), weight - forced.len()).iter() {
        row.set(free[idx], true);
    }
    row
}

/// Draws once from `base` restricted to `trunc`.
pub fn sample_truncated(base: &BaseLaw, trunc: &TruncationSpec, seed: u64) -> Result<RowData> {
    let mut rng = rng_from(seed);
    BlockSampler::new(base.clone(), Some(trunc.clone()))?.draw(&mut rng)
}
