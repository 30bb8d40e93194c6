use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::special::{ln_binom_pmf, log_sum_exp};
use crate::distributions::{BaseLaw, BlockSampler, TruncationKind, TruncationSpec};
use crate::error::{Error, Result};
use crate::rng::{derived_rng, Domain};
use crate::stats::{wilson_interval, Interval};

pub const MIN_TAIL_TRIALS: u64 = 1000;
pub const TAIL_CONFIDENCE: f64 = 0.99;

/// Estimate of `Pr[x not in T]` under a base law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub estimate: f64,
    pub ci: Interval,
    /// Zero when the value was computed exactly.
    pub trials: u64,
    pub outside: u64,
    pub exact: bool,
}

fn exact_typical_tail(trunc: &TruncationSpec, width: usize, q: f64, forced: usize) -> f64 {
    let free = (width - forced) as u64;
    let logs: Vec<f64> =
        (0..=free).filter(|j| !trunc.contains_weight(forced + *j as usize)).map(|j| ln_binom_pmf(free, j, q)).collect();
    if logs.is_empty() {
        0.0
    } else {
        log_sum_exp(&logs).exp().min(1.0)
    }
}

/// Probability that a draw from `base` falls outside `trunc`.
///
/// Typical-weight sets are evaluated exactly from binomial masses; the other sets
/// are estimated from `trials` independent draws with a 99% Wilson interval.
pub fn trunc_tail_prob(trunc: &TruncationSpec, base: &BaseLaw, trials: u64, seed: u64) -> Result<TailEstimate> {
    trunc.validate()?;
    if trunc.width != base.width() {
        return Err(Error::DimensionMismatch { expected: trunc.width, got: base.width() });
    }
    if let (TruncationKind::TypicalWeight, BaseLaw::Bernoulli { width, q, forced }) = (trunc.kind, base) {
        let p = exact_typical_tail(trunc, *width, *q, forced.len());
        return Ok(TailEstimate { estimate: p, ci: Interval { low: p, high: p }, trials: 0, outside: 0, exact: true });
    }
    if trials < MIN_TAIL_TRIALS {
        return Err(Error::invalid("trials", format!("need at least {MIN_TAIL_TRIALS}")));
    }
    let sampler = BlockSampler::new(base.clone(), None)?;
    // The base sampler is untruncated; membership is tested separately.
    let outside = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut rng = derived_rng(seed, Domain::Trial, i);
            let x = sampler.draw(&mut rng)?;
            Ok(u64::from(!trunc.contains(&x)?))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(TailEstimate {
        estimate: outside as f64 / trials as f64,
        ci: wilson_interval(outside, trials, TAIL_CONFIDENCE)?,
        trials,
        outside,
        exact: false,
    })
}
