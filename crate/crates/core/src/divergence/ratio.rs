//! Closed-form likelihood ratios between planted mixtures and their null laws.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::special::{ln_binom_pmf, ln_choose, log_sum_exp};
use crate::distributions::{TruncationSpec, TypicalVariant};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatioFamily {
    Biclique,
    GaussianMean,
    Pca,
}

/// Maximum of the planted-to-null ratio under one reading of the truncated null law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRatio {
    pub variant: TypicalVariant,
    pub max_ratio: f64,
    pub ln_max_ratio: f64,
    pub argmax_weight: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRatioReport {
    pub family: RatioFamily,
    pub max_ratio: f64,
    pub argmax: String,
    pub parameters: BTreeMap<String, f64>,
    pub variants: Vec<VariantRatio>,
}

impl DensityRatioReport {
    pub fn variant(&self, variant: TypicalVariant) -> Option<&VariantRatio> {
        self.variants.iter().find(|v| v.variant == variant)
    }
}

struct WindowSums {
    lo: usize,
    hi: usize,
    /// `ln |T|` and `ln |T_S|`.
    ln_count: f64,
    ln_count_planted: f64,
    /// `ln P(Bin(t, q) in W)` and `ln P(k + Bin(t - k, q) in W)`.
    ln_z0: f64,
    ln_z1: f64,
}

fn window_sums(t: usize, k: usize, q: f64, lo: usize, hi: usize) -> WindowSums {
    let (tu, ku) = (t as u64, k as u64);
    let planted_lo = lo.max(k);
    let ws: Vec<u64> = (lo as u64..=hi as u64).collect();
    let ws_planted: Vec<u64> = (planted_lo as u64..=hi as u64).collect();
    let ln = |f: &dyn Fn(u64) -> f64, w: &[u64]| log_sum_exp(&w.iter().map(|&x| f(x)).collect::<Vec<_>>());
    WindowSums {
        lo,
        hi,
        ln_count: ln(&|w| ln_choose(tu, w), &ws),
        ln_count_planted: ln(&|w| ln_choose(tu - ku, w - ku), &ws_planted),
        ln_z0: ln(&|w| ln_binom_pmf(tu, w, q), &ws),
        ln_z1: ln(&|w| ln_binom_pmf(tu - ku, w - ku, q), &ws_planted),
    }
}

/// `ln(mu_1(x) / mu_0(x))` for a string of weight `w` inside the window.
///
/// Returns `-inf` when `w < k`, where no planted set fits inside `x`.
fn ln_ratio_at(t: usize, k: usize, q: f64, w: usize, sums: &WindowSums, variant: TypicalVariant) -> f64 {
    if w < k {
        return f64::NEG_INFINITY;
    }
    let (tu, ku, wu) = (t as u64, k as u64, w as u64);
    let comb = ln_choose(wu, ku) - ln_choose(tu, ku);
    match variant {
        TypicalVariant::Uniform => comb + sums.ln_count - sums.ln_count_planted,
        TypicalVariant::Conditional => comb - k as f64 * q.ln() + sums.ln_z0 - sums.ln_z1,
    }
}

/// Planted-to-null ratio for one weight class, under the given reading of the null law.
pub fn biclique_ratio_at_weight(
    trunc: &TruncationSpec,
    k: usize,
    weight: usize,
    variant: TypicalVariant,
) -> Result<f64> {
    let (lo, hi) = checked_window(trunc, k)?;
    if weight < lo || weight > hi {
        return Err(Error::invalid("weight", "outside the truncation window"));
    }
    let sums = window_sums(trunc.width, k, trunc.q, lo, hi);
    Ok(ln_ratio_at(trunc.width, k, trunc.q, weight, &sums, variant).exp())
}

fn checked_window(trunc: &TruncationSpec, k: usize) -> Result<(usize, usize)> {
    trunc.validate()?;
    let (lo, hi) = trunc.weight_range().ok_or(Error::EmptyTruncationWindow)?;
    if k > hi {
        return Err(Error::invalid("k", "exceeds the upper end of the truncation window"));
    }
    Ok((lo, hi))
}

/// Exact maximum of `mu_1 / mu_0` over a typical-weight truncation set.
///
/// Both laws depend on `x` only through `|x|`, so the maximum is taken over weight
/// classes. The reported `max_ratio` is the larger of the two variants.
pub fn biclique_ratio_max_for(trunc: &TruncationSpec, k: usize) -> Result<DensityRatioReport> {
    let (lo, hi) = checked_window(trunc, k)?;
    let sums = window_sums(trunc.width, k, trunc.q, lo, hi);
    let mut variants = Vec::new();
    for variant in [TypicalVariant::Conditional, TypicalVariant::Uniform] {
        let (best_w, best) = (sums.lo..=sums.hi)
            .map(|w| (w, ln_ratio_at(trunc.width, k, trunc.q, w, &sums, variant)))
            .fold((sums.lo, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        variants.push(VariantRatio { variant, max_ratio: best.exp(), ln_max_ratio: best, argmax_weight: best_w });
    }
    let top = variants.iter().max_by(|a, b| a.ln_max_ratio.total_cmp(&b.ln_max_ratio)).expect("two variants");
    let parameters = BTreeMap::from([
        ("t".to_string(), trunc.width as f64),
        ("k".to_string(), k as f64),
        ("q".to_string(), trunc.q),
        ("C".to_string(), trunc.c),
        ("window_lo".to_string(), lo as f64),
        ("window_hi".to_string(), hi as f64),
    ]);
    Ok(DensityRatioReport {
        family: RatioFamily::Biclique,
        max_ratio: top.max_ratio,
        argmax: format!("|x| = {} ({:?} variant)", top.argmax_weight, top.variant),
        parameters,
        variants,
    })
}

/// [`biclique_ratio_max_for`] with the window `tq +- C sqrt(tq log2(nm))`.
pub fn biclique_ratio_max(t: usize, k: usize, q: f64, c: f64, rows: usize, cols: usize) -> Result<DensityRatioReport> {
    biclique_ratio_max_for(&TruncationSpec::typical_weight(t, q, c, rows, cols), k)
}

fn check_mixture(x: &[f64], t: usize, ell: usize) -> Result<()> {
    if ell == 0 || ell > t {
        return Err(Error::invalid("ell", "need 1 <= ell <= t"));
    }
    if x.len() != t {
        return Err(Error::DimensionMismatch { expected: t, got: x.len() });
    }
    Ok(())
}

/// `ln E_v[f_v(x) / f_0(x)]` for the sparse-mean mixture with inclusion rate `ell / t`.
pub fn gaussian_mixture_ln_ratio(x: &[f64], t: usize, ell: usize, alpha: f64) -> Result<f64> {
    check_mixture(x, t, ell)?;
    let rate = ell as f64 / t as f64;
    Ok(x.iter().map(|xj| (rate * (alpha * xj - alpha * alpha / 2.0).exp_m1()).ln_1p()).sum())
}

pub fn gaussian_mixture_ratio(x: &[f64], t: usize, ell: usize, alpha: f64) -> Result<f64> {
    gaussian_mixture_ln_ratio(x, t, ell, alpha).map(f64::exp)
}

fn check_pca(x: &[f64], block: usize, alpha: f64, ell: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", "must lie in (0, 1)"));
    }
    if ell == 0 || (block + 1) * ell > x.len() {
        return Err(Error::invalid("block", "block [block*ell, (block+1)*ell) must fit inside x"));
    }
    Ok(())
}

fn block_sum(x: &[f64], block: usize, ell: usize) -> f64 {
    x[block * ell..(block + 1) * ell].iter().sum()
}

/// `ln f_S(x)` for `N(0, I + alpha v v^T)`, `v = 1_S / sqrt(ell)`, `S` the given contiguous block.
pub fn pca_ln_density(x: &[f64], block: usize, alpha: f64, ell: usize) -> Result<f64> {
    check_pca(x, block, alpha, ell)?;
    let t = x.len() as f64;
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let s = block_sum(x, block, ell);
    let ln_f0 = -0.5 * t * (2.0 * std::f64::consts::PI).ln() - 0.5 * sq;
    Ok(ln_f0 - 0.5 * alpha.ln_1p() + alpha / (2.0 * (alpha + 1.0)) * s * s / ell as f64)
}

pub fn pca_density(x: &[f64], block: usize, alpha: f64, ell: usize) -> Result<f64> {
    pca_ln_density(x, block, alpha, ell).map(f64::exp)
}

/// The explicit covariance `I + alpha v v^T`.
pub fn pca_covariance(t: usize, block: usize, alpha: f64, ell: usize) -> DMatrix<f64> {
    let mut sigma = DMatrix::identity(t, t);
    let w = alpha / ell as f64;
    for i in block * ell..(block + 1) * ell {
        for j in block * ell..(block + 1) * ell {
            sigma[(i, j)] += w;
        }
    }
    sigma
}

/// `det(I + alpha v v^T)` by LU factorisation.
pub fn sigma_det(t: usize, block: usize, alpha: f64, ell: usize) -> f64 {
    pca_covariance(t, block, alpha, ell).lu().determinant()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcaDensityCheck {
    pub closed_ln: f64,
    pub explicit_ln: f64,
    pub relative_diff: f64,
}

/// Evaluates the density both in closed form and with a dense Cholesky solve.
pub fn pca_density_checked(x: &[f64], block: usize, alpha: f64, ell: usize) -> Result<PcaDensityCheck> {
    let closed_ln = pca_ln_density(x, block, alpha, ell)?;
    let t = x.len();
    let chol = pca_covariance(t, block, alpha, ell)
        .cholesky()
        .ok_or_else(|| Error::NotApplicable("covariance is not positive definite".into()))?;
    let xv = DVector::from_column_slice(x);
    let quad = xv.dot(&chol.solve(&xv));
    let ln_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let explicit_ln = -0.5 * t as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * ln_det - 0.5 * quad;
    let (a, b) = (closed_ln.exp(), explicit_ln.exp());
    let relative_diff = if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
    Ok(PcaDensityCheck { closed_ln, explicit_ln, relative_diff })
}

/// `ln E_S[f_S(x) / f_0(x)]` with `S` uniform over the `t / ell` contiguous blocks.
pub fn pca_mixture_ln_ratio(x: &[f64], t: usize, ell: usize, alpha: f64) -> Result<f64> {
    if ell == 0 || !t.is_multiple_of(ell) {
        return Err(Error::invalid("ell", "must divide t"));
    }
    check_mixture(x, t, ell)?;
    let coef = alpha / (2.0 * (alpha + 1.0)) / ell as f64;
    let terms: Vec<f64> = x
        .chunks(ell)
        .map(|b| {
            let s: f64 = b.iter().sum();
            coef * s * s
        })
        .collect();
    let blocks = (t / ell) as f64;
    Ok(-0.5 * alpha.ln_1p() + log_sum_exp(&terms) - blocks.ln())
}

pub fn pca_mixture_ratio(x: &[f64], t: usize, ell: usize, alpha: f64) -> Result<f64> {
    pca_mixture_ln_ratio(x, t, ell, alpha).map(f64::exp)
}
