//! KL divergence between `Binomial(n, 1/2)` and the discretized Gaussian, and the central/tail split.

use libm::erfc;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pmf::{discretized_gaussian_ln_mass, ln_unit_integral};
use super::special::{bd0, ln_binom_pmf, log_sum_exp, stirlerr, NeumaierSum};
use crate::error::{Error, Result};

/// `phi(d) = d e^d - e^d + 1`, the per-point KL integrand divided by `Q`, with `d = ln(P/Q)`.
fn phi_small(d: f64) -> f64 {
    // sum over m >= 2 of d^m (m - 1) / m!
    let mut term = d; // d^m / m! at m = 1
    let mut total = 0.0;
    for m in 2..40 {
        term *= d / m as f64;
        let add = term * (m - 1) as f64;
        total += add;
        if add.abs() < 1e-18 * total.abs() {
            break;
        }
    }
    total
}

/// `n * sum over j >= 2 of u^(2j) / (2j (2j - 1))`: the part of the binomial
/// deviance beyond its quadratic term.
fn deviance_excess(n: f64, c: f64) -> f64 {
    let u = 2.0 * c / n;
    if u.abs() < 0.5 {
        let u2 = u * u;
        let mut pow = u2;
        let mut total = 0.0;
        for j in 2..200 {
            pow *= u2;
            let jj = (2 * j) as f64;
            let add = pow / (jj * (jj - 1.0));
            total += add;
            if add < 1e-18 * total {
                break;
            }
        }
        n * total
    } else {
        let x = n / 2.0 + c;
        bd0(x, n / 2.0) + bd0(n - x, n / 2.0) - 2.0 * c * c / n
    }
}

/// `ln P(i) - ln Q(i)` for interior `i`, assembled from terms that are each small near the centre.
fn log_ratio(n: u64, i: u64) -> f64 {
    let nf = n as f64;
    if i == 0 || i == n {
        return -nf * std::f64::consts::LN_2 - discretized_gaussian_ln_mass(n, i as i64);
    }
    let c = i as f64 - nf / 2.0;
    let u = 2.0 * c / nf;
    let s = stirlerr(nf) - stirlerr(i as f64) - stirlerr((n - i) as f64);
    s - deviance_excess(nf, c) - 0.5 * (-u * u).ln_1p() - ln_unit_integral(nf, c)
}

/// `KL(Binomial(n, 1/2) || Q)` in bits, with `Q` the discretized `N(n/2, n/4)` on all integers.
///
/// Evaluated as `sum_i Q(i) phi(P(i)/Q(i)) + Q(outside [0, n])`, which equals
/// the KL sum but whose terms are second order in `P - Q`.
pub fn kl_binomial_gaussian(n: u64) -> Result<f64> {
    if n < 4 {
        return Err(Error::invalid("n", "the KL scan needs n >= 4"));
    }
    let nf = n as f64;
    let mut acc = NeumaierSum::default();
    for i in 0..=n {
        let ln_q = discretized_gaussian_ln_mass(n, i as i64);
        let d = log_ratio(n, i);
        let term = if d.abs() < 0.1 {
            ln_q.exp() * phi_small(d)
        } else {
            let ln_p = ln_binom_pmf(n, i, 0.5);
            let (p, q) = (ln_p.exp(), ln_q.exp());
            p * d - (p - q)
        };
        acc.add(term);
    }
    acc.add(erfc((nf + 1.0) / (2.0 * nf).sqrt()));
    Ok(acc.value() / std::f64::consts::LN_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlScanRow {
    pub n: u64,
    pub kl_bits: f64,
    /// `KL * n / log2(n)^2`.
    pub normalized: f64,
}

/// KL for each `n`, sharded across threads; rows come back in input order.
pub fn kl_binomial_gaussian_scan(n_values: &[u64]) -> Result<Vec<KlScanRow>> {
    n_values
        .par_iter()
        .map(|&n| {
            let kl = kl_binomial_gaussian(n)?;
            let l = (n as f64).log2();
            Ok(KlScanRow { n, kl_bits: kl, normalized: kl * n as f64 / (l * l) })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSplit {
    pub n: u64,
    pub multiplier: f64,
    pub central: f64,
    pub tail: f64,
    /// `log2` of the tail mass; finite even when `tail` underflows.
    pub tail_log2: f64,
}

fn central_bounds(n: u64, multiplier: f64) -> (f64, f64) {
    let nf = n as f64;
    let half_width = multiplier * nf.log2().sqrt() * nf.sqrt() / 2.0;
    (nf / 2.0 - half_width, nf / 2.0 + half_width)
}

fn is_central(i: u64, bounds: (f64, f64)) -> bool {
    let x = i as f64;
    bounds.0 <= x && x <= bounds.1
}

/// Binomial mass inside and outside `{i : |z| <= multiplier * sqrt(log2 n)}`.
pub fn central_tail_split(n: u64, multiplier: f64) -> Result<TailSplit> {
    if n < 16 {
        return Err(Error::invalid("n", "needs n >= 16"));
    }
    let bounds = central_bounds(n, multiplier);
    let tail_logs: Vec<f64> = (0..=n).filter(|&i| !is_central(i, bounds)).map(|i| ln_binom_pmf(n, i, 0.5)).collect();
    let ln_tail = log_sum_exp(&tail_logs);
    let tail = ln_tail.exp();
    Ok(TailSplit { n, multiplier, central: 1.0 - tail, tail, tail_log2: ln_tail / std::f64::consts::LN_2 })
}

/// The same split with exact rational masses.
pub fn central_tail_split_exact(n: u64, multiplier: f64) -> Result<(BigRational, BigRational)> {
    if n < 16 {
        return Err(Error::invalid("n", "needs n >= 16"));
    }
    let bounds = central_bounds(n, multiplier);
    let mut c = BigInt::one();
    let mut central = BigInt::zero();
    let mut tail = BigInt::zero();
    for i in 0..=n {
        if is_central(i, bounds) {
            central += &c;
        } else {
            tail += &c;
        }
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    let denom = BigInt::one() << n as usize;
    Ok((BigRational::new(central, denom.clone()), BigRational::new(tail, denom)))
}
