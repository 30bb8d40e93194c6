use std::ops::RangeInclusive;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::special::{gauss_legendre, ln_binom_pmf, normal_cdf, normal_interval, normal_sf};
use crate::error::{Error, Result};

/// Tolerance on total mass for float pmfs.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A pmf on the integers, stored on a contiguous window plus the mass that lies outside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    start: i64,
    mass: Vec<f64>,
    outside: f64,
}

impl Pmf {
    /// A pmf whose entire mass lives on `start..start + mass.len()`.
    pub fn new(start: i64, mass: Vec<f64>) -> Result<Self> {
        Self::with_outside(start, mass, 0.0)
    }

    /// A pmf with `outside` mass located somewhere off the stored window.
    pub fn with_outside(start: i64, mass: Vec<f64>, outside: f64) -> Result<Self> {
        if mass.iter().chain(std::iter::once(&outside)).any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::invalid("mass", "masses must be finite and non-negative"));
        }
        let total: f64 = mass.iter().sum::<f64>() + outside;
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::invalid("mass", format!("total mass {total} differs from 1")));
        }
        Ok(Pmf { start, mass, outside })
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last index of the stored window.
    pub fn end(&self) -> i64 {
        self.start + self.mass.len() as i64 - 1
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn outside(&self) -> f64 {
        self.outside
    }

    pub fn get(&self, i: i64) -> f64 {
        if i < self.start || i > self.end() {
            0.0
        } else {
            self.mass[(i - self.start) as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum::<f64>() + self.outside
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.mass.iter().enumerate().map(move |(j, &m)| (self.start + j as i64, m))
    }
}

/// An exact pmf with rational masses summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPmf {
    start: i64,
    mass: Vec<BigRational>,
}

impl RationalPmf {
    pub fn new(start: i64, mass: Vec<BigRational>) -> Result<Self> {
        if mass.iter().any(|m| m < &BigRational::zero()) {
            return Err(Error::invalid("mass", "masses must be non-negative"));
        }
        let total = mass.iter().fold(BigRational::zero(), |a, b| a + b);
        if !total.is_one() {
            return Err(Error::invalid("mass", format!("total mass {total} is not exactly 1")));
        }
        Ok(RationalPmf { start, mass })
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn masses(&self) -> &[BigRational] {
        &self.mass
    }

    pub fn get(&self, i: i64) -> BigRational {
        let j = i - self.start;
        if j < 0 || j as usize >= self.mass.len() {
            BigRational::zero()
        } else {
            self.mass[j as usize].clone()
        }
    }

    pub fn to_pmf(&self) -> Pmf {
        let mass = self.mass.iter().map(|m| m.to_f64().unwrap_or(0.0)).collect();
        Pmf { start: self.start, mass, outside: 0.0 }
    }
}

/// Largest trial count handled by the exact rational constructor.
pub const RATIONAL_LIMIT: u64 = 64;

/// `Binomial(n, 1/2)` with exact rational masses (`n <= 64`).
pub fn binomial_pmf_rational(n: u64) -> Result<RationalPmf> {
    if n == 0 || n > RATIONAL_LIMIT {
        return Err(Error::invalid("n", format!("exact mode needs 1 <= n <= {RATIONAL_LIMIT}")));
    }
    let denom = BigInt::one() << n as usize;
    let mut c = BigInt::one();
    let mut mass = Vec::with_capacity(n as usize + 1);
    for i in 0..=n {
        mass.push(BigRational::new(c.clone(), denom.clone()));
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    RationalPmf::new(0, mass)
}

/// `Binomial(n, 1/2)` as floats: correctly rounded for `n <= 64`, saddle-point log-space above.
pub fn binomial_pmf(n: u64) -> Result<Pmf> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let mass: Vec<f64> = if n <= RATIONAL_LIMIT {
        let scale = 0.5f64.powi(n as i32);
        let mut c: u128 = 1;
        (0..=n)
            .map(|i| {
                let v = c as f64 * scale;
                c = c * (n - i) as u128 / (i + 1) as u128;
                v
            })
            .collect()
    } else {
        (0..=n).map(|i| ln_binom_pmf(n, i.min(n - i), 0.5).exp()).collect()
    };
    Ok(Pmf { start: 0, mass, outside: 0.0 })
}

/// `Q(i) = P(i - 1/2 < N(n/2, n/4) <= i + 1/2)` for `i` in `range`, as CDF differences.
///
/// The mass of the Gaussian outside the window is recorded as [`Pmf::outside`],
/// computed from the two tails so the total is one to rounding.
pub fn discretized_gaussian_pmf(n: u64, range: RangeInclusive<i64>) -> Result<Pmf> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let (lo, hi) = (*range.start(), *range.end());
    if lo > hi {
        return Err(Error::invalid("range", "empty range"));
    }
    let mu = n as f64 / 2.0;
    let sigma = (n as f64).sqrt() / 2.0;
    let z = |x: f64| (x - mu) / sigma;
    let mass: Vec<f64> = (lo..=hi).map(|i| normal_interval(z(i as f64 - 0.5), z(i as f64 + 0.5))).collect();
    let outside = normal_cdf(z(lo as f64 - 0.5)) + normal_sf(z(hi as f64 + 0.5));
    Ok(Pmf { start: lo, mass, outside })
}

fn quadrature_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(24))
}

/// `ln Q(i)` from the factored form `f_n(i) * I(i)`.
///
/// With `c = i - n/2`, `Q(i) = f_n(i) * integral over y in [-1/2, 1/2] of
/// exp(-(4yc + 2y^2)/n)`. The integral is close to one and is evaluated as
/// `log1p` of a quadrature of `expm1`, which keeps full relative accuracy
/// where CDF differences would cancel.
pub fn discretized_gaussian_ln_mass(n: u64, i: i64) -> f64 {
    let nf = n as f64;
    let c = i as f64 - nf / 2.0;
    let ln_f = std::f64::consts::LN_2 - 0.5 * (2.0 * std::f64::consts::PI * nf).ln() - 2.0 * c * c / nf;
    ln_f + ln_unit_integral(nf, c)
}

/// `ln` of the integral over `[-1/2, 1/2]` of `exp(-(4yc + 2y^2)/n)`.
pub(crate) fn ln_unit_integral(n: f64, c: f64) -> f64 {
    let j: f64 = quadrature_rule()
        .iter()
        .map(|&(x, w)| {
            let y = 0.5 * x;
            0.5 * w * (-(4.0 * y * c + 2.0 * y * y) / n).exp_m1()
        })
        .sum();
    j.ln_1p()
}
