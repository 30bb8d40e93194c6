use serde::{Deserialize, Serialize};

use super::pmf::{Pmf, RationalPmf};
use crate::error::{Error, Result};

/// KL divergence, total variation and squared Hellinger distance between two pmfs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergences {
    /// `KL(P || Q)` in bits.
    pub kl: f64,
    pub tv: f64,
    /// `h^2 = 1 - sum sqrt(p q)`, evaluated as `sum (sqrt p - sqrt q)^2 / 2`.
    pub hellinger_sq: f64,
}

impl Divergences {
    pub fn hellinger(&self) -> f64 {
        self.hellinger_sq.sqrt()
    }

    pub fn kl_nats(&self) -> f64 {
        self.kl * std::f64::consts::LN_2
    }
}

/// Divergences between `p` and `q` on the union of their windows.
///
/// Mass recorded outside a pmf's window is treated as lying where the other
/// pmf has none: it adds to TV and to the Hellinger distance. If `p` has such
/// mass, KL is undefined and `SupportMismatch` is returned.
pub fn divergences(p: &Pmf, q: &Pmf) -> Result<Divergences> {
    let lo = p.start().min(q.start());
    let hi = p.end().max(q.end());
    let mut kl = 0.0;
    let mut tv = 0.0;
    let mut h = 0.0;
    for i in lo..=hi {
        let (a, b) = (p.get(i), q.get(i));
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::SupportMismatch { index: i, mass: a });
            }
            kl += a * (a / b).log2();
        }
        tv += (a - b).abs();
        let d = a.sqrt() - b.sqrt();
        h += d * d;
    }
    if p.outside() > 0.0 {
        return Err(Error::SupportMismatch { index: i64::MAX, mass: p.outside() });
    }
    tv += p.outside() + q.outside();
    h += p.outside() + q.outside();
    Ok(Divergences { kl, tv: tv / 2.0, hellinger_sq: h / 2.0 })
}

/// Divergences of exact pmfs; TV is computed exactly before conversion.
pub fn divergences_exact(p: &RationalPmf, q: &RationalPmf) -> Result<Divergences> {
    use num_traits::{Signed, ToPrimitive, Zero};
    let lo = p.start().min(q.start());
    let hi = (p.start() + p.masses().len() as i64).max(q.start() + q.masses().len() as i64) - 1;
    let mut tv = num_rational::BigRational::zero();
    let mut kl = 0.0;
    let mut h = 0.0;
    for i in lo..=hi {
        let (a, b) = (p.get(i), q.get(i));
        tv += (&a - &b).abs();
        if a == b {
            continue;
        }
        let (af, bf) = (a.to_f64().unwrap_or(0.0), b.to_f64().unwrap_or(0.0));
        if !a.is_zero() {
            if b.is_zero() {
                return Err(Error::SupportMismatch { index: i, mass: af });
            }
            kl += af * (&a / &b).to_f64().unwrap_or(f64::INFINITY).log2();
        }
        let d = af.sqrt() - bf.sqrt();
        h += d * d;
    }
    Ok(Divergences { kl, tv: tv.to_f64().unwrap_or(f64::NAN) / 2.0, hellinger_sq: h / 2.0 })
}
