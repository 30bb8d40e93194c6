use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Local Edgeworth approximation to `Binomial(n, 1/2)`.
///
/// `correction` holds the coefficients `c_0, c_1, ...` of `r(z)`, so that the
/// order-2 value is the order-1 value times `1 + r(z)/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeworthApprox {
    pub n: u64,
    pub order: u8,
    pub correction: Vec<f64>,
}

/// Cumulants `(kappa_2, kappa_3, kappa_4)` of `Ber(p)`.
pub fn bernoulli_cumulants(p: f64) -> (f64, f64, f64) {
    let v = p * (1.0 - p);
    (v, v * (1.0 - 2.0 * p), v * (1.0 - 6.0 * v))
}

/// Coefficients of the probabilists' Hermite polynomial `H_k`.
pub fn hermite(k: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for j in 1..k {
        let mut next = vec![0.0; j + 2];
        for (d, c) in cur.iter().enumerate() {
            next[d + 1] += c;
        }
        for (d, c) in prev.iter().enumerate() {
            next[d] -= j as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn poly_add_scaled(acc: &mut Vec<f64>, p: &[f64], scale: f64) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, c) in acc.iter_mut().zip(p) {
        *a += scale * c;
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `w_2(z)` for a summand with the given cumulants, trailing zero coefficients removed.
///
/// The two index tuples contributing at this order give
/// `(gamma_3 / (3! sigma^3))^2 / 2! * H_6 + gamma_4 / (4! sigma^4) * H_4`.
pub fn second_order_polynomial(kappa2: f64, kappa3: f64, kappa4: f64) -> Vec<f64> {
    let sigma = kappa2.sqrt();
    let a3 = kappa3 / (factorial(3) * sigma.powi(3));
    let a4 = kappa4 / (factorial(4) * sigma.powi(4));
    let mut w2 = Vec::new();
    poly_add_scaled(&mut w2, &hermite(6), a3 * a3 / 2.0);
    poly_add_scaled(&mut w2, &hermite(4), a4);
    while w2.len() > 1 && w2.last() == Some(&0.0) {
        w2.pop();
    }
    w2
}

/// The first-order term `w_1 = gamma_3 / (3! sigma^3) * H_3`.
pub fn first_order_polynomial(kappa2: f64, kappa3: f64) -> Vec<f64> {
    let a3 = kappa3 / (factorial(3) * kappa2.powf(1.5));
    let mut w1: Vec<f64> = hermite(3).iter().map(|c| a3 * c).collect();
    while w1.len() > 1 && w1.last() == Some(&0.0) {
        w1.pop();
    }
    if w1.iter().all(|c| *c == 0.0) {
        w1 = vec![0.0];
    }
    w1
}

fn eval_poly(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
}

impl EdgeworthApprox {
    pub fn new(n: u64, order: u8) -> Result<Self> {
        if !(order == 1 || order == 2) {
            return Err(Error::invalid("order", "must be 1 or 2"));
        }
        if n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        let (k2, k3, k4) = bernoulli_cumulants(0.5);
        let correction = if order == 2 { second_order_polynomial(k2, k3, k4) } else { vec![0.0] };
        Ok(EdgeworthApprox { n, order, correction })
    }

    pub fn z(&self, i: f64) -> f64 {
        let n = self.n as f64;
        2.0 * (i - n / 2.0) / n.sqrt()
    }

    pub fn value(&self, i: f64) -> f64 {
        let n = self.n as f64;
        let z = self.z(i);
        let base = 2.0 / (2.0 * std::f64::consts::PI * n).sqrt() * (-z * z / 2.0).exp();
        if self.order == 1 {
            base
        } else {
            base * (1.0 + eval_poly(&self.correction, z) / n)
        }
    }
}

/// Edgeworth approximation of `P(Binomial(n, 1/2) = i)`.
pub fn edgeworth_binomial_approx(n: u64, i: f64, order: u8) -> Result<f64> {
    Ok(EdgeworthApprox::new(n, order)?.value(i))
}
