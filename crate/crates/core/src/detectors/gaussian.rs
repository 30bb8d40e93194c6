use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::{quantize, real_precision, BitWriter};
use super::{Decision, Detector};
use crate::distributions::Row;
use crate::divergence::special::ln_choose;
use crate::error::{Error, Result};
use crate::rng::{derived_rng, Domain};

fn real_row(row: &Row, cols: usize) -> Result<&[f64]> {
    let x = row.data.as_real().ok_or_else(|| Error::NotApplicable("detector expects real-valued rows".into()))?;
    if x.len() != cols {
        return Err(Error::DimensionMismatch { expected: cols, got: x.len() });
    }
    Ok(x)
}

/// Grand sum of all entries against `n q ell alpha / 2`.
#[derive(Debug, Clone)]
pub struct CoordinateSum {
    pub n: usize,
    pub d: usize,
    pub q: f64,
    pub ell: usize,
    pub alpha: f64,
    rho: u32,
    pass: usize,
    sum: f64,
    quantized: f64,
}

impl CoordinateSum {
    pub fn new(n: usize, d: usize, q: f64, ell: usize, alpha: f64) -> Self {
        CoordinateSum { n, d, q, ell, alpha, rho: real_precision(n, d), pass: 0, sum: 0.0, quantized: 0.0 }
    }

    pub fn threshold(&self) -> f64 {
        self.n as f64 * self.q * self.ell as f64 * self.alpha / 2.0
    }

    pub fn precision(&self) -> u32 {
        self.rho
    }
}

impl Detector for CoordinateSum {
    fn name(&self) -> &'static str {
        "coordinate-sum"
    }

    fn params(&self) -> String {
        format!("alpha={},d={},ell={},n={},q={}", self.alpha, self.d, self.ell, self.n, self.q)
    }

    fn tag(&self) -> u8 {
        6
    }

    fn begin_pass(&mut self, pass: usize) -> Result<()> {
        self.pass = pass;
        Ok(())
    }

    fn observe(&mut self, row: &Row) -> Result<()> {
        let x = real_row(row, self.d)?;
        if self.pass == 0 {
            let s: f64 = x.iter().sum();
            self.sum += s;
            self.quantized = quantize(self.quantized + s, self.rho);
        }
        Ok(())
    }

    fn encode(&self, out: &mut BitWriter) {
        out.push_real(self.quantized, self.rho);
    }

    fn decide(&self) -> Result<Decision> {
        Ok(Decision::above(self.sum, self.threshold()).with_quantized(self.quantized))
    }
}

/// Sum over rows of the squared block sums, against `n d + n alpha ell / 2`.
///
/// Only the first `ell * floor(d / ell)` columns are read; any remainder is filler.
#[derive(Debug, Clone)]
pub struct BlockSquare {
    pub n: usize,
    pub cols: usize,
    pub active: usize,
    pub ell: usize,
    pub alpha: f64,
    rho: u32,
    pass: usize,
    total: f64,
    quantized: f64,
}

impl BlockSquare {
    pub fn new(n: usize, cols: usize, ell: usize, alpha: f64) -> Result<Self> {
        if ell == 0 || ell > cols {
            return Err(Error::invalid("ell", "need 1 <= ell <= d"));
        }
        let active = ell * (cols / ell);
        Ok(BlockSquare {
            n,
            cols,
            active,
            ell,
            alpha,
            rho: real_precision(n, cols),
            pass: 0,
            total: 0.0,
            quantized: 0.0,
        })
    }

    pub fn threshold(&self) -> f64 {
        let n = self.n as f64;
        n * self.active as f64 + n * self.alpha * self.ell as f64 / 2.0
    }
}

impl Detector for BlockSquare {
    fn name(&self) -> &'static str {
        "block-square"
    }

    fn params(&self) -> String {
        format!("alpha={},d={},ell={},n={}", self.alpha, self.cols, self.ell, self.n)
    }

    fn tag(&self) -> u8 {
        7
    }

    fn begin_pass(&mut self, pass: usize) -> Result<()> {
        self.pass = pass;
        Ok(())
    }

    fn observe(&mut self, row: &Row) -> Result<()> {
        let x = real_row(row, self.cols)?;
        if self.pass == 0 {
            let s: f64 = x[..self.active]
                .chunks_exact(self.ell)
                .map(|b| {
                    let t: f64 = b.iter().sum();
                    t * t
                })
                .sum();
            self.total += s;
            self.quantized = quantize(self.quantized + s, self.rho);
        }
        Ok(())
    }

    fn encode(&self, out: &mut BitWriter) {
        out.push_real(self.quantized, self.rho);
    }

    fn decide(&self) -> Result<Decision> {
        Ok(Decision::above(self.total, self.threshold()).with_quantized(self.quantized))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanMode {
    /// Exact when the search space is within the cap, alternating maximization otherwise.
    Auto,
    Exact,
    Heuristic,
}

impl std::str::FromStr for ScanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(ScanMode::Auto),
            "exact" => Ok(ScanMode::Exact),
            "heuristic" | "alternating" => Ok(ScanMode::Heuristic),
            _ => Err(Error::invalid("mode", format!("unknown scan mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetScanConfig {
    pub n: usize,
    pub d: usize,
    pub ell: usize,
    pub alpha: f64,
    pub q: f64,
    pub delta: f64,
    pub rcols: usize,
    pub s1: usize,
    pub s2: usize,
    pub mode: ScanMode,
    pub restarts: usize,
    pub cap: f64,
    pub tau: Option<f64>,
    pub seed: u64,
}

impl SubsetScanConfig {
    /// `(8 + 4 ln(4 / delta)) / alpha^2`.
    pub fn c_delta_alpha(delta: f64, alpha: f64) -> f64 {
        (8.0 + 4.0 * (4.0 / delta).ln()) / (alpha * alpha)
    }

    /// Defaults from the claim: `|R| = 2C (d/ell) ln(nd/delta) ln(nd)` and `s1 = s2 = C ln(nd)`,
    /// clipped to the available rows and columns.
    pub fn with_defaults(n: usize, d: usize, ell: usize, alpha: f64, q: f64, delta: f64, seed: u64) -> Self {
        let c = Self::c_delta_alpha(delta, alpha);
        let nd = n as f64 * d as f64;
        let rcols = (2.0 * c * (d as f64 / ell as f64) * (nd / delta).ln() * nd.ln()).ceil().min(d as f64) as usize;
        let s = (c * nd.ln()).ceil() as usize;
        SubsetScanConfig {
            n,
            d,
            ell,
            alpha,
            q,
            delta,
            rcols: rcols.max(1),
            s1: s.clamp(1, n.max(1)),
            s2: s.clamp(1, rcols.max(1)),
            mode: ScanMode::Auto,
            restarts: 32,
            cap: 1e6,
            tau: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rcols == 0 || self.rcols > self.d {
            return Err(Error::invalid("rcols", "need 1 <= |R| <= d"));
        }
        if self.s1 == 0 || self.s1 > self.n {
            return Err(Error::invalid("s1", "need 1 <= s1 <= n"));
        }
        if self.s2 == 0 || self.s2 > self.rcols {
            return Err(Error::invalid("s2", "need 1 <= s2 <= |R|"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta", "must lie in (0, 1)"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts", "need at least one restart"));
        }
        Ok(())
    }
}

/// `sqrt(2 s1 s2 ln(2 C(n, s1) C(|R|, s2) / delta))`.
pub fn subset_scan_tau(n: usize, rcols: usize, s1: usize, s2: usize, delta: f64) -> f64 {
    let ln_count = ln_choose(n as u64, s1 as u64) + ln_choose(rcols as u64, s2 as u64);
    (2.0 * s1 as f64 * s2 as f64 * (2f64.ln() + ln_count - delta.ln())).sqrt()
}

/// Stores every row restricted to a random coordinate set, then scans for the heaviest `s1 x s2` block.
#[derive(Debug, Clone)]
pub struct SubsetScan {
    config: SubsetScanConfig,
    columns: Vec<usize>,
    rho: u32,
    pass: usize,
    stored: Vec<f64>,
    stored_rows: usize,
}

fn top_sum(values: &mut [(f64, usize)], s: usize) -> f64 {
    if s < values.len() {
        values.select_nth_unstable_by(s - 1, |a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    }
    values[..s].iter().map(|v| v.0).sum()
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

impl SubsetScan {
    pub fn new(config: SubsetScanConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = derived_rng(config.seed, Domain::Detector, 0);
        let mut columns = sample_indices(&mut rng, config.d, config.rcols).into_vec();
        columns.sort_unstable();
        let rho = real_precision(config.n, config.d);
        Ok(SubsetScan { config, columns, rho, pass: 0, stored: Vec::new(), stored_rows: 0 })
    }

    pub fn config(&self) -> &SubsetScanConfig {
        &self.config
    }

    pub fn threshold(&self) -> f64 {
        let c = &self.config;
        c.tau.unwrap_or_else(|| subset_scan_tau(c.n, c.rcols, c.s1, c.s2, c.delta))
    }

    /// `C(rows, s1) * C(|R|, s2)`, the number of candidate blocks.
    pub fn search_size(&self) -> f64 {
        let c = &self.config;
        (ln_choose(self.stored_rows as u64, c.s1 as u64) + ln_choose(c.rcols as u64, c.s2 as u64)).exp()
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.stored[i * self.config.rcols + j]
    }

    fn row_sums(&self, cols: &[usize]) -> Vec<(f64, usize)> {
        (0..self.stored_rows).map(|i| (cols.iter().map(|&j| self.value(i, j)).sum(), i)).collect()
    }

    fn col_sums(&self, rows: &[usize]) -> Vec<(f64, usize)> {
        (0..self.config.rcols).map(|j| (rows.iter().map(|&i| self.value(i, j)).sum(), j)).collect()
    }

    fn top_indices(mut v: Vec<(f64, usize)>, s: usize) -> (f64, Vec<usize>) {
        let total = top_sum(&mut v, s);
        let mut idx: Vec<usize> = v[..s].iter().map(|x| x.1).collect();
        idx.sort_unstable();
        (total, idx)
    }

    /// Exact maximum block sum, enumerating the smaller side and taking the best complement greedily.
    pub fn exact_max(&self) -> Result<f64> {
        let c = &self.config;
        let size = self.search_size();
        if size > c.cap {
            return Err(Error::InfeasibleExact { count: size, cap: c.cap });
        }
        let by_rows = ln_choose(self.stored_rows as u64, c.s1 as u64) < ln_choose(c.rcols as u64, c.s2 as u64);
        let (n, s) = if by_rows { (self.stored_rows, c.s1) } else { (c.rcols, c.s2) };
        let mut comb: Vec<usize> = (0..s).collect();
        let mut best = f64::NEG_INFINITY;
        loop {
            let mut sums = if by_rows { self.col_sums(&comb) } else { self.row_sums(&comb) };
            let v = top_sum(&mut sums, if by_rows { c.s2 } else { c.s1 });
            best = best.max(v);
            if !next_combination(&mut comb, n) {
                break;
            }
        }
        Ok(best)
    }

    fn climb(&self, mut cols: Vec<usize>) -> f64 {
        let c = &self.config;
        let mut best = f64::NEG_INFINITY;
        for _ in 0..1000 {
            let (_, rows) = Self::top_indices(self.row_sums(&cols), c.s1);
            let (v, next_cols) = Self::top_indices(self.col_sums(&rows), c.s2);
            if v <= best || next_cols == cols {
                best = best.max(v);
                break;
            }
            best = v;
            cols = next_cols;
        }
        best
    }

    /// Alternating maximization from the top column sums plus `restarts - 1` random column sets.
    pub fn alternating_max(&self) -> f64 {
        let c = &self.config;
        let all_rows: Vec<usize> = (0..self.stored_rows).collect();
        (0..c.restarts)
            .into_par_iter()
            .map(|r| {
                let start = if r == 0 {
                    Self::top_indices(self.col_sums(&all_rows), c.s2).1
                } else {
                    let mut rng = derived_rng(c.seed, Domain::Detector, r as u64);
                    sample_indices(&mut rng, c.rcols, c.s2).into_vec()
                };
                self.climb(start)
            })
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
}

impl Detector for SubsetScan {
    fn name(&self) -> &'static str {
        "subset-scan"
    }

    fn params(&self) -> String {
        let c = &self.config;
        format!(
            "alpha={},d={},delta={},ell={},mode={:?},n={},q={},rcols={},restarts={},s1={},s2={},tau={}",
            c.alpha,
            c.d,
            c.delta,
            c.ell,
            c.mode,
            c.n,
            c.q,
            c.rcols,
            c.restarts,
            c.s1,
            c.s2,
            self.threshold()
        )
    }

    fn tag(&self) -> u8 {
        8
    }

    fn begin_pass(&mut self, pass: usize) -> Result<()> {
        self.pass = pass;
        Ok(())
    }

    fn observe(&mut self, row: &Row) -> Result<()> {
        let x = real_row(row, self.config.d)?;
        if self.pass == 0 {
            self.stored.extend(self.columns.iter().map(|&j| quantize(x[j], self.rho)));
            self.stored_rows += 1;
        }
        Ok(())
    }

    fn encode(&self, out: &mut BitWriter) {
        for &v in &self.stored {
            out.push_real(v, self.rho);
        }
    }

    fn payload_bits(&self) -> u64 {
        self.stored.len() as u64 * self.rho as u64
    }

    fn decide(&self) -> Result<Decision> {
        let c = &self.config;
        if self.stored_rows < c.s1 {
            return Err(Error::NotApplicable(format!("only {} rows stored, s1 = {}", self.stored_rows, c.s1)));
        }
        let exact = match c.mode {
            ScanMode::Exact => true,
            ScanMode::Heuristic => false,
            ScanMode::Auto => self.search_size() <= c.cap,
        };
        let stat = if exact { self.exact_max()? } else { self.alternating_max() };
        Ok(Decision::above(stat, self.threshold()))
    }
}
