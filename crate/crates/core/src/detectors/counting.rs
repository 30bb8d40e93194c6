use std::hash::{DefaultHasher, Hash, Hasher};

use super::state::{bits_for, real_precision, BitWriter};
use super::{Decision, Detector};
use crate::distributions::{Arm, PlantedInstance, Row, RowData, TruncationSpec};
use crate::error::{Error, Result};
use crate::rng::splitmix64;

fn bits_of(row: &Row) -> Result<&crate::bits::BitRow> {
    row.data.as_bits().ok_or_else(|| Error::NotApplicable("detector expects Boolean rows".into()))
}

fn check_width(row: &Row, cols: usize) -> Result<()> {
    if row.data.len() != cols {
        return Err(Error::DimensionMismatch { expected: cols, got: row.data.len() });
    }
    Ok(())
}

/// Counts ones in the first pass and compares with `mnq + k^2 (1 - q) / 2`.
#[derive(Debug, Clone)]
pub struct EdgeCount {
    pub rows: usize,
    pub cols: usize,
    pub q: f64,
    pub k: usize,
    count: u64,
    pass: usize,
}

impl EdgeCount {
    pub fn new(rows: usize, cols: usize, q: f64, k: usize) -> Self {
        EdgeCount { rows, cols, q, k, count: 0, pass: 0 }
    }

    pub fn threshold(&self) -> f64 {
        let k = self.k as f64;
        self.rows as f64 * self.cols as f64 * self.q + k * k * (1.0 - self.q) / 2.0
    }

    pub fn counter_bits(&self) -> u32 {
        bits_for(self.rows as u64 * self.cols as u64)
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

impl Detector for EdgeCount {
    fn name(&self) -> &'static str {
        "edge-count"
    }

    fn params(&self) -> String {
        format!("cols={},k={},q={},rows={}", self.cols, self.k, self.q, self.rows)
    }

    fn tag(&self) -> u8 {
        1
    }

    fn begin_pass(&mut self, pass: usize) -> Result<()> {
        self.pass = pass;
        Ok(())
    }

    fn observe(&mut self, row: &Row) -> Result<()> {
        check_width(row, self.cols)?;
        let bits = bits_of(row)?;
        if self.pass == 0 {
            self.count += bits.count_ones() as u64;
        }
        Ok(())
    }

    fn encode(&self, out: &mut BitWriter) {
        out.push(self.count, self.counter_bits());
    }

    fn decide(&self) -> Result<Decision> {
        Ok(Decision::at_least(self.count as f64, self.threshold()))
    }
}

/// Flags rows with a partition block heavier than the typical window by at least the plant margin.
#[derive(Debug, Clone)]
pub struct PartitionWeight {
    window: TruncationSpec,
    pub cols: usize,
    pub rows: usize,
    pub margin: f64,
    flags: u64,
    pass: usize,
}

impl PartitionWeight {
    /// `window` carries `t`, `q` and the window constants; `margin` defaults to `k (1 - q) / 2`.
    pub fn new(window: TruncationSpec, rows: usize, cols: usize, margin: f64) -> Result<Self> {
        window.validate()?;
        if window.width > cols {
            return Err(Error::invalid("t", "partition width exceeds the row length"));
        }
        Ok(PartitionWeight { window, cols, rows, margin, flags: 0, pass: 0 })
    }

    pub fn upper(&self) -> f64 {
        self.window.window().1
    }

    pub fn flags(&self) -> u64 {
        self.flags
    }

    fn flagged(&self, weight: usize) -> bool {
        let excess = weight as f64 - self.upper();
        excess > 0.0 && excess >= self.margin
    }
}

impl Detector for PartitionWeight {
    fn name(&self) -> &'static str {
        "partition-weight"
    }

    fn params(&self) -> String {
        format!(
            "cols={},margin={},q={},rows={},t={},upper={}",
            self.cols,
            self.margin,
            self.window.q,
            self.rows,
            self.window.width,
            self.upper()
        )
    }

    fn tag(&self) -> u8 {
        2
    }

    fn begin_pass(&mut self, pass: usize) -> Result<()> {
        self.pass = pass;
        Ok(())
    }

    fn observe(&mut self, row: &Row) -> Result<()> {
        check_width(row, self.cols)?;
        let bits = bits_of(row)?;
        if self.pass > 0 {
            return Ok(());
        }
        let t = self.window.width;
        let blocks = self.cols / t;
        if (0..blocks).any(|b| self.flagged(bits.count_range(b * t, (b + 1) * t))) {
            self.flags += 1;
        }
        Ok(())
    }

    fn encode(&self, out: &mut BitWriter) {
        out.push(self.flags, bits_for(self.rows as u64));
    }

    fn decide(&self) -> Result<Decision> {
        Ok(Decision::at_least(self.flags as f64, 1.0))
    }
}

/// Always answers Null.
#[derive(Debug, Clone, Default)]
pub struct ConstantNull;

impl Detector for ConstantNull {
    fn name(&self) -> &'static str {
        "constant-null"
    }

    fn params(&self) -> String {
        String::new()
    }

    fn tag(&self) -> u8 {
        3
    }

    fn observe(&mut self, _row: &Row) -> Result<()> {
        Ok(())
    }

    fn encode(&self, _out: &mut BitWriter) {}

    fn decide(&self) -> Result<Decision> {
        Ok(Decision { statistic: 0.0, threshold: 0.5, decision: Arm::Null, quantized_statistic: None })
    }
}

/// Answers with the arm of the revealed instance.
#[derive(Debug, Clone, Default)]
pub struct OracleDetector {
    arm: Option<Arm>,
}

impl Detector for OracleDetector {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn params(&self) -> String {
        String::new()
    }

    fn tag(&self) -> u8 {
        4
    }

    fn reveal(&mut self, instance: &PlantedInstance) {
        self.arm = Some(instance.arm);
    }

    fn observe(&mut self, _row: &Row) -> Result<()> {
        Ok(())
    }

    fn encode(&self, out: &mut BitWriter) {
        out.push_bool(self.arm == Some(Arm::Planted));
    }

    fn decide(&self) -> Result<Decision> {
        let arm = self.arm.ok_or_else(|| Error::NotApplicable("the oracle needs the revealed instance".into()))?;
        let stat = if arm.is_planted() { 1.0 } else { 0.0 };
        Ok(Decision::above(stat, 0.5))
    }
}

/// Mean of all entries in pass one, their variance in pass two.
///
/// Each pass also folds the rows into a fingerprint, so the two passes can be
/// checked to have seen the same data.
#[derive(Debug, Clone)]
pub struct TwoPassVariance {
    pub rows: usize,
    pub cols: usize,
    pub threshold: f64,
    rho: u32,
    pass: usize,
    sum: f64,
    entries: u64,
    mean: f64,
    squares: f64,
    fingerprints: [u64; 2],
}

impl TwoPassVariance {
    pub fn new(rows: usize, cols: usize, threshold: f64) -> Self {
        TwoPassVariance {
            rows,
            cols,
            threshold,
            rho: real_precision(rows, cols),
            pass: 0,
            sum: 0.0,
            entries: 0,
            mean: 0.0,
            squares: 0.0,
            fingerprints: [0; 2],
        }
    }

    pub fn fingerprints(&self) -> [u64; 2] {
        self.fingerprints
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    fn row_hash(row: &Row) -> u64 {
        let mut h = DefaultHasher::new();
        match &row.data {
            RowData::Bits(b) => b.words().hash(&mut h),
            RowData::Real(v) => v.iter().for_each(|x| x.to_bits().hash(&mut h)),
        }
        h.finish()
    }
}

impl Detector for TwoPassVariance {
    fn name(&self) -> &'static str {
        "two-pass-variance"
    }

    fn params(&self) -> String {
        format!("cols={},rows={},threshold={}", self.cols, self.rows, self.threshold)
    }

    fn tag(&self) -> u8 {
        5
    }

    fn passes_required(&self) -> usize {
        2
    }

    fn begin_pass(&mut self, pass: usize) -> Result<()> {
        if pass == 1 && self.entries > 0 {
            self.mean = self.sum / self.entries as f64;
        }
        self.pass = pass;
        Ok(())
    }

    fn observe(&mut self, row: &Row) -> Result<()> {
        check_width(row, self.cols)?;
        let slot = self.pass.min(1);
        self.fingerprints[slot] = splitmix64(self.fingerprints[slot] ^ Self::row_hash(row));
        let n = row.data.len();
        match self.pass {
            0 => {
                self.sum += (0..n).map(|j| row.data.value(j)).sum::<f64>();
                self.entries += n as u64;
            }
            1 => {
                self.squares += (0..n).map(|j| (row.data.value(j) - self.mean).powi(2)).sum::<f64>();
            }
            _ => {}
        }
        Ok(())
    }

    fn encode(&self, out: &mut BitWriter) {
        out.push_real(self.sum, self.rho);
        out.push(self.entries, bits_for(self.rows as u64 * self.cols as u64));
        out.push_real(self.mean, self.rho);
        out.push_real(self.squares, self.rho);
        out.push(self.fingerprints[0], 64);
        out.push(self.fingerprints[1], 64);
    }

    fn decide(&self) -> Result<Decision> {
        if self.entries == 0 {
            return Err(Error::NotApplicable("no rows were observed".into()));
        }
        Ok(Decision::above(self.squares / self.entries as f64, self.threshold))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitRow;

    fn bit_row(index: usize, bits: &[bool]) -> Row {
        Row { index, data: RowData::Bits(BitRow::from_bools(bits)) }
    }

    #[test]
    fn edge_count_small_example() {
        let mut d = EdgeCount::new(2, 2, 0.5, 2);
        d.observe(&bit_row(0, &[true, true])).unwrap();
        d.observe(&bit_row(1, &[true, true])).unwrap();
        let dec = d.decide().unwrap();
        assert_eq!(dec.statistic, 4.0);
        assert_eq!(dec.threshold, 3.0);
        assert_eq!(dec.decision, Arm::Planted);
    }

    #[test]
    fn edge_count_ignores_later_passes() {
        let mut d = EdgeCount::new(1, 2, 0.5, 1);
        d.observe(&bit_row(0, &[true, false])).unwrap();
        d.begin_pass(1).unwrap();
        d.observe(&bit_row(0, &[true, false])).unwrap();
        assert_eq!(d.count(), 1);
    }

    #[test]
    fn full_block_is_flagged() {
        let w = TruncationSpec::typical_weight_with_half_width(16, 0.5, 4.0);
        let mut d = PartitionWeight::new(w, 1, 32, 2.0).unwrap();
        let mut bits = vec![false; 32];
        bits[16..].iter_mut().for_each(|b| *b = true);
        d.observe(&bit_row(0, &bits)).unwrap();
        assert_eq!(d.flags(), 1);
    }

    #[test]
    fn oracle_needs_reveal() {
        let d = OracleDetector::default();
        assert!(d.decide().is_err());
    }
}
