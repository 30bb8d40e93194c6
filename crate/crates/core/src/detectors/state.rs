use serde::{Deserialize, Serialize};

/// Header bits on every encoded state: an 8-bit detector tag, an 8-bit pass
/// index and a 48-bit payload length.
pub const HEADER_BITS: u64 = 64;

/// Append-only bit buffer, least significant bit first within each byte.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value`.
    pub fn push(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        for b in 0..width {
            let bit = (value >> b) & 1;
            let pos = self.bits as usize;
            if pos.is_multiple_of(8) {
                self.bytes.push(0);
            }
            self.bytes[pos / 8] |= (bit as u8) << (pos % 8);
            self.bits += 1;
        }
    }

    pub fn push_bool(&mut self, value: bool) {
        self.push(value as u64, 1);
    }

    /// Appends `x` as a `rho`-bit float: sign, 11 exponent bits, `rho - 12` mantissa bits.
    pub fn push_real(&mut self, x: f64, rho: u32) {
        let q = quantize(x, rho).to_bits();
        self.push(q >> 52, 12);
        let m = rho - 12;
        self.push((q & ((1u64 << 52) - 1)) >> (52 - m), m);
    }

    pub fn len(&self) -> u64 {
        self.bits
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

/// Bits needed to hold any integer in `0..=max`.
pub fn bits_for(max: u64) -> u32 {
    64 - max.leading_zeros()
}

/// Per-accumulator precision for real-valued state: `ceil(log2(n d)) + 12`.
pub fn real_precision(n: usize, d: usize) -> u32 {
    let nd = (n as f64 * d as f64).max(2.0);
    nd.log2().ceil() as u32 + 12
}

/// Rounds `x` to the nearest `rho`-bit float (ties to even), keeping `rho - 12` mantissa bits.
pub fn quantize(x: f64, rho: u32) -> f64 {
    assert!((13..=64).contains(&rho), "precision must lie in 13..=64 bits");
    if !x.is_finite() {
        return x;
    }
    let shift = 52 - (rho - 12).min(52);
    if shift == 0 {
        return x;
    }
    let bits = x.to_bits();
    let half = 1u64 << (shift - 1);
    let odd = (bits >> shift) & 1;
    let rounded = (bits + half - 1 + odd) >> shift << shift;
    f64::from_bits(rounded)
}

/// Canonical serialisation of a detector's memory at one checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorState {
    pub tag: u8,
    pub pass_index: u8,
    /// Number of rows consumed in the current pass. Supplied by the stream cursor, not stored.
    pub row_index: u64,
    pub payload_bits: u64,
    pub payload: Vec<u8>,
}

impl DetectorState {
    pub fn new(tag: u8, pass_index: usize, row_index: u64, payload: BitWriter) -> Self {
        DetectorState {
            tag,
            pass_index: pass_index.min(u8::MAX as usize) as u8,
            row_index,
            payload_bits: payload.len(),
            payload: payload.into_bytes(),
        }
    }

    /// Length of [`DetectorState::encode`] in bits.
    pub fn bit_size(&self) -> u64 {
        HEADER_BITS + self.payload_bits
    }

    pub fn encode(&self) -> Vec<u8> {
        let header = self.tag as u64 | (self.pass_index as u64) << 8 | (self.payload_bits & ((1 << 48) - 1)) << 16;
        let mut out = header.to_le_bytes().to_vec();
        out.extend_from_slice(&self.payload);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writer_counts_bits() {
        let mut w = BitWriter::new();
        w.push(0b101, 3);
        w.push(1, 1);
        assert_eq!(w.len(), 4);
        assert_eq!(w.into_bytes(), vec![0b1101]);
    }

    #[test]
    fn widths() {
        assert_eq!(bits_for(0), 0);
        assert_eq!(bits_for(1), 1);
        assert_eq!(bits_for(1 << 20), 21);
        assert_eq!(real_precision(1024, 1024), 32);
    }

    #[test]
    fn quantize_rounds_mantissa() {
        let x = 1.0 + 2f64.powi(-30);
        assert_eq!(quantize(x, 20), 1.0);
        assert_eq!(quantize(3.0, 13), 3.0);
        assert_eq!(quantize(-2.75, 15), -2.75);
        assert_eq!(quantize(-2.75, 14), -3.0);
        assert_eq!(quantize(1.2345, 64), 1.2345);
    }

    #[test]
    fn real_encoding_is_rho_bits() {
        let mut w = BitWriter::new();
        w.push_real(123.456, 30);
        assert_eq!(w.len(), 30);
    }
}
