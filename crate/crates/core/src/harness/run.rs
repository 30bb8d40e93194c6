use serde::{Deserialize, Serialize};

use crate::detectors::{Detector, DetectorState, Verdict};
use crate::distributions::StreamSource;
use crate::error::{Error, Result};

/// Peak state size overall and per pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryReport {
    pub max_state_bits: u64,
    pub per_pass: Vec<u64>,
    pub checkpoints: u64,
}

impl MemoryReport {
    fn record(&mut self, pass: usize, bits: u64) {
        if self.per_pass.len() <= pass {
            self.per_pass.resize(pass + 1, 0);
        }
        self.per_pass[pass] = self.per_pass[pass].max(bits);
        self.max_state_bits = self.max_state_bits.max(bits);
        self.checkpoints += 1;
    }

    /// Combines reports of independent runs: maxima taken entry by entry.
    pub fn merge(&mut self, other: &MemoryReport) {
        for (pass, &bits) in other.per_pass.iter().enumerate() {
            if self.per_pass.len() <= pass {
                self.per_pass.resize(pass + 1, 0);
            }
            self.per_pass[pass] = self.per_pass[pass].max(bits);
        }
        self.max_state_bits = self.max_state_bits.max(other.max_state_bits);
        self.checkpoints += other.checkpoints;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub passes: usize,
    /// Meter the state after every `stride`-th row (and always at pass boundaries).
    pub stride: usize,
    /// Keep the encoded state of every checkpoint.
    pub trace: bool,
}

impl RunOptions {
    pub fn passes(passes: usize) -> Self {
        RunOptions { passes, stride: 1, trace: false }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub verdict: Verdict,
    pub memory: MemoryReport,
    pub trace: Vec<DetectorState>,
}

/// Feeds every row of `source` to `detector`, `passes` times, then asks for a verdict.
///
/// The state at the start of pass `l + 1` is the state at the end of pass `l`;
/// the source is rewound between passes.
pub fn multi_pass_run(
    detector: &mut dyn Detector,
    source: &mut StreamSource,
    passes: usize,
) -> Result<(Verdict, MemoryReport)> {
    let out = multi_pass_run_with(detector, source, RunOptions::passes(passes))?;
    Ok((out.verdict, out.memory))
}

pub fn multi_pass_run_with(
    detector: &mut dyn Detector,
    source: &mut StreamSource,
    opts: RunOptions,
) -> Result<RunOutput> {
    if opts.passes == 0 {
        return Err(Error::invalid("passes", "must be at least 1"));
    }
    if opts.stride == 0 {
        return Err(Error::invalid("stride", "must be at least 1"));
    }
    let needed = detector.passes_required();
    if opts.passes < needed {
        return Err(Error::invalid("passes", format!("{} needs {needed} passes", detector.name())));
    }
    let mut memory = MemoryReport::default();
    let mut trace = Vec::new();
    let mut checkpoint = |det: &dyn Detector, pass: usize, row: u64, memory: &mut MemoryReport| {
        if opts.trace {
            let st = det.state(pass, row);
            memory.record(pass, st.bit_size());
            trace.push(st);
        } else {
            memory.record(pass, det.state_bits());
        }
    };
    for pass in 0..opts.passes {
        source.rewind();
        detector.begin_pass(pass)?;
        checkpoint(detector, pass, 0, &mut memory);
        let mut seen = 0u64;
        while let Some(row) = source.next_row()? {
            detector.observe(&row)?;
            seen += 1;
            if seen.is_multiple_of(opts.stride as u64) {
                checkpoint(detector, pass, seen, &mut memory);
            }
        }
        if !seen.is_multiple_of(opts.stride as u64) {
            checkpoint(detector, pass, seen, &mut memory);
        }
    }
    let decision = detector.decide()?;
    let verdict = Verdict::new(detector, decision, memory.max_state_bits, opts.passes);
    Ok(RunOutput { verdict, memory, trace })
}
