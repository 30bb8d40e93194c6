use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use planted_core::detectors::DetectorRegistry;
use planted_core::distributions::{
    make_stream, read_instance, read_stream, write_instance, write_stream, Arm, BaseLaw, ProblemKind, ProblemSpec,
    TruncationSpec, TypicalVariant,
};
use planted_core::divergence::{
    biclique_ratio_max, bound_prediction, kl_binomial_gaussian_scan, trunc_tail_prob, BoundFormula,
};
use planted_core::error::{Error, Result};
use planted_core::harness::{
    compare_to_bound, multi_pass_run_with, run_trials, ExperimentConfig, RunOptions, SummaryRow,
};
use planted_core::table::{merge_csv, write_records, Format};

use crate::{
    ArmArg, BoundArgs, DetectArgs, DivergenceCommand, FormatArg, GenArgs, Output, ProblemArgs, ReportArgs, TailFamily,
    TrialsArgs,
};

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParams { field, reason: reason.into() }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit<T: Serialize>(records: &[T], output: &Output) -> Result<()> {
    let format = match output.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let mut w = sink(output.out.as_deref())?;
    write_records(records, format, &mut w)?;
    w.flush()?;
    Ok(())
}

fn problem_spec(p: &ProblemArgs) -> Result<ProblemSpec> {
    let mut spec = match &p.config {
        Some(path) => ExperimentConfig::load(path)?.spec(),
        None => {
            let kind: ProblemKind =
                p.kind.as_deref().ok_or_else(|| invalid("kind", "give --kind or --config"))?.parse()?;
            let rows = p.rows.ok_or_else(|| invalid("rows", "required without --config"))?;
            let cols = p.cols.ok_or_else(|| invalid("cols", "required without --config"))?;
            ProblemSpec::new(kind, rows, cols)
        }
    };
    if let Some(v) = p.block {
        spec.block = v;
    }
    if let Some(v) = p.k {
        spec.k = v;
    }
    if let Some(v) = p.ell {
        spec.ell = v;
    }
    if let Some(v) = p.q {
        spec.q = v;
    }
    if let Some(v) = p.alpha {
        spec.alpha = v;
    }
    if let Some(v) = p.beta {
        spec.beta = v;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn gen(a: GenArgs) -> Result<()> {
    let spec = problem_spec(&a.problem)?;
    let arm = match a.arm {
        ArmArg::Null => Arm::Null,
        ArmArg::Planted => Arm::Planted,
    };
    let (source, instance) = make_stream(&spec, arm, a.seed)?;
    let mut w = BufWriter::new(File::create(&a.out)?);
    write_stream(&source, &mut w)?;
    w.flush()?;
    if let Some(path) = &a.reveal {
        write_instance(&instance, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

pub fn detect(a: DetectArgs) -> Result<()> {
    let (mut source, header) = read_stream(BufReader::new(File::open(&a.stream)?))?;
    let mut det = DetectorRegistry::default().create(&a.detector, &header.spec, &a.params, a.seed)?;
    if let Some(path) = &a.reveal {
        det.reveal(&read_instance(BufReader::new(File::open(path)?))?);
    }
    let passes = a.passes.unwrap_or_else(|| det.passes_required());
    let out = multi_pass_run_with(det.as_mut(), &mut source, RunOptions::passes(passes))?;
    emit(&[out.verdict], &a.output)
}

pub fn trials(a: TrialsArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&a.config)?;
    if let Some(v) = a.seed {
        config.seed = v;
    }
    if let Some(v) = a.trials {
        config.trials = v;
    }
    if let Some(v) = a.passes {
        config.passes = v;
    }
    if let Some(v) = a.workers {
        config.workers = Some(v);
    }
    config.reveal |= a.reveal;
    let outcome = run_trials(&config)?;
    if let Some(path) = &a.records {
        let records = Output { out: Some(path.clone()), format: a.output.format };
        emit(&outcome.records, &records)?;
    }
    let output = Output { out: a.output.out.clone().or_else(|| config.out.clone()), format: a.output.format };
    emit(&[SummaryRow::new(&config, &outcome)], &output)
}

#[derive(Serialize)]
struct RatioRow {
    family: String,
    t: usize,
    k: usize,
    q: f64,
    c: f64,
    max_ratio: f64,
    argmax: String,
    uniform_max: f64,
    conditional_max: f64,
}

#[derive(Serialize)]
struct TailRow {
    family: String,
    t: usize,
    estimate: f64,
    ci99_low: f64,
    ci99_high: f64,
    trials: u64,
    outside: u64,
    exact: bool,
    target: f64,
}

pub fn divergence(c: DivergenceCommand) -> Result<()> {
    match c {
        DivergenceCommand::Scan { n, output } => emit(&kl_binomial_gaussian_scan(&n)?, &output),
        DivergenceCommand::RatioMax { t, k, q, c, rows, cols, output } => {
            let report = biclique_ratio_max(t, k, q, c, rows, cols)?;
            let pick = |v: TypicalVariant| report.variant(v).map_or(f64::NAN, |r| r.max_ratio);
            let row = RatioRow {
                family: format!("{:?}", report.family),
                t,
                k,
                q,
                c,
                max_ratio: report.max_ratio,
                argmax: report.argmax.clone(),
                uniform_max: pick(TypicalVariant::Uniform),
                conditional_max: pick(TypicalVariant::Conditional),
            };
            emit(&[row], &output)
        }
        DivergenceCommand::Tail { family, t, rows, cols, q, c, alpha, ell, trials, seed, output } => {
            let (trunc, base) = match family {
                TailFamily::Typical => (
                    TruncationSpec::typical_weight(t, q, c, rows, cols),
                    BaseLaw::Bernoulli { width: t, q, forced: Vec::new() },
                ),
                TailFamily::Gaussian => {
                    (TruncationSpec::gaussian_exp_sum(t, alpha, rows, cols), BaseLaw::Gaussian { mean: vec![0.0; t] })
                }
                TailFamily::Pca => (
                    TruncationSpec::pca_block_exp_sum(t, ell, alpha, rows, cols),
                    BaseLaw::Spiked { width: t, alpha, support: (0..ell.min(t)).collect() },
                ),
            };
            let est = trunc_tail_prob(&trunc, &base, trials, seed)?;
            let row = TailRow {
                family: format!("{family:?}").to_lowercase(),
                t,
                estimate: est.estimate,
                ci99_low: est.ci.low,
                ci99_high: est.ci.high,
                trials: est.trials,
                outside: est.outside,
                exact: est.exact,
                target: 0.01 * t as f64 / (rows as f64 * cols as f64),
            };
            emit(&[row], &output)
        }
    }
}

#[derive(Serialize)]
struct BoundRow {
    formula: String,
    predicted_bits: f64,
    measured_bits: Option<u64>,
    ratio: Option<f64>,
    inputs: String,
}

pub fn bound(a: BoundArgs) -> Result<()> {
    let formula: BoundFormula = a.formula.parse()?;
    let mut inputs = BTreeMap::new();
    for item in &a.inputs {
        let (k, v) = item.split_once('=').ok_or_else(|| invalid("input", format!("`{item}` is not name=value")))?;
        let v: f64 = v.trim().parse().map_err(|_| invalid("input", format!("`{v}` is not a number")))?;
        inputs.insert(k.trim().to_string(), v);
    }
    let prediction = bound_prediction(formula, &inputs)?;
    let comparison = a.measured.map(|bits| {
        let memory = planted_core::harness::MemoryReport { max_state_bits: bits, ..Default::default() };
        compare_to_bound(&memory, &prediction)
    });
    let row = BoundRow {
        formula: formula.name().to_string(),
        predicted_bits: prediction.value_bits,
        measured_bits: a.measured,
        ratio: comparison.map(|c| c.ratio),
        inputs: inputs.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";"),
    };
    emit(&[row], &a.output)
}

pub fn report(a: ReportArgs) -> Result<()> {
    let readers = a.inputs.iter().map(|p| File::open(p).map(BufReader::new)).collect::<io::Result<Vec<_>>>()?;
    let mut w = sink(a.out.as_deref())?;
    merge_csv(readers, &mut w)?;
    w.flush()?;
    Ok(())
}
