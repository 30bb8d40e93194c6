use planted_core::distributions::{
    apply_monotone_adversary, consistent_permute, consistent_permute_with, in_truncation_set, make_stream,
    pad_dimension, read_stream, sample_truncated, write_stream, Arm, BaseLaw, Permutation, ProblemKind, ProblemSpec,
    RowData, StreamSource, TruncationSpec,
};
use planted_core::error::Error;

fn bits(source: &StreamSource) -> Vec<Vec<bool>> {
    source.collect_rows().unwrap().into_iter().map(|r| r.data.as_bits().unwrap().to_bools()).collect()
}

#[test]
fn planted_rows_carry_the_biclique() {
    for seed in 0..5 {
        let (source, inst) = make_stream(&ProblemSpec::biclique(64, 48, 8, 0.3), Arm::Planted, seed).unwrap();
        let rows = bits(&source);
        assert_eq!(inst.rows.len(), 8);
        assert_eq!(inst.columns.len(), 8);
        for &i in &inst.rows {
            assert!(inst.columns.iter().all(|&j| rows[i][j]));
        }
    }
}

#[test]
fn null_stream_has_declared_shape_and_replays() {
    let (mut source, inst) = make_stream(&ProblemSpec::biclique(40, 24, 4, 0.5), Arm::Null, 17).unwrap();
    assert_eq!(inst.arm, Arm::Null);
    assert!(inst.rows.is_empty());
    assert_eq!(source.len(), 40);
    let first = bits(&source);
    assert!(first.iter().all(|r| r.len() == 24));
    let mut streamed = Vec::new();
    while let Some(row) = source.next_row().unwrap() {
        streamed.push(row);
    }
    source.rewind();
    let mut again = Vec::new();
    while let Some(row) = source.next_row().unwrap() {
        again.push(row);
    }
    assert_eq!(streamed, again);
}

#[test]
fn same_seed_same_stream() {
    let spec = ProblemSpec::new(ProblemKind::SparseMean, 30, 20).with_ell(4).with_alpha(0.7).with_q(0.3);
    let a = make_stream(&spec, Arm::Planted, 99).unwrap();
    let b = make_stream(&spec, Arm::Planted, 99).unwrap();
    assert_eq!(a.0.collect_rows().unwrap(), b.0.collect_rows().unwrap());
    assert_eq!(a.1, b.1);
    let c = make_stream(&spec, Arm::Planted, 100).unwrap();
    assert_ne!(a.0.collect_rows().unwrap(), c.0.collect_rows().unwrap());
}

#[test]
fn null_density_is_within_four_sigma() {
    let (rows, cols, q) = (512usize, 512usize, 0.25);
    let mut ones = 0usize;
    let seeds = 20;
    for seed in 0..seeds {
        let (source, _) = make_stream(&ProblemSpec::biclique(rows, cols, 1, q), Arm::Null, seed).unwrap();
        ones += source.collect_rows().unwrap().iter().map(|r| r.data.as_bits().unwrap().count_ones()).sum::<usize>();
    }
    let cells = (rows * cols * seeds as usize) as f64;
    let sd = (q * (1.0 - q) / cells).sqrt();
    assert!((ones as f64 / cells - q).abs() < 4.0 * sd);
}

#[test]
fn iid_plant_count_is_binomial() {
    let (rows, q) = (20usize, 0.25);
    let spec = ProblemSpec::new(ProblemKind::DistributionalBiclique, rows, 16).with_k(3).with_q(q);
    let seeds = 10_000u64;
    let mut counts = vec![0usize; rows + 1];
    for seed in 0..seeds {
        counts[make_stream(&spec, Arm::Planted, seed).unwrap().1.rows.len()] += 1;
    }
    let rate = spec.plant_rate();
    let pmf: Vec<f64> = (0..=rows)
        .map(|r| planted_core::divergence::special::ln_binom_pmf(rows as u64, r as u64, rate).exp())
        .collect();
    // Pool adjacent counts until each cell expects at least 5 draws.
    let mut observed = vec![0.0];
    let mut expected = vec![0.0];
    for r in 0..=rows {
        if *expected.last().unwrap() >= 5.0 {
            observed.push(0.0);
            expected.push(0.0);
        }
        *observed.last_mut().unwrap() += counts[r] as f64;
        *expected.last_mut().unwrap() += pmf[r] * seeds as f64;
    }
    if *expected.last().unwrap() < 5.0 {
        let (o, e) = (observed.pop().unwrap(), expected.pop().unwrap());
        *observed.last_mut().unwrap() += o;
        *expected.last_mut().unwrap() += e;
    }
    let chi2: f64 = observed.iter().zip(&expected).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = observed.len() - 1;
    let critical = chi2_upper_quantile(dof);
    assert!(chi2 < critical, "chi2 {chi2} with {dof} dof exceeds {critical}");
}

/// Upper 10^-3 quantile of chi-square, by Wilson-Hilferty.
fn chi2_upper_quantile(dof: usize) -> f64 {
    let k = dof as f64;
    let z = 3.090_232_306_167_813;
    k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3)
}

#[test]
fn adversary_only_clears_one_column_set_outside_the_plant() {
    let spec = ProblemSpec::new(ProblemKind::SemiRandomBiclique, 64, 64).with_k(12).with_ell(8).with_q(0.5);
    for seed in 0..10 {
        let (source, inst) = make_stream(&spec, Arm::Planted, seed).unwrap();
        let before = bits(&source);
        let after = bits(&apply_monotone_adversary(source, &inst, 5).unwrap());
        let mut zeroed = std::collections::BTreeSet::new();
        for (i, (b, a)) in before.iter().zip(&after).enumerate() {
            for j in 0..64 {
                assert!(!(a[j] && !b[j]), "0 turned into 1 at ({i}, {j})");
                if b[j] && !a[j] {
                    assert!(inst.rows.contains(&i));
                    assert!(!inst.columns.contains(&j));
                    zeroed.insert(j);
                }
            }
        }
        assert!(zeroed.len() <= 12 - 5);
        for &i in &inst.rows {
            assert!(zeroed.iter().all(|&j| !after[i][j]));
        }
    }
}

#[test]
fn adversary_edge_cases() {
    let spec = ProblemSpec::biclique(16, 16, 4, 0.5);
    let (source, inst) = make_stream(&spec, Arm::Planted, 1).unwrap();
    let before = bits(&source);
    assert_eq!(bits(&apply_monotone_adversary(source, &inst, 4).unwrap()), before);

    let (null, null_inst) = make_stream(&spec, Arm::Null, 1).unwrap();
    let nb = bits(&null);
    assert_eq!(bits(&apply_monotone_adversary(null, &null_inst, 1).unwrap()), nb);

    let gauss = ProblemSpec::new(ProblemKind::SparseMean, 4, 4).with_ell(2).with_q(0.5);
    let (g, gi) = make_stream(&gauss, Arm::Planted, 1).unwrap();
    assert!(matches!(apply_monotone_adversary(g, &gi, 1), Err(Error::NotApplicable(_))));
}

#[test]
fn permutation_preserves_column_sums_and_inverts() {
    let spec = ProblemSpec::biclique(32, 40, 6, 0.4);
    let (source, _) = make_stream(&spec, Arm::Planted, 8).unwrap();
    let original = bits(&source);
    let col_sums = |rows: &[Vec<bool>]| {
        let mut s: Vec<usize> = (0..40).map(|j| rows.iter().filter(|r| r[j]).count()).collect();
        s.sort_unstable();
        s
    };
    let permuted = bits(&consistent_permute(source.clone(), 5));
    assert_eq!(col_sums(&original), col_sums(&permuted));
    assert_ne!(original, permuted);

    let perm = Permutation::random(40, 77);
    let there = consistent_permute_with(source.clone(), perm.clone());
    let back = consistent_permute_with(there, perm.inverse());
    assert_eq!(bits(&back), original);
    assert_eq!(bits(&consistent_permute_with(source, Permutation::identity(40))), original);
}

#[test]
fn stream_file_round_trip() {
    let spec = ProblemSpec::new(ProblemKind::BlockSparsePca, 12, 16).with_ell(4).with_alpha(0.4);
    let (source, _) = make_stream(&spec, Arm::Planted, 21).unwrap();
    let mut buf = Vec::new();
    write_stream(&source, &mut buf).unwrap();
    let (back, header) = read_stream(buf.as_slice()).unwrap();
    assert_eq!(header.spec, spec);
    assert_eq!(back.collect_rows().unwrap(), source.collect_rows().unwrap());
}

#[test]
fn padding_reports_filler_columns() {
    let spec = ProblemSpec::new(ProblemKind::PartitionBiclique, 10, 100).with_block(25);
    let (_, pad) = pad_dimension(&spec).unwrap();
    assert_eq!(pad.filler_columns().len(), 0);
    let spec = spec.with_block(30);
    let (_, pad) = pad_dimension(&spec).unwrap();
    assert_eq!(pad.filler_columns(), 90..100);
    assert!(pad.is_filler(95) && !pad.is_filler(89));
    assert!(pad_dimension(&ProblemSpec::new(ProblemKind::PartitionBiclique, 10, 20).with_block(30)).is_err());
}

#[test]
fn truncation_membership_examples() {
    let t = TruncationSpec::typical_weight_with_half_width(100, 0.5, 10.0);
    let row =
        |w: usize| RowData::Bits(planted_core::bits::BitRow::from_bools(&(0..100).map(|j| j < w).collect::<Vec<_>>()));
    assert!(in_truncation_set(&t, &row(50)).unwrap());
    assert!(!in_truncation_set(&t, &row(70)).unwrap());
    let g = TruncationSpec::gaussian_exp_sum(16, 0.5, 64, 64);
    assert!(in_truncation_set(&g, &RowData::Real(vec![0.0; 16])).unwrap());
    assert!(matches!(in_truncation_set(&g, &RowData::Real(vec![0.0; 3])), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn truncated_sampler_respects_window() {
    let t = TruncationSpec::typical_weight_with_half_width(100, 0.5, 30.0);
    let base = BaseLaw::Bernoulli { width: 100, q: 0.5, forced: Vec::new() };
    for seed in 0..200 {
        let w = sample_truncated(&base, &t, seed).unwrap().as_bits().unwrap().count_ones();
        assert!((20..=80).contains(&w));
    }
}

#[test]
fn truncated_sampler_matches_conditional_law() {
    let (t, q, hw) = (12usize, 0.5, 1.5);
    let trunc = TruncationSpec::typical_weight_with_half_width(t, q, hw);
    let base = BaseLaw::Bernoulli { width: t, q, forced: Vec::new() };
    let draws = 300_000u64;
    let mut counts = vec![0u64; 1 << t];
    for seed in 0..draws {
        let row = sample_truncated(&base, &trunc, seed).unwrap();
        let b = row.as_bits().unwrap();
        let code = (0..t).fold(0usize, |acc, j| acc | (b.get(j) as usize) << j);
        counts[code] += 1;
    }
    let typical = |x: usize| (x.count_ones() as f64 - t as f64 * q).abs() <= hw;
    let support = (0..1usize << t).filter(|&x| typical(x)).count();
    assert!((0..1usize << t).all(|x| typical(x) || counts[x] == 0));
    let expected = draws as f64 / support as f64;
    let chi2: f64 =
        (0..1usize << t).filter(|&x| typical(x)).map(|x| (counts[x] as f64 - expected).powi(2) / expected).sum();
    let critical = chi2_upper_quantile(support - 1);
    assert!(chi2 < critical, "chi2 {chi2} over {critical}");
}

#[test]
fn pca_block_sum_variances() {
    let (t, ell, alpha) = (16usize, 4usize, 0.5);
    let base = BaseLaw::Spiked { width: t, alpha, support: (4..8).collect() };
    let trunc = TruncationSpec::pca_block_exp_sum(t, ell, alpha, 1 << 20, 1 << 20);
    let draws = 200_000u64;
    let (mut planted, mut other) = (0.0, 0.0);
    for seed in 0..draws {
        let row = sample_truncated(&base, &trunc, seed).unwrap();
        let x = row.as_real().unwrap();
        let s1: f64 = x[4..8].iter().sum();
        let s0: f64 = x[8..12].iter().sum();
        planted += s1 * s1;
        other += s0 * s0;
    }
    let (vp, vo) = (planted / draws as f64, other / draws as f64);
    assert!((vp / ((1.0 + alpha) * ell as f64) - 1.0).abs() < 0.05, "{vp}");
    assert!((vo / ell as f64 - 1.0).abs() < 0.05, "{vo}");
}

#[test]
fn invalid_specs_name_the_field() {
    let err = make_stream(&ProblemSpec::biclique(10, 10, 11, 0.5), Arm::Planted, 0).unwrap_err();
    assert!(matches!(err, Error::InvalidParams { field: "k", .. }), "{err}");
    let err = make_stream(&ProblemSpec::biclique(10, 10, 2, 1.5), Arm::Null, 0).unwrap_err();
    assert!(matches!(err, Error::InvalidParams { field: "q", .. }), "{err}");
}
