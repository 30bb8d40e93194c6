use proptest::prelude::*;

use planted_core::bits::BitRow;
use planted_core::detectors::{quantize, DetectorParams};
use planted_core::distributions::{
    apply_monotone_adversary, consistent_permute_with, in_truncation_set, make_stream, read_stream, write_stream, Arm,
    Permutation, ProblemKind, ProblemSpec, RowData, TruncationSpec,
};
use planted_core::divergence::{divergences, Pmf};
use planted_core::harness::wilson_interval;

fn bits_of(rows: &[planted_core::distributions::Row]) -> Vec<Vec<bool>> {
    rows.iter().map(|r| r.data.as_bits().unwrap().to_bools()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bitrow_round_trips(bools in prop::collection::vec(any::<bool>(), 0..200)) {
        let row = BitRow::from_bools(&bools);
        prop_assert_eq!(row.to_bools(), bools.clone());
        prop_assert_eq!(row.count_ones(), bools.iter().filter(|b| **b).count());
        prop_assert!(row.ones().all(|j| bools[j]));
    }

    #[test]
    fn permutation_inverse_is_identity(n in 1usize..80, seed in any::<u64>()) {
        let p = Permutation::random(n, seed);
        let inv = p.inverse();
        for j in 0..n {
            prop_assert_eq!(inv.image(p.image(j)), j);
        }
        let map: Vec<usize> = (0..n).map(|j| p.image(j)).collect();
        prop_assert_eq!(Permutation::from_map(map).unwrap(), p);
    }

    #[test]
    fn permuting_keeps_row_weights(seed in any::<u64>(), pseed in any::<u64>()) {
        let (source, _) = make_stream(&ProblemSpec::biclique(12, 20, 3, 0.3), Arm::Planted, seed).unwrap();
        let before = source.collect_rows().unwrap();
        let after = consistent_permute_with(source, Permutation::random(20, pseed)).collect_rows().unwrap();
        for (b, a) in before.iter().zip(&after) {
            prop_assert_eq!(b.data.as_bits().unwrap().count_ones(), a.data.as_bits().unwrap().count_ones());
        }
    }

    #[test]
    fn adversary_is_monotone(seed in any::<u64>(), k in 2usize..10, cut in 0usize..10) {
        let k_prime = cut.min(k);
        let spec = ProblemSpec::biclique(16, 24, k, 0.5);
        let (source, inst) = make_stream(&spec, Arm::Planted, seed).unwrap();
        let before = bits_of(&source.collect_rows().unwrap());
        let after = bits_of(&apply_monotone_adversary(source, &inst, k_prime).unwrap().collect_rows().unwrap());
        for (i, (b, a)) in before.iter().zip(&after).enumerate() {
            for j in 0..24 {
                prop_assert!(!a[j] || b[j]);
                if inst.columns.contains(&j) || !inst.rows.contains(&i) {
                    prop_assert_eq!(a[j], b[j]);
                }
            }
        }
    }

    #[test]
    fn stream_codec_round_trips(seed in any::<u64>(), rows in 1usize..20, cols in 2usize..40, boolean in any::<bool>()) {
        let spec = if boolean {
            ProblemSpec::biclique(rows, cols, 1, 0.5)
        } else {
            ProblemSpec::new(ProblemKind::SparseMean, rows, cols).with_ell(1).with_q(0.5)
        };
        let (source, _) = make_stream(&spec, Arm::Planted, seed).unwrap();
        let mut buf = Vec::new();
        write_stream(&source, &mut buf).unwrap();
        let (back, header) = read_stream(buf.as_slice()).unwrap();
        prop_assert_eq!(header.seed, seed);
        prop_assert_eq!(back.collect_rows().unwrap(), source.collect_rows().unwrap());
    }

    #[test]
    fn typical_membership_follows_weight(t in 1usize..120, weight_frac in 0.0f64..1.0, hw in 0.0f64..20.0) {
        let w = ((t as f64) * weight_frac) as usize;
        let row = RowData::Bits(BitRow::from_bools(&(0..t).map(|j| j < w).collect::<Vec<_>>()));
        let trunc = TruncationSpec::typical_weight_with_half_width(t, 0.5, hw);
        prop_assert_eq!(in_truncation_set(&trunc, &row).unwrap(), (w as f64 - t as f64 / 2.0).abs() <= hw);
    }

    #[test]
    fn wilson_interval_is_ordered(n in 1u64..5000, frac in 0.0f64..=1.0) {
        let s = ((n as f64) * frac).round() as u64;
        let ci = wilson_interval(s, n, 0.99).unwrap();
        let p = s as f64 / n as f64;
        prop_assert!(0.0 <= ci.low && ci.low <= p + 1e-12);
        prop_assert!(p - 1e-12 <= ci.high && ci.high <= 1.0);
        let wider = wilson_interval(s, n, 0.999).unwrap();
        prop_assert!(wider.low <= ci.low + 1e-15 && wider.high >= ci.high - 1e-15);
    }

    #[test]
    fn quantize_is_idempotent(x in -1e12f64..1e12, rho in 13u32..=64) {
        let q = quantize(x, rho);
        prop_assert_eq!(quantize(q, rho), q);
        prop_assert!((q - x).abs() <= x.abs() * 2f64.powi(12 - rho as i32));
    }

    #[test]
    fn params_survive_display(keys in prop::collection::btree_map("[a-z][a-z0-9_]{0,6}", 0u32..1000, 0..6)) {
        let text = keys.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",");
        let parsed = DetectorParams::parse(&text).unwrap();
        for (k, v) in &keys {
            prop_assert_eq!(parsed.get::<u32>(k).unwrap(), Some(*v));
        }
        prop_assert_eq!(DetectorParams::parse(&parsed.to_string()).unwrap(), parsed);
    }

    #[test]
    fn divergence_inequalities(a in prop::collection::vec(0.01f64..1.0, 2..12), b in prop::collection::vec(0.01f64..1.0, 2..12)) {
        let len = a.len().min(b.len());
        let norm = |v: &[f64]| { let s: f64 = v[..len].iter().sum(); v[..len].iter().map(|x| x / s).collect::<Vec<_>>() };
        let p = Pmf::new(0, norm(&a)).unwrap();
        let q = Pmf::new(0, norm(&b)).unwrap();
        let d = divergences(&p, &q).unwrap();
        prop_assert!(d.kl >= -1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d.tv));
        let h2 = d.hellinger_sq;
        prop_assert!(h2 <= d.tv + 1e-12);
        prop_assert!(d.tv <= (h2 * (2.0 - h2)).sqrt() + 1e-12);
        // Pinsker, with KL converted to nats.
        prop_assert!(d.tv <= (d.kl_nats() / 2.0).sqrt() + 1e-12);
    }
}
