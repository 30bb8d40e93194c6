use std::collections::BTreeMap;

use planted_core::distributions::{BaseLaw, TruncationSpec, TypicalVariant};
use planted_core::divergence::{
    biclique_ratio_max, binomial_pmf, binomial_pmf_rational, bound_prediction, central_tail_split,
    central_tail_split_exact, divergences, divergences_exact, edgeworth_binomial_approx, gaussian_mixture_ratio,
    kl_binomial_gaussian, kl_binomial_gaussian_scan, pca_density_checked, pca_mixture_ratio, sigma_det,
    trunc_tail_prob, BoundFormula, Pmf,
};
use planted_core::stats::wilson_interval;
use planted_core::Error;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// 60-digit mpmath references.
const KL_256: f64 = 2.458_477_054_137_346_929_167_027_486_29e-6;
const KL_1024: f64 = 1.530_666_066_018_323_902_535_257_232_34e-7;
const KL_4096: f64 = 9.557_601_064_162_383_579_474_519_315_66e-9;

#[test]
fn kl_matches_reference_values() {
    assert!(rel(kl_binomial_gaussian(256).unwrap(), KL_256) < 1e-9);
    assert!(rel(kl_binomial_gaussian(1024).unwrap(), KL_1024) < 1e-9);
    assert!(rel(kl_binomial_gaussian(4096).unwrap(), KL_4096) < 1e-9);
}

#[test]
fn kl_scan_keeps_input_order() {
    let rows = kl_binomial_gaussian_scan(&[1024, 256]).unwrap();
    assert_eq!(rows[0].n, 1024);
    assert_eq!(rows[1].n, 256);
    assert!(rows[0].kl_bits < rows[1].kl_bits);
    let l = 10.0f64;
    assert!(rel(rows[0].normalized, rows[0].kl_bits * 1024.0 / (l * l)) < 1e-12);
}

#[test]
fn tail_split_matches_reference() {
    let split = central_tail_split(64, 2.0).unwrap();
    assert!(rel(split.tail, 4.566_610_700_445_410_5e-7) < 1e-9);
    assert!((split.central + split.tail - 1.0).abs() < 1e-12);
    let split = central_tail_split(100, 2.0).unwrap();
    assert!(rel(split.tail, 1.810_002_621_302_925_6e-7) < 1e-9);
    let split = central_tail_split(1024, 10.0).unwrap();
    assert!(rel(split.tail_log2, 1.765_918_739_921_505_5e-293_f64.log2()) < 1e-9);
    let (central, tail) = central_tail_split_exact(64, 2.0).unwrap();
    assert_eq!(central + tail, num_rational::BigRational::from_integer(1.into()));
}

#[test]
fn kl_is_asymmetric_and_tv_symmetric() {
    let p = Pmf::new(0, vec![0.5, 0.3, 0.2]).unwrap();
    let q = Pmf::new(0, vec![0.2, 0.3, 0.5]).unwrap();
    let r = Pmf::new(0, vec![0.6, 0.3, 0.1]).unwrap();
    let pr = divergences(&p, &r).unwrap();
    let rp = divergences(&r, &p).unwrap();
    assert!((pr.kl - rp.kl).abs() > 1e-3);
    assert!((pr.tv - rp.tv).abs() < 1e-15);
    assert!((pr.tv - 0.1).abs() < 1e-15);
    let pq = divergences(&p, &q).unwrap();
    let want = (0.5 * (0.5f64 / 0.2).log2() + 0.2 * (0.2f64 / 0.5).log2()).abs();
    assert!(rel(pq.kl, want) < 1e-12);
    assert!((pq.kl_nats() - pq.kl * std::f64::consts::LN_2).abs() < 1e-15);
}

#[test]
fn exact_and_float_divergences_agree() {
    let a = binomial_pmf_rational(20).unwrap();
    let b = binomial_pmf_rational(21).unwrap();
    let exact = divergences_exact(&a, &b).unwrap();
    let float = divergences(&binomial_pmf(20).unwrap(), &binomial_pmf(21).unwrap()).unwrap();
    assert!(rel(exact.kl, float.kl) < 1e-10);
    assert!(rel(exact.tv, float.tv) < 1e-10);
    assert!(rel(exact.hellinger_sq, float.hellinger_sq) < 1e-10);
}

#[test]
fn missing_support_is_reported() {
    let p = Pmf::new(0, vec![0.5, 0.5]).unwrap();
    let q = Pmf::new(1, vec![1.0]).unwrap();
    assert!(matches!(divergences(&p, &q), Err(Error::SupportMismatch { index: 0, .. })));
    let d = divergences(&q, &p).unwrap();
    assert!((d.kl - 1.0).abs() < 1e-15);
}

#[test]
fn edgeworth_behaviour() {
    let n = 400u64;
    let centre = edgeworth_binomial_approx(n, n as f64 / 2.0, 1).unwrap();
    assert!(rel(centre, 2.0 / (2.0 * std::f64::consts::PI * n as f64).sqrt()) < 1e-12);
    let exact = binomial_pmf(n).unwrap();
    let err = |order| {
        (0..=n)
            .map(|i| (exact.get(i as i64) - edgeworth_binomial_approx(n, i as f64, order).unwrap()).abs())
            .fold(0.0, f64::max)
    };
    assert!(err(2) < err(1));
    assert!(err(2) * n as f64 * n as f64 <= 1.0);
    assert!(edgeworth_binomial_approx(n, 0.0, 3).is_err());
}

#[test]
fn ratio_max_variants_are_labelled() {
    let report = biclique_ratio_max(16, 2, 0.25, 20.0, 1024, 1024).unwrap();
    let uniform = report.variant(TypicalVariant::Uniform).unwrap();
    let conditional = report.variant(TypicalVariant::Conditional).unwrap();
    assert_eq!(report.max_ratio, uniform.max_ratio.max(conditional.max_ratio));
    assert!(report.max_ratio >= 1.0);
    assert!(biclique_ratio_max(16, 17, 0.25, 20.0, 1024, 1024).is_err());
}

#[test]
fn gaussian_mixture_matches_reference() {
    let x = [1.0, -1.0, 0.0, 2.0];
    let got = gaussian_mixture_ratio(&x, 4, 2, 0.5).unwrap();
    assert!(rel(got, 1.507_237_999_491_217_7) < 1e-12, "{got}");
}

#[test]
fn pca_mixture_two_term_average() {
    // t = 4 with ell = 2 gives two aligned blocks, each spiked with probability 1/2.
    let (alpha, x) = (0.5, [0.3, -1.2, 0.8, 0.1]);
    let term = |a: f64, b: f64| {
        let s = a + b;
        (alpha * s * s / (2.0 * (1.0 + alpha) * 2.0)).exp() / (1.0 + alpha).sqrt()
    };
    let want = 0.5 * (term(x[0], x[1]) + term(x[2], x[3]));
    let got = pca_mixture_ratio(&x, 4, 2, alpha).unwrap();
    assert!(rel(got, want) < 1e-12, "{got} vs {want}");
}

#[test]
fn pca_density_closed_form_agrees_with_solve() {
    let x: Vec<f64> = (0..12).map(|i| ((i * 7 % 5) as f64 - 2.0) / 3.0).collect();
    let check = pca_density_checked(&x, 1, 0.4, 4).unwrap();
    assert!(check.relative_diff < 1e-10);
    assert!(rel(sigma_det(12, 1, 0.4, 4), 1.4) < 1e-12);
}

#[test]
fn typical_tails_match_reference() {
    let base = |t, q| BaseLaw::Bernoulli { width: t, q, forced: Vec::new() };
    let est = trunc_tail_prob(&TruncationSpec::typical_weight_with_half_width(400, 0.5, 20.0), &base(400, 0.5), 0, 0)
        .unwrap();
    assert!(est.exact);
    assert!(rel(est.estimate, 0.040_230_739_680_637_99) < 1e-9, "{}", est.estimate);
    let est =
        trunc_tail_prob(&TruncationSpec::typical_weight_with_half_width(64, 0.25, 6.0), &base(64, 0.25), 0, 0).unwrap();
    assert!(rel(est.estimate, 0.059_030_864_433_320_98) < 1e-9, "{}", est.estimate);
}

#[test]
fn gaussian_tail_is_estimated_with_interval() {
    let trunc = TruncationSpec::gaussian_exp_sum(16, 0.5, 64, 64);
    let est = trunc_tail_prob(&trunc, &BaseLaw::Gaussian { mean: vec![0.0; 16] }, 20_000, 3).unwrap();
    assert!(!est.exact);
    assert_eq!(est.trials, 20_000);
    assert!(est.ci.low <= est.estimate && est.estimate <= est.ci.high);
    assert!(est.ci.high < 0.01);
    assert!(trunc_tail_prob(&trunc, &BaseLaw::Gaussian { mean: vec![0.0; 16] }, 10, 3).is_err());
}

fn inputs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn bound_formulas() {
    let mic = bound_prediction(BoundFormula::MicBudget, &inputs(&[("p", 2.0), ("s", 8.0), ("n", 100.0)])).unwrap();
    assert_eq!(mic.value_bits, 3200.0);
    let main = bound_prediction(
        BoundFormula::BicliqueMain,
        &inputs(&[("n", 1024.0), ("m", 1024.0), ("q", 0.5), ("p", 1.0), ("k", 4.0)]),
    )
    .unwrap();
    assert!(rel(main.value_bits, 102.4) < 1e-12);
    let general = bound_prediction(
        BoundFormula::GeneralFramework,
        &inputs(&[("n", 50.0), ("d", 30.0), ("p", 3.0), ("c", 1.0), ("k", 50.0), ("t", 30.0)]),
    )
    .unwrap();
    assert!(rel(general.value_bits, 1.0 / 150.0) < 1e-12);
    let pattern =
        bound_prediction(BoundFormula::PatternPlanted, &inputs(&[("n", 100.0), ("p", 2.0), ("k", 5.0)])).unwrap();
    assert!(rel(pattern.value_bits, 40.0) < 1e-12);
    assert!(bound_prediction(BoundFormula::MicBudget, &inputs(&[("p", 2.0), ("s", 8.0)])).is_err());
    assert!(bound_prediction(BoundFormula::MicBudget, &inputs(&[("p", -2.0), ("s", 8.0), ("n", 1.0)])).is_err());
    assert_eq!("biclique-main".parse::<BoundFormula>().unwrap(), BoundFormula::BicliqueMain);
}

#[test]
fn wilson_matches_reference() {
    let ci = wilson_interval(50, 100, 0.99).unwrap();
    assert!((ci.low - 0.375_279_625_044_839_8).abs() < 1e-9);
    assert!((ci.high - 0.624_720_374_955_160_2).abs() < 1e-9);
    let ci = wilson_interval(3, 200, 0.99).unwrap();
    assert!((ci.low - 0.003_797_397_274_919_563_8).abs() < 1e-9);
    assert!((ci.high - 0.057_348_598_918_633_21).abs() < 1e-9);
    assert!(wilson_interval(5, 4, 0.99).is_err());
}
