use planted_core::bits::BitRow;
use planted_core::detectors::{
    bits_for, densest_at_most_beta_exact, densest_peeling, densest_sampled, max_biclique_exact, quantize,
    real_precision, reduction_to_density, reduction_to_max_biclique, BicliqueEstimator, BitWriter, DensityEstimator,
    Detector, DetectorParams, DetectorRegistry, EdgeCount, Graph, VertexArrival,
};
use planted_core::distributions::{make_stream, Arm, ProblemKind, ProblemSpec, RowData, StreamSource};
use planted_core::harness::multi_pass_run;
use planted_core::Error;
use rand::{Rng, SeedableRng};

fn bit_stream(spec: ProblemSpec, rows: &[&[u8]]) -> StreamSource {
    let data = rows
        .iter()
        .map(|r| RowData::Bits(BitRow::from_bools(&r.iter().map(|&b| b == 1).collect::<Vec<_>>())))
        .collect();
    StreamSource::from_rows(spec, 0, data).unwrap()
}

#[test]
fn edge_count_flags_a_full_block() {
    let spec = ProblemSpec::biclique(2, 2, 2, 0.25);
    let mut source = bit_stream(spec.clone(), &[&[1, 1], &[1, 1]]);
    let mut det = EdgeCount::new(2, 2, 0.25, 2);
    let (verdict, memory) = multi_pass_run(&mut det, &mut source, 1).unwrap();
    assert_eq!(verdict.decision, Arm::Planted);
    assert_eq!(verdict.statistic, 4.0);
    assert_eq!(verdict.threshold, 2.5);
    assert!(memory.max_state_bits <= bits_for(4) as u64 + 64);

    let mut empty = bit_stream(spec, &[&[0, 0], &[0, 1]]);
    let mut det = EdgeCount::new(2, 2, 0.25, 2);
    assert_eq!(multi_pass_run(&mut det, &mut empty, 1).unwrap().0.decision, Arm::Null);
}

#[test]
fn registry_builds_every_entry_and_rejects_mismatches() {
    let registry = DetectorRegistry::default();
    let names: Vec<_> = registry.names().collect();
    for expected in ["edge-count", "coordinate-sum", "block-square", "subset-scan", "constant-null", "oracle"] {
        assert!(names.contains(&expected), "{expected} missing");
    }
    let boolean = ProblemSpec::biclique(16, 16, 4, 0.5);
    let gaussian = ProblemSpec::new(ProblemKind::SparseMean, 16, 16).with_ell(4).with_q(0.5);
    assert!(registry.create("edge-count", &boolean, "", 0).is_ok());
    assert!(matches!(registry.create("edge-count", &gaussian, "", 0), Err(Error::IncompatibleDetector { .. })));
    assert!(matches!(registry.create("no-such", &boolean, "", 0), Err(Error::UnknownDetector(_))));
    assert!(registry.create("edge-count", &boolean, "bogus=1", 0).is_err());
    assert!(registry.create("edge-count", &boolean, "q=abc", 0).is_err());
}

#[test]
fn params_parse_and_print() {
    let p = DetectorParams::parse("k=4, q=0.25,mode=heuristic").unwrap();
    assert_eq!(p.get::<usize>("k").unwrap(), Some(4));
    assert_eq!(p.get_or("missing", 7usize).unwrap(), 7);
    let again = DetectorParams::parse(&p.to_string()).unwrap();
    assert_eq!(again, p);
    assert!(DetectorParams::parse("novalue").is_err());
}

#[test]
fn encoded_state_matches_declared_size() {
    let spec = ProblemSpec::biclique(32, 32, 4, 0.5);
    let (source, _) = make_stream(&spec, Arm::Planted, 3).unwrap();
    let registry = DetectorRegistry::default();
    let mut det = registry.create("edge-count", &spec, "", 0).unwrap();
    det.begin_pass(0).unwrap();
    for row in source.collect_rows().unwrap() {
        det.observe(&row).unwrap();
        let state = det.state(0, row.index as u64);
        assert_eq!(state.encode().len() as u64, state.bit_size().div_ceil(8));
        assert_eq!(state.bit_size(), det.state_bits());
    }
}

#[test]
fn bit_writer_and_quantizer() {
    let mut w = BitWriter::new();
    w.push(0b101, 3);
    w.push_bool(true);
    w.push(0xff, 8);
    assert_eq!(w.len(), 12);
    assert_eq!(w.into_bytes().len(), 2);
    assert_eq!(bits_for(0), 0);
    assert_eq!(bits_for(1), 1);
    assert_eq!(bits_for(255), 8);
    assert_eq!(bits_for(256), 9);
    let rho = real_precision(1024, 1024);
    let x = std::f64::consts::PI;
    assert!((quantize(x, rho) - x).abs() <= x * 2f64.powi(12 - rho as i32));
    assert_ne!(quantize(x, rho), x);
}

#[test]
fn vertex_arrival_counts_lower_triangle() {
    for seed in 0..5 {
        let (source, _) = make_stream(&ProblemSpec::biclique(24, 24, 5, 0.4), Arm::Planted, seed).unwrap();
        let lower: usize = source
            .collect_rows()
            .unwrap()
            .iter()
            .map(|r| r.data.as_bits().unwrap().ones().filter(|&j| j <= r.index).count())
            .sum();
        let arrival = VertexArrival::new(source).unwrap();
        assert_eq!(arrival.vertices(), 24);
        let events: Vec<_> = arrival.collect::<Result<_, _>>().unwrap();
        assert_eq!(events.iter().map(|e| e.edges.len()).sum::<usize>(), lower);
        assert!(events.iter().all(|e| e.edges.iter().all(|&j| j <= e.vertex)));
    }
    let (rect, _) = make_stream(&ProblemSpec::biclique(4, 6, 2, 0.5), Arm::Null, 0).unwrap();
    assert!(matches!(VertexArrival::new(rect), Err(Error::ShapeMismatch(_))));
}

fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Largest `min(|S|, |common neighbourhood of S|)` over all vertex sets `S`.
fn brute_biclique(g: &Graph) -> usize {
    let n = g.len();
    (1u32..1 << n)
        .map(|set| {
            let common = (0..n).filter(|&u| (0..n).filter(|&v| set >> v & 1 == 1).all(|v| g.has_edge(u, v))).count();
            (set.count_ones() as usize).min(common)
        })
        .max()
        .unwrap_or(0)
}

fn brute_density(g: &Graph, beta: usize) -> f64 {
    let n = g.len();
    (1u32..1 << n)
        .filter(|s| s.count_ones() as usize <= beta)
        .map(|set| {
            let members: Vec<usize> = (0..n).filter(|&v| set >> v & 1 == 1).collect();
            g.induced_edges(&members) as f64 / members.len() as f64
        })
        .fold(0.0, f64::max)
}

#[test]
fn max_biclique_matches_enumeration() {
    for seed in 0..6 {
        let g = random_graph(12, 0.5, seed);
        assert_eq!(max_biclique_exact(&g).unwrap(), brute_biclique(&g), "seed {seed}");
    }
    let k22 = Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]);
    assert_eq!(max_biclique_exact(&k22).unwrap(), 2);
    assert!(matches!(max_biclique_exact(&Graph::new(40)), Err(Error::TooLarge { .. })));
}

#[test]
fn densest_subgraph_estimators() {
    let triangle = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
    assert_eq!(densest_at_most_beta_exact(&triangle, 3).unwrap(), num_rational::Ratio::new(1, 1));
    let edge = Graph::from_edges(2, &[(0, 1)]);
    assert_eq!(densest_at_most_beta_exact(&edge, 2).unwrap(), num_rational::Ratio::new(1, 2));
    for seed in 0..4 {
        let g = random_graph(11, 0.4, 100 + seed);
        for beta in [2, 5, 11] {
            let exact = densest_at_most_beta_exact(&g, beta).unwrap();
            let exact = *exact.numer() as f64 / *exact.denom() as f64;
            assert!((exact - brute_density(&g, beta)).abs() < 1e-12);
            assert!(densest_sampled(&g, beta, 2000, seed) <= exact + 1e-12);
            assert!(densest_peeling(&g, beta) <= exact + 1e-12);
        }
    }
    assert!(densest_at_most_beta_exact(&triangle, 0).is_err());
}

#[test]
fn biclique_reduction_separates_small_instances() {
    let spec = ProblemSpec::new(ProblemKind::SemiRandomBiclique, 20, 20).with_k(8).with_ell(8).with_q(0.3);
    let mut correct = 0;
    for seed in 0..20u64 {
        let arm = if seed % 2 == 0 { Arm::Null } else { Arm::Planted };
        let (mut source, inst) = make_stream(&spec, arm, seed).unwrap();
        let verdict = reduction_to_max_biclique(&mut source, Some(4.0), BicliqueEstimator::Exact, Some(&inst)).unwrap();
        correct += usize::from(verdict.decision == arm);
    }
    assert!(correct >= 18, "{correct}/20");
}

#[test]
fn density_reduction_with_calibrated_threshold() {
    let spec = ProblemSpec::biclique(512, 512, 96, 9.0 / 64.0).with_beta(64);
    let mut correct = 0;
    let trials = 10u64;
    for seed in 0..trials {
        let arm = if seed % 2 == 0 { Arm::Null } else { Arm::Planted };
        let (mut source, inst) = make_stream(&spec, arm, 500 + seed).unwrap();
        let verdict = reduction_to_density(
            &mut source,
            64,
            Some(16.0),
            Some(DensityEstimator::SampledPeeling { samples: 2000 }),
            Some(&inst),
            seed,
        )
        .unwrap();
        correct += u64::from(verdict.decision == arm);
    }
    assert!(correct * 10 >= trials * 9, "{correct}/{trials}");
}

#[test]
fn reductions_need_square_boolean_streams() {
    let (mut rect, _) = make_stream(&ProblemSpec::biclique(8, 12, 2, 0.5), Arm::Null, 0).unwrap();
    assert!(reduction_to_max_biclique(&mut rect, None, BicliqueEstimator::Exact, None).is_err());
    let (mut real, _) =
        make_stream(&ProblemSpec::new(ProblemKind::SparseMean, 8, 8).with_ell(2).with_q(0.5), Arm::Null, 0).unwrap();
    assert!(reduction_to_density(&mut real, 4, None, None, None, 0).is_err());
}

#[test]
fn gaussian_detectors_see_strong_signals() {
    let registry = DetectorRegistry::default();
    let spec = ProblemSpec::new(ProblemKind::SparseMean, 400, 64).with_ell(16).with_alpha(1.0).with_q(0.5);
    for (arm, seed) in [(Arm::Null, 1), (Arm::Planted, 2)] {
        let (mut source, _) = make_stream(&spec, arm, seed).unwrap();
        let mut det = registry.create("coordinate-sum", &spec, "", 0).unwrap();
        let (verdict, _) = multi_pass_run(det.as_mut(), &mut source, 1).unwrap();
        assert_eq!(verdict.decision, arm);
    }
    let pca = ProblemSpec::new(ProblemKind::BlockSparsePca, 2000, 64).with_ell(16).with_alpha(0.8);
    for (arm, seed) in [(Arm::Null, 3), (Arm::Planted, 4)] {
        let (mut source, _) = make_stream(&pca, arm, seed).unwrap();
        let mut det = registry.create("block-square", &pca, "", 0).unwrap();
        let (verdict, _) = multi_pass_run(det.as_mut(), &mut source, 1).unwrap();
        assert_eq!(verdict.decision, arm);
    }
}

#[test]
fn oracle_and_constant_null() {
    let registry = DetectorRegistry::default();
    let spec = ProblemSpec::biclique(8, 8, 2, 0.5);
    for arm in [Arm::Null, Arm::Planted] {
        let (mut source, inst) = make_stream(&spec, arm, 0).unwrap();
        let mut oracle = registry.create("oracle", &spec, "", 0).unwrap();
        oracle.reveal(&inst);
        assert_eq!(multi_pass_run(oracle.as_mut(), &mut source, 1).unwrap().0.decision, arm);
        let mut null = registry.create("constant-null", &spec, "", 0).unwrap();
        assert_eq!(multi_pass_run(null.as_mut(), &mut source, 1).unwrap().0.decision, Arm::Null);
    }
}

fn _object_safe(_: &dyn Detector) {}
