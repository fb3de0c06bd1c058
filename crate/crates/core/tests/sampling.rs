//! Samplers against exact laws, at fixed seeds.

use graphonlab::bipartite::{
    bip_exact_density, bip_extremality_test, bip_mc_density, bip_prefix_law_empirical, BipartiteGraph, BipartiteKernel, BipartiteSource, Side,
};
use graphonlab::canon::{all_labelled, enumerate_unlabelled};
use graphonlab::density::{mc_t, t, DEFAULT_ALPHA};
use graphonlab::directed::{
    directed_extremality_test, directed_prefix_law_empirical, loop_sequence_law, sample_directed, sample_directed_qp, tournament_kernel, DirectedKernelQuadruplePlusP,
    DirectedKernelQuintuple, DirectedSource,
};
use graphonlab::exchangeable::{exchangeability_test, prefix_law_empirical, prefix_law_exact, EdgePattern, GraphSource};
use graphonlab::graphon::{exact_density, mc_density, sample_w_random};
use graphonlab::rational::{frac, int, to_f64};
use graphonlab::rng::stream;
use graphonlab::{LabelledGraph, Rational, StepGraphon};
use rand::Rng;

fn three_block() -> StepGraphon {
    StepGraphon::from_f64(&[0.2, 0.3, 0.5], &[vec![0.9, 0.1, 0.5], vec![0.1, 0.0, 0.7], vec![0.5, 0.7, 0.25]]).unwrap()
}

fn within(got: f64, want: f64, samples: u64, sds: f64) -> bool {
    let sd = (want * (1.0 - want) / samples as f64).sqrt().max(1e-12);
    (got - want).abs() <= sds * sd
}

#[test]
fn w_random_prefix_law_matches_exact_law() {
    let w = three_block();
    let samples = 200_000;
    for k in 2..=3 {
        let exact = prefix_law_exact(&w, k).unwrap();
        let emp = prefix_law_empirical(&GraphSource::WRandom(w.clone()), k, samples, &mut stream(21, k as u64)).unwrap();
        // per-outcome 4σ, Bonferroni-safe for at most 8 outcomes
        for g in all_labelled(k) {
            let p = to_f64(&exact.exact_prob(&g).unwrap());
            assert!(within(emp.prob(&g), p, samples, 4.0), "k={k} {g:?}: {} vs {p}", emp.prob(&g));
        }
        assert!(emp.total_variation(&exact) < 0.01);
    }
}

#[test]
fn empirical_law_converges_in_total_variation() {
    let w = three_block();
    let exact = prefix_law_exact(&w, 3).unwrap();
    let src = GraphSource::WRandom(w);
    let tv: Vec<f64> = [1_000u64, 16_000, 256_000]
        .iter()
        .map(|&n| prefix_law_empirical(&src, 3, n, &mut stream(22, n)).unwrap().total_variation(&exact))
        .collect();
    assert!(tv[0] > tv[1] && tv[1] > tv[2], "{tv:?}");
}

#[test]
fn mc_intervals_cover_the_exact_density() {
    let g = LabelledGraph::from_edges(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 0), (0, 3), (2, 5)]).unwrap();
    let f = LabelledGraph::path(3);
    let exact = to_f64(&t(&f, &g).unwrap());
    let covered = (0..50).filter(|&s| mc_t(&f, &g, 4_000, 0.05, &mut stream(23, s)).unwrap().contains(exact)).count();
    assert!(covered >= 45, "{covered}/50");
    let w = three_block();
    let k3 = LabelledGraph::complete(3);
    let exact = to_f64(&exact_density(&k3, &w).unwrap());
    let covered = (0..50).filter(|&s| mc_density(&k3, &w, 4_000, 0.05, &mut stream(24, s)).unwrap().contains(exact)).count();
    assert!(covered >= 45, "{covered}/50");
}

#[test]
fn mc_results_do_not_depend_on_thread_count() {
    let w = three_block();
    let f = LabelledGraph::complete(3);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_density(&f, &w, 50_000, DEFAULT_ALPHA, &mut stream(25, 0)).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn sampled_graphs_are_exchangeable() {
    let src = GraphSource::WRandom(three_block());
    let law = prefix_law_empirical(&src, 3, 100_000, &mut stream(26, 0)).unwrap();
    assert!(exchangeability_test(&law, 0.01).unwrap().is_consistent());
    // vertex 0 always isolated: not exchangeable
    let skewed = GraphSource::external(|n, rng| {
        let mut g = LabelledGraph::empty(n);
        for i in 1..n {
            for j in i + 1..n {
                if rng.next_u32() % 2 == 0 {
                    g.set_edge(i, j, true);
                }
            }
        }
        g
    });
    let law = prefix_law_empirical(&skewed, 3, 20_000, &mut stream(26, 1)).unwrap();
    assert!(!exchangeability_test(&law, 0.01).unwrap().is_consistent());
}

#[test]
fn large_sample_edge_density_concentrates() {
    let w = StepGraphon::boys_girls(0.5, 0.2, 0.4, 0.6).unwrap();
    let g = sample_w_random(&w, 400, &mut stream(27, 0)).unwrap();
    let density = g.edge_count() as f64 / (400.0 * 399.0 / 2.0);
    assert!((density - 0.45).abs() < 0.02, "{density}");
    let en = enumerate_unlabelled(3).unwrap();
    for f in en.iter().filter(|f| f.n() == 3) {
        let exact = to_f64(&exact_density(f.graph(), &w).unwrap());
        let got = to_f64(&t(f.graph(), &g).unwrap());
        assert!((exact - got).abs() < 0.03, "{f:?}: {got} vs {exact}");
    }
}

fn bip_kernel() -> BipartiteKernel {
    BipartiteKernel::from_f64(&[0.3, 0.7], &[0.5, 0.25, 0.25], &[vec![0.1, 0.5, 0.9], vec![0.4, 0.2, 0.6]]).unwrap()
}

#[test]
fn bipartite_sampler_agrees_with_exact_density() {
    let w = bip_kernel();
    let cross = BipartiteGraph::complete(1, 1);
    let path = BipartiteGraph::complete(1, 2);
    let square = BipartiteGraph::complete(2, 2);
    for (i, f) in [cross, path, square].iter().enumerate() {
        let exact = to_f64(&bip_exact_density(f, &w).unwrap());
        let est = bip_mc_density(f, &w, 100_000, DEFAULT_ALPHA, &mut stream(28, i as u64)).unwrap();
        assert!(within(est.point, exact, 100_000, 3.0), "{f:?}: {} vs {exact}", est.point);
    }
}

#[test]
fn bipartite_prefix_law_is_separately_exchangeable() {
    let src = BipartiteSource::Kernel(bip_kernel());
    let law = bip_prefix_law_empirical(&src, 2, 2, 100_000, &mut stream(29, 0)).unwrap();
    assert!(exchangeability_test(&law, 0.01).unwrap().is_consistent());
}

#[test]
fn bipartite_product_criterion_separates_mixtures() {
    let pairs = vec![(
        EdgePattern::from_edges(vec![(Side::Row(0), Side::Col(0))]),
        EdgePattern::from_edges(vec![(Side::Row(1), Side::Col(1))]),
    )];
    let fixed = BipartiteSource::Kernel(bip_kernel());
    let report = bip_extremality_test(&fixed, &pairs, 100_000, 0.01, &mut stream(30, 0)).unwrap();
    assert!(report.verdict.is_consistent(), "{report:?}");
    let c = |p| BipartiteKernel::constant(frac(p, 10)).unwrap();
    let mixture = BipartiteSource::mixture(vec![(0.5, c(2)), (0.5, c(8))]).unwrap();
    let report = bip_extremality_test(&mixture, &pairs, 100_000, 0.01, &mut stream(30, 1)).unwrap();
    assert!(!report.verdict.is_consistent());
}

#[test]
fn directed_edge_marginal_matches_sampler() {
    let k = DirectedKernelQuintuple::new(
        vec![frac(1, 3), frac(2, 3)],
        [
            vec![vec![frac(1, 2), frac(1, 5)], vec![frac(1, 5), int(0)]],
            vec![vec![frac(1, 4), frac(3, 5)], vec![frac(1, 10), frac(1, 2)]],
            vec![vec![frac(1, 4), frac(1, 10)], vec![frac(3, 5), frac(1, 2)]],
            vec![vec![int(0), frac(1, 10)], vec![frac(1, 10), int(0)]],
        ],
        vec![true, false],
    )
    .unwrap();
    let mut rng = stream(31, 0);
    let runs = 50_000u64;
    let hits = (0..runs).filter(|_| sample_directed(&k, 2, &mut rng).unwrap().has_edge(0, 1)).count();
    let p = to_f64(&k.edge_marginal());
    assert!(within(hits as f64 / runs as f64, p, runs, 3.0));
    let src = DirectedSource::kernel(k).unwrap();
    for size in [2, 3] {
        let law = directed_prefix_law_empirical(&src, size, 100_000, &mut stream(31, size as u64)).unwrap();
        assert!(exchangeability_test(&law, 0.01).unwrap().is_consistent());
    }
    let pairs = vec![(EdgePattern::from_edges(vec![(0, 1)]), EdgePattern::from_edges(vec![(2, 3), (3, 3)]))];
    let report = directed_extremality_test(&src, &pairs, 100_000, 0.01, &mut stream(31, 9)).unwrap();
    assert!(report.verdict.is_consistent());
}

#[test]
fn tournament_pair_orientation_is_fair() {
    let mut rng = stream(32, 0);
    let runs = 20_000u64;
    let forward = (0..runs).filter(|_| sample_directed(&tournament_kernel(), 2, &mut rng).unwrap().has_edge(0, 1)).count();
    assert!(within(forward as f64 / runs as f64, 0.5, runs, 3.0));
}

fn flag_blind(p: Rational) -> DirectedKernelQuadruplePlusP {
    let one = |x: Rational| vec![vec![x]];
    DirectedKernelQuadruplePlusP::flag_blind(vec![int(1)], [one(frac(1, 4)), one(frac(1, 4)), one(frac(1, 4)), one(frac(1, 4))], p).unwrap()
}

#[test]
fn loop_frequencies() {
    let n = 10_000;
    let seq = loop_sequence_law(flag_blind(frac(3, 10)).to_quintuple(), n, &mut stream(33, 0)).unwrap();
    let freq = seq.iter().filter(|&&l| l).count() as f64 / n as f64;
    assert!(within(freq, 0.3, n as u64, 3.0), "{freq}");

    let counts: Vec<usize> = (0..40)
        .map(|s| sample_directed_qp(&flag_blind(frac(3, 10)), 50, &mut stream(33, 100 + s)).unwrap().loop_count())
        .collect();
    let mean = counts.iter().sum::<usize>() as f64 / 40.0;
    assert!((mean - 15.0).abs() <= 3.0 * (50.0 * 0.21 / 40.0f64).sqrt(), "{mean}");

    // mixture over p in {0.1, 0.9}: per-graph frequencies sit near one of the two
    let (low, high) = (flag_blind(frac(1, 10)), flag_blind(frac(9, 10)));
    let mut rng = stream(33, 1);
    let mut seen = [0; 2];
    for s in 0..40 {
        let pick = rng.gen_bool(0.5);
        let k = if pick { &high } else { &low };
        let seq = loop_sequence_law(k.to_quintuple(), 1_000, &mut stream(33, 200 + s)).unwrap();
        let f = seq.iter().filter(|&&l| l).count() as f64 / 1_000.0;
        assert!((f - 0.1).abs() < 0.05 || (f - 0.9).abs() < 0.05, "{f}");
        seen[(f > 0.5) as usize] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0);

    let none = loop_sequence_law(&tournament_kernel(), 100, &mut stream(33, 2)).unwrap();
    assert!(none.iter().all(|&l| !l));
}
