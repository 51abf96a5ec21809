use gmbclust::sampler::{Draw, MoveCounters, TraceMetadata};
use gmbclust::summaries::{
    minvi_from_candidates, minvi_point_estimate, ppi, threshold_graph, vi_distance, vi_lower_bound,
};
use gmbclust::{Partition, PpiMatrix, SimilarityMatrix, Trace};
use proptest::prelude::*;

fn trace(n: usize, q: usize, draws: Vec<(Vec<usize>, Vec<Vec<[usize; 2]>>)>) -> Trace {
    Trace {
        draws: draws
            .into_iter()
            .enumerate()
            .map(|(s, (assignments, graphs))| Draw {
                iter: s,
                k: graphs.len(),
                alpha: 1.0,
                assignments,
                graphs,
            })
            .collect(),
        meta: TraceMetadata {
            n,
            q,
            seed: 0,
            iterations: 0,
            burn_in: 0,
            thin: 1,
            baseline_mode: false,
            graph_moves: MoveCounters::default(),
            acceptance_rate: 0.0,
        },
    }
}

fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        let k = cur.iter().copied().max().unwrap_or(0);
        for l in 1..=k + 1 {
            cur.push(l);
            rec(i + 1, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

#[test]
fn two_draw_point_estimate_matches_exhaustive_expected_vi() {
    let draws = [vec![1usize, 1, 2], vec![1, 2, 2]];
    let sim = SimilarityMatrix::from_partitions(3, draws.iter().map(|d| d.as_slice())).unwrap();
    assert_eq!(sim.get(0, 1), 0.5);
    assert_eq!(sim.get(1, 2), 0.5);
    assert_eq!(sim.get(0, 2), 0.0);

    let expected_vi = |c: &Partition| -> f64 {
        draws
            .iter()
            .map(|d| 0.5 * vi_distance(c, &Partition::from_labels(d)).unwrap())
            .sum()
    };
    let lattice = set_partitions(3);
    assert_eq!(lattice.len(), 5);
    let best = lattice
        .iter()
        .map(|c| expected_vi(&Partition::from_labels(c)))
        .fold(f64::INFINITY, f64::min);

    let est = minvi_from_candidates(draws.iter().map(|d| d.as_slice()), &sim).unwrap();
    assert!((expected_vi(&est) - best).abs() < 1e-12);
    assert!((best - 0.462_098_120_373).abs() < 1e-9, "{best}");
    assert_eq!(est.labels(), &[1, 1, 2]);
}

#[test]
fn separated_similarity_returns_block_partition() {
    let truth = vec![1usize, 1, 2, 2, 2, 3];
    let sim = SimilarityMatrix::from_partitions(6, [truth.as_slice()]).unwrap();
    let candidates = [vec![1usize, 1, 1, 1, 1, 1], truth.clone(), vec![1, 2, 3, 4, 5, 6]];
    let est = minvi_from_candidates(candidates.iter().map(|c| c.as_slice()), &sim).unwrap();
    assert_eq!(est.labels(), truth.as_slice());
    assert!(vi_lower_bound(&est, &sim).unwrap().abs() < 1e-12);
}

#[test]
fn identical_draws_give_that_partition() {
    let t = trace(4, 2, vec![(vec![1, 2, 1, 2], vec![vec![], vec![]]); 5]);
    let sim = SimilarityMatrix::from_trace(&t).unwrap();
    assert_eq!(minvi_point_estimate(&t, &sim).unwrap().labels(), &[1, 2, 1, 2]);
}

#[test]
fn empty_trace_errors() {
    let t = trace(3, 2, vec![]);
    assert!(SimilarityMatrix::from_trace(&t).is_err());
    assert!(ppi(&t, 0).is_err());
}

#[test]
fn vi_reference_values() {
    let a = Partition::from_labels(&[1, 1, 2, 2]);
    let b = Partition::from_labels(&[1, 2, 1, 2]);
    assert!((vi_distance(&a, &b).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
    let one = Partition::from_labels(&[1; 8]);
    let singletons = Partition::from_labels(&[1, 2, 3, 4, 5, 6, 7, 8]);
    assert!((vi_distance(&one, &singletons).unwrap() - 8f64.ln()).abs() < 1e-12);
    assert!(vi_distance(&a, &Partition::from_labels(&[1, 2, 3])).is_err());
}

#[test]
fn ppi_examples() {
    let tri = vec![[0, 1], [0, 2], [1, 2]];
    let t = trace(2, 3, vec![(vec![1, 2], vec![tri.clone(), vec![]]); 3]);
    let p = ppi(&t, 0).unwrap();
    let e = ppi(&t, 1).unwrap();
    for u in 0..3 {
        for v in 0..3 {
            assert_eq!(p.get(u, v), if u == v { 0.0 } else { 1.0 });
            assert_eq!(e.get(u, v), 0.0);
        }
    }
    assert!(ppi(&t, 2).is_err());

    let t = trace(
        1,
        3,
        vec![(vec![1], vec![vec![[0, 1]]]), (vec![1], vec![vec![[0, 1], [1, 2]]])],
    );
    let p = ppi(&t, 0).unwrap();
    assert_eq!(p.get(0, 1), 1.0);
    assert_eq!(p.get(1, 2), 0.5);
    assert_eq!(p.get(2, 1), 0.5);
    assert_eq!(p.get(0, 2), 0.0);
    let g = threshold_graph(&p, 0.5).unwrap();
    assert!(g.has_edge(0, 1) && !g.has_edge(1, 2));
    assert!(threshold_graph(&p, 1.0).is_err());
    assert!(threshold_graph(&p, 0.0).is_err());
}

#[test]
fn threshold_extremes() {
    let ones = PpiMatrix::from_values(4, (0..16).map(|i| if i % 5 == 0 { 0.0 } else { 1.0 }).collect())
        .unwrap();
    assert_eq!(threshold_graph(&ones, 0.5).unwrap().edge_count(), 6);
    let zeros = PpiMatrix::from_values(4, vec![0.0; 16]).unwrap();
    assert_eq!(threshold_graph(&zeros, 0.5).unwrap().edge_count(), 0);
}

#[test]
fn heatmap_is_binary_pgm() {
    let sim = SimilarityMatrix::from_partitions(3, [[1usize, 2, 1].as_slice()]).unwrap();
    let order = Partition::from_labels(&[1, 2, 1]).heatmap_order();
    assert_eq!(order, vec![0, 2, 1]);
    let mut buf = Vec::new();
    sim.write_pgm(&mut buf, &order).unwrap();
    let header = b"P5\n3 3\n255\n";
    assert_eq!(&buf[..header.len()], header);
    assert_eq!(&buf[header.len()..], &[0, 0, 255, 0, 0, 255, 255, 255, 0]);
}

fn labels_strategy() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (1usize..9).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(prop::collection::vec(1usize..4, n), 1..12),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn similarity_matches_pairwise_recount((n, draws) in labels_strategy()) {
        let sim = SimilarityMatrix::from_partitions(n, draws.iter().map(|d| d.as_slice())).unwrap();
        for i in 0..n {
            prop_assert_eq!(sim.get(i, i), 1.0);
            for j in 0..n {
                let together = draws.iter().filter(|d| d[i] == d[j]).count();
                prop_assert_eq!(sim.get(i, j), together as f64 / draws.len() as f64);
                prop_assert_eq!(sim.get(i, j), sim.get(j, i));
            }
        }
    }

    #[test]
    fn returned_partition_minimizes_bound((n, draws) in labels_strategy()) {
        let sim = SimilarityMatrix::from_partitions(n, draws.iter().map(|d| d.as_slice())).unwrap();
        let est = minvi_from_candidates(draws.iter().map(|d| d.as_slice()), &sim).unwrap();
        let lb = vi_lower_bound(&est, &sim).unwrap();
        prop_assert!(draws.iter().any(|d| Partition::from_labels(d) == est));
        for d in &draws {
            prop_assert!(lb <= vi_lower_bound(&Partition::from_labels(d), &sim).unwrap() + 1e-12);
        }
    }

    #[test]
    fn vi_ignores_relabeling(a in prop::collection::vec(0usize..4, 1..10), shift in 1usize..50) {
        let b: Vec<usize> = a.iter().map(|l| (l * 7 + shift) % 97).collect();
        let pa = Partition::from_labels(&a);
        let pb = Partition::from_labels(&b);
        prop_assert_eq!(&pa, &pb);
        prop_assert!(vi_distance(&pa, &pb).unwrap().abs() < 1e-12);
        prop_assert!(pa.labels().iter().copied().max().unwrap() == pa.k());
    }
}
