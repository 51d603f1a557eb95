use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

use twchoose::algebra::{permanent_exact, permanent_mod, DiffMatrix, IndexFunction, IntMatrix};
use twchoose::certificates::{certify_d2, certify_orientation, verify_certificate, Certificate};
use twchoose::graph::{canonical_orientation, parse_graph, Graph, GraphFormat};
use twchoose::oracle::{gen_bounded_orientation, gen_d_degenerate, permanent_naive, BackDegree};
use twchoose::solver::{find_weighting, verify_proper, ListAssignment};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut it = bits.into_iter();
            for u in 0..n {
                for v in u + 1..n {
                    if it.next().unwrap() {
                        edges.push((u, v));
                    }
                }
            }
            Graph::new(n, edges).unwrap()
        })
    })
}

fn small_graph_with_eta() -> impl Strategy<Value = (Graph, IndexFunction)> {
    graph_strategy(5)
        .prop_filter("at most 5 edges", |g| g.edge_count() <= 5)
        .prop_flat_map(|g| {
            let (n, m) = (g.vertex_count(), g.edge_count());
            proptest::collection::vec(0..n + m, m).prop_map(move |picks| {
                let mut eta = IndexFunction::for_graph(&g);
                for z in picks {
                    if z < n {
                        eta.vertices[z] += 1;
                    } else {
                        eta.edges[z - n] += 1;
                    }
                }
                (g.clone(), eta)
            })
        })
}

fn matrix_strategy() -> impl Strategy<Value = IntMatrix> {
    (1usize..=6).prop_flat_map(|n| {
        proptest::collection::vec(proptest::collection::vec(-3i64..=3, n), n)
            .prop_map(|rows| IntMatrix::from_rows(rows).unwrap())
    })
}

fn lists_for(g: &Graph, seed: &[i64]) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let mut it = seed.iter().cycle().copied();
    let mut pick = |size: usize| {
        let mut l: Vec<i64> = (0..size).map(|_| it.next().unwrap()).collect();
        l.sort_unstable();
        l.dedup();
        l
    };
    let vertices = (0..g.vertex_count()).map(|_| pick(1)).collect();
    let edges = (0..g.edge_count()).map(|_| pick(2)).collect();
    (vertices, edges)
}

fn to_lists(vertices: &[Vec<i64>], edges: &[Vec<i64>]) -> ListAssignment {
    let conv = |ls: &[Vec<i64>]| -> Vec<Vec<BigRational>> {
        ls.iter()
            .map(|l| l.iter().map(|&x| BigRational::from_integer(x.into())).collect())
            .collect()
    };
    ListAssignment::new(conv(vertices), conv(edges)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ryser_matches_naive(m in matrix_strategy()) {
        let exact = permanent_exact(&m).unwrap();
        prop_assert_eq!(&exact, &permanent_naive(&m).unwrap());
        for p in [2u64, 3, 5, 7, 11] {
            let want = ((&exact % p as i64) + p as i64) % p as i64;
            prop_assert_eq!(BigInt::from(permanent_mod(&m, p).unwrap()), want);
        }
    }

    #[test]
    fn flipping_an_edge_keeps_the_magnitude((g, eta) in small_graph_with_eta(), flip in any::<prop::sample::Index>()) {
        prop_assume!(g.edge_count() > 0);
        let base = canonical_orientation(&g);
        let mut flipped = base.clone();
        flipped.flip(flip.index(g.edge_count()));
        let a = permanent_exact(&DiffMatrix::build(&g, &base).unwrap().assemble(&eta).unwrap()).unwrap();
        let b = permanent_exact(&DiffMatrix::build(&g, &flipped).unwrap().assemble(&eta).unwrap()).unwrap();
        prop_assert_eq!(a.clone(), -b.clone());
        prop_assert_eq!(a.abs(), b.abs());
    }

    #[test]
    fn shifting_vertex_lists_keeps_the_verdict(
        g in graph_strategy(5),
        seed in proptest::collection::vec(-2i64..=2, 1..12),
        shift in -5i64..=5,
        scale in prop_oneof![-3i64..=-1, 1i64..=3],
    ) {
        let (vertices, edges) = lists_for(&g, &seed);
        let base = find_weighting(&g, &to_lists(&vertices, &edges)).unwrap();
        let shifted: Vec<Vec<i64>> = vertices.iter().map(|l| l.iter().map(|x| x + shift).collect()).collect();
        let moved = find_weighting(&g, &to_lists(&shifted, &edges)).unwrap();
        prop_assert_eq!(base.is_some(), moved.is_some());
        let scaled_v: Vec<Vec<i64>> = vertices.iter().map(|l| { let mut l: Vec<i64> = l.iter().map(|x| x * scale).collect(); l.sort_unstable(); l }).collect();
        let scaled_e: Vec<Vec<i64>> = edges.iter().map(|l| { let mut l: Vec<i64> = l.iter().map(|x| x * scale).collect(); l.sort_unstable(); l }).collect();
        let scaled = find_weighting(&g, &to_lists(&scaled_v, &scaled_e)).unwrap();
        prop_assert_eq!(base.is_some(), scaled.is_some());
        if let Some(phi) = moved {
            prop_assert!(verify_proper(&g, &phi));
        }
    }

    #[test]
    fn graph6_round_trip(g in graph_strategy(12)) {
        let back = parse_graph(&g.to_graph6(), GraphFormat::Graph6).unwrap();
        prop_assert_eq!(&back, &g);
        let back = parse_graph(&g.to_edge_list(), GraphFormat::EdgeList).unwrap();
        prop_assert_eq!(&back, &g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d2_certificates_verify(n in 1usize..=8, seed in any::<u64>()) {
        let (g, _) = gen_d_degenerate(n, 2, BackDegree::Positive, seed);
        let c = certify_d2(&g, 2).unwrap();
        prop_assert!(verify_certificate(&g, &c).is_valid());
        let again = Certificate::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(certify_d2(&g, 2).unwrap().to_json(), c.to_json());
    }

    #[test]
    fn orientation_certificates_verify(n in 2usize..=8, k in 1usize..=3, acyclic in any::<bool>(), seed in any::<u64>()) {
        let (g, o) = gen_bounded_orientation(n, k, 16, acyclic, seed);
        let c = certify_orientation(&g, &o).unwrap();
        prop_assert!(verify_certificate(&g, &c).is_valid());
        prop_assert!(c.eta.max_vertex() as usize <= k && c.eta.max_edge() <= 1);
    }
}
