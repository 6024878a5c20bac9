use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::coherent::{wl_refine, Config};
use crate::design::Payload;
use crate::graph::{self, Graph};
use crate::partitions::{alpha, is_alpha_partition, johnson_scheme, subsets};
use crate::permgroup::PermGroup;

fn cc_of(g: &Graph) -> crate::coherent::CoherentConfig {
    wl_refine(&Config::from_graph(g)).unwrap()
}

fn opts(q: usize) -> SojOptions {
    SojOptions {
        q: Some(q),
        ..SojOptions::default()
    }
}

/// `V1` = the given sets, `V2` = points, incidence by membership.
fn incidence(m: usize, sets: &[Vec<usize>]) -> ColoredBipartite {
    ColoredBipartite::from_fn(sets.len(), m, |a, p| sets[a].contains(&p))
}

/// Largest set of pairwise swappable `V1` vertices, by explicit edge-set comparison.
fn brute_largest_symmetrical(x: &ColoredBipartite) -> usize {
    let n1 = x.n1;
    let swaps = |a: usize, b: usize| {
        x.colors1[a] == x.colors1[b]
            && (0..n1).all(|u| {
                let img = if u == a { b } else if u == b { a } else { u };
                (0..x.n2).all(|y| x.has_edge(u, y) == x.has_edge(img, y))
            })
    };
    let mut best = 0;
    for mask in 0u32..1 << n1 {
        let s: Vec<usize> = (0..n1).filter(|i| mask >> i & 1 == 1).collect();
        if s.len() >= 2 && s.len() > best && s.iter().all(|&a| s.iter().all(|&b| a == b || swaps(a, b))) {
            best = s.len();
        }
    }
    best
}

fn brute_hyper_twins(h: &Hypergraph, a: usize, b: usize) -> bool {
    let mut img: Vec<Vec<usize>> = h
        .edges
        .iter()
        .map(|e| {
            let mut f: Vec<usize> = e.iter().map(|&z| if z == a { b } else if z == b { a } else { z }).collect();
            f.sort_unstable();
            f
        })
        .collect();
    img.sort();
    img == h.edges
}

#[test]
fn hypergraph_twins_match_transposition_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..60 {
        let n = rng.gen_range(3..8);
        let d = rng.gen_range(1..n);
        let pool = subsets(n, d);
        let edges: Vec<Vec<usize>> = (0..rng.gen_range(1..8)).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        let h = Hypergraph::new(n, edges).unwrap();
        let classes = h.twin_classes();
        for a in 0..n {
            for b in 0..n {
                let same = classes.iter().any(|c| c.contains(&a) && c.contains(&b));
                assert_eq!(same, a == b || brute_hyper_twins(&h, a, b), "{h:?} {a} {b}");
            }
        }
    }
    let k = Hypergraph::new(5, subsets(5, 2)).unwrap();
    assert!(k.is_complete_uniform());
    assert_eq!(k.skeleton(1).edges.len(), 5);
}

#[test]
fn bipartite_defect_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let (n1, n2) = (rng.gen_range(1..9), rng.gen_range(1..4));
        let mut x = ColoredBipartite::from_fn(n1, n2, |_, _| rng.gen_bool(0.4));
        x.colors1 = (0..n1).map(|_| rng.gen_range(0..2)).collect();
        assert_eq!(x.largest_symmetrical(), brute_largest_symmetrical(&x));
        let norm = x.normalized();
        assert!(2 * norm.edge_count() <= n1 * n2);
        assert_eq!(norm.largest_symmetrical(), x.largest_symmetrical());
    }
}

#[test]
fn reduce_part2_examples() {
    // V1 = the 2-subsets of {0..4} as rows over C1 = {0..4}; C2 = {5, 6} is
    // constant, so all of V1 are twins there.
    let sets = subsets(5, 2);
    let x = ColoredBipartite::from_fn(10, 7, |a, y| y < 5 && sets[a].contains(&y) || y == 5);
    let x = x.clone().with_colors(vec![0; 10], vec![0, 0, 0, 0, 0, 1, 1]).unwrap();
    assert_eq!(reduce_part2_by_color(&x, &[0, 1, 2, 3, 4], alpha(3, 4)).unwrap(), 1);
    // Mirror image: both halves carry a copy of the rows, so side 1 wins the tie.
    let y = ColoredBipartite::from_fn(10, 6, |a, y| sets[a].contains(&(y % 3)) || (y >= 3 && sets[a].contains(&(y % 3 + 2))));
    let y = y.with_colors(vec![0; 10], vec![0, 0, 0, 1, 1, 1]).unwrap();
    if y.largest_symmetrical() == 0 {
        let j = reduce_part2_by_color(&y, &[0, 1, 2], alpha(3, 4)).unwrap();
        let all: Vec<usize> = (0..10).collect();
        assert!(crate::partitions::at_most(y.induced(&all, &[0, 1, 2]).largest_symmetrical(), alpha(3, 4), 10) == (j == 1));
    }
    // Not a union of color classes.
    assert!(reduce_part2_by_color(&x, &[0, 1], alpha(3, 4)).is_err());
    // Twins.
    let t = ColoredBipartite::from_fn(4, 2, |_, y| y == 0);
    assert!(reduce_part2_by_color(&t, &[0], alpha(3, 4)).is_err());
}

#[test]
fn reduce_part2_agrees_with_brute_defect() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut seen = 0;
    while seen < 40 {
        let n1 = rng.gen_range(4..10);
        let n2 = rng.gen_range(2..(3 * n1 / 4).max(3));
        let x = ColoredBipartite::from_fn(n1, n2, |_, _| rng.gen_bool(0.5));
        if x.largest_symmetrical() > 0 || n2 < 2 || 4 * n2 >= 3 * n1 {
            continue;
        }
        let k = rng.gen_range(1..n2);
        let x = x.with_colors(vec![0; n1], (0..n2).map(|y| u32::from(y >= k)).collect()).unwrap();
        let c1: Vec<usize> = (0..k).collect();
        let c2: Vec<usize> = (k..n2).collect();
        let all: Vec<usize> = (0..n1).collect();
        let ok = |c: &[usize]| 4 * brute_largest_symmetrical(&x.induced(&all, c)) <= 3 * n1;
        match reduce_part2_by_color(&x, &c1, alpha(3, 4)) {
            Ok(j) => assert_eq!(j, if ok(&c1) { 1 } else { 2 }),
            Err(e) => panic!("{e}: {} {}", ok(&c1), ok(&c2)),
        }
        seen += 1;
    }
}

#[test]
fn small_v2_base_case_discretizes() {
    // The six nonempty proper subsets of three points.
    let sets: Vec<Vec<usize>> = vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]];
    let soj = Soj::new(SojOptions::default());
    let out = soj.bipartite(&incidence(3, &sets), alpha(3, 4)).unwrap();
    assert!(soj.fired("step2"));
    assert_eq!(out.len(), 1);
    match &out[0].payload {
        Payload::Split(p) => assert_eq!(p.blocks().len(), 6),
        _ => panic!("{}", out[0].dump()),
    }
}

#[test]
fn lines_of_five_points_give_johnson() {
    let sets = subsets(5, 2);
    let soj = Soj::new(opts(0));
    let out = soj.bipartite(&incidence(5, &sets), alpha(3, 4)).unwrap();
    assert!(soj.fired("design-case1"), "{:?}", soj.report());
    assert_eq!(out.len(), 1);
    match &out[0].payload {
        Payload::Johnson(j) => {
            assert_eq!((j.m, j.t, j.w.len()), (5, 2, 10));
            assert_eq!(j.labels, sets);
        }
        _ => panic!("{}", out[0].dump()),
    }
    let (case, moves) = soj.block_design_case(&incidence(5, &sets), alpha(3, 4)).unwrap();
    assert_eq!(case, "1");
    assert!(matches!(moves[0], Move::Done(Payload::Johnson(_))));
}

#[test]
fn twin_classes_split_at_step_six() {
    // Two classes of four twins over two points.
    let x = ColoredBipartite::from_fn(8, 2, |a, y| (a < 4) == (y == 0));
    let soj = Soj::new(opts(0));
    let out = soj.bipartite(&x, alpha(3, 4)).unwrap();
    assert!(soj.fired("step6"));
    match &out[0].payload {
        Payload::Split(p) => assert_eq!(p.blocks(), &[vec![0, 1, 2, 3], vec![4, 5, 6, 7]]),
        _ => panic!(),
    }
}

#[test]
fn block_design_routes() {
    assert_eq!(block_design_route(10, 8).unwrap(), BlockRoute::Skeleton(6));
    assert_eq!(block_design_route(3, 8).unwrap(), BlockRoute::Design);
    assert_eq!(block_design_route(7, 8).unwrap(), BlockRoute::Design);
}

#[test]
fn block_design_case_two_on_a_large_twin_class() {
    // Lines of points 0..4 with an isolated point 5: twin class of 5 of 6.
    let x = incidence(6, &subsets(5, 2));
    let soj = Soj::new(opts(0));
    let (case, moves) = soj.block_design_case(&x, alpha(3, 4)).unwrap();
    assert_eq!(case, "2");
    assert_eq!(moves.len(), 1);
    assert!(matches!(&moves[0], Move::Restrict { keep, .. } if keep == &vec![0, 1, 2, 3, 4]));
}

#[test]
fn contraction_is_semiregular() {
    // V1 = 2-subsets of 6 points, V2 = points in blocks {0,3}, {1,4}, {2,5}.
    let sets = subsets(6, 2);
    let blocks = vec![vec![0, 3], vec![1, 4], vec![2, 5]];
    let y = contract_blocks(15, &blocks, |a, p| sets[a].contains(&p));
    assert_eq!((y.n1, y.n2), (15, 3));
    for a in 0..15 {
        let expect = blocks.iter().filter(|b| b.iter().any(|p| sets[a].contains(p))).count();
        assert_eq!(y.neighbors(a).len(), expect);
    }
    let per_block: Vec<usize> = (0..3).map(|i| (0..15).filter(|&a| y.has_edge(a, i)).count()).collect();
    assert_eq!(per_block, vec![9, 9, 9]);
}

#[test]
fn imprimitive_case_picks_defect_rich_blocks() {
    // V2 = hexagon with antipodal blocks; V1 = its 6 edges and 3 diameters.
    let sets: Vec<Vec<usize>> = (0..6).map(|i| vec![i, (i + 1) % 6]).chain((0..3).map(|i| vec![i, i + 3])).collect();
    let x = incidence(6, &sets);
    let blocks = vec![vec![0, 3], vec![1, 4], vec![2, 5]];
    let moves = Soj::new(opts(0)).imprimitive_case(&x, &blocks).unwrap();
    assert_eq!(moves.len(), 3);
    for (mv, b) in moves.iter().zip(&blocks) {
        let Move::Restrict { keep, edges: Some(z), significant: true } = mv else { panic!("{mv:?}") };
        assert_eq!(keep, b);
        assert!(2 * brute_largest_symmetrical(z) <= 9);
    }
}

/// `J(m, 2)` as the binary structure of its pair graph.
fn johnson_graph(m: usize) -> Graph {
    graph::johnson(m, 2)
}

#[test]
fn upcc_examples() {
    let soj = Soj::new(SojOptions::default());
    // J(5,2): individualizing a pair leaves classes of sizes 1, 6, 3, all
    // at most 3/4 of 10, so every choice splits.
    let cc = cc_of(&johnson_graph(5));
    let out = soj.upcc(&cc, alpha(3, 4)).unwrap();
    assert_eq!(out.len(), 10);
    let s = subsets(5, 2);
    for (x, o) in out.iter().enumerate() {
        let Payload::Split(p) = &o.payload else { panic!("{}", o.dump()) };
        let mut sizes: Vec<usize> = p.color_classes().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        let meet = |k: usize| s.iter().filter(|b| b.iter().filter(|g| s[x].contains(g)).count() == k).count();
        let mut expect = vec![meet(2), meet(1), meet(0)];
        expect.sort_unstable();
        assert_eq!(sizes, expect);
    }
    let paley = soj.upcc(&cc_of(&graph::paley(13)), alpha(3, 4)).unwrap();
    assert!(paley.iter().all(|o| matches!(&o.payload, Payload::Split(p) if is_alpha_partition(p, alpha(3, 4)))));
    assert!(soj.upcc(&cc_of(&graph::complete(5)), alpha(3, 4)).is_err());
}

#[test]
fn upcc_reduction_through_the_bipartite_procedure() {
    // J(12,2) at beta = 2/3: the 45 disjoint pairs are more than 44.
    let soj = Soj::new(opts(0));
    let cc = cc_of(&johnson_graph(12));
    let out = soj.upcc(&cc, alpha(2, 3)).unwrap();
    assert_eq!(out.len(), 66);
    let pairs = subsets(12, 2);
    for (x, o) in out.iter().enumerate() {
        // The pairs missing x, labeled by the 10 remaining points.
        let Payload::Johnson(j) = &o.payload else { panic!("{}", o.dump()) };
        assert_eq!((j.m, j.t, j.w.len()), (10, 2, 45));
        assert!(j.w.iter().all(|&y| pairs[y].iter().all(|g| !pairs[x].contains(g))));
    }
    assert!(soj.fired("imprimitive") && soj.fired("design-case1"), "{:?}", soj.report());
}

#[test]
fn extended_design_examples() {
    let soj = Soj::new(SojOptions::default());
    let c5 = soj.extended(&Structure::from_graph(&graph::cycle(5)), alpha(3, 4)).unwrap();
    assert!(soj.fired("extended-upcc"));
    for o in &c5 {
        o.validate(5).unwrap();
    }
    let j7 = soj.extended(&Structure::from_graph(&johnson_graph(7)), alpha(3, 4)).unwrap();
    // Classes 1, 10, 10 of 21 after one individualization.
    assert!(j7.iter().all(|o| o.tag() == "SPLIT"));
    let p3 = soj.extended(&Structure::from_graph(&graph::path(4)), alpha(3, 4)).unwrap();
    assert!(p3.iter().all(|o| o.tag() == "SPLIT"));
}

/// Triangles of 7 points over the pairs they contain.
fn triangles_over_pairs() -> (ColoredBipartite, Vec<Vec<usize>>) {
    let tri = subsets(7, 3);
    let pairs = subsets(7, 2);
    let x = ColoredBipartite::from_fn(35, 21, |a, y| pairs[y].iter().all(|p| tri[a].contains(p)));
    (x, pairs)
}

#[test]
fn johnson_small_part_full_test_sets_recover_points() {
    let (x, pairs) = triangles_over_pairs();
    let soj = Soj::new(SojOptions {
        q: Some(0),
        ell: Some(3),
        ..SojOptions::default()
    });
    let out = soj.johnson_small_part(&x, 7, &pairs, alpha(3, 4)).unwrap();
    assert!(soj.fired("johnson-caseB2"), "{:?}", soj.report());
    assert!(soj.fired("johnson-b2-replace"));
    assert_eq!(out.len(), 1);
    match &out[0].payload {
        Payload::Johnson(j) => {
            assert_eq!((j.m, j.t, j.w.len()), (7, 3, 35));
            let scheme = johnson_scheme(7, 3).unwrap();
            assert!(crate::partitions::is_johnson_bijection(7, &j.labels));
            assert_eq!(j.labels.len(), scheme.n());
        }
        _ => panic!("{}", out[0].dump()),
    }
}

#[test]
fn johnson_small_part_small_ground_discretizes() {
    let (x, pairs) = triangles_over_pairs();
    let soj = Soj::new(opts(0));
    let out = soj.johnson_small_part(&x, 7, &pairs, alpha(3, 4)).unwrap();
    assert!(soj.fired("johnson-small-m"));
    match &out[0].payload {
        Payload::Split(p) => assert_eq!(p.blocks().len(), 35),
        _ => panic!(),
    }
}

#[test]
fn minimal_support_avoiding_one_point() {
    // All 2-sets avoiding point g: S = {g}.
    for g in 0..6 {
        let edges: Vec<Vec<usize>> = subsets(6, 2).into_iter().filter(|s| !s.contains(&g)).collect();
        assert_eq!(minimal_support(&Hypergraph::new(6, edges).unwrap()), Some(vec![g]));
    }
    let c6: Vec<Vec<usize>> = (0..6).map(|i| vec![i, (i + 1) % 6]).collect();
    assert_eq!(minimal_support(&Hypergraph::new(6, c6).unwrap()), None);
}

#[test]
fn case5_classes() {
    // Gamma = pairs of 6 points (15), V2 = pairs of Gamma (105).
    let gamma = subsets(6, 2);
    let v2 = subsets(15, 2);
    let (p, r) = case5_partition(&v2, &gamma).unwrap();
    // Disjoint pairs of pairs: 45, in classes by their 4-point union, 3 each.
    assert_eq!(r, 105 - 45);
    assert_eq!(p.blocks().iter().filter(|b| b.len() == 3).count(), 15);
}

fn shapes(out: &[Outcome]) -> Vec<(String, Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    let mut v: Vec<_> = out
        .iter()
        .map(|o| match &o.payload {
            Payload::Split(p) => {
                let mut cc = p.color_classes();
                cc.sort();
                ("SPLIT".to_string(), cc, p.blocks().to_vec())
            }
            Payload::Johnson(j) => ("JOHNSON".to_string(), vec![j.w.clone()], Vec::new()),
            Payload::Upcc { w, .. } => ("UPCC".to_string(), vec![w.clone()], Vec::new()),
        })
        .collect();
    v.sort();
    v
}

/// Unions of `Z_m`-orbits of `t`-subsets over the points.
fn cyclic_instance(rng: &mut ChaCha8Rng) -> ColoredBipartite {
    loop {
        let m = rng.gen_range(5..=9);
        let t = rng.gen_range(2..=3);
        let mut sets: Vec<Vec<usize>> = Vec::new();
        for s in subsets(m, t) {
            if s[0] == 0 && rng.gen_bool(0.5) {
                for r in 0..m {
                    let mut u: Vec<usize> = s.iter().map(|&g| (g + r) % m).collect();
                    u.sort_unstable();
                    if !sets.contains(&u) {
                        sets.push(u);
                    }
                }
            }
        }
        if 4 * m < 3 * sets.len() {
            return incidence(m, &sets);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bipartite_outcomes_are_valid_and_functorial(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = cyclic_instance(&mut rng);
        let soj = Soj::new(SojOptions { q: Some(0), c0: 2, ..SojOptions::default() });
        let out = soj.bipartite(&x, alpha(3, 4)).unwrap();
        prop_assert!(!out.is_empty());
        for o in &out {
            prop_assert!(o.validate(x.n1).is_ok());
        }
        let p1 = PermGroup::symmetric(x.n1).random_element(&mut rng);
        let p2 = PermGroup::symmetric(x.n2).random_element(&mut rng);
        let moved = soj.bipartite(&x.permuted(&p1, &p2), alpha(3, 4)).unwrap();
        let expect: Vec<Outcome> = out.iter().map(|o| o.permuted(&p1)).collect();
        prop_assert_eq!(shapes(&moved), shapes(&expect));
    }

    #[test]
    fn upcc_outcomes_are_valid_and_functorial(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = match rng.gen_range(0..4) {
            0 => graph::paley([5, 13, 17][rng.gen_range(0..3)]),
            1 => johnson_graph(rng.gen_range(5..=7)),
            2 => graph::cycle([5, 7][rng.gen_range(0..2)]),
            _ => graph::petersen(),
        };
        let cc = cc_of(&g);
        let soj = Soj::new(SojOptions { q: Some(0), ..SojOptions::default() });
        let beta = [alpha(2, 3), alpha(3, 4), alpha(4, 5)][rng.gen_range(0..3)];
        let out = soj.upcc(&cc, beta).unwrap();
        let pi = PermGroup::symmetric(g.n()).random_element(&mut rng);
        let moved = soj.upcc(&cc_of(&g.permuted(&pi)), beta).unwrap();
        let expect: Vec<Outcome> = out.iter().map(|o| o.permuted(&pi)).collect();
        prop_assert_eq!(shapes(&moved), shapes(&expect));
    }
}



/// `V1` = unions of `Z_m`-orbits of `k`-subsets, `V2` = all `t`-subsets, by containment.
fn orbit_instance(rng: &mut ChaCha8Rng, t: usize) -> (ColoredBipartite, usize, Vec<Vec<usize>>) {
    loop {
        let m = rng.gen_range(7..=9);
        let k = rng.gen_range(t + 1..=4);
        let mut sets: Vec<Vec<usize>> = Vec::new();
        for s in subsets(m, k) {
            if s[0] == 0 && rng.gen_bool(0.4) {
                for r in 0..m {
                    let mut u: Vec<usize> = s.iter().map(|&g| (g + r) % m).collect();
                    u.sort_unstable();
                    if !sets.contains(&u) {
                        sets.push(u);
                    }
                }
            }
        }
        let v2 = subsets(m, t);
        if 4 * v2.len() < 3 * sets.len() {
            let x = ColoredBipartite::from_fn(sets.len(), v2.len(), |a, y| v2[y].iter().all(|g| sets[a].contains(g)));
            return (x, m, v2);
        }
    }
}


proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn labeled_pairs_outcomes_are_valid_and_functorial(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, m, v2) = orbit_instance(&mut rng, 2);
        let soj = Soj::new(SojOptions { q: Some(0), c0: 2, ell: Some(3), ..SojOptions::default() });
        let out = soj.johnson_small_part(&x, m, &v2, alpha(3, 4)).unwrap();
        for o in &out {
            prop_assert!(o.validate(x.n1).is_ok());
        }
        // Relabel V1 and the ground; V2 follows the ground.
        let p1 = PermGroup::symmetric(x.n1).random_element(&mut rng);
        let pg = PermGroup::symmetric(m).random_element(&mut rng);
        let img: Vec<Vec<usize>> = v2
            .iter()
            .map(|s| {
                let mut u: Vec<usize> = s.iter().map(|&g| pg.apply(g)).collect();
                u.sort_unstable();
                u
            })
            .collect();
        let p2 = Perm::from_images(img.iter().map(|u| v2.iter().position(|s| s == u).unwrap()).collect()).unwrap();
        let moved = soj.johnson_small_part(&x.permuted(&p1, &p2), m, &v2, alpha(3, 4)).unwrap();
        let expect: Vec<Outcome> = out.iter().map(|o| o.permuted(&p1)).collect();
        prop_assert_eq!(shapes(&moved), shapes(&expect));
        let plain = soj.bipartite(&x, alpha(3, 4)).unwrap();
        prop_assert!(plain.iter().all(|o| o.validate(x.n1).is_ok()));
    }
}
