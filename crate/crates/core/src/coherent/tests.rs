use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::{self, Graph};
use crate::permgroup::PermGroup;

fn wl(g: &Graph) -> CoherentConfig {
    wl_refine(&Config::from_graph(g)).unwrap()
}

fn automorphisms(g: &Graph) -> Vec<Perm> {
    PermGroup::symmetric(g.n())
        .elements()
        .into_iter()
        .filter(|p| g.is_isomorphism(g, p))
        .collect()
}

/// Axiom (iv) by counting every triple, independent of the stored table.
fn brute_coherent(c: &Config) -> bool {
    let n = c.n();
    let mut seen: HashMap<u32, Vec<u32>> = HashMap::new();
    for x in 0..n {
        for y in 0..n {
            let mut counts = vec![0u32; c.rank() * c.rank()];
            for z in 0..n {
                counts[c.c(x, z) as usize * c.rank() + c.c(z, y) as usize] += 1;
            }
            match seen.get(&c.c(x, y)) {
                None => {
                    seen.insert(c.c(x, y), counts);
                }
                Some(v) if *v != counts => return false,
                _ => {}
            }
        }
    }
    true
}

#[test]
fn clique_cycle_petersen() {
    let k5 = wl(&graph::complete(5));
    assert_eq!(k5.rank(), 2);
    assert_eq!(classify(&k5), Classification::Clique);

    let c5 = wl(&graph::cycle(5));
    assert_eq!(c5.rank(), 3);
    assert!(c5.is_homogeneous());
    assert_eq!(classify(&c5), Classification::Upcc);
    assert!(brute_coherent(c5.config()));

    let pet = wl(&graph::petersen());
    assert_eq!(pet.rank(), 3);
    let e = pet.c(0, 1);
    assert_eq!(pet.p(e, e, e), 0);
    assert_eq!(classify(&pet), Classification::Upcc);
}

#[test]
fn six_cycle_is_imprimitive() {
    let c6 = wl(&graph::cycle(6));
    match classify(&c6) {
        Classification::HomogeneousImprimitive { color, blocks } => {
            assert_eq!(color, c6.c(0, 3));
            assert_eq!(blocks, vec![vec![0, 3], vec![1, 4], vec![2, 5]]);
        }
        other => panic!("{other:?}"),
    }
    let two_triangles = graph::cycle(3).disjoint_union(&graph::cycle(3));
    let t = wl(&two_triangles);
    let e = t.c(0, 1);
    assert_eq!(t.p(e, e, e), 1);
    let e6 = c6.c(0, 1);
    assert_eq!(c6.p(e6, e6, e6), 0);
    assert_eq!(classify(&wl(&graph::complete(7))), Classification::Clique);
}

#[test]
fn kdim_two_matches_classical() {
    let g = graph::petersen();
    let a = wl_refine_kdim(&Structure::from_graph(&g), 2, &WlOptions::default()).unwrap();
    let b = wl(&g);
    assert!(a.same_partition(b.config()));
}

#[test]
fn kdim_on_five_cycle_with_individualized_vertex() {
    // The stabilizer of a vertex in D5 has vertex orbits of sizes 1, 2, 2,
    // and refinement cannot split orbits.
    let s = Structure::from_graph(&graph::cycle(5));
    let init = Structure::new(5, 3, s.relations.clone()).unwrap().initial_config().unwrap();
    let out = wl::refine_kdim(&init.individualize(&[0]), &WlOptions::default()).unwrap();
    check_k_coherent(&out).unwrap();
    let mut sizes: Vec<usize> = out.vertex_classes().iter().map(|c| c.len()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![1, 2, 2]);
    let stab: Vec<Perm> = automorphisms(&graph::cycle(5)).into_iter().filter(|p| p.apply(0) == 0).collect();
    assert_eq!(stab.len(), 2);
}

#[test]
fn kdim_errors() {
    let s = Structure::from_graph(&graph::cycle(4));
    assert!(wl_refine_kdim(&s, 5, &WlOptions::default()).is_err());
    let tiny = WlOptions { memory_budget: 10 };
    assert!(matches!(wl_refine_kdim(&s, 3, &tiny), Err(Error::Resource(_))));
}

#[test]
fn twin_examples() {
    // Path 0-1-2 with two extra leaves 3, 4 on vertex 2.
    let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (2, 4)]).unwrap();
    let cc = wl(&g);
    assert!(strong_twins(&cc, 3, 4));
    assert!(!strong_twins(&cc, 0, 3));
    let star = wl(&graph::star(3));
    assert_eq!(twin_classes(&star, TwinKind::Strong).unwrap(), vec![vec![1, 2, 3]]);
    let c5 = wl(&graph::cycle(5));
    for x in 0..5 {
        for y in 0..5 {
            assert!(!weak_twins(&c5, x, y));
        }
    }
}

#[test]
fn directed_triangle_has_weak_twins() {
    let mut colors = vec![0u32; 9];
    for x in 0..3 {
        colors[x * 3 + (x + 1) % 3] = 1;
        colors[x * 3 + (x + 2) % 3] = 2;
    }
    let cc = wl_refine(&Config::new(3, 2, colors).unwrap()).unwrap();
    assert!(weak_twins(&cc, 0, 1));
    assert!(!strong_twins(&cc, 0, 1));
    assert_eq!(twin_classes(&cc, TwinKind::Weak).unwrap(), vec![vec![0, 1, 2]]);
}

#[test]
fn skeleton_induced_individualize() {
    let c6 = wl(&graph::cycle(6));
    assert_eq!(c6.config().skeleton(2).unwrap(), *c6.config());
    assert!(c6.config().skeleton(3).is_err());
    let sub = c6.config().induced(&[0, 2, 4]);
    assert_eq!(sub.n(), 3);
    let ind = wl_refine(&Config::from_graph(&graph::cycle(6)).individualize(&[0])).unwrap();
    let sizes: Vec<usize> = ind.vertex_classes().iter().map(|c| c.len()).collect();
    let mut sorted = sizes.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![1, 1, 2, 2]);
}

#[test]
fn malformed_configs_are_rejected() {
    // Diagonal and an off-diagonal pair share a color.
    let colors = vec![0, 0, 1, 0];
    let err = wl_refine(&Config::new(2, 2, colors).unwrap()).unwrap_err();
    assert!(matches!(err, Error::Axiom { axiom: "ii", .. }));
    // (0,1) and (1,0) differ but (0,1),(0,2) agree while their converses differ.
    let mut colors = vec![0u32; 9];
    colors[1] = 1;
    colors[2] = 1;
    colors[3] = 2;
    colors[5] = 3;
    colors[6] = 3;
    colors[7] = 2;
    let err = Config::new(3, 2, colors).unwrap().validate().unwrap_err();
    assert!(matches!(err, Error::Axiom { axiom: "iii", .. }));
}

#[test]
fn dump_format() {
    let d = wl(&graph::complete(2)).config().dump();
    assert_eq!(d, "arity 2 rank 2 n 2\ncolor 0: (1,1) (2,2)\ncolor 1: (1,2) (2,1)\n");
}

#[test]
fn twins_match_automorphisms_on_small_graphs() {
    for n in 2..=6 {
        for g in graph::all_graphs(n) {
            let cc = wl(&g);
            let auts = automorphisms(&g);
            for x in 0..n {
                for y in 0..n {
                    if x == y {
                        continue;
                    }
                    let t = Perm::transposition(n, x, y);
                    assert_eq!(strong_twins(&cc, x, y), auts.contains(&t), "{g:?} {x} {y}");
                    let weak = auts.contains(&t)
                        || (0..n).any(|z| z != x && z != y && auts.contains(&Perm::from_cycles(n, &[vec![x, y, z]]).unwrap()));
                    assert_eq!(weak_twins(&cc, x, y), weak, "{g:?} {x} {y}");
                }
            }
        }
    }
}

fn random_graph(seed: u64, max: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rand::Rng::gen_range(&mut rng, 1..=max);
    let p = rand::Rng::gen_range(&mut rng, 0.1..0.9);
    graph::random(n, p, &mut rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn refinement_is_coherent_and_refines(seed in any::<u64>()) {
        let g = random_graph(seed, 14);
        let init = Config::from_graph(&g);
        let cc = wl(&g);
        prop_assert!(cc.config().refines(&init));
        prop_assert!(brute_coherent(cc.config()));
        prop_assert!(cc.verify().is_ok());
        let again = wl_refine(cc.config()).unwrap();
        prop_assert_eq!(again.rank(), cc.rank());
    }

    #[test]
    fn refinement_is_canonical(seed in any::<u64>()) {
        let g = random_graph(seed, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let p = PermGroup::symmetric(g.n()).random_element(&mut rng);
        let a = wl(&g.permuted(&p));
        let b = wl(&g).permuted(&p);
        prop_assert_eq!(a.config(), b.config());
        prop_assert_eq!(classify(&a).clone(), match classify(&wl(&g)) {
            Classification::HomogeneousImprimitive { color, blocks } => {
                let mut bl: Vec<Vec<usize>> = blocks.iter().map(|b| { let mut v: Vec<usize> = b.iter().map(|&x| p.apply(x)).collect(); v.sort_unstable(); v }).collect();
                bl.sort();
                Classification::HomogeneousImprimitive { color, blocks: bl }
            }
            other => other,
        });
    }

    #[test]
    fn kdim_is_coherent(seed in any::<u64>()) {
        let g = random_graph(seed, 7);
        prop_assume!(g.n() >= 3);
        let s = Structure::from_graph(&g);
        let out = wl_refine_kdim(&s, 3, &WlOptions::default()).unwrap();
        prop_assert!(check_k_coherent(&out).is_ok());
        let sk = out.skeleton(2).unwrap();
        prop_assert!(CoherentConfig::new(sk).is_ok());
    }
}
