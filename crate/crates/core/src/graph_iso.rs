//! Graph isomorphism through the pair-domain string encoding, with two
//! independent engines for cross-checking.

use num_bigint::BigUint;

use crate::coherent::{wl_refine, Config};
use crate::error::{Error, Result};
use crate::graph::{pair_string, vertex_perm_from_pairs, Graph};
use crate::local_certs::{master, MasterOptions, MasterReport};
use crate::perm::Perm;
use crate::permgroup::{factorial, PermGroup};
use crate::string_iso::{IsoCoset, StringInstance};

/// The instance `(Sym(n)^(2), x_A, x_B)` on the pairs of `0..n`.
pub fn pair_instance(a: &Graph, b: &Graph) -> Result<StringInstance> {
    if a.n() != b.n() {
        return Err(Error::Precondition(format!("orders differ: {} vs {}", a.n(), b.n())));
    }
    let g = PermGroup::symmetric(a.n()).on_subsets(2);
    Ok(StringInstance::new(g, pair_string(a), pair_string(b)))
}

fn vertex_witness(a: &Graph, b: &Graph, c: &IsoCoset) -> Result<Option<Perm>> {
    let Some(rep) = c.rep() else { return Ok(None) };
    let p = vertex_perm_from_pairs(a.n(), rep)
        .ok_or_else(|| Error::Invariant("pair witness is not induced by a vertex permutation".into()))?;
    if !a.is_isomorphism(b, &p) {
        return Err(Error::Invariant("witness does not map edges onto edges".into()));
    }
    Ok(Some(p))
}

/// An isomorphism `a -> b` found by the master algorithm, verified.
pub fn iso_master(a: &Graph, b: &Graph, opts: &MasterOptions) -> Result<(Option<Perm>, MasterReport)> {
    if a.n() != b.n() || a.edge_count() != b.edge_count() {
        return Ok((None, MasterReport::default()));
    }
    if a.n() < 3 {
        return Ok((Some(Perm::identity(a.n())), MasterReport::default()));
    }
    let (c, report) = master(&pair_instance(a, b)?, opts)?;
    Ok((vertex_witness(a, b, &c)?, report))
}

/// `|Aut(a)|` from the master coset `iso(x_A, x_A)`.
pub fn aut_order_master(a: &Graph, opts: &MasterOptions) -> Result<(BigUint, MasterReport)> {
    if a.n() < 3 {
        return Ok((factorial(a.n()), MasterReport::default()));
    }
    let (c, report) = master(&pair_instance(a, a)?, opts)?;
    Ok((c.size(), report))
}

/// Exhaustive backtracking over vertex maps, pruning on adjacency to the
/// already mapped vertices.
pub fn iso_brute(a: &Graph, b: &Graph) -> Option<Perm> {
    let n = a.n();
    if n != b.n() || a.edge_count() != b.edge_count() {
        return None;
    }
    let mut img = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(v: usize, a: &Graph, b: &Graph, img: &mut [usize], used: &mut [bool]) -> bool {
        if v == a.n() {
            return true;
        }
        for w in 0..a.n() {
            if used[w] || a.degree(v) != b.degree(w) {
                continue;
            }
            if (0..v).any(|u| a.has_edge(u, v) != b.has_edge(img[u], w)) {
                continue;
            }
            img[v] = w;
            used[w] = true;
            if go(v + 1, a, b, img, used) {
                return true;
            }
            used[w] = false;
        }
        false
    }
    go(0, a, b, &mut img, &mut used).then(|| Perm::from_images(img).expect("injective map"))
}

/// Number of automorphisms by the same backtracking.
pub fn aut_order_brute(a: &Graph) -> u64 {
    let n = a.n();
    let mut img = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(v: usize, a: &Graph, img: &mut [usize], used: &mut [bool]) -> u64 {
        if v == a.n() {
            return 1;
        }
        let mut count = 0;
        for w in 0..a.n() {
            if used[w] || a.degree(v) != a.degree(w) || (0..v).any(|u| a.has_edge(u, v) != a.has_edge(img[u], w)) {
                continue;
            }
            img[v] = w;
            used[w] = true;
            count += go(v + 1, a, img, used);
            used[w] = false;
        }
        count
    }
    go(0, a, &mut img, &mut used)
}

/// Individualization and 2-dimensional WL refinement on the disjoint union.
pub fn iso_wl(a: &Graph, b: &Graph) -> Result<Option<Perm>> {
    let n = a.n();
    if n != b.n() || a.edge_count() != b.edge_count() {
        return Ok(None);
    }
    let u = a.disjoint_union(b);
    let mut colors = vec![0u32; 2 * n];
    let found = wl_search(&u, n, &mut colors)?;
    Ok(found.filter(|p| a.is_isomorphism(b, p)))
}

fn wl_search(u: &Graph, n: usize, colors: &mut [u32]) -> Result<Option<Perm>> {
    let cc = wl_refine(&Config::from_colored_graph(u, colors))?;
    let mut classes: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut by_color = std::collections::BTreeMap::new();
    for v in 0..2 * n {
        let e = by_color.entry(cc.c(v, v)).or_insert_with(|| (Vec::new(), Vec::new()));
        if v < n {
            e.0.push(v);
        } else {
            e.1.push(v - n);
        }
    }
    classes.extend(by_color.into_values());
    if classes.iter().any(|(l, r)| l.len() != r.len()) {
        return Ok(None);
    }
    let Some((left, right)) = classes.iter().filter(|(l, _)| l.len() > 1).min_by_key(|(l, _)| l.len()) else {
        let mut img = vec![0; n];
        for (l, r) in &classes {
            img[l[0]] = r[0];
        }
        return Ok(Some(Perm::from_images(img).expect("discrete matching")));
    };
    let v = left[0];
    let refined: Vec<u32> = (0..2 * n).map(|w| cc.c(w, w) + 1).collect();
    for &w in right {
        let mut c = refined.clone();
        c[v] = 0;
        c[n + w] = 0;
        if let Some(p) = wl_search(u, n, &mut c)? {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, kneser, path, petersen};

    #[test]
    fn engines_agree_on_classic_pairs() {
        let opts = MasterOptions::default();
        let cases = [
            (complete(3), complete(3), true),
            (cycle(5), path(5), false),
            (petersen(), kneser(5, 2), true),
            (cycle(6), complete(3).disjoint_union(&complete(3)), false),
        ];
        for (a, b, want) in cases {
            assert_eq!(iso_brute(&a, &b).is_some(), want);
            assert_eq!(iso_wl(&a, &b).unwrap().is_some(), want);
            let (w, _) = iso_master(&a, &b, &opts).unwrap();
            assert_eq!(w.is_some(), want);
        }
    }

    #[test]
    fn petersen_has_120_automorphisms() {
        let (o, _) = aut_order_master(&petersen(), &MasterOptions::default()).unwrap();
        assert_eq!(o, BigUint::from(120u32));
        assert_eq!(aut_order_brute(&petersen()), 120);
    }
}
