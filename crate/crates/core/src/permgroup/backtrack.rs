use num_bigint::BigUint;
use num_traits::One;

use super::{Bsgs, PermGroup};
use crate::perm::Perm;

/// Finds the subgroup of `g` of elements satisfying `test`, which must define a
/// subgroup. `prune(base, imgs)` sees the images of the first `imgs.len()` base
/// points and may reject a partial element; it must never reject a prefix of an
/// element that passes `test`. The base starts with `prefix`.
pub fn search_subgroup<P, T>(g: &PermGroup, prefix: &[usize], mut prune: P, mut test: T) -> PermGroup
where
    P: FnMut(&[usize], &[usize]) -> bool,
    T: FnMut(&Perm) -> bool,
{
    let n = g.degree();
    if g.is_trivial() {
        return PermGroup::trivial(n);
    }
    let chain = g.chain_with_prefix(prefix);
    let base = chain.base();
    let k = chain.depth();
    let mut found: Vec<Perm> = Vec::new();
    let mut order = BigUint::one();
    let mut imgs: Vec<usize> = base.clone();
    for i in (0..k).rev() {
        let bi = base[i];
        let mut covered = orbit_under(n, &found, bi);
        let mut dead = vec![false; n];
        let orbit: Vec<usize> = {
            let mut o = chain.level_orbit(i).to_vec();
            o.sort_unstable();
            o
        };
        for &gamma in &orbit {
            if covered[gamma] || dead[gamma] {
                continue;
            }
            imgs.truncate(i);
            imgs.push(gamma);
            let hit = if prune(&base, &imgs) {
                let u = chain.transversal(i, gamma);
                descend(&chain, &base, i + 1, u, &mut imgs, &mut prune, &mut test)
            } else {
                None
            };
            match hit {
                Some(h) => {
                    found.push(h);
                    covered = orbit_under(n, &found, bi);
                }
                None => {
                    for p in orbit_points(n, &found, gamma) {
                        dead[p] = true;
                    }
                }
            }
        }
        imgs.truncate(i);
        imgs.push(bi);
        let len = covered.iter().filter(|&&c| c).count();
        order *= BigUint::from(len);
    }
    PermGroup::with_order(n, found, order)
}

/// Finds one element of `g` passing `test`, or `None`.
pub fn search_element<P, T>(g: &PermGroup, prefix: &[usize], mut prune: P, mut test: T) -> Option<Perm>
where
    P: FnMut(&[usize], &[usize]) -> bool,
    T: FnMut(&Perm) -> bool,
{
    let n = g.degree();
    if g.is_trivial() {
        let id = Perm::identity(n);
        let base: Vec<usize> = prefix.to_vec();
        let ok = (1..=base.len()).all(|l| prune(&base, &base[..l])) && test(&id);
        return ok.then_some(id);
    }
    let chain = g.chain_with_prefix(prefix);
    let base = chain.base();
    let mut imgs = Vec::new();
    descend(&chain, &base, 0, Perm::identity(n), &mut imgs, &mut prune, &mut test)
}

/// Depth-first completion of `h = u_{l-1} .. u_i` through levels `l..`.
fn descend<P, T>(
    chain: &Bsgs,
    base: &[usize],
    l: usize,
    h: Perm,
    imgs: &mut Vec<usize>,
    prune: &mut P,
    test: &mut T,
) -> Option<Perm>
where
    P: FnMut(&[usize], &[usize]) -> bool,
    T: FnMut(&Perm) -> bool,
{
    if l == chain.depth() {
        return test(&h).then_some(h);
    }
    let mut orbit = chain.level_orbit(l).to_vec();
    orbit.sort_unstable_by_key(|&d| h.apply(d));
    for delta in orbit {
        imgs.truncate(l);
        imgs.push(h.apply(delta));
        if !prune(base, imgs) {
            continue;
        }
        let u = chain.transversal(l, delta);
        if let Some(g) = descend(chain, base, l + 1, u.mul(&h), imgs, prune, test) {
            return Some(g);
        }
    }
    imgs.truncate(l);
    None
}

fn orbit_under(n: usize, gens: &[Perm], x: usize) -> Vec<bool> {
    let mut seen = vec![false; n];
    for p in orbit_points(n, gens, x) {
        seen[p] = true;
    }
    seen
}

fn orbit_points(n: usize, gens: &[Perm], x: usize) -> Vec<usize> {
    let mut seen = vec![false; n];
    seen[x] = true;
    let mut out = vec![x];
    let mut head = 0;
    while head < out.len() {
        let p = out[head];
        head += 1;
        for g in gens {
            let q = g.apply(p);
            if !seen[q] {
                seen[q] = true;
                out.push(q);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centralizer_by_search() {
        let g = PermGroup::symmetric(5);
        let c = Perm::parse(5, "(1 2 3 4 5)").unwrap();
        let cent = search_subgroup(&g, &[], |_, _| true, |x| x.mul(&c) == c.mul(x));
        assert_eq!(cent.order(), BigUint::from(5u32));
        let brute = g.elements().into_iter().filter(|x| x.mul(&c) == c.mul(x)).count();
        assert_eq!(brute, 5);
    }

    #[test]
    fn element_search_finds_conjugator() {
        let g = PermGroup::symmetric(6);
        let a = Perm::parse(6, "(1 2 3)(4 5)").unwrap();
        let b = Perm::parse(6, "(2 6)(1 4 3)").unwrap();
        let x = search_element(&g, &[], |_, _| true, |x| a.conjugate(x) == b).unwrap();
        assert_eq!(a.conjugate(&x), b);
        let c = Perm::parse(6, "(1 2 3 4)").unwrap();
        assert!(search_element(&g, &[], |_, _| true, |x| a.conjugate(x) == c).is_none());
    }
}
