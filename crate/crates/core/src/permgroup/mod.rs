//! Permutation groups given by generators, with a lazily built stabilizer chain.

mod action;
mod backtrack;
mod blocks;
mod bsgs;

use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::perm::Perm;

pub use action::{intersect, ActionKind, GroupAction};
pub use backtrack::{search_element, search_subgroup};
pub use blocks::{is_block_system, minimal_block_system, minimal_block_with, BlockSystem};
pub use bsgs::Bsgs;

pub const MAX_DEGREE: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Giant {
    Sym,
    Alt,
    No,
}

pub(crate) fn rng_for(n: usize, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x51ed_5eed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

#[derive(Clone)]
pub struct PermGroup {
    n: usize,
    gens: Vec<Perm>,
    known_order: Option<BigUint>,
    bsgs: Arc<OnceLock<Bsgs>>,
}

impl std::fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PermGroup(n={}, gens={:?})", self.n, self.gens)
    }
}

impl PermGroup {
    pub fn new(n: usize, gens: Vec<Perm>) -> Result<PermGroup> {
        if n > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(n));
        }
        for g in &gens {
            if g.degree() != n {
                return Err(Error::Precondition(format!(
                    "generator of degree {} in a group of degree {n}",
                    g.degree()
                )));
            }
        }
        Ok(PermGroup::from_gens(n, gens, None))
    }

    /// Generators are trusted to have degree `n`; a supplied order is trusted too.
    pub(crate) fn from_gens(n: usize, gens: Vec<Perm>, known_order: Option<BigUint>) -> PermGroup {
        let mut gens: Vec<Perm> = gens.into_iter().filter(|g| !g.is_identity()).collect();
        gens.dedup();
        PermGroup {
            n,
            gens,
            known_order,
            bsgs: Arc::new(OnceLock::new()),
        }
    }

    /// A group whose order is known in advance; the chain is built until it reaches it.
    pub fn with_order(n: usize, gens: Vec<Perm>, order: BigUint) -> PermGroup {
        PermGroup::from_gens(n, gens, Some(order))
    }

    pub fn from_bsgs(b: Bsgs) -> PermGroup {
        let n = b.n;
        let gens = b.strong_generators();
        let order = b.order();
        let cell = OnceLock::new();
        let _ = cell.set(b);
        PermGroup {
            n,
            gens,
            known_order: Some(order),
            bsgs: Arc::new(cell),
        }
    }

    pub fn trivial(n: usize) -> PermGroup {
        PermGroup::from_gens(n, Vec::new(), Some(BigUint::one()))
    }

    pub fn symmetric(n: usize) -> PermGroup {
        let mut gens = Vec::new();
        if n >= 2 {
            gens.push(Perm::transposition(n, 0, 1));
        }
        if n >= 3 {
            gens.push(cycle_on(n, &(0..n).collect::<Vec<_>>()));
        }
        PermGroup::from_gens(n, gens, Some(factorial(n)))
    }

    pub fn alternating(n: usize) -> PermGroup {
        if n < 3 {
            return PermGroup::trivial(n);
        }
        let mut gens = vec![cycle_on(n, &[0, 1, 2])];
        if n >= 4 {
            let long: Vec<usize> = if n % 2 == 1 { (0..n).collect() } else { (1..n).collect() };
            gens.push(cycle_on(n, &long));
        }
        PermGroup::from_gens(n, gens, Some(factorial(n) / BigUint::from(2u32)))
    }

    /// The induced action on `t`-subsets in colex order. The order is kept
    /// when `0 < t < n` and `n >= 3`, where the action is faithful.
    pub fn on_subsets(&self, t: usize) -> PermGroup {
        let n = self.n;
        let subs = crate::partitions::subsets(n, t);
        let gens: Vec<Perm> = self
            .generators()
            .iter()
            .map(|g| {
                Perm::from_images_unchecked(
                    subs.iter()
                        .map(|s| {
                            let mut img: Vec<usize> = s.iter().map(|&x| g.apply(x)).collect();
                            img.sort_unstable();
                            crate::partitions::colex_rank(&img) as u32
                        })
                        .collect(),
                )
            })
            .collect();
        let order = (0 < t && t < n && n >= 3).then(|| self.order());
        PermGroup::from_gens(subs.len(), gens, order)
    }

    /// The symmetric group on `points`, fixing everything else.
    pub fn symmetric_on(n: usize, points: &[usize]) -> PermGroup {
        let k = points.len();
        let mut gens = Vec::new();
        if k >= 2 {
            gens.push(Perm::transposition(n, points[0], points[1]));
        }
        if k >= 3 {
            gens.push(cycle_on(n, points));
        }
        PermGroup::from_gens(n, gens, Some(factorial(k)))
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Perm] {
        &self.gens
    }

    pub fn known_order(&self) -> Option<&BigUint> {
        self.known_order.as_ref()
    }

    pub fn is_trivial(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn bsgs(&self) -> &Bsgs {
        self.bsgs.get_or_init(|| {
            let mut rng = rng_for(self.n, self.gens.len() as u64);
            Bsgs::build(self.n, &self.gens, &[], self.known_order.as_ref(), &mut rng)
        })
    }

    /// A fresh chain whose base starts with `prefix`.
    pub fn chain_with_prefix(&self, prefix: &[usize]) -> Bsgs {
        let order = self.order();
        let mut rng = rng_for(self.n, 0x7072_6566 ^ prefix.len() as u64);
        Bsgs::build(self.n, &self.gens, prefix, Some(&order), &mut rng)
    }

    pub fn order(&self) -> BigUint {
        match &self.known_order {
            Some(o) => o.clone(),
            None => self.bsgs().order(),
        }
    }

    pub fn contains(&self, g: &Perm) -> bool {
        if g.degree() != self.n {
            return false;
        }
        if g.is_identity() {
            return true;
        }
        if self.gens.is_empty() {
            return false;
        }
        match self.giant_shortcut() {
            Some(Giant::Sym) => return true,
            Some(Giant::Alt) => return g.is_even(),
            _ => {}
        }
        self.bsgs().contains(g)
    }

    fn giant_shortcut(&self) -> Option<Giant> {
        let o = self.known_order.as_ref()?;
        let f = factorial(self.n);
        if *o == f {
            Some(Giant::Sym)
        } else if self.n >= 2 && o * BigUint::from(2u32) == f && self.gens.iter().all(|g| g.is_even()) {
            Some(Giant::Alt)
        } else {
            None
        }
    }

    pub fn is_giant(&self) -> Giant {
        if let Some(g) = self.giant_shortcut() {
            return g;
        }
        if !self.is_transitive() && self.n > 2 {
            return Giant::No;
        }
        let f = factorial(self.n);
        let o = self.order();
        if o == f {
            Giant::Sym
        } else if o * BigUint::from(2u32) == f && self.gens.iter().all(|g| g.is_even()) {
            Giant::Alt
        } else {
            Giant::No
        }
    }

    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        seen[x] = true;
        let mut out = vec![x];
        let mut head = 0;
        while head < out.len() {
            let p = out[head];
            head += 1;
            for g in &self.gens {
                let q = g.apply(p);
                if !seen[q] {
                    seen[q] = true;
                    out.push(q);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Orbits in order of their least points, each sorted.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            let o = self.orbit(s);
            for &p in &o {
                label[p] = out.len();
            }
            out.push(o);
        }
        out
    }

    pub fn orbits_on(&self, set: &[usize]) -> Vec<Vec<usize>> {
        let mut label = vec![false; self.n];
        let mut out = Vec::new();
        for &s in set {
            if label[s] {
                continue;
            }
            let o = self.orbit(s);
            for &p in &o {
                label[p] = true;
            }
            out.push(o);
        }
        out.sort();
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.n <= 1 || self.orbit(0).len() == self.n
    }

    pub fn point_stab(&self, x: usize) -> PermGroup {
        self.pointwise_stab(&[x])
    }

    pub fn pointwise_stab(&self, set: &[usize]) -> PermGroup {
        if self.gens.is_empty() {
            return PermGroup::trivial(self.n);
        }
        let moved: Vec<usize> = {
            let mut seen = vec![false; self.n];
            set.iter().copied().filter(|&p| !std::mem::replace(&mut seen[p], true)).collect()
        };
        if moved.iter().all(|&p| self.gens.iter().all(|g| g.apply(p) == p)) {
            return self.clone();
        }
        let b = self.chain_with_prefix(&moved);
        PermGroup::from_bsgs(b.tail(moved.len()))
    }

    pub fn setwise_stab(&self, set: &[usize]) -> PermGroup {
        let mut inside = vec![false; self.n];
        for &p in set {
            inside[p] = true;
        }
        if self.gens.iter().all(|g| set.iter().all(|&p| inside[g.apply(p)])) {
            return self.clone();
        }
        let mut prefix: Vec<usize> = set.to_vec();
        prefix.sort_unstable();
        prefix.dedup();
        search_subgroup(
            self,
            &prefix,
            |base, imgs| {
                let l = imgs.len() - 1;
                inside[base[l]] == inside[imgs[l]]
            },
            |g| set.iter().all(|&p| inside[g.apply(p)]),
        )
    }

    /// Stabilizer of an ordered partition of the domain given as a color per point.
    pub fn color_stab(&self, color: &[usize]) -> PermGroup {
        if self.gens.iter().all(|g| (0..self.n).all(|p| color[g.apply(p)] == color[p])) {
            return self.clone();
        }
        let mut prefix: Vec<usize> = (0..self.n).collect();
        let mut count = std::collections::HashMap::new();
        for &c in color {
            *count.entry(c).or_insert(0usize) += 1;
        }
        prefix.sort_by_key(|&p| (count[&color[p]], color[p], p));
        search_subgroup(
            self,
            &prefix,
            |base, imgs| {
                let l = imgs.len() - 1;
                color[base[l]] == color[imgs[l]]
            },
            |g| (0..self.n).all(|p| color[g.apply(p)] == color[p]),
        )
    }

    pub fn random_element(&self, rng: &mut impl rand::Rng) -> Perm {
        if self.gens.is_empty() {
            return Perm::identity(self.n);
        }
        self.bsgs().random_element(rng)
    }

    /// All elements; the caller is responsible for keeping the order small.
    pub fn elements(&self) -> Vec<Perm> {
        if self.gens.is_empty() {
            return vec![Perm::identity(self.n)];
        }
        self.bsgs().elements()
    }

    /// `G^pi = pi^-1 G pi`.
    pub fn conjugate(&self, pi: &Perm) -> PermGroup {
        PermGroup::from_gens(
            self.n,
            self.gens.iter().map(|g| g.conjugate(pi)).collect(),
            Some(self.order()),
        )
    }

    /// Adds generators; the order is recomputed on demand.
    pub fn join(&self, extra: &[Perm]) -> PermGroup {
        let new: Vec<Perm> = extra.iter().filter(|g| !self.contains(g)).cloned().collect();
        if new.is_empty() {
            return self.clone();
        }
        let mut gens = self.gens.clone();
        gens.extend(new);
        PermGroup::from_gens(self.n, gens, None)
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.gens.iter().all(|g| other.contains(g))
    }

    /// Restriction to an invariant set; the result acts on `0..set.len()` in sorted order of `set`.
    pub fn restrict_to(&self, set: &[usize]) -> PermGroup {
        let mut pts = set.to_vec();
        pts.sort_unstable();
        let mut index = vec![u32::MAX; self.n];
        for (i, &p) in pts.iter().enumerate() {
            index[p] = i as u32;
        }
        PermGroup::from_gens(
            pts.len(),
            self.gens.iter().map(|g| g.restrict(&pts, &index)).collect(),
            None,
        )
    }

    pub fn equals(&self, other: &PermGroup) -> bool {
        self.n == other.n && self.order() == other.order() && self.is_subgroup_of(other)
    }
}

pub(crate) fn cycle_on(n: usize, points: &[usize]) -> Perm {
    let mut images: Vec<u32> = (0..n as u32).collect();
    for (i, &p) in points.iter().enumerate() {
        images[p] = points[(i + 1) % points.len()] as u32;
    }
    Perm::from_images_unchecked(images)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    fn grp(n: usize, gens: &[&str]) -> PermGroup {
        PermGroup::new(n, gens.iter().map(|s| Perm::parse(n, s).unwrap()).collect()).unwrap()
    }

    /// Closure of the generators by breadth-first multiplication.
    fn enumerate(g: &PermGroup) -> HashSet<Perm> {
        let mut seen: HashSet<Perm> = HashSet::new();
        let id = Perm::identity(g.degree());
        seen.insert(id.clone());
        let mut queue = vec![id];
        while let Some(p) = queue.pop() {
            for s in g.generators() {
                let q = p.mul(s);
                if seen.insert(q.clone()) {
                    queue.push(q);
                }
            }
        }
        seen
    }

    #[test]
    fn orders_match_enumeration() {
        let s5 = grp(5, &["(1 2)", "(1 2 3 4 5)"]);
        assert_eq!(s5.order(), BigUint::from(120u32));
        let a5 = grp(5, &["(1 2 3 4 5)", "(1 2 3)"]);
        assert_eq!(a5.order(), BigUint::from(60u32));
        assert_eq!(enumerate(&a5).len(), 60);
        assert_eq!(PermGroup::trivial(4).order(), BigUint::one());
        let d5 = grp(5, &["(1 2 3 4 5)", "(2 5)(3 4)"]);
        assert_eq!(enumerate(&d5).len(), 10);
        assert_eq!(d5.order(), BigUint::from(10u32));
    }

    #[test]
    fn orbits_examples() {
        let g = grp(5, &["(1 2)(3 4)"]);
        assert_eq!(g.orbits(), vec![vec![0, 1], vec![2, 3], vec![4]]);
        assert_eq!(PermGroup::trivial(3).orbits(), vec![vec![0], vec![1], vec![2]]);
        assert!(grp(5, &["(1 2)", "(1 2 3 4 5)"]).is_transitive());
    }

    #[test]
    fn giant_examples() {
        assert_eq!(grp(5, &["(1 2)", "(1 2 3 4 5)"]).is_giant(), Giant::Sym);
        assert_eq!(grp(5, &["(1 2 3)", "(3 4 5)"]).is_giant(), Giant::Alt);
        assert_eq!(grp(5, &["(1 2 3 4 5)", "(2 5)(3 4)"]).is_giant(), Giant::No);
        for n in 1..8 {
            assert_eq!(PermGroup::symmetric(n).bsgs().order(), factorial(n));
            assert_eq!(PermGroup::alternating(n).is_giant(), if n < 2 { Giant::Sym } else { Giant::Alt });
        }
    }

    #[test]
    fn stabilizer_examples() {
        let s4 = PermGroup::symmetric(4);
        assert_eq!(s4.point_stab(0).order(), BigUint::from(6u32));
        assert_eq!(s4.setwise_stab(&[0, 1]).order(), BigUint::from(4u32));
        let a5 = PermGroup::alternating(5);
        let st = a5.pointwise_stab(&[0, 1]);
        assert_eq!(st.order(), BigUint::from(3u32));
        assert!(st.contains(&Perm::parse(5, "(3 4 5)").unwrap()));
    }

    #[test]
    fn orbit_stabilizer_relation() {
        let g = grp(8, &["(1 2 3 4)(5 6)", "(1 5)(2 7)", "(3 8)"]);
        let elems = enumerate(&g);
        assert_eq!(BigUint::from(elems.len()), g.order());
        for x in 0..8 {
            let st = g.point_stab(x);
            let brute = elems.iter().filter(|p| p.apply(x) == x).count();
            assert_eq!(st.order(), BigUint::from(brute));
            assert_eq!(BigUint::from(g.orbit(x).len()) * st.order(), g.order());
        }
        let set = [0usize, 4, 6];
        let brute = elems
            .iter()
            .filter(|p| p.image_of_set(&set) == set.to_vec())
            .count();
        assert_eq!(g.setwise_stab(&set).order(), BigUint::from(brute));
    }

    #[test]
    fn membership_matches_enumeration() {
        let g = grp(6, &["(1 2 3)(4 5 6)", "(1 4)(2 5)(3 6)"]);
        let elems = enumerate(&g);
        let mut all = vec![Perm::identity(6)];
        for i in 0..6 {
            let mut next = Vec::new();
            for p in &all {
                for j in 0..6 {
                    next.push(p.mul(&Perm::transposition(6, i, j)));
                }
            }
            next.sort();
            next.dedup();
            all = next;
        }
        assert_eq!(all.len(), 720);
        for p in &all {
            assert_eq!(g.contains(p), elems.contains(p));
        }
    }

    #[test]
    fn pair_action_chain_is_fast() {
        let n = 20;
        let mut index = vec![vec![0usize; n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                index[i][j] = k;
                index[j][i] = k;
                k += 1;
            }
        }
        let lift = |p: &Perm| {
            let mut img = vec![0usize; k];
            for i in 0..n {
                for j in i + 1..n {
                    img[index[i][j]] = index[p.apply(i)][p.apply(j)];
                }
            }
            Perm::from_images(img).unwrap()
        };
        let s = PermGroup::symmetric(n);
        let gens: Vec<Perm> = s.generators().iter().map(lift).collect();
        let t = std::time::Instant::now();
        let g = PermGroup::new(k, gens).unwrap();
        assert_eq!(g.order(), factorial(n));
        assert!(t.elapsed().as_secs_f64() < 5.0);
    }
}
