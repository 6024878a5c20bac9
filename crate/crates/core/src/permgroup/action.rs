use std::sync::OnceLock;

use num_bigint::BigUint;

use super::{rng_for, search_subgroup, Bsgs, Giant, PermGroup};
use crate::perm::Perm;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionKind {
    /// Action on a block system; block `i` is target point `i`.
    Blocks(Vec<Vec<usize>>),
    /// Restriction to an invariant set, sorted; target point `i` is `set[i]`.
    Restriction(Vec<usize>),
    /// Arbitrary images of the generators.
    Generic,
}

/// A homomorphism from `source` to the symmetric group on `0..m`, given by
/// the images of the source generators.
pub struct GroupAction {
    source: PermGroup,
    m: usize,
    gen_images: Vec<Perm>,
    kind: ActionKind,
    lookup: Vec<u32>,
    combined: OnceLock<Bsgs>,
    by_source: OnceLock<Bsgs>,
    kernel: OnceLock<PermGroup>,
    image: OnceLock<PermGroup>,
}

impl std::fmt::Debug for GroupAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupAction(n={}, m={}, {:?})", self.source.degree(), self.m, self.gen_images)
    }
}

impl GroupAction {
    fn build(source: PermGroup, m: usize, gen_images: Vec<Perm>, kind: ActionKind, lookup: Vec<u32>) -> GroupAction {
        GroupAction {
            source,
            m,
            gen_images,
            kind,
            lookup,
            combined: OnceLock::new(),
            by_source: OnceLock::new(),
            kernel: OnceLock::new(),
            image: OnceLock::new(),
        }
    }

    /// The induced action on an invariant partition.
    pub fn on_blocks(g: &PermGroup, blocks: &[Vec<usize>]) -> GroupAction {
        let n = g.degree();
        let mut block_of = vec![u32::MAX; n];
        for (i, b) in blocks.iter().enumerate() {
            for &p in b {
                block_of[p] = i as u32;
            }
        }
        let imgs = g
            .generators()
            .iter()
            .map(|s| {
                Perm::from_images_unchecked(
                    blocks.iter().map(|b| block_of[s.apply(b[0])]).collect(),
                )
            })
            .collect();
        GroupAction::build(g.clone(), blocks.len(), imgs, ActionKind::Blocks(blocks.to_vec()), block_of)
    }

    /// Restriction to an invariant set.
    pub fn restriction(g: &PermGroup, set: &[usize]) -> GroupAction {
        let mut pts = set.to_vec();
        pts.sort_unstable();
        pts.dedup();
        let mut index = vec![u32::MAX; g.degree()];
        for (i, &p) in pts.iter().enumerate() {
            index[p] = i as u32;
        }
        let imgs = g.generators().iter().map(|s| s.restrict(&pts, &index)).collect();
        GroupAction::build(g.clone(), pts.len(), imgs, ActionKind::Restriction(pts), index)
    }

    /// An action given by images of `g.generators()`, trusted to be a homomorphism
    /// (see [`GroupAction::verify`]).
    pub fn from_images(g: &PermGroup, m: usize, gen_images: Vec<Perm>) -> GroupAction {
        assert_eq!(gen_images.len(), g.generators().len());
        GroupAction::build(g.clone(), m, gen_images, ActionKind::Generic, Vec::new())
    }

    pub fn source(&self) -> &PermGroup {
        &self.source
    }

    pub fn target_degree(&self) -> usize {
        self.m
    }

    pub fn gen_images(&self) -> &[Perm] {
        &self.gen_images
    }

    pub fn kind(&self) -> &ActionKind {
        &self.kind
    }

    fn combined_gens(&self) -> Vec<Perm> {
        let n = self.source.degree();
        self.source
            .generators()
            .iter()
            .zip(&self.gen_images)
            .map(|(g, h)| {
                let mut img: Vec<u32> = g.images().to_vec();
                img.extend(h.images().iter().map(|&x| x + n as u32));
                Perm::from_images_unchecked(img)
            })
            .collect()
    }

    /// Chain of the graph of the action on `Ω ⊔ Γ`, with all of Γ first in the base.
    fn combined(&self) -> &Bsgs {
        self.combined.get_or_init(|| {
            let n = self.source.degree();
            let prefix: Vec<usize> = (n..n + self.m).collect();
            let order = self.source.order();
            let mut rng = rng_for(n + self.m, 0xc0b1);
            Bsgs::build(n + self.m, &self.combined_gens(), &prefix, Some(&order), &mut rng)
        })
    }

    /// For restrictions this slot holds the source chain with the invariant set first.
    fn by_source(&self) -> &Bsgs {
        self.by_source.get_or_init(|| {
            let n = self.source.degree();
            let prefix = self.source.bsgs().base();
            let order = self.source.order();
            let mut rng = rng_for(n + self.m, 0x50c1);
            Bsgs::build(n + self.m, &self.combined_gens(), &prefix, Some(&order), &mut rng)
        })
    }

    /// The image of an element of the source group.
    pub fn image_of(&self, g: &Perm) -> Perm {
        match &self.kind {
            ActionKind::Blocks(blocks) => Perm::from_images_unchecked(
                blocks.iter().map(|b| self.lookup[g.apply(b[0])]).collect(),
            ),
            ActionKind::Restriction(pts) => g.restrict(pts, &self.lookup),
            ActionKind::Generic => {
                let n = self.source.degree();
                let w = g.extend(n + self.m);
                let (r, _) = self.by_source().strip(&w, 0);
                let img: Vec<u32> = (0..self.m).map(|i| r.apply(n + i) as u32 - n as u32).collect();
                Perm::from_images_unchecked(img).inverse()
            }
        }
    }

    pub fn image(&self) -> &PermGroup {
        self.image.get_or_init(|| {
            let order = self.source.order() / self.kernel().order();
            PermGroup::with_order(self.m, self.gen_images.clone(), order)
        })
    }

    pub fn kernel(&self) -> &PermGroup {
        self.kernel.get_or_init(|| match &self.kind {
            ActionKind::Restriction(pts) => {
                let chain = self.by_source.get_or_init(|| self.source.chain_with_prefix(pts));
                PermGroup::from_bsgs(chain.tail(pts.len()))
            }
            _ => {
                let n = self.source.degree();
                let tail = self.combined().tail(self.m);
                let gens: Vec<Perm> = tail
                    .strong_generators()
                    .iter()
                    .map(|g| Perm::from_images_unchecked(g.images()[..n].to_vec()))
                    .collect();
                PermGroup::with_order(n, gens, tail.order())
            }
        })
    }

    /// One preimage of `target`, or `None` if it lies outside the image.
    pub fn lift(&self, target: &Perm) -> Option<Perm> {
        if target.degree() != self.m {
            return None;
        }
        let n = self.source.degree();
        if let ActionKind::Restriction(pts) = &self.kind {
            let chain = self.by_source.get_or_init(|| self.source.chain_with_prefix(pts));
            let targets: Vec<usize> = pts.iter().map(|&p| pts[target.apply(self.lookup[p] as usize)]).collect();
            let g = chain.from_base_images(&targets)?;
            return (g.restrict(pts, &self.lookup) == *target).then_some(g);
        }
        let mut w: Vec<u32> = (0..n as u32).collect();
        w.extend(target.images().iter().map(|&x| x + n as u32));
        let w = Perm::from_images_unchecked(w);
        let chain = self.combined();
        let (r, lvl) = chain.strip(&w, 0);
        let through_gamma = (0..self.m).all(|i| r.apply(n + i) == n + i);
        if !through_gamma || lvl < self.m {
            return None;
        }
        let inv = r.inverse();
        Some(Perm::from_images_unchecked(inv.images()[..n].to_vec()))
    }

    /// Generators of the full preimage of a subgroup `h` of the target symmetric group.
    pub fn preimage_of_subgroup(&self, h: &PermGroup) -> PermGroup {
        let n = self.source.degree();
        let ker = self.kernel().clone();
        let with = |sub_gens: Vec<Perm>, sub_order: BigUint| -> PermGroup {
            let mut gens = ker.generators().to_vec();
            for s in &sub_gens {
                gens.push(self.lift(s).expect("element of the image"));
            }
            PermGroup::with_order(n, gens, ker.order() * sub_order)
        };
        let lifts: Option<Vec<Perm>> = h.generators().iter().map(|s| self.lift(s)).collect();
        if let Some(lifts) = lifts {
            let mut gens = ker.generators().to_vec();
            gens.extend(lifts);
            return PermGroup::with_order(n, gens, ker.order() * h.order());
        }
        let img = self.image();
        if img.is_giant() == Giant::Alt {
            let odd: Vec<&Perm> = h.generators().iter().filter(|s| !s.is_even()).collect();
            if let Some(h0) = odd.first() {
                let h0i = h0.inverse();
                let mut sub = Vec::new();
                for s in h.generators() {
                    if s.is_even() {
                        sub.push(s.clone());
                        sub.push(h0.mul(s).mul(&h0i));
                    } else {
                        sub.push(s.mul(&h0i));
                        sub.push(h0.mul(s));
                    }
                }
                return with(sub, h.order() / BigUint::from(2u32));
            }
        }
        let inter = intersect(img, h);
        with(inter.generators().to_vec(), inter.order())
    }

    /// Deterministic check that the generator images define a homomorphism.
    pub fn verify(&self) -> bool {
        let n = self.source.degree();
        let mut rng = rng_for(n + self.m, 0x7665);
        let b = Bsgs::build(n + self.m, &self.combined_gens(), &[], None, &mut rng);
        b.order() == self.source.order()
    }
}

/// `a ∩ b` by backtrack over `a`, pruning with a chain of `b` on the same base.
pub fn intersect(a: &PermGroup, b: &PermGroup) -> PermGroup {
    if b.is_trivial() || a.is_trivial() {
        return PermGroup::trivial(a.degree());
    }
    if a.is_subgroup_of(b) {
        return a.clone();
    }
    if b.is_subgroup_of(a) {
        return b.clone();
    }
    let mut chain: Option<Bsgs> = None;
    search_subgroup(
        a,
        &b.bsgs().base(),
        |base, imgs| {
            let c = chain.get_or_insert_with(|| b.chain_with_prefix(base));
            c.from_base_images(imgs).is_some()
        },
        |g| b.contains(g),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::{minimal_block_system, BlockSystem};

    fn c6() -> PermGroup {
        PermGroup::new(6, vec![Perm::parse(6, "(1 2 3 4 5 6)").unwrap()]).unwrap()
    }

    #[test]
    fn cyclic_block_action() {
        let g = c6();
        let BlockSystem::Blocks(blocks) = minimal_block_system(&g).unwrap() else {
            panic!("C6 is imprimitive");
        };
        let a = GroupAction::on_blocks(&g, &blocks);
        assert!(a.verify());
        assert_eq!(a.kernel().order(), BigUint::from(3u32));
        let swap = Perm::parse(2, "(1 2)").unwrap();
        let l = a.lift(&swap).unwrap();
        assert!(g.contains(&l));
        assert_eq!(a.image_of(&l), swap);
        // odd powers of the 6-cycle are exactly the elements swapping the blocks
        let odd: Vec<Perm> = g.elements().into_iter().filter(|e| a.image_of(e) == swap).collect();
        assert_eq!(odd.len(), 3);
        assert!(odd.contains(&l));
    }

    #[test]
    fn singleton_blocks_have_trivial_kernel() {
        let g = PermGroup::symmetric(4);
        let blocks: Vec<Vec<usize>> = (0..4).map(|i| vec![i]).collect();
        let a = GroupAction::on_blocks(&g, &blocks);
        assert!(a.kernel().is_trivial() || a.kernel().order() == BigUint::from(1u32));
    }

    #[test]
    fn preimage_and_alt_image() {
        // S4 x S3 acting on 7 points, mapped onto the S4 factor.
        let g = PermGroup::new(
            7,
            vec![
                Perm::parse(7, "(1 2)").unwrap(),
                Perm::parse(7, "(1 2 3 4)").unwrap(),
                Perm::parse(7, "(5 6 7)").unwrap(),
                Perm::parse(7, "(5 6)").unwrap(),
            ],
        )
        .unwrap();
        let a = GroupAction::restriction(&g, &[0, 1, 2, 3]);
        assert_eq!(a.kernel().order(), BigUint::from(6u32));
        let h = PermGroup::new(4, vec![Perm::parse(4, "(1 2)").unwrap()]).unwrap();
        let pre = a.preimage_of_subgroup(&h);
        assert_eq!(pre.order(), BigUint::from(12u32));
        assert!(pre.generators().iter().all(|x| g.contains(x)));

        let alt = PermGroup::new(
            7,
            vec![Perm::parse(7, "(1 2 3)").unwrap(), Perm::parse(7, "(2 3 4)").unwrap()],
        )
        .unwrap();
        let b = GroupAction::from_images(
            &alt,
            4,
            alt.generators().iter().map(|s| s.restrict(&[0, 1, 2, 3], &[0, 1, 2, 3, 9, 9, 9])).collect(),
        );
        assert!(b.verify());
        let h = PermGroup::new(4, vec![Perm::parse(4, "(1 2)").unwrap(), Perm::parse(4, "(3 4)").unwrap()]).unwrap();
        let pre = b.preimage_of_subgroup(&h);
        assert_eq!(pre.order(), BigUint::from(2u32));
        assert!(b.lift(&Perm::parse(4, "(1 2)").unwrap()).is_none());
        let t = Perm::parse(4, "(1 2)(3 4)").unwrap();
        let l = b.lift(&t).unwrap();
        assert_eq!(b.image_of(&l), t);
    }

    #[test]
    fn non_homomorphism_fails_verification() {
        let g = PermGroup::symmetric(3);
        let bad = GroupAction::from_images(
            &g,
            2,
            vec![Perm::parse(2, "(1 2)").unwrap(), Perm::parse(2, "(1 2)").unwrap()],
        );
        assert!(!bad.verify());
    }
}
