use std::collections::HashMap;

use super::PermGroup;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockSystem {
    Primitive,
    /// Blocks sorted internally and ordered by least element.
    Blocks(Vec<Vec<usize>>),
}

struct Dsu {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        true
    }
}

/// The finest invariant partition in which all of `seed` lies in one class,
/// returned as a class label per point (labels are least class members).
pub fn minimal_block_with(g: &PermGroup, seed: &[usize]) -> Vec<usize> {
    let n = g.degree();
    let mut d = Dsu::new(n);
    let mut queue: Vec<(usize, usize)> = Vec::new();
    if let Some((&s0, rest)) = seed.split_first() {
        for &s in rest {
            if d.union(s0, s) {
                queue.push((s0, s));
            }
        }
    }
    while let Some((a, b)) = queue.pop() {
        for gen in g.generators() {
            let (x, y) = (gen.apply(a), gen.apply(b));
            if d.union(x, y) {
                queue.push((x, y));
            }
        }
    }
    let mut least = vec![usize::MAX; n];
    let mut out = vec![0; n];
    for p in 0..n {
        let r = d.find(p);
        if least[r] == usize::MAX {
            least[r] = p;
        }
        out[p] = least[r];
    }
    out
}

fn block_of(labels: &[usize], x: usize) -> Vec<usize> {
    (0..labels.len()).filter(|&p| labels[p] == labels[x]).collect()
}

/// A system of maximal blocks (primitive quotient). Each pair seed `{0, w}` is
/// closed to a minimal block and greedily enlarged to a maximal one; the system
/// with the fewest blocks wins, ties going to the lexicographically least block
/// through 0.
pub fn minimal_block_system(g: &PermGroup) -> Result<BlockSystem> {
    let n = g.degree();
    if !g.is_transitive() {
        return Err(Error::NotTransitive);
    }
    if n < 2 {
        return Ok(BlockSystem::Primitive);
    }
    let mut memo: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    let mut best: Option<Vec<usize>> = None;
    for w in 1..n {
        let labels = minimal_block_with(g, &[0, w]);
        let start = block_of(&labels, 0);
        if start.len() == n {
            continue;
        }
        let result = memo
            .entry(start.clone())
            .or_insert_with(|| enlarge(g, start))
            .clone();
        let better = match &best {
            None => true,
            Some(b) => result.len() > b.len() || (result.len() == b.len() && result < *b),
        };
        if better {
            best = Some(result);
        }
    }
    let Some(block) = best else {
        return Ok(BlockSystem::Primitive);
    };
    let labels = minimal_block_with(g, &block);
    let mut classes: HashMap<usize, Vec<usize>> = HashMap::new();
    for p in 0..n {
        classes.entry(labels[p]).or_default().push(p);
    }
    let mut blocks: Vec<Vec<usize>> = classes.into_values().collect();
    blocks.sort();
    Ok(BlockSystem::Blocks(blocks))
}

fn enlarge(g: &PermGroup, mut block: Vec<usize>) -> Vec<usize> {
    let n = g.degree();
    let mut inside = vec![false; n];
    for &p in &block {
        inside[p] = true;
    }
    for w in 0..n {
        if inside[w] {
            continue;
        }
        let mut seed = block.clone();
        seed.push(w);
        let labels = minimal_block_with(g, &seed);
        let cand = block_of(&labels, 0);
        if cand.len() < n {
            for &p in &cand {
                inside[p] = true;
            }
            block = cand;
        }
    }
    block
}

/// True iff `blocks` is a partition of the domain permuted by every generator.
pub fn is_block_system(g: &PermGroup, blocks: &[Vec<usize>]) -> bool {
    let n = g.degree();
    let mut label = vec![usize::MAX; n];
    for (i, b) in blocks.iter().enumerate() {
        for &p in b {
            if label[p] != usize::MAX {
                return false;
            }
            label[p] = i;
        }
    }
    if label.contains(&usize::MAX) {
        return false;
    }
    g.generators().iter().all(|s| {
        blocks.iter().all(|b| {
            let t = label[s.apply(b[0])];
            b.iter().all(|&p| label[s.apply(p)] == t)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Perm;

    fn cyclic(n: usize) -> PermGroup {
        PermGroup::new(n, vec![Perm::from_cycles(n, &[(0..n).collect()]).unwrap()]).unwrap()
    }

    /// All set partitions of `0..n` as label vectors.
    fn partitions(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![0usize; n];
        fn rec(i: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if i == cur.len() {
                out.push(cur.clone());
                return;
            }
            for c in 0..=k {
                cur[i] = c;
                rec(i + 1, k.max(c + 1), cur, out);
            }
        }
        rec(0, 0, &mut cur, &mut out);
        out
    }

    fn brute_max_blocks(g: &PermGroup) -> Vec<usize> {
        let n = g.degree();
        let mut best = n;
        for p in partitions(n) {
            let k = p.iter().max().unwrap() + 1;
            if k < 2 {
                continue;
            }
            let blocks: Vec<Vec<usize>> = (0..k).map(|c| (0..n).filter(|&x| p[x] == c).collect()).collect();
            if is_block_system(g, &blocks) && k < best {
                best = k;
            }
        }
        vec![best]
    }

    #[test]
    fn cyclic_examples() {
        assert_eq!(
            minimal_block_system(&cyclic(8)).unwrap(),
            BlockSystem::Blocks(vec![vec![0, 2, 4, 6], vec![1, 3, 5, 7]])
        );
        assert_eq!(
            minimal_block_system(&cyclic(6)).unwrap(),
            BlockSystem::Blocks(vec![vec![0, 2, 4], vec![1, 3, 5]])
        );
        assert_eq!(brute_max_blocks(&cyclic(8)), vec![2]);
        assert_eq!(brute_max_blocks(&cyclic(6)), vec![2]);
        assert_eq!(minimal_block_system(&PermGroup::alternating(5)).unwrap(), BlockSystem::Primitive);
        assert_eq!(minimal_block_system(&cyclic(7)).unwrap(), BlockSystem::Primitive);
    }

    #[test]
    fn elementary_abelian_needs_enlargement() {
        // Z2^3 regular: every pair closes to a block of size 2, but maximal blocks have size 4.
        let t = |v: usize| Perm::from_images((0..8).map(|x| x ^ v).collect()).unwrap();
        let g = PermGroup::new(8, vec![t(1), t(2), t(4)]).unwrap();
        match minimal_block_system(&g).unwrap() {
            BlockSystem::Blocks(b) => {
                assert_eq!(b.len(), 2);
                assert!(is_block_system(&g, &b));
                assert_eq!(b[0], vec![0, 1, 2, 3]);
            }
            BlockSystem::Primitive => panic!("imprimitive group"),
        }
    }

    #[test]
    fn non_transitive_is_rejected() {
        let g = PermGroup::new(4, vec![Perm::parse(4, "(1 2)").unwrap()]).unwrap();
        assert_eq!(minimal_block_system(&g), Err(Error::NotTransitive));
    }
}
