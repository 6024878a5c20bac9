use std::sync::Arc;

use num_bigint::BigUint;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::perm::Perm;

const NONE: u32 = u32::MAX;
const ROOT: u32 = u32::MAX - 1;
const DEPTH_LIMIT: usize = 10;

/// One level of a stabilizer chain: the strong generators fixing the earlier base
/// points, and a Schreier tree for the orbit of this level's base point.
#[derive(Clone)]
pub(crate) struct Level {
    pub point: usize,
    pub gens: Vec<Arc<Perm>>,
    tree: Vec<Arc<Perm>>,
    tree_inv: Vec<Arc<Perm>>,
    label: Vec<u32>,
    pub orbit: Vec<usize>,
}

impl Level {
    fn new(point: usize, n: usize) -> Level {
        let mut label = vec![NONE; n];
        label[point] = ROOT;
        Level {
            point,
            gens: Vec::new(),
            tree: Vec::new(),
            tree_inv: Vec::new(),
            label,
            orbit: vec![point],
        }
    }

    fn push_gen(&mut self, g: Arc<Perm>) {
        let inv = Arc::new(g.inverse());
        self.tree.push(g.clone());
        self.tree_inv.push(inv.clone());
        if *inv != *g {
            self.tree.push(inv.clone());
            self.tree_inv.push(g.clone());
        }
        self.gens.push(g);
    }

    fn add_gen(&mut self, g: Arc<Perm>) {
        self.push_gen(g);
        self.rebuild();
    }

    fn bfs(&mut self) -> (usize, usize) {
        for &p in &self.orbit {
            self.label[p] = NONE;
        }
        self.label[self.point] = ROOT;
        self.orbit.clear();
        self.orbit.push(self.point);
        let mut depth = vec![0usize];
        let mut head = 0;
        let mut deepest = (0, self.point);
        while head < self.orbit.len() {
            let p = self.orbit[head];
            let d = depth[head];
            head += 1;
            for (j, s) in self.tree.iter().enumerate() {
                let q = s.apply(p);
                if self.label[q] == NONE {
                    self.label[q] = j as u32;
                    self.orbit.push(q);
                    depth.push(d + 1);
                    if d + 1 > deepest.0 {
                        deepest = (d + 1, q);
                    }
                }
            }
        }
        deepest
    }

    fn rebuild(&mut self) {
        let mut rounds = 0;
        loop {
            let (depth, far) = self.bfs();
            if depth <= DEPTH_LIMIT || rounds >= 24 {
                break;
            }
            let u = Arc::new(self.transversal(far));
            let inv = Arc::new(u.inverse());
            self.tree.push(u.clone());
            self.tree_inv.push(inv.clone());
            self.tree.push(inv);
            self.tree_inv.push(u);
            rounds += 1;
        }
    }

    #[inline]
    pub fn contains(&self, p: usize) -> bool {
        self.label[p] != NONE
    }

    /// An element mapping the base point to `p`.
    pub fn transversal(&self, p: usize) -> Perm {
        let n = self.label.len();
        let mut path = Vec::new();
        let mut q = p;
        while q != self.point {
            let j = self.label[q] as usize;
            path.push(j);
            q = self.tree_inv[j].apply(q);
        }
        let mut u = Perm::identity(n);
        for &j in path.iter().rev() {
            u.mul_assign(&self.tree[j]);
        }
        u
    }

    /// Multiplies `g` on the right until it fixes the base point; false if the
    /// image of the base point is outside the orbit.
    pub fn strip_step(&self, g: &mut Perm) -> bool {
        let mut q = g.apply(self.point);
        if self.label[q] == NONE {
            return false;
        }
        while q != self.point {
            let j = self.label[q] as usize;
            g.mul_assign(&self.tree_inv[j]);
            q = self.tree_inv[j].apply(q);
        }
        true
    }
}

#[derive(Clone)]
pub struct Bsgs {
    pub(crate) n: usize,
    pub(crate) levels: Vec<Level>,
}

pub(crate) struct ProductReplacement {
    state: Vec<Perm>,
    acc: Perm,
}

impl ProductReplacement {
    pub fn new(n: usize, gens: &[Perm], rng: &mut ChaCha8Rng) -> ProductReplacement {
        let mut state: Vec<Perm> = Vec::new();
        let size = gens.len().max(10);
        for i in 0..size {
            state.push(gens.get(i % gens.len().max(1)).cloned().unwrap_or_else(|| Perm::identity(n)));
        }
        let mut pr = ProductReplacement {
            state,
            acc: Perm::identity(n),
        };
        for _ in 0..40 {
            pr.next(rng);
        }
        pr
    }

    pub fn next(&mut self, rng: &mut ChaCha8Rng) -> Perm {
        let k = self.state.len();
        let i = rng.gen_range(0..k);
        let mut j = rng.gen_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        let s = if rng.gen::<bool>() {
            self.state[i].mul(&self.state[j])
        } else {
            self.state[j].mul(&self.state[i])
        };
        self.state[i] = s;
        self.acc = self.acc.mul(&self.state[i]);
        self.acc.clone()
    }
}

impl Bsgs {
    pub fn trivial(n: usize) -> Bsgs {
        Bsgs { n, levels: Vec::new() }
    }

    /// Randomized Schreier-Sims. With `known` order the random phase runs until the
    /// order is reached; otherwise it is followed by a deterministic Schreier-Sims pass.
    pub fn build(
        n: usize,
        gens: &[Perm],
        prefix: &[usize],
        known: Option<&BigUint>,
        rng: &mut ChaCha8Rng,
    ) -> Bsgs {
        let mut strong: Vec<Arc<Perm>> = Vec::new();
        for g in gens {
            if !g.is_identity() && !strong.iter().any(|s| **s == *g) {
                strong.push(Arc::new(g.clone()));
            }
        }
        let mut b = Bsgs { n, levels: Vec::new() };
        let mut seen = vec![false; n];
        for &p in prefix {
            if !seen[p] {
                seen[p] = true;
                b.levels.push(Level::new(p, n));
            }
        }
        for g in &strong {
            if b.levels.iter().all(|l| g.apply(l.point) == l.point) {
                let p = g.first_moved().unwrap();
                b.levels.push(Level::new(p, n));
            }
        }
        for g in &strong {
            for l in b.levels.iter_mut() {
                l.push_gen(g.clone());
                if g.apply(l.point) != l.point {
                    break;
                }
            }
        }
        for l in b.levels.iter_mut() {
            l.rebuild();
        }
        if strong.is_empty() {
            return b;
        }
        let plain: Vec<Perm> = strong.iter().map(|g| (**g).clone()).collect();
        let mut pr = ProductReplacement::new(n, &plain, rng);
        let mut passes = 0;
        let mut rounds = 0usize;
        loop {
            if let Some(k) = known {
                if b.order() >= *k {
                    break;
                }
                if rounds > 20000 {
                    break;
                }
            } else if passes >= 24 {
                break;
            }
            rounds += 1;
            let g = pr.next(rng);
            let (h, j) = b.strip(&g, 0);
            if h.is_identity() {
                passes += 1;
            } else {
                passes = 0;
                b.insert(h, j);
            }
        }
        let done = matches!(known, Some(k) if b.order() == *k);
        if !done {
            b.schreier_sims();
        }
        b
    }

    /// Adds a strong generator that fixes the first `j` base points.
    fn insert(&mut self, h: Perm, j: usize) {
        if j == self.levels.len() {
            let p = h.first_moved().expect("nontrivial residue");
            self.levels.push(Level::new(p, self.n));
        }
        let h = Arc::new(h);
        for l in 0..=j {
            self.levels[l].add_gen(h.clone());
        }
    }

    fn schreier_sims(&mut self) {
        let mut i = self.levels.len() as isize - 1;
        while i >= 0 {
            let lvl = i as usize;
            let mut again = None;
            let orbit = self.levels[lvl].orbit.clone();
            let gens = self.levels[lvl].gens.clone();
            'outer: for &p in &orbit {
                let u = self.levels[lvl].transversal(p);
                for s in &gens {
                    let mut h = u.mul(s);
                    self.levels[lvl].strip_step(&mut h);
                    let (h, j) = self.strip(&h, lvl + 1);
                    if !h.is_identity() {
                        self.insert(h, j);
                        again = Some(j);
                        break 'outer;
                    }
                }
            }
            match again {
                Some(j) => i = j as isize,
                None => i -= 1,
            }
        }
    }

    /// Sifts `g` starting at level `from`; returns the residue and the first level
    /// at which sifting failed (or the chain length).
    pub fn strip(&self, g: &Perm, from: usize) -> (Perm, usize) {
        let mut h = g.clone();
        for (i, l) in self.levels.iter().enumerate().skip(from) {
            if !l.strip_step(&mut h) {
                return (h, i);
            }
        }
        (h, self.levels.len())
    }

    pub fn contains(&self, g: &Perm) -> bool {
        if g.degree() != self.n {
            return false;
        }
        let (h, _) = self.strip(g, 0);
        h.is_identity()
    }

    pub fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::from(1u32), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.point).collect()
    }

    pub fn strong_generators(&self) -> Vec<Perm> {
        self.levels
            .first()
            .map(|l| l.gens.iter().map(|g| (**g).clone()).collect())
            .unwrap_or_default()
    }

    /// The chain for the stabilizer of the first `k` base points.
    pub fn tail(&self, k: usize) -> Bsgs {
        let mut levels: Vec<Level> = self.levels[k.min(self.levels.len())..].to_vec();
        while levels.last().is_some_and(|l| l.orbit.len() == 1 && l.gens.is_empty()) {
            levels.pop();
        }
        Bsgs { n: self.n, levels }
    }

    pub fn level_orbit(&self, i: usize) -> &[usize] {
        &self.levels[i].orbit
    }

    pub fn level_point(&self, i: usize) -> usize {
        self.levels[i].point
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level_contains(&self, i: usize, p: usize) -> bool {
        self.levels[i].contains(p)
    }

    pub fn transversal(&self, i: usize, p: usize) -> Perm {
        self.levels[i].transversal(p)
    }

    pub fn level_gens(&self, i: usize) -> Vec<Perm> {
        self.levels[i].gens.iter().map(|g| (**g).clone()).collect()
    }

    /// An element whose images of the first `targets.len()` base points are `targets`,
    /// with identity components on the deeper levels; `None` if no element qualifies.
    pub fn from_base_images(&self, targets: &[usize]) -> Option<Perm> {
        let mut t = targets.to_vec();
        let mut g = Perm::identity(self.n);
        for i in 0..t.len().min(self.levels.len()) {
            let l = &self.levels[i];
            if !l.contains(t[i]) {
                return None;
            }
            let u = l.transversal(t[i]);
            let ui = u.inverse();
            for x in t.iter_mut().skip(i + 1) {
                *x = ui.apply(*x);
            }
            g = u.mul(&g);
        }
        Some(g)
    }

    pub fn random_element(&self, rng: &mut impl Rng) -> Perm {
        let mut g = Perm::identity(self.n);
        for l in self.levels.iter().rev() {
            let p = l.orbit[rng.gen_range(0..l.orbit.len())];
            g.mul_assign(&l.transversal(p));
        }
        g
    }

    /// Every element, each exactly once.
    pub fn elements(&self) -> Vec<Perm> {
        let trans: Vec<Vec<Perm>> = self
            .levels
            .iter()
            .map(|l| l.orbit.iter().map(|&p| l.transversal(p)).collect())
            .collect();
        let mut out = vec![Perm::identity(self.n)];
        for t in trans.iter().rev() {
            let mut next = Vec::with_capacity(out.len() * t.len());
            for g in &out {
                for u in t {
                    next.push(g.mul(u));
                }
            }
            out = next;
        }
        out
    }
}
