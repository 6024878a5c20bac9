//! k-ary configurations, Weisfeiler-Leman refinement and coherent configurations.

mod twins;
mod wl;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::perm::Perm;

pub use twins::{strong_twins, twin_classes, weak_twins, TwinKind};
pub use wl::{check_k_coherent, refine_kdim, wl_refine, wl_refine_kdim, WlOptions};

/// A coloring of `Omega^k`, stored densely in row-major tuple order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Config {
    n: usize,
    arity: usize,
    colors: Vec<u32>,
    rank: usize,
}

impl std::fmt::Debug for Config {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Config(n={}, arity={}, rank={})", self.n, self.arity, self.rank)
    }
}

/// Assigns ids `0..r` to keys in sorted key order; returns ids and `r`.
pub(crate) fn rank_keys<K: Ord + Clone + std::hash::Hash>(keys: &[K]) -> (Vec<u32>, usize) {
    let mut uniq: Vec<K> = keys.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    let index: HashMap<&K, u32> = uniq.iter().enumerate().map(|(i, k)| (k, i as u32)).collect();
    (keys.iter().map(|k| index[k]).collect(), uniq.len())
}

impl Config {
    /// Colors are renumbered canonically by their order of value, so any
    /// injective recoloring yields the same configuration.
    pub fn new(n: usize, arity: usize, colors: Vec<u32>) -> Result<Config> {
        if arity == 0 {
            return Err(Error::Precondition("arity must be at least 1".into()));
        }
        let expect = n
            .checked_pow(arity as u32)
            .ok_or_else(|| Error::Resource(format!("{n}^{arity} tuples")))?;
        if colors.len() != expect {
            return Err(Error::Precondition(format!(
                "{} colors supplied for {expect} tuples",
                colors.len()
            )));
        }
        let (colors, rank) = rank_keys(&colors);
        Ok(Config { n, arity, colors, rank })
    }

    pub(crate) fn from_ranked(n: usize, arity: usize, colors: Vec<u32>, rank: usize) -> Config {
        Config { n, arity, colors, rank }
    }

    /// Diagonal, edge, non-edge (empty classes dropped).
    pub fn from_graph(g: &Graph) -> Config {
        let n = g.n();
        let mut colors = vec![0u32; n * n];
        for x in 0..n {
            for y in 0..n {
                colors[x * n + y] = if x == y {
                    0
                } else if g.has_edge(x, y) {
                    1
                } else {
                    2
                };
            }
        }
        Config::new(n, 2, colors).expect("sizes match")
    }

    /// Vertex colors on the diagonal, edge/non-edge off it.
    pub fn from_colored_graph(g: &Graph, vertex_colors: &[u32]) -> Config {
        let n = g.n();
        let top = vertex_colors.iter().max().map_or(0, |m| m + 1);
        let mut colors = vec![0u32; n * n];
        for x in 0..n {
            for y in 0..n {
                colors[x * n + y] = if x == y {
                    vertex_colors[x]
                } else if g.has_edge(x, y) {
                    top
                } else {
                    top + 1
                };
            }
        }
        Config::new(n, 2, colors).expect("sizes match")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn index(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |a, &x| a * self.n + x)
    }

    pub fn tuple(&self, mut idx: usize) -> Vec<usize> {
        let mut t = vec![0; self.arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % self.n;
            idx /= self.n;
        }
        t
    }

    pub fn color(&self, tuple: &[usize]) -> u32 {
        self.colors[self.index(tuple)]
    }

    /// Binary shorthand.
    pub fn c(&self, x: usize, y: usize) -> u32 {
        self.colors[x * self.n + y]
    }

    /// Vertex color: the color of `(x, ..., x)`.
    pub fn vertex_color(&self, x: usize) -> u32 {
        self.color(&vec![x; self.arity])
    }

    /// Partition of `Omega` by vertex color, classes ordered by color.
    pub fn vertex_classes(&self) -> Vec<Vec<usize>> {
        let mut m: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for x in 0..self.n {
            m.entry(self.vertex_color(x)).or_default().push(x);
        }
        m.into_values().collect()
    }

    /// Tuples of each color, in tuple order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.rank];
        for (i, &c) in self.colors.iter().enumerate() {
            out[c as usize].push(i);
        }
        out
    }

    /// Checks axioms (i)-(iii): nonempty classes, equal colors have equal
    /// equality patterns, and coordinate permutations permute color classes.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.rank];
        let mut pattern: Vec<Option<Vec<usize>>> = vec![None; self.rank];
        let k = self.arity;
        let coord_perms = all_perms(k);
        let mut induced: Vec<Vec<Option<u32>>> = vec![vec![None; coord_perms.len()]; self.rank];
        for (i, &c) in self.colors.iter().enumerate() {
            let ci = c as usize;
            if ci >= self.rank {
                return Err(Error::Axiom {
                    axiom: "i",
                    detail: format!("color {c} exceeds rank {}", self.rank),
                });
            }
            seen[ci] = true;
            let t = self.tuple(i);
            let pat = equality_pattern(&t);
            match &pattern[ci] {
                None => pattern[ci] = Some(pat),
                Some(p) if *p != pat => {
                    return Err(Error::Axiom {
                        axiom: "ii",
                        detail: format!("color {c} mixes equality patterns {p:?} and {pat:?}"),
                    })
                }
                _ => {}
            }
            for (s, sigma) in coord_perms.iter().enumerate() {
                let u: Vec<usize> = sigma.iter().map(|&j| t[j]).collect();
                let cu = self.color(&u);
                match induced[ci][s] {
                    None => induced[ci][s] = Some(cu),
                    Some(d) if d != cu => {
                        return Err(Error::Axiom {
                            axiom: "iii",
                            detail: format!("coordinate permutation {sigma:?} splits color {c}"),
                        })
                    }
                    _ => {}
                }
            }
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::Axiom {
                axiom: "i",
                detail: format!("color {c} is empty"),
            });
        }
        Ok(())
    }

    /// The `t`-skeleton: `(x_1..x_t)` gets the color of `(x_1..x_t, x_t, .., x_t)`.
    pub fn skeleton(&self, t: usize) -> Result<Config> {
        if t == 0 || t > self.arity {
            return Err(Error::Precondition(format!("skeleton arity {t} not in 1..={}", self.arity)));
        }
        let count = self.n.pow(t as u32);
        let mut colors = Vec::with_capacity(count);
        let mut full = vec![0; self.arity];
        for idx in 0..count {
            let mut r = idx;
            for j in (0..t).rev() {
                full[j] = r % self.n;
                r /= self.n;
            }
            for j in t..self.arity {
                full[j] = full[t - 1];
            }
            colors.push(self.color(&full));
        }
        Config::new(self.n, t, colors)
    }

    /// Restriction to the sorted vertex set `delta`, relabeled `0..|delta|`.
    pub fn induced(&self, delta: &[usize]) -> Config {
        let m = delta.len();
        let count = m.pow(self.arity as u32);
        let mut colors = Vec::with_capacity(count);
        let mut t = vec![0; self.arity];
        for idx in 0..count {
            let mut r = idx;
            for j in (0..self.arity).rev() {
                t[j] = delta[r % m];
                r /= m;
            }
            colors.push(self.color(&t));
        }
        Config::new(m, self.arity, colors).expect("sizes match")
    }

    /// Gives each `s` in `seq` a fresh color determined by its position; a
    /// tuple's new color records its old color and the position of each entry.
    pub fn individualize(&self, seq: &[usize]) -> Config {
        let mut pos = vec![u32::MAX; self.n];
        for (i, &s) in seq.iter().enumerate() {
            pos[s] = i as u32;
        }
        let keys: Vec<(u32, Vec<u32>)> = (0..self.colors.len())
            .map(|i| {
                let t = self.tuple(i);
                (self.colors[i], t.iter().map(|&x| pos[x]).collect())
            })
            .collect();
        let (colors, rank) = rank_keys(&keys);
        Config::from_ranked(self.n, self.arity, colors, rank)
    }

    /// The configuration transported by `p`: `c'(x^p) = c(x)`.
    pub fn permuted(&self, p: &Perm) -> Config {
        let mut colors = vec![0u32; self.colors.len()];
        for (i, &c) in self.colors.iter().enumerate() {
            let t: Vec<usize> = self.tuple(i).iter().map(|&x| p.apply(x)).collect();
            colors[self.index(&t)] = c;
        }
        Config::from_ranked(self.n, self.arity, colors, self.rank)
    }

    /// As partitions of `Omega^k`.
    pub fn same_partition(&self, other: &Config) -> bool {
        if self.n != other.n || self.arity != other.arity || self.rank != other.rank {
            return false;
        }
        let mut map = vec![u32::MAX; self.rank];
        self.colors.iter().zip(&other.colors).all(|(&a, &b)| {
            let slot = &mut map[a as usize];
            if *slot == u32::MAX {
                *slot = b;
            }
            *slot == b
        }) && {
            let mut used = map.clone();
            used.sort_unstable();
            used.dedup();
            used.len() == self.rank
        }
    }

    /// True iff every class of `self` is contained in a class of `coarser`.
    pub fn refines(&self, coarser: &Config) -> bool {
        let mut map = vec![u32::MAX; self.rank];
        self.colors.iter().zip(&coarser.colors).all(|(&a, &b)| {
            let slot = &mut map[a as usize];
            if *slot == u32::MAX {
                *slot = b;
            }
            *slot == b
        })
    }

    /// `arity k rank r n`, then one line per color listing its 1-based tuples.
    pub fn dump(&self) -> String {
        let mut s = format!("arity {} rank {} n {}\n", self.arity, self.rank, self.n);
        for (c, class) in self.classes().iter().enumerate() {
            let _ = write!(s, "color {c}:");
            for &i in class {
                let t = self.tuple(i);
                let inner: Vec<String> = t.iter().map(|x| (x + 1).to_string()).collect();
                let _ = write!(s, " ({})", inner.join(","));
            }
            s.push('\n');
        }
        s
    }
}

pub(crate) fn all_perms(k: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Index of the first coordinate equal to each coordinate.
pub(crate) fn equality_pattern(t: &[usize]) -> Vec<usize> {
    t.iter().map(|x| t.iter().position(|y| y == x).expect("present")).collect()
}

/// A k-ary relational structure; relations of lower arity are padded by
/// repeating their last coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    pub n: usize,
    pub arity: usize,
    pub relations: Vec<Vec<Vec<usize>>>,
}

impl Structure {
    pub fn new(n: usize, arity: usize, relations: Vec<Vec<Vec<usize>>>) -> Result<Structure> {
        let mut out = Vec::with_capacity(relations.len());
        for r in relations {
            let mut rel = Vec::with_capacity(r.len());
            for t in r {
                if t.is_empty() || t.len() > arity || t.iter().any(|&x| x >= n) {
                    return Err(Error::Precondition(format!("tuple {t:?} does not fit arity {arity} on {n} points")));
                }
                let mut p = t.clone();
                let last = *p.last().expect("nonempty");
                p.resize(arity, last);
                rel.push(p);
            }
            rel.sort_unstable();
            rel.dedup();
            out.push(rel);
        }
        Ok(Structure {
            n,
            arity,
            relations: out,
        })
    }

    pub fn from_graph(g: &Graph) -> Structure {
        let mut edges = Vec::new();
        for (u, v) in g.edges() {
            edges.push(vec![u, v]);
            edges.push(vec![v, u]);
        }
        Structure::new(g.n(), 2, vec![edges]).expect("valid")
    }

    /// Initial coloring: equality pattern plus membership of every coordinate
    /// permutation of the tuple in every relation.
    pub fn initial_config(&self) -> Result<Config> {
        let k = self.arity;
        let count = self
            .n
            .checked_pow(k as u32)
            .ok_or_else(|| Error::Resource(format!("{}^{k} tuples", self.n)))?;
        let sets: Vec<std::collections::HashSet<&[usize]>> = self
            .relations
            .iter()
            .map(|r| r.iter().map(|t| t.as_slice()).collect())
            .collect();
        let perms = all_perms(k);
        let probe = Config::from_ranked(self.n, k, Vec::new(), 0);
        let keys: Vec<(Vec<usize>, Vec<bool>)> = (0..count)
            .map(|i| {
                let t = probe.tuple(i);
                let mut bits = Vec::with_capacity(perms.len() * sets.len());
                for sigma in &perms {
                    let u: Vec<usize> = sigma.iter().map(|&j| t[j]).collect();
                    for s in &sets {
                        bits.push(s.contains(u.as_slice()));
                    }
                }
                (equality_pattern(&t), bits)
            })
            .collect();
        let (colors, rank) = rank_keys(&keys);
        Ok(Config::from_ranked(self.n, k, colors, rank))
    }

    pub fn permuted(&self, p: &Perm) -> Structure {
        let relations = self
            .relations
            .iter()
            .map(|r| {
                let mut v: Vec<Vec<usize>> = r.iter().map(|t| t.iter().map(|&x| p.apply(x)).collect()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        Structure {
            n: self.n,
            arity: self.arity,
            relations,
        }
    }

    /// True iff `p` preserves every relation.
    pub fn is_automorphism(&self, p: &Perm) -> bool {
        self.relations.iter().all(|r| {
            let set: std::collections::HashSet<&Vec<usize>> = r.iter().collect();
            r.iter().all(|t| {
                let u: Vec<usize> = t.iter().map(|&x| p.apply(x)).collect();
                set.contains(&u)
            })
        })
    }

    /// The relations of a configuration's color classes.
    pub fn from_config(c: &Config) -> Structure {
        let relations = c
            .classes()
            .into_iter()
            .map(|cl| cl.into_iter().map(|i| c.tuple(i)).collect())
            .collect();
        Structure {
            n: c.n(),
            arity: c.arity(),
            relations,
        }
    }
}

/// A stable binary configuration with its structure constants.
#[derive(Clone)]
pub struct CoherentConfig {
    cfg: Config,
    converse: Vec<u32>,
    out_deg: Vec<u32>,
    in_deg: Vec<u32>,
    reps: Vec<(usize, usize)>,
    consts: OnceLock<Vec<Vec<(u32, u32, u32)>>>,
}

impl std::fmt::Debug for CoherentConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CoherentConfig(n={}, rank={})", self.cfg.n, self.cfg.rank)
    }
}

/// Result of [`classify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Clique,
    /// An off-diagonal color whose constituent is disconnected, with its components.
    HomogeneousImprimitive { color: u32, blocks: Vec<Vec<usize>> },
    Upcc,
    NonHomogeneous,
}

impl CoherentConfig {
    /// Verifies coherence exhaustively and attaches the derived data.
    pub fn new(cfg: Config) -> Result<CoherentConfig> {
        if cfg.arity != 2 {
            return Err(Error::Precondition("coherent configurations here are binary".into()));
        }
        cfg.validate()?;
        let cc = CoherentConfig::trusted(cfg);
        cc.verify()?;
        Ok(cc)
    }

    /// Without the exhaustive check; for outputs of refinement.
    pub(crate) fn trusted(cfg: Config) -> CoherentConfig {
        let n = cfg.n;
        let r = cfg.rank;
        let mut converse = vec![0u32; r];
        let mut reps = vec![(usize::MAX, usize::MAX); r];
        let mut out_count: Vec<HashMap<usize, u32>> = vec![HashMap::new(); r];
        let mut in_count: Vec<HashMap<usize, u32>> = vec![HashMap::new(); r];
        for x in 0..n {
            for y in 0..n {
                let c = cfg.c(x, y) as usize;
                converse[c] = cfg.c(y, x);
                if reps[c].0 == usize::MAX {
                    reps[c] = (x, y);
                }
                *out_count[c].entry(x).or_default() += 1;
                *in_count[c].entry(y).or_default() += 1;
            }
        }
        let first = |m: &HashMap<usize, u32>| m.values().next().copied().unwrap_or(0);
        let out_deg = out_count.iter().map(first).collect();
        let in_deg = in_count.iter().map(first).collect();
        CoherentConfig {
            cfg,
            converse,
            out_deg,
            in_deg,
            reps,
            consts: OnceLock::new(),
        }
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn n(&self) -> usize {
        self.cfg.n
    }

    pub fn rank(&self) -> usize {
        self.cfg.rank
    }

    pub fn c(&self, x: usize, y: usize) -> u32 {
        self.cfg.c(x, y)
    }

    pub fn converse(&self, i: u32) -> u32 {
        self.converse[i as usize]
    }

    pub fn out_degree(&self, i: u32) -> u32 {
        self.out_deg[i as usize]
    }

    pub fn in_degree(&self, i: u32) -> u32 {
        self.in_deg[i as usize]
    }

    pub fn is_diagonal(&self, i: u32) -> bool {
        let (x, y) = self.reps[i as usize];
        x == y
    }

    pub fn vertex_classes(&self) -> Vec<Vec<usize>> {
        self.cfg.vertex_classes()
    }

    /// `p(i, j, k) = |{z : c(x,z) = i, c(z,y) = j}|` for any `(x, y)` of color `k`.
    pub fn p(&self, i: u32, j: u32, k: u32) -> u32 {
        let (x, y) = self.reps[k as usize];
        (0..self.cfg.n)
            .filter(|&z| self.cfg.c(x, z) == i && self.cfg.c(z, y) == j)
            .count() as u32
    }

    /// Nonzero structure constants `(i, j, p(i,j,k))` per color `k`, sorted.
    pub fn structure_constants(&self) -> &[Vec<(u32, u32, u32)>] {
        self.consts.get_or_init(|| {
            (0..self.cfg.rank)
                .map(|k| {
                    let (x, y) = self.reps[k];
                    triangle_counts(&self.cfg, x, y)
                })
                .collect()
        })
    }

    /// Axiom (iv) by exhaustive triple counting, plus converse closure.
    pub fn verify(&self) -> Result<()> {
        let n = self.cfg.n;
        for x in 0..n {
            for y in 0..n {
                let k = self.cfg.c(x, y);
                if self.cfg.c(y, x) != self.converse[k as usize] {
                    return Err(Error::Axiom {
                        axiom: "iii",
                        detail: format!("converse of color {k} is not a color"),
                    });
                }
            }
        }
        let table = self.structure_constants();
        for x in 0..n {
            for y in 0..n {
                let k = self.cfg.c(x, y) as usize;
                if triangle_counts(&self.cfg, x, y) != table[k] {
                    return Err(Error::Axiom {
                        axiom: "iv",
                        detail: format!("pair ({}, {}) of color {k} has different triangle counts", x + 1, y + 1),
                    });
                }
            }
        }
        Ok(())
    }

    /// Vertex sets of the weakly connected components of constituent `i`.
    pub fn components(&self, i: u32) -> Vec<Vec<usize>> {
        let n = self.cfg.n;
        let mut dsu: Vec<usize> = (0..n).collect();
        fn find(d: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while d[r] != r {
                r = d[r];
            }
            let mut y = x;
            while d[y] != r {
                let next = d[y];
                d[y] = r;
                y = next;
            }
            r
        }
        let mut touched = vec![false; n];
        for x in 0..n {
            for y in 0..n {
                if self.cfg.c(x, y) == i {
                    touched[x] = true;
                    touched[y] = true;
                    let (a, b) = (find(&mut dsu, x), find(&mut dsu, y));
                    if a != b {
                        dsu[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..n {
            if touched[x] {
                let r = find(&mut dsu, x);
                groups.entry(r).or_default().push(x);
            }
        }
        groups.into_values().collect()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.vertex_classes().len() <= 1
    }

    pub fn permuted(&self, p: &Perm) -> CoherentConfig {
        CoherentConfig::trusted(self.cfg.permuted(p))
    }
}

fn triangle_counts(cfg: &Config, x: usize, y: usize) -> Vec<(u32, u32, u32)> {
    let mut m: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for z in 0..cfg.n {
        *m.entry((cfg.c(x, z), cfg.c(z, y))).or_default() += 1;
    }
    m.into_iter().map(|((i, j), c)| (i, j, c)).collect()
}

/// Clique, homogeneous imprimitive, UPCC, or non-homogeneous.
pub fn classify(cc: &CoherentConfig) -> Classification {
    if !cc.is_homogeneous() {
        return Classification::NonHomogeneous;
    }
    if cc.rank() <= 2 {
        return Classification::Clique;
    }
    // The witness with the most components, so the finest blocks; ties by color.
    let mut best: Option<(u32, Vec<Vec<usize>>)> = None;
    for i in 0..cc.rank() as u32 {
        if cc.is_diagonal(i) {
            continue;
        }
        let comps = cc.components(i);
        if comps.len() > 1 && best.as_ref().is_none_or(|(_, b)| comps.len() > b.len()) {
            best = Some((i, comps));
        }
    }
    match best {
        Some((color, blocks)) => Classification::HomogeneousImprimitive { color, blocks },
        None => Classification::Upcc,
    }
}

#[cfg(test)]
mod tests;
