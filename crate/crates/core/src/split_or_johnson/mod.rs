//! Split-or-Johnson for uniprimitive configurations and bipartite graphs, and
//! the extended Design Lemma.
//!
//! Every procedure returns the per-choice list of outcomes. Individualizing a
//! whole set is recorded as one outcome whose choices list the set in sorted
//! order; other orders only rename colors.

mod bipartite;
mod johnson;
mod layered;
mod upcc;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::coherent::{all_perms, Structure};
use crate::design::{Choice, DesignOptions, Outcome};
use crate::error::{Error, Result};
use crate::partitions::{binomial, Alpha};
use crate::perm::Perm;

pub use bipartite::{block_design_route, contract_blocks, reduce_part2_by_color, BlockRoute, Move};
pub use layered::Install;
pub use johnson::{case5_partition, minimal_support};

#[cfg(test)]
mod tests;

/// A bipartite graph `(V1, V2; E)` with vertex colors on each part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredBipartite {
    pub n1: usize,
    pub n2: usize,
    /// Row-major `n1 x n2` incidence.
    pub edges: Vec<bool>,
    pub colors1: Vec<u32>,
    pub colors2: Vec<u32>,
    /// The stored edges are the complement of the given ones.
    pub complemented: bool,
}

impl ColoredBipartite {
    pub fn from_fn(n1: usize, n2: usize, mut f: impl FnMut(usize, usize) -> bool) -> ColoredBipartite {
        ColoredBipartite {
            n1,
            n2,
            edges: (0..n1 * n2).map(|i| f(i / n2, i % n2)).collect(),
            colors1: vec![0; n1],
            colors2: vec![0; n2],
            complemented: false,
        }
    }

    pub fn new(n1: usize, n2: usize, pairs: &[(usize, usize)]) -> Result<ColoredBipartite> {
        let mut x = ColoredBipartite::from_fn(n1, n2, |_, _| false);
        for &(a, b) in pairs {
            if a >= n1 || b >= n2 {
                return Err(Error::Precondition(format!("edge ({}, {}) outside {n1} x {n2}", a + 1, b + 1)));
            }
            x.edges[a * n2 + b] = true;
        }
        Ok(x)
    }

    pub fn with_colors(mut self, colors1: Vec<u32>, colors2: Vec<u32>) -> Result<ColoredBipartite> {
        if colors1.len() != self.n1 || colors2.len() != self.n2 {
            return Err(Error::Precondition("color vectors do not match the parts".into()));
        }
        self.colors1 = colors1;
        self.colors2 = colors2;
        Ok(self)
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.edges[x * self.n2 + y]
    }

    pub fn neighbors(&self, x: usize) -> Vec<usize> {
        (0..self.n2).filter(|&y| self.has_edge(x, y)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// Complements the edges when more than half of `V1 x V2` are edges.
    pub fn normalized(&self) -> ColoredBipartite {
        let mut x = self.clone();
        if 2 * self.edge_count() > self.n1 * self.n2 {
            x.edges.iter_mut().for_each(|e| *e = !*e);
            x.complemented = !x.complemented;
        }
        x
    }

    /// Classes of `V1` under "same color and same neighborhood", sorted.
    pub fn twin_classes(&self) -> Vec<Vec<usize>> {
        let mut by: HashMap<(u32, &[bool]), Vec<usize>> = HashMap::new();
        for x in 0..self.n1 {
            by.entry((self.colors1[x], &self.edges[x * self.n2..(x + 1) * self.n2])).or_default().push(x);
        }
        let mut out: Vec<Vec<usize>> = by.into_values().collect();
        out.sort();
        out
    }

    /// Size of a largest symmetrical subset of `V1`, 0 without twins.
    pub fn largest_symmetrical(&self) -> usize {
        largest_class(&self.twin_classes())
    }

    /// Absolute symmetry defect of `V1`.
    pub fn defect(&self) -> usize {
        self.n1 - self.largest_symmetrical()
    }

    pub fn is_semiregular(&self) -> bool {
        let d1: Vec<usize> = (0..self.n1).map(|x| self.neighbors(x).len()).collect();
        let d2: Vec<usize> = (0..self.n2).map(|y| (0..self.n1).filter(|&x| self.has_edge(x, y)).count()).collect();
        d1.windows(2).all(|w| w[0] == w[1]) && d2.windows(2).all(|w| w[0] == w[1])
    }

    pub fn induced(&self, v1: &[usize], v2: &[usize]) -> ColoredBipartite {
        ColoredBipartite {
            n1: v1.len(),
            n2: v2.len(),
            edges: v1.iter().flat_map(|&x| v2.iter().map(move |&y| self.has_edge(x, y))).collect(),
            colors1: v1.iter().map(|&x| self.colors1[x]).collect(),
            colors2: v2.iter().map(|&y| self.colors2[y]).collect(),
            complemented: self.complemented,
        }
    }

    /// Transport by `p1` on `V1` and `p2` on `V2`.
    pub fn permuted(&self, p1: &Perm, p2: &Perm) -> ColoredBipartite {
        let mut x = ColoredBipartite::from_fn(self.n1, self.n2, |_, _| false);
        x.complemented = self.complemented;
        for a in 0..self.n1 {
            x.colors1[p1.apply(a)] = self.colors1[a];
            for b in 0..self.n2 {
                x.edges[p1.apply(a) * self.n2 + p2.apply(b)] = self.has_edge(a, b);
            }
        }
        for b in 0..self.n2 {
            x.colors2[p2.apply(b)] = self.colors2[b];
        }
        x
    }
}

pub(crate) fn largest_class(classes: &[Vec<usize>]) -> usize {
    classes.iter().map(Vec::len).filter(|&s| s >= 2).max().unwrap_or(0)
}

/// A hypergraph on `0..n`; edges are kept sorted, the list too.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    pub n: usize,
    pub edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Hypergraph> {
        let mut out = Vec::with_capacity(edges.len());
        for mut e in edges {
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) || e.iter().any(|&x| x >= n) {
                return Err(Error::Precondition(format!("bad hyperedge {e:?} on {n} points")));
            }
            out.push(e);
        }
        out.sort();
        Ok(Hypergraph { n, edges: out })
    }

    pub fn uniformity(&self) -> Option<usize> {
        let d = self.edges.first()?.len();
        self.edges.iter().all(|e| e.len() == d).then_some(d)
    }

    pub fn has_multiple_edges(&self) -> bool {
        self.edges.windows(2).any(|w| w[0] == w[1])
    }

    /// Classes of points whose transposition preserves the edge multiset.
    pub fn twin_classes(&self) -> Vec<Vec<usize>> {
        let mut count: HashMap<&[usize], usize> = HashMap::new();
        for e in &self.edges {
            *count.entry(e.as_slice()).or_default() += 1;
        }
        let mut containing = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            for &x in e {
                containing[x].push(i);
            }
        }
        let swaps = |x: usize, y: usize| {
            containing[x].iter().chain(&containing[y]).all(|&i| {
                let e = &self.edges[i];
                if e.contains(&x) && e.contains(&y) {
                    return true;
                }
                let mut img: Vec<usize> = e.iter().map(|&z| if z == x { y } else if z == y { x } else { z }).collect();
                img.sort_unstable();
                count.get(img.as_slice()) == count.get(e.as_slice())
            })
        };
        let mut label = vec![usize::MAX; self.n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for x in 0..self.n {
            if label[x] != usize::MAX {
                continue;
            }
            label[x] = out.len();
            let mut class = vec![x];
            for y in x + 1..self.n {
                if label[y] == usize::MAX && swaps(x, y) {
                    label[y] = out.len();
                    class.push(y);
                }
            }
            out.push(class);
        }
        out
    }

    pub fn largest_symmetrical(&self) -> usize {
        largest_class(&self.twin_classes())
    }

    /// Every `d`-subset is an edge, exactly once.
    pub fn is_complete_uniform(&self) -> bool {
        self.uniformity().is_some_and(|d| !self.has_multiple_edges() && self.edges.len() as u128 == binomial(self.n, d))
    }

    /// The `t`-subsets contained in some edge.
    pub fn skeleton(&self, t: usize) -> Hypergraph {
        let mut faces: Vec<Vec<usize>> = Vec::new();
        for e in &self.edges {
            for s in crate::partitions::subsets(e.len(), t) {
                faces.push(s.iter().map(|&i| e[i]).collect());
            }
        }
        faces.sort();
        faces.dedup();
        Hypergraph { n: self.n, edges: faces }
    }

    /// Edges contained in `points`, relabeled by position in the sorted `points`.
    pub fn induced(&self, points: &[usize]) -> Hypergraph {
        let pos: HashMap<usize, usize> = points.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| e.iter().map(|x| pos.get(x).copied()).collect::<Option<Vec<usize>>>())
            .collect();
        Hypergraph::new(points.len(), edges).expect("relabeled edges")
    }

    /// The uniform hypergraph as a relation of all orderings of its edges.
    pub fn to_structure(&self) -> Result<Structure> {
        let d = self
            .uniformity()
            .ok_or_else(|| Error::Precondition("hypergraph is empty or not uniform".into()))?;
        let perms = all_perms(d);
        let tuples = self.edges.iter().flat_map(|e| perms.iter().map(move |p| p.iter().map(|&i| e[i]).collect())).collect();
        Structure::new(self.n, d, vec![tuples])
    }
}

#[derive(Clone, Debug)]
pub struct SojOptions {
    pub design: DesignOptions,
    /// Step 1 applies when `n1 <= c0`.
    pub c0: usize,
    /// Replaces `q(n1) = ceil(log2 n1)^3` in step 2.
    pub q: Option<usize>,
    /// Replaces the test-set size `l` of the Johnson case.
    pub ell: Option<usize>,
    /// Cap on recursive calls plus test-set tuples.
    pub max_steps: u64,
}

impl Default for SojOptions {
    fn default() -> SojOptions {
        SojOptions {
            design: DesignOptions::default(),
            c0: 4,
            q: None,
            ell: None,
            max_steps: 2_000_000,
        }
    }
}

/// Runs the procedures and counts which cases fired.
pub struct Soj {
    pub opts: SojOptions,
    steps: AtomicU64,
    ids: AtomicU64,
    counts: Mutex<BTreeMap<&'static str, u64>>,
}

impl Soj {
    pub fn new(opts: SojOptions) -> Soj {
        Soj {
            opts,
            steps: AtomicU64::new(0),
            ids: AtomicU64::new(0),
            counts: Mutex::new(BTreeMap::new()),
        }
    }

    pub(crate) fn note(&self, what: &'static str) {
        *self.counts.lock().expect("counter lock").entry(what).or_default() += 1;
    }

    pub(crate) fn spend(&self, k: u64) -> Result<()> {
        if self.steps.fetch_add(k, Ordering::Relaxed) + k > self.opts.max_steps {
            return Err(Error::Budget(self.opts.max_steps));
        }
        Ok(())
    }

    pub(crate) fn fresh_ids(&self, k: usize) -> Vec<u64> {
        let base = self.ids.fetch_add(k as u64, Ordering::Relaxed);
        (base..base + k as u64).collect()
    }

    /// Case counters so far, e.g. `"step2" => 3`.
    pub fn report(&self) -> BTreeMap<&'static str, u64> {
        self.counts.lock().expect("counter lock").clone()
    }

    pub fn fired(&self, what: &str) -> bool {
        self.report().get(what).is_some_and(|&c| c > 0)
    }
}

pub fn upcc_split_or_johnson(
    cc: &crate::coherent::CoherentConfig,
    beta: Alpha,
    opts: &SojOptions,
) -> Result<Vec<Outcome>> {
    Soj::new(opts.clone()).upcc(cc, beta)
}

pub fn bipartite_split_or_johnson(x: &ColoredBipartite, alpha: Alpha, opts: &SojOptions) -> Result<Vec<Outcome>> {
    Soj::new(opts.clone()).bipartite(x, alpha)
}

pub fn extended_design_lemma(s: &Structure, alpha: Alpha, opts: &SojOptions) -> Result<Vec<Outcome>> {
    Soj::new(opts.clone()).extended(s, alpha)
}

pub(crate) fn map_choices(cs: &[Choice], vertex: impl Fn(usize) -> Choice, point: impl Fn(usize) -> Choice) -> Vec<Choice> {
    cs.iter()
        .map(|c| match *c {
            Choice::Vertex(v) => vertex(v),
            Choice::Point(p) => point(p),
            b => b,
        })
        .collect()
}
