//! Simple undirected graphs, file formats and generators.

use rand::Rng;

use crate::error::{Error, Result};
use crate::perm::Perm;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph({}, {:?})", self.n, self.edges())
    }
}

impl Graph {
    pub fn empty(n: usize) -> Graph {
        Graph {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Parse(format!("edge ({u},{v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::Parse(format!("loop at vertex {u}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.adj[u * self.n + v] = true;
        self.adj[v * self.n + u] = true;
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u * self.n..(u + 1) * self.n].iter().filter(|&&b| b).count()
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.has_edge(u, v))
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.has_edge(u, v) {
                    e.push((u, v));
                }
            }
        }
        e
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count() / 2
    }

    /// The image under `p`: `{u, v}` becomes `{p(u), p(v)}`.
    pub fn permuted(&self, p: &Perm) -> Graph {
        let mut g = Graph::empty(self.n);
        for (u, v) in self.edges() {
            g.add_edge(p.apply(u), p.apply(v));
        }
        g
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::empty(self.n);
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    /// True iff `p` maps edges onto edges.
    pub fn is_isomorphism(&self, other: &Graph, p: &Perm) -> bool {
        self.n == other.n
            && p.degree() == self.n
            && self.edge_count() == other.edge_count()
            && self.edges().iter().all(|&(u, v)| other.has_edge(p.apply(u), p.apply(v)))
    }

    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let mut g = Graph::empty(self.n + other.n);
        for (u, v) in self.edges() {
            g.add_edge(u, v);
        }
        for (u, v) in other.edges() {
            g.add_edge(u + self.n, v + self.n);
        }
        g
    }

    pub fn to_graph6(&self) -> String {
        let n = self.n;
        let mut out: Vec<u8> = Vec::new();
        if n <= 62 {
            out.push(n as u8 + 63);
        } else if n <= 258_047 {
            out.push(126);
            for s in [12, 6, 0] {
                out.push(((n >> s) & 63) as u8 + 63);
            }
        } else {
            out.extend([126, 126]);
            for s in [30, 24, 18, 12, 6, 0] {
                out.push(((n >> s) & 63) as u8 + 63);
            }
        }
        let mut acc = 0u8;
        let mut bits = 0;
        for j in 1..n {
            for i in 0..j {
                acc = (acc << 1) | self.has_edge(i, j) as u8;
                bits += 1;
                if bits == 6 {
                    out.push(acc + 63);
                    acc = 0;
                    bits = 0;
                }
            }
        }
        if bits > 0 {
            out.push((acc << (6 - bits)) + 63);
        }
        String::from_utf8(out).expect("graph6 is printable ASCII")
    }

    pub fn from_graph6(text: &str) -> Result<Graph> {
        let t = text.trim();
        let t = t.strip_prefix(">>graph6<<").unwrap_or(t);
        let bytes = t.as_bytes();
        if bytes.iter().any(|&b| !(63..=126).contains(&b)) {
            return Err(Error::Parse("graph6 byte outside 63..=126".into()));
        }
        let six = |b: u8| (b - 63) as usize;
        let (n, body) = match bytes {
            [] => return Err(Error::Parse("empty graph6 string".into())),
            [126, 126, rest @ ..] if rest.len() >= 6 => (rest[..6].iter().fold(0, |a, &b| (a << 6) | six(b)), &rest[6..]),
            [126, rest @ ..] if rest.len() >= 3 => (rest[..3].iter().fold(0, |a, &b| (a << 6) | six(b)), &rest[3..]),
            [126, ..] => return Err(Error::Parse("truncated graph6 size".into())),
            [b, rest @ ..] => (six(*b), rest),
        };
        if n > crate::permgroup::MAX_DEGREE {
            return Err(Error::DegreeTooLarge(n));
        }
        let need = (n * n.saturating_sub(1) / 2).div_ceil(6);
        if body.len() != need {
            return Err(Error::Parse(format!(
                "graph6 body has {} bytes, expected {need} for {n} vertices",
                body.len()
            )));
        }
        let mut g = Graph::empty(n);
        let mut k = 0;
        for j in 1..n {
            for i in 0..j {
                if (six(body[k / 6]) >> (5 - k % 6)) & 1 == 1 {
                    g.add_edge(i, j);
                }
                k += 1;
            }
        }
        Ok(g)
    }

    /// DIMACS: `p edge n m` then `e u v` lines, 1-based; `c` lines are comments.
    pub fn from_dimacs(text: &str) -> Result<Graph> {
        let mut g: Option<Graph> = None;
        for line in text.lines() {
            let mut it = line.split_whitespace();
            match it.next() {
                None | Some("c") => {}
                Some("p") => {
                    let _kind = it.next();
                    let n: usize = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| Error::Parse(format!("bad problem line {line:?}")))?;
                    if n > crate::permgroup::MAX_DEGREE {
                        return Err(Error::DegreeTooLarge(n));
                    }
                    g = Some(Graph::empty(n));
                }
                Some("e") => {
                    let gr = g.as_mut().ok_or_else(|| Error::Parse("edge before `p` line".into()))?;
                    let mut end = || -> Result<usize> {
                        let v: usize = it
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| Error::Parse(format!("bad edge line {line:?}")))?;
                        if v == 0 || v > gr.n {
                            return Err(Error::Parse(format!("vertex {v} out of range")));
                        }
                        Ok(v - 1)
                    };
                    let (u, v) = (end()?, end()?);
                    if u == v {
                        return Err(Error::Parse(format!("loop at vertex {}", u + 1)));
                    }
                    gr.add_edge(u, v);
                }
                Some(other) => return Err(Error::Parse(format!("unknown DIMACS line type {other:?}"))),
            }
        }
        g.ok_or_else(|| Error::Parse("missing `p` line".into()))
    }

    pub fn to_dimacs(&self) -> String {
        let edges = self.edges();
        let mut s = format!("p edge {} {}\n", self.n, edges.len());
        for (u, v) in edges {
            s.push_str(&format!("e {} {}\n", u + 1, v + 1));
        }
        s
    }

    /// graph6 or DIMACS, by content.
    pub fn parse(text: &str) -> Result<Graph> {
        let t = text.trim_start();
        if t.starts_with('p') || t.starts_with('c') || t.starts_with("e ") {
            Graph::from_dimacs(text)
        } else {
            let line = t.lines().next().unwrap_or("");
            Graph::from_graph6(line)
        }
    }
}

pub fn cycle(n: usize) -> Graph {
    let mut g = Graph::empty(n);
    if n >= 3 {
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
    } else if n == 2 {
        g.add_edge(0, 1);
    }
    g
}

pub fn path(n: usize) -> Graph {
    let mut g = Graph::empty(n);
    for i in 1..n {
        g.add_edge(i - 1, i);
    }
    g
}

pub fn complete(n: usize) -> Graph {
    Graph::empty(n).complement()
}

pub fn star(leaves: usize) -> Graph {
    let mut g = Graph::empty(leaves + 1);
    for i in 1..=leaves {
        g.add_edge(0, i);
    }
    g
}

/// The `t`-subsets of `0..m` in colexicographic order.
pub fn subsets(m: usize, t: usize) -> Vec<Vec<usize>> {
    fn grow(m: usize, t: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for v in start..m {
            cur.push(v);
            grow(m, t, v + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    grow(m, t, 0, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    out
}

/// Vertices are the `t`-subsets of an `m`-set; adjacent iff they share `t - 1` elements.
pub fn johnson(m: usize, t: usize) -> Graph {
    subset_graph(m, t, |common| common + 1 == t)
}

/// Vertices are the `t`-subsets of an `m`-set; adjacent iff disjoint.
pub fn kneser(m: usize, t: usize) -> Graph {
    subset_graph(m, t, |common| common == 0)
}

fn subset_graph(m: usize, t: usize, adjacent: impl Fn(usize) -> bool) -> Graph {
    let sets = subsets(m, t);
    let mut g = Graph::empty(sets.len());
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let common = sets[a].iter().filter(|x| sets[b].contains(x)).count();
            if adjacent(common) {
                g.add_edge(a, b);
            }
        }
    }
    g
}

pub fn petersen() -> Graph {
    let mut g = Graph::empty(10);
    for i in 0..5 {
        g.add_edge(i, (i + 1) % 5);
        g.add_edge(i, i + 5);
        g.add_edge(5 + i, 5 + (i + 2) % 5);
    }
    g
}

/// Paley graph on `q` vertices for a prime `q = 1 mod 4`.
pub fn paley(q: usize) -> Graph {
    let squares: Vec<bool> = {
        let mut s = vec![false; q];
        for x in 1..q {
            s[x * x % q] = true;
        }
        s
    };
    let mut g = Graph::empty(q);
    for a in 0..q {
        for b in a + 1..q {
            if squares[(b - a) % q] {
                g.add_edge(a, b);
            }
        }
    }
    g
}

pub fn random(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Cai–Fürer–Immerman style pair over a base graph: the untwisted and the
/// once-twisted gadget graphs. They are not isomorphic when the base graph
/// is connected.
pub fn cfi_pair(base: &Graph) -> (Graph, Graph) {
    let build = |twist: bool| {
        // Each vertex v of degree d gets 2^(d-1) "even" middle vertices and
        // two end vertices a(v,e,0), a(v,e,1) per incident edge e.
        let edges = base.edges();
        let mut ends = Vec::new();
        let mut index = std::collections::HashMap::new();
        for (ei, &(u, v)) in edges.iter().enumerate() {
            for w in [u, v] {
                for bit in 0..2 {
                    index.insert((w, ei, bit), ends.len());
                    ends.push((w, ei, bit));
                }
            }
        }
        let mut g_edges = Vec::new();
        let mut next = ends.len();
        for v in 0..base.n() {
            let inc: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter(|(_, &(a, b))| a == v || b == v)
                .map(|(i, _)| i)
                .collect();
            for mask in 0u64..(1 << inc.len()) {
                if mask.count_ones() % 2 != 0 {
                    continue;
                }
                let m = next;
                next += 1;
                for (j, &e) in inc.iter().enumerate() {
                    g_edges.push((m, index[&(v, e, ((mask >> j) & 1) as usize)]));
                }
            }
        }
        for (ei, &(u, v)) in edges.iter().enumerate() {
            let flip = twist && ei == 0;
            for bit in 0..2 {
                let other = if flip { 1 - bit } else { bit };
                g_edges.push((index[&(u, ei, bit)], index[&(v, ei, other)]));
            }
        }
        Graph::from_edges(next, &g_edges).expect("gadget edges are in range")
    };
    (build(false), build(true))
}

/// Index of the pair `{i, j}` among the 2-subsets of `0..n` in colex order.
pub fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    b * (b - 1) / 2 + a
}

/// The edge indicator string on the pair domain.
pub fn pair_string(g: &Graph) -> Vec<u32> {
    let n = g.n();
    let mut x = vec![0u32; n * n.saturating_sub(1) / 2];
    for (u, v) in g.edges() {
        x[pair_index(u, v)] = 1;
    }
    x
}

/// The action of a vertex permutation on the pair domain.
pub fn pair_perm(p: &Perm) -> Perm {
    let n = p.degree();
    let mut img = vec![0; n * n.saturating_sub(1) / 2];
    for b in 1..n {
        for a in 0..b {
            img[pair_index(a, b)] = pair_index(p.apply(a), p.apply(b));
        }
    }
    Perm::from_images(img).expect("pair action is a bijection")
}

/// Recovers the vertex permutation inducing a pair permutation, when one exists.
pub fn vertex_perm_from_pairs(n: usize, q: &Perm) -> Option<Perm> {
    if n < 3 {
        return Some(Perm::identity(n));
    }
    // Vertex v is the common element of the images of the pairs {v, u}.
    let mut img = vec![0; n];
    for (v, slot) in img.iter_mut().enumerate() {
        let others: Vec<usize> = (0..n).filter(|&u| u != v).take(2).collect();
        let decode = |k: usize| -> (usize, usize) {
            let mut b = 1;
            while (b + 1) * b / 2 <= k {
                b += 1;
            }
            (k - b * (b - 1) / 2, b)
        };
        let e1 = decode(q.apply(pair_index(v, others[0])));
        let e2 = decode(q.apply(pair_index(v, others[1])));
        *slot = if e1.0 == e2.0 || e1.0 == e2.1 {
            e1.0
        } else if e1.1 == e2.0 || e1.1 == e2.1 {
            e1.1
        } else {
            return None;
        };
    }
    let p = Perm::from_images(img).ok()?;
    (pair_perm(&p) == *q).then_some(p)
}

/// Canonical code of a graph on at most 8 vertices given as neighbor masks:
/// the least pair bitmask over relabelings that respect the color-refined
/// ordered vertex partition.
pub fn small_canonical_code(adj: &[u8]) -> u64 {
    let n = adj.len();
    let mut color = vec![0usize; n];
    loop {
        let mut sig: Vec<(usize, Vec<usize>, usize)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = (0..n).filter(|&u| adj[v] >> u & 1 == 1).map(|u| color[u]).collect();
                nb.sort_unstable();
                (color[v], nb, v)
            })
            .collect();
        sig.sort();
        let mut next = vec![0usize; n];
        let mut id = 0;
        for k in 0..n {
            if k > 0 && (sig[k].0 != sig[k - 1].0 || sig[k].1 != sig[k - 1].1) {
                id += 1;
            }
            next[sig[k].2] = id;
        }
        let done = next.iter().max() == color.iter().max();
        color = next;
        if done {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| color[v]);
    let mut pos = vec![usize::MAX; n];
    let mut best = u64::MAX;
    place(adj, &color, &order, 0, &mut pos, &mut vec![false; n], &mut best);
    best
}

fn place(adj: &[u8], color: &[usize], order: &[usize], k: usize, pos: &mut [usize], used: &mut [bool], best: &mut u64) {
    let n = adj.len();
    if k == n {
        let mut c = 0u64;
        for v in 0..n {
            for u in v + 1..n {
                if adj[v] >> u & 1 == 1 {
                    c |= 1 << pair_index(pos[v], pos[u]);
                }
            }
        }
        *best = (*best).min(c);
        return;
    }
    // Position k takes some unused vertex of the color that owns position k.
    let want = color[order[k]];
    for v in 0..n {
        if !used[v] && color[v] == want {
            used[v] = true;
            pos[v] = k;
            place(adj, color, order, k + 1, pos, used, best);
            used[v] = false;
        }
    }
}

/// One graph per isomorphism class on `n <= 8` vertices, generated by adding
/// edges to canonical representatives layer by layer.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    assert!(n <= 8, "exhaustive generation is for at most 8 vertices");
    let pairs: Vec<(usize, usize)> = (1..n).flat_map(|b| (0..b).map(move |a| (a, b))).collect();
    let masks = |code: u64| -> Vec<u8> {
        let mut adj = vec![0u8; n];
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if code >> k & 1 == 1 {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
        adj
    };
    let mut seen = std::collections::HashSet::new();
    seen.insert(0u64);
    let mut out = vec![0u64];
    let mut layer = vec![0u64];
    while !layer.is_empty() {
        let mut next = Vec::new();
        for &m in &layer {
            for k in 0..pairs.len() {
                if m >> k & 1 == 0 {
                    let c = small_canonical_code(&masks(m | 1 << k));
                    if seen.insert(c) {
                        next.push(c);
                    }
                }
            }
        }
        out.extend(&next);
        layer = next;
    }
    out.sort_unstable();
    out.into_iter()
        .map(|code| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| code >> k & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            Graph::from_edges(n, &edges).expect("valid edges")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph6_round_trip() {
        let g = petersen();
        let s = g.to_graph6();
        assert_eq!(s, "IheA@GUAo");
        assert_eq!(Graph::from_graph6(&s).unwrap(), g);
        let big = cycle(100);
        assert_eq!(Graph::from_graph6(&big.to_graph6()).unwrap(), big);
        assert!(Graph::from_graph6("A").is_err());
        assert_eq!(Graph::from_graph6("Bw").unwrap(), complete(3));
    }

    #[test]
    fn dimacs_round_trip() {
        let g = cycle(5);
        assert_eq!(Graph::from_dimacs(&g.to_dimacs()).unwrap(), g);
        assert!(Graph::from_dimacs("p edge 2 1\ne 1 3\n").is_err());
    }

    #[test]
    fn colex_subsets() {
        assert_eq!(subsets(4, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3], vec![2, 3]]);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(subsets(7, 3).len(), 35);
        let s = subsets(6, 2);
        for (k, t) in s.iter().enumerate() {
            assert_eq!(pair_index(t[0], t[1]), k);
        }
    }

    #[test]
    fn class_counts() {
        let counts: Vec<usize> = (0..=7).map(|n| all_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 11, 34, 156, 1044]);
    }

    #[test]
    fn pair_action_round_trip() {
        let p = Perm::parse(5, "(1 3 2)(4 5)").unwrap();
        let q = pair_perm(&p);
        assert_eq!(vertex_perm_from_pairs(5, &q), Some(p));
    }

    #[test]
    fn kneser_is_petersen() {
        assert_eq!(kneser(5, 2).edge_count(), 15);
        assert_eq!(johnson(5, 2).edge_count(), 30);
        let (a, b) = cfi_pair(&cycle(3));
        assert_eq!(a.n(), b.n());
        assert_eq!(a.edge_count(), b.edge_count());
    }
}
