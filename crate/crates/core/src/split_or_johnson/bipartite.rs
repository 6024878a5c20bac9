use std::collections::BTreeMap;

use super::layered::{Ground, Install, Layered};
use super::{map_choices, ColoredBipartite, Hypergraph, Soj};
use crate::coherent::{classify, rank_keys, Classification, CoherentConfig};
use crate::design::{split_or_upcc, Choice, JohnsonPart, Outcome, Payload};
use crate::error::{Error, Result};
use crate::partitions::{alpha, at_least, at_most, subsets, Alpha, ColoredPartition};

/// One branch of a case: the change made before the loop continues.
#[derive(Clone, Debug)]
pub enum Move {
    /// Final outcome on the current `V1`.
    Done(Payload),
    /// Individualize `V2` and stop.
    Discretize,
    /// Keep the sorted `V2` subset; `edges` replaces the incidence afterwards.
    Restrict {
        keep: Vec<usize>,
        edges: Option<ColoredBipartite>,
        significant: bool,
    },
    /// Keep the sorted `V2` subset, which is labeled by `C(m, t)`.
    RestrictJohnson {
        keep: Vec<usize>,
        m: usize,
        labels: Vec<Vec<usize>>,
    },
    /// A new, much smaller `V2` over the same `V1`.
    Replace {
        x: ColoredBipartite,
        rel2: Option<Vec<u32>>,
    },
    InstallV2(Install),
    InstallGamma(Install),
    /// Label every point of `Gamma` by a subset of a new ground of size `m`.
    AttachUpper {
        m: usize,
        labels: Vec<Vec<usize>>,
    },
}

pub(crate) type Branch = (Vec<Choice>, Move);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockRoute {
    /// Design Lemma on the neighborhood hypergraph.
    Design,
    /// Design Lemma on the `t`-skeleton.
    Skeleton(usize),
}

/// Case 3a when `d1 <= (7/3) log2 n1`, else 3b with `t = ceil((7/4) log2 n1)`.
pub fn block_design_route(d1: usize, n1: usize) -> Result<BlockRoute> {
    let lg = (n1 as f64).log2();
    if 3.0 * d1 as f64 <= 7.0 * lg {
        return Ok(BlockRoute::Design);
    }
    let t = (1.75 * lg).ceil() as usize;
    if 4 * t > 3 * d1 || t < 1 {
        return Err(Error::Invariant(format!("skeleton order t = {t} exceeds 3/4 of d1 = {d1}")));
    }
    Ok(BlockRoute::Skeleton(t))
}

/// `Y(x, i)` iff some `y` in block `i` has `rel(x, y)`.
pub fn contract_blocks(n1: usize, blocks: &[Vec<usize>], rel: impl Fn(usize, usize) -> bool) -> ColoredBipartite {
    ColoredBipartite::from_fn(n1, blocks.len(), |x, i| blocks[i].iter().any(|&y| rel(x, y)))
}

fn complement(n: usize, c: &[usize]) -> Vec<usize> {
    (0..n).filter(|y| c.binary_search(y).is_err()).collect()
}

pub(crate) fn reduce_core(x: &ColoredBipartite, c1: &[usize], alpha: Alpha) -> Result<usize> {
    let all: Vec<usize> = (0..x.n1).collect();
    let c2 = complement(x.n2, c1);
    for (j, c) in [(1, c1), (2, c2.as_slice())] {
        if at_most(x.induced(&all, c).largest_symmetrical(), alpha, x.n1) {
            return Ok(j);
        }
    }
    Err(Error::Invariant(format!(
        "neither side of a {}/{} split of V2 keeps the symmetry defect of V1 at {}",
        c1.len(),
        c2.len(),
        Alpha::from_integer(1) - alpha
    )))
}

/// The side `j` in `{1, 2}` (1 on ties) such that `V1` keeps relative
/// symmetry defect at least `1 - alpha` in `X[V1, C_j]`.
pub fn reduce_part2_by_color(x: &ColoredBipartite, c1: &[usize], alpha: Alpha) -> Result<usize> {
    if alpha < self::alpha(2, 3) || alpha >= Alpha::from_integer(1) {
        return Err(Error::Precondition(format!("alpha = {alpha} outside [2/3, 1)")));
    }
    if x.n1 < 3 {
        return Err(Error::Precondition("need |V1| >= 3".into()));
    }
    if at_least(x.n2, alpha, x.n1) {
        return Err(Error::Precondition(format!("|V2| = {} is not below {alpha} |V1|", x.n2)));
    }
    if x.largest_symmetrical() > 0 {
        return Err(Error::Precondition("V1 has twins".into()));
    }
    let mut c1 = c1.to_vec();
    c1.sort_unstable();
    c1.dedup();
    if c1.is_empty() || c1.len() >= x.n2 || c1.iter().any(|&y| y >= x.n2) {
        return Err(Error::Precondition("C1 must be a nonempty proper subset of V2".into()));
    }
    let inside: Vec<u32> = c1.iter().map(|&y| x.colors2[y]).collect();
    if (0..x.n2).any(|y| c1.binary_search(&y).is_err() && inside.contains(&x.colors2[y])) {
        return Err(Error::Precondition("C1 is not a union of color classes".into()));
    }
    reduce_core(x, &c1, alpha)
}

/// Smallest `s` with `s >= (1 - alpha) n`.
fn base_size(alpha: Alpha, n: usize) -> usize {
    let keep = (alpha * Alpha::from_integer(n as u64)).floor().to_integer() as usize;
    n - keep
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Individualizing `V2`: `V1` splits into classes of equal neighborhood and color.
pub(crate) fn discretize(x: &ColoredBipartite) -> ColoredPartition {
    let keys: Vec<(u32, Vec<usize>)> = (0..x.n1).map(|v| (x.colors1[v], x.neighbors(v))).collect();
    ColoredPartition::from_coloring(&rank_keys(&keys).0)
}

#[derive(Clone)]
pub(crate) struct Entry {
    pub n: usize,
    pub alpha: Alpha,
}

#[derive(Clone)]
pub(crate) struct Frame {
    pub inst: Layered,
    pub alpha: Alpha,
    /// Entry index of each current `V1` vertex.
    pub v1: Vec<usize>,
    /// Entry-level classes set aside at step 5.
    pub outer: Vec<Vec<usize>>,
    pub choices: Vec<Choice>,
    /// Sizes and WL rank before the last installation.
    pub refine_from: Option<(Vec<usize>, usize)>,
    /// UPCCs installed on `V2`, by element ids.
    pub sites: Vec<(Vec<u64>, CoherentConfig)>,
}

impl Soj {
    pub fn bipartite(&self, x: &ColoredBipartite, alpha: Alpha) -> Result<Vec<Outcome>> {
        if alpha < self::alpha(2, 3) || alpha >= Alpha::from_integer(1) {
            return Err(Error::Precondition(format!("alpha = {alpha} outside [2/3, 1)")));
        }
        self.bipartite_inner(x, alpha, None)
    }

    /// The procedure on `x` with `V2` labeled by `C(m, t)` through `labels`.
    pub fn johnson_small_part(&self, x: &ColoredBipartite, m: usize, labels: &[Vec<usize>], alpha: Alpha) -> Result<Vec<Outcome>> {
        if alpha < self::alpha(2, 3) || alpha >= Alpha::from_integer(1) {
            return Err(Error::Precondition(format!("alpha = {alpha} outside [2/3, 1)")));
        }
        let g = Ground::new(m, labels.to_vec());
        if labels.len() != x.n2 || !g.is_johnson() {
            return Err(Error::Precondition("V2 is not labeled by all t-subsets of the ground".into()));
        }
        self.bipartite_inner(x, alpha, Some(g))
    }

    pub(crate) fn bipartite_inner(&self, x: &ColoredBipartite, alpha: Alpha, ground: Option<Ground>) -> Result<Vec<Outcome>> {
        let (n1, n2) = (x.n1, x.n2);
        if n1 == 0 || at_least(n2, alpha, n1) {
            return Err(Error::Precondition(format!("|V2| = {n2} is not below {alpha} |V1| = {alpha} * {n1}")));
        }
        if x.colors1.len() != n1 || x.colors2.len() != n2 || x.edges.len() != n1 * n2 {
            return Err(Error::Precondition("malformed bipartite graph".into()));
        }
        if !at_most(x.largest_symmetrical(), alpha, n1) {
            return Err(Error::Precondition(format!("symmetry defect of V1 is below (1 - {alpha}) |V1|")));
        }
        let mut inst = Layered::new(x.clone(), self.fresh_ids(n2));
        inst.ground = ground;
        let frame = Frame {
            inst,
            alpha,
            v1: (0..n1).collect(),
            outer: Vec::new(),
            choices: Vec::new(),
            refine_from: None,
            sites: Vec::new(),
        };
        self.run(&Entry { n: n1, alpha }, frame)
    }

    fn q(&self, n1: usize) -> usize {
        self.opts.q.unwrap_or_else(|| ceil_log2(n1).pow(3))
    }

    pub(crate) fn finish(&self, entry: &Entry, f: &Frame, choices: Vec<Choice>, p: Payload) -> Result<Outcome> {
        let payload = match p {
            Payload::Split(q) => {
                let mut key = vec![(0u32, 0u32); entry.n];
                let mut blocks = Vec::new();
                for (i, b) in f.outer.iter().enumerate() {
                    for &v in b {
                        key[v] = (0, i as u32);
                    }
                    blocks.push(b.clone());
                }
                for (x, &v) in f.v1.iter().enumerate() {
                    key[v] = (1, q.colors()[x]);
                }
                blocks.extend(q.blocks().iter().map(|b| b.iter().map(|&x| f.v1[x]).collect::<Vec<usize>>()));
                Payload::Split(ColoredPartition::new(&rank_keys(&key).0, blocks)?)
            }
            Payload::Johnson(j) => {
                let mut pairs: Vec<(usize, Vec<usize>)> = j.w.iter().map(|&x| f.v1[x]).zip(j.labels).collect();
                pairs.sort();
                let (w, labels) = pairs.into_iter().unzip();
                Payload::Johnson(JohnsonPart { w, m: j.m, t: j.t, labels })
            }
            Payload::Upcc { .. } => return Err(Error::Invariant("bipartite procedure produced a UPCC".into())),
        };
        let mut all = f.choices.clone();
        all.extend(choices);
        let o = Outcome {
            payload,
            alpha: entry.alpha,
            choices: all,
        };
        o.validate(entry.n)?;
        Ok(o)
    }

    fn run(&self, entry: &Entry, mut f: Frame) -> Result<Vec<Outcome>> {
        self.spend(1)?;
        f.inst.x = f.inst.x.normalized();
        let (n1, n2) = (f.inst.x.n1, f.inst.x.n2);
        if !at_most(f.inst.x.largest_symmetrical(), f.alpha, n1) {
            return Err(Error::Invariant(format!(
                "symmetry defect of V1 fell below 1 - {} ({n1} x {n2}, choices {:?})",
                f.alpha, f.choices
            )));
        }
        if n1 <= self.opts.c0 {
            self.note("step1");
            let s = base_size(f.alpha, n1);
            let mut out = Vec::new();
            for set in subsets(n1, s) {
                let key: Vec<(u32, u32)> = (0..n1)
                    .map(|x| match set.iter().position(|&y| y == x) {
                        Some(i) => (1, i as u32),
                        None => (0, f.inst.x.colors1[x]),
                    })
                    .collect();
                let p = ColoredPartition::from_coloring(&rank_keys(&key).0);
                let choices = set.iter().map(|&x| Choice::Vertex(f.v1[x])).collect();
                out.push(self.finish(entry, &f, choices, Payload::Split(p))?);
            }
            return Ok(out);
        }
        if n2 <= self.q(n1) {
            self.note("step2");
            return Ok(vec![self.finish(entry, &f, Vec::new(), Payload::Split(discretize(&f.inst.x)))?]);
        }
        let an = f.inst.analyze()?;
        if let Some((sizes, rank)) = f.refine_from.take() {
            if sizes == f.inst.sizes() && an.rank <= rank {
                return Err(Error::Invariant(format!("installed structure did not refine the configuration (rank {rank})")));
            }
        }
        f.inst.absorb(&an);
        let mut by: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (x, &c) in an.colors1.iter().enumerate() {
            by.entry(c).or_default().push(x);
        }
        let Some(w1) = by.values().find(|c| !at_most(c.len(), f.alpha, n1)).cloned() else {
            self.note("step4");
            let p = ColoredPartition::from_coloring(&an.colors1);
            return Ok(vec![self.finish(entry, &f, Vec::new(), Payload::Split(p))?]);
        };
        let mut cross = an.cross.clone();
        if w1.len() < n1 {
            self.note("step5");
            for c in by.values().filter(|c| **c != w1) {
                f.outer.push(c.iter().map(|&x| f.v1[x]).collect());
            }
            f.v1 = w1.iter().map(|&x| f.v1[x]).collect();
            f.alpha = f.alpha * Alpha::new(n1 as u64, w1.len() as u64);
            f.inst.restrict_v1(&w1);
            cross = w1.iter().flat_map(|&x| an.cross[x * n2..(x + 1) * n2].iter().copied()).collect();
        }
        let n1 = w1.len();
        let twins = f.inst.x.twin_classes();
        if twins.iter().any(|c| c.len() >= 2) {
            self.note("step6");
            if twins.iter().any(|c| c.len() != twins[0].len()) || twins.len() < 2 {
                return Err(Error::Invariant("twin classes of a homogeneous V1 are not an equipartition".into()));
            }
            let p = ColoredPartition::new(&vec![0; n1], twins)?;
            return Ok(vec![self.finish(entry, &f, Vec::new(), Payload::Split(p))?]);
        }
        let branches = if !an.x2.is_homogeneous() {
            self.note("step7");
            let c1 = an.x2.vertex_classes().swap_remove(0);
            let keep = match reduce_core(&f.inst.x, &c1, f.alpha)? {
                1 => c1,
                _ => complement(n2, &c1),
            };
            vec![(Vec::new(), Move::Restrict { keep, edges: None, significant: false })]
        } else {
            let johnson = f.inst.ground.as_ref().is_some_and(Ground::is_johnson);
            match classify(&an.x2) {
                Classification::HomogeneousImprimitive { blocks, .. } => {
                    self.note("imprimitive");
                    imprimitive_moves(&f.inst.x, &cross, &blocks)?
                }
                Classification::Clique => {
                    self.check_sites(&f)?;
                    self.block_design_moves(&f.inst.x, f.alpha)?.1
                }
                Classification::Upcc if johnson => self.johnson_moves(&f, &an)?,
                Classification::Upcc => self.upcc_moves(&f.inst.x, &an.x2, f.alpha)?,
                Classification::NonHomogeneous => unreachable!("homogeneity checked above"),
            }
        };
        let mut out = Vec::new();
        for (choices, mv) in branches {
            out.extend(self.apply(entry, &f, an.rank, choices, mv)?);
        }
        Ok(out)
    }

    fn apply(&self, entry: &Entry, f: &Frame, rank: usize, choices: Vec<Choice>, mv: Move) -> Result<Vec<Outcome>> {
        let old = f.inst.x.n2;
        let progress = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Invariant(format!("{what} edge without progress from |V2| = {old}")))
            }
        };
        let mut g = f.clone();
        match mv {
            Move::Done(p) => return Ok(vec![self.finish(entry, f, choices, p)?]),
            Move::Discretize => {
                let p = Payload::Split(discretize(&f.inst.x));
                return Ok(vec![self.finish(entry, f, choices, p)?]);
            }
            Move::Restrict { keep, edges, significant } => {
                progress(keep.len() < old && (!significant || 10 * keep.len() <= 9 * old), "reducing")?;
                g.inst.restrict_v2(&keep);
                if let Some(x) = edges {
                    g.inst.x.edges = x.edges;
                    g.inst.x.complemented = false;
                }
            }
            Move::RestrictJohnson { keep, m, labels } => {
                progress(keep.len() <= old, "phase")?;
                g.inst.restrict_v2(&keep);
                g.inst.ground = Some(Ground::new(m, labels));
            }
            Move::Replace { x, rel2 } => {
                progress(10 * x.n2 <= 9 * old, "significant")?;
                g.inst = Layered::new(x, self.fresh_ids(0));
                g.inst.ids2 = self.fresh_ids(g.inst.x.n2);
                g.inst.rel2 = rel2;
                g.sites.clear();
            }
            Move::InstallV2(ins) => {
                g.refine_from = Some((f.inst.sizes(), rank));
                if let Install::Upcc { w, cc } = &ins {
                    g.sites.push((w.iter().map(|&i| f.inst.ids2[i]).collect(), cc.clone()));
                }
                g.inst.install_v2(&ins);
            }
            Move::InstallGamma(ins) => {
                g.refine_from = Some((f.inst.sizes(), rank));
                g.inst.install_gamma(&ins);
            }
            Move::AttachUpper { m, labels } => g.inst.attach_upper(m, labels),
        }
        g.choices.extend(choices);
        self.run(entry, g)
    }

    /// A clique inside an installed UPCC is independent in another constituent.
    fn check_sites(&self, f: &Frame) -> Result<()> {
        let ids = &f.inst.ids2;
        if ids.len() < 2 {
            return Ok(());
        }
        for (w, cc) in &f.sites {
            let pos: Option<Vec<usize>> = ids.iter().map(|i| w.iter().position(|j| j == i)).collect();
            if let Some(pos) = pos {
                self.note("clique-bound");
                let c = cc.c(pos[0], pos[1]);
                let uniform = pos.iter().all(|&a| pos.iter().all(|&b| a == b || cc.c(a, b) == c));
                if !uniform || 2 * pos.len() > w.len() {
                    return Err(Error::Invariant(format!(
                        "clique of size {} inside a UPCC on {} points is not independent in another constituent",
                        pos.len(),
                        w.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Case (ii): `X2` is a clique, so `V1` is a block design on `V2`.
    pub(crate) fn block_design_moves(&self, x: &ColoredBipartite, alpha: Alpha) -> Result<(&'static str, Vec<Branch>)> {
        let (n1, n2) = (x.n1, x.n2);
        let h = Hypergraph::new(n2, (0..n1).map(|v| x.neighbors(v)).collect())?;
        if h.has_multiple_edges() {
            return Err(Error::Invariant("neighborhood hypergraph has repeated edges without twins".into()));
        }
        let d1 = h
            .uniformity()
            .ok_or_else(|| Error::Invariant("neighborhood hypergraph of a homogeneous V1 is not uniform".into()))?;
        let all: Vec<usize> = (0..n1).collect();
        if h.is_complete_uniform() {
            self.note("design-case1");
            if d1 >= 2 && n2 > 2 * d1 {
                let j = JohnsonPart {
                    w: all,
                    m: n2,
                    t: d1,
                    labels: h_labels(x),
                };
                return Ok(("1", vec![(Vec::new(), Move::Done(Payload::Johnson(j)))]));
            }
            if n2 == 2 * d1 && d1 >= 1 {
                // `C(2t, t)` pairs up into complementary sets.
                let rows: Vec<Vec<usize>> = h_labels(x);
                let mut blocks = Vec::new();
                for v in 0..n1 {
                    let co = complement(n2, &rows[v]);
                    let u = rows.iter().position(|r| *r == co).expect("complete hypergraph");
                    if v < u {
                        blocks.push(vec![v, u]);
                    }
                }
                let p = ColoredPartition::new(&vec![0; n1], blocks)?;
                return Ok(("1", vec![(Vec::new(), Move::Done(Payload::Split(p)))]));
            }
            return Err(Error::Invariant(format!("complete {d1}-uniform hypergraph on {n2} points survived twin removal")));
        }
        let classes = h.twin_classes();
        let big: Vec<&Vec<usize>> = classes.iter().filter(|c| 2 * c.len() >= n2).collect();
        if !big.is_empty() {
            self.note("design-case2");
            let mut out = Vec::new();
            for c in big {
                let y = x.clone().with_colors(x.colors1.clone(), (0..n2).map(|v| u32::from(c.contains(&v))).collect())?;
                let keep = match reduce_core(&y, c, alpha)? {
                    1 => c.clone(),
                    _ => complement(n2, c),
                };
                let significant = 2 * keep.len() <= n2;
                out.push((Vec::new(), Move::Restrict { keep, edges: None, significant }));
            }
            return Ok(("2", out));
        }
        let route = block_design_route(d1, n1)?;
        let s = match route {
            BlockRoute::Design => {
                self.note("design-case3a");
                h.to_structure()
            }
            BlockRoute::Skeleton(t) => {
                self.note("design-case3b");
                let sk = h.skeleton(t);
                if 4 * sk.largest_symmetrical() >= 3 * n2 {
                    return Err(Error::Invariant(format!("{t}-skeleton has symmetry defect at most 1/4")));
                }
                sk.to_structure()
            }
        };
        let moves = match s.and_then(|s| split_or_upcc(&s, self::alpha(3, 4), &self.opts.design)) {
            Ok(outs) => outs
                .into_iter()
                .map(|o| {
                    let c = map_choices(&o.choices, Choice::Point, Choice::Point);
                    match o.payload {
                        Payload::Split(p) => (c, Move::InstallV2(Install::Partition(p))),
                        Payload::Upcc { w, cc } => (c, Move::InstallV2(Install::Upcc { w, cc })),
                        Payload::Johnson(_) => unreachable!("split_or_upcc yields no Johnson payload"),
                    }
                })
                .collect(),
            Err(Error::Budget(_) | Error::Resource(_)) => {
                self.note("design-fallback");
                vec![(Vec::new(), Move::Discretize)]
            }
            Err(e) => return Err(e),
        };
        Ok((if route == BlockRoute::Design { "3a" } else { "3b" }, moves))
    }

    /// Case (iii): `X2` is a UPCC without a Johnson labeling.
    fn upcc_moves(&self, x: &ColoredBipartite, x2: &CoherentConfig, alpha: Alpha) -> Result<Vec<Branch>> {
        self.note("upcc");
        let n2 = x2.n();
        let mut out = Vec::new();
        for p in 0..n2 {
            match super::upcc::upcc_step(x2, self::alpha(2, 3), p, self)? {
                super::upcc::Step::Split(q) => out.push((vec![Choice::Point(p)], Move::InstallV2(Install::Partition(q)))),
                super::upcc::Step::Reduced { c2, ci, x: bx, alpha: a2 } => {
                    for o in self.bipartite_inner(&bx, a2, None)? {
                        let mut choices = vec![Choice::Point(p)];
                        choices.extend(map_choices(&o.choices, |v| Choice::Point(c2[v]), |q| Choice::Point(ci[q])));
                        match o.payload {
                            Payload::Split(q) => {
                                let lifted = super::upcc::lift(n2, &c2, &ci, &q)?;
                                out.push((choices, Move::InstallV2(Install::Partition(lifted))));
                            }
                            Payload::Johnson(j) => {
                                let w2: Vec<usize> = j.w.iter().map(|&v| c2[v]).collect();
                                let y = x.clone().with_colors(x.colors1.clone(), (0..n2).map(|v| u32::from(w2.contains(&v))).collect())?;
                                let mv = match reduce_core(&y, &w2, alpha)? {
                                    1 => Move::RestrictJohnson {
                                        keep: w2,
                                        m: j.m,
                                        labels: j.labels,
                                    },
                                    _ => Move::Restrict {
                                        keep: complement(n2, &w2),
                                        edges: None,
                                        significant: true,
                                    },
                                };
                                out.push((choices, mv));
                            }
                            Payload::Upcc { .. } => unreachable!("bipartite procedure yields no UPCC"),
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn h_labels(x: &ColoredBipartite) -> Vec<Vec<usize>> {
    (0..x.n1).map(|v| x.neighbors(v)).collect()
}

/// Case (i): `X2` homogeneous imprimitive with the given blocks.
pub(crate) fn imprimitive_moves(x: &ColoredBipartite, cross: &[u32], blocks: &[Vec<usize>]) -> Result<Vec<Branch>> {
    let (n1, n2) = (x.n1, x.n2);
    let col = |a: usize, y: usize| cross[a * n2 + y];
    let mut deg: BTreeMap<u32, usize> = BTreeMap::new();
    for a in 0..n1 {
        *deg.entry(col(a, 0)).or_default() += 1;
    }
    for y in 1..n2 {
        let mut d: BTreeMap<u32, usize> = BTreeMap::new();
        for a in 0..n1 {
            *d.entry(col(a, y)).or_default() += 1;
        }
        if d != deg {
            return Err(Error::Invariant("cross colors are not biregular".into()));
        }
    }
    let Some((&j, _)) = deg.iter().find(|&(_, &d)| 2 * d > n1) else {
        return Ok((0..n2)
            .map(|y| {
                let colors: Vec<u32> = (0..n1).map(|a| col(a, y)).collect();
                let p = ColoredPartition::from_coloring(&rank_keys(&colors).0);
                (vec![Choice::Point(y)], Move::Done(Payload::Split(p)))
            })
            .collect());
    };
    let mut out = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        let z = ColoredBipartite::from_fn(n1, b.len(), |a, k| col(a, b[k]) == j);
        if 2 * z.largest_symmetrical() <= n1 {
            out.push((
                vec![Choice::Block(i)],
                Move::Restrict {
                    keep: b.clone(),
                    edges: Some(z),
                    significant: true,
                },
            ));
        }
    }
    if !out.is_empty() {
        return Ok(out);
    }
    let h = *deg.keys().find(|&&h| h != j).ok_or_else(|| Error::Invariant("single cross color without twins".into()))?;
    let mut y = contract_blocks(n1, blocks, |a, v| col(a, v) == h);
    y.colors1 = x.colors1.clone();
    let e = y.edge_count();
    if !y.is_semiregular() || e == 0 || e == n1 * blocks.len() {
        return Err(Error::Invariant("contracted graph is not semiregular, nonempty and not complete".into()));
    }
    if 2 * y.largest_symmetrical() > n1 {
        return Err(Error::Invariant("contracted graph has symmetry defect below 1/2".into()));
    }
    Ok(vec![(Vec::new(), Move::Replace { x: y, rel2: None })])
}

impl Soj {
    /// The case-(i) branches for `x` with `V2` blocks `blocks`, after refinement.
    pub fn imprimitive_case(&self, x: &ColoredBipartite, blocks: &[Vec<usize>]) -> Result<Vec<Move>> {
        let an = Layered::new(x.normalized(), self.fresh_ids(x.n2)).analyze()?;
        if !an.x2.is_homogeneous() || x.largest_symmetrical() > 0 {
            return Err(Error::Precondition("need a homogeneous V2 and no twins in V1".into()));
        }
        check_blocks(x.n2, blocks)?;
        Ok(imprimitive_moves(&x.normalized(), &an.cross, blocks)?.into_iter().map(|b| b.1).collect())
    }

    /// The case-(ii) branches and the case label `"1"`, `"2"`, `"3a"` or `"3b"`.
    pub fn block_design_case(&self, x: &ColoredBipartite, alpha: Alpha) -> Result<(&'static str, Vec<Move>)> {
        if x.largest_symmetrical() > 0 {
            return Err(Error::Precondition("V1 has twins".into()));
        }
        let (case, moves) = self.block_design_moves(&x.normalized(), alpha)?;
        Ok((case, moves.into_iter().map(|b| b.1).collect()))
    }
}

fn check_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; n];
    for &y in blocks.iter().flatten() {
        if y >= n || std::mem::replace(&mut seen[y], true) {
            return Err(Error::Precondition("blocks do not partition V2".into()));
        }
    }
    if seen.contains(&false) || blocks.len() < 2 || blocks.iter().any(|b| b.len() != blocks[0].len()) {
        return Err(Error::Precondition("blocks must be at least two equal parts covering V2".into()));
    }
    Ok(())
}
