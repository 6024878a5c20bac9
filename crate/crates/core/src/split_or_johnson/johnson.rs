//! Case (iv): `X2` carries a Johnson labeling by the `t`-subsets of `Gamma`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::bipartite::{Branch, Frame, Move};
use super::layered::{Analysis, Ground, Install};
use super::{map_choices, ColoredBipartite, Hypergraph, Soj};
use crate::coherent::{all_perms, classify, rank_keys, Classification, CoherentConfig, Structure};
use crate::design::{relational_from_local_guide, split_or_upcc, symmetry_defect, Choice, DefectMode, GuideResult, LocalGuide, Outcome, Payload};
use crate::error::{Error, Result};
use crate::partitions::{alpha, binomial, subsets, ColoredPartition};

/// Test-set enumeration cap, in ordered `l`-tuples.
const TEST_TUPLES: u128 = 4_000_000;

/// The points outside a twin class of more than half of `Gamma`: the unique
/// minimal `S` with `Sym(Gamma \ S) <= Aut(H)`. `None` when no class is that big.
pub fn minimal_support(h: &Hypergraph) -> Option<Vec<usize>> {
    let big = h.twin_classes().into_iter().max_by_key(Vec::len)?;
    (2 * big.len() > h.n).then(|| (0..h.n).filter(|g| big.binary_search(g).is_err()).collect())
}

/// The Q/R split of the `t`-subsets of `Gamma` (each point of `Gamma` a
/// `t'`-subset of `Gamma'`): `Q` holds the sets whose labels are pairwise
/// disjoint, split by the union of the labels. Returns the partition and `|R|`.
pub fn case5_partition(sets: &[Vec<usize>], upper: &[Vec<usize>]) -> Result<(ColoredPartition, usize)> {
    let mut q: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let mut r = Vec::new();
    for (x, s) in sets.iter().enumerate() {
        let mut u: Vec<usize> = s.iter().flat_map(|&g| upper[g].iter().copied()).collect();
        let total = u.len();
        u.sort_unstable();
        u.dedup();
        if u.len() == total {
            q.entry(u).or_default().push(x);
        } else {
            r.push(x);
        }
    }
    let t = sets.first().map_or(0, Vec::len);
    let t2 = upper.first().map_or(0, Vec::len);
    let m = upper.len();
    let m2 = upper.iter().flatten().max().map_or(0, |&g| g + 1);
    let complete = binomial(m, t) == sets.len() as u128 && binomial(m2, t2) == m as u128;
    if complete && t >= 2 && t2 >= 2 && q.values().any(|c| c.len() < 3) {
        return Err(Error::Invariant("a class of disjoint-label sets has fewer than 3 members".into()));
    }
    let mut key = vec![(0u32, 0usize); sets.len()];
    for c in q.values() {
        for &x in c {
            key[x] = (1, c.len());
        }
    }
    let rsize = r.len();
    let mut blocks: Vec<Vec<usize>> = q.into_values().collect();
    if !r.is_empty() {
        blocks.push(r);
    }
    Ok((ColoredPartition::new(&rank_keys(&key).0, blocks)?, rsize))
}

fn log2(n: usize) -> f64 {
    (n as f64).log2()
}

/// `max{(log2 n1)^2, (log2 n2)^3 / log2 log2 n2}`, at least `t + 1`.
pub(crate) fn ell(n1: usize, n2: usize, t: usize, over: Option<usize>) -> usize {
    let l = over.unwrap_or_else(|| {
        let b = if n2 > 2 { log2(n2).powi(3) / log2(n2).log2() } else { 0.0 };
        log2(n1).powi(2).max(b).ceil() as usize
    });
    l.max(t + 1)
}

/// `(log2 n)^3 / log2 log2 n`, the threshold on `|Gamma'|` in Case 5.
fn ell5(n: usize, over: Option<usize>) -> usize {
    over.unwrap_or_else(|| if n > 2 { (log2(n).powi(3) / log2(n).log2()).ceil() as usize } else { 0 })
}

/// Test sets `L` of `Gamma`, with `X[L] = (V1, C(L, t))` coded by the
/// sorted incidence rows relabeled along an ordering of `L`.
struct TestSets<'a> {
    x: &'a ColoredBipartite,
    m: usize,
    l: usize,
    index: HashMap<&'a [usize], usize>,
    positions: Vec<Vec<usize>>,
    column: Vec<Vec<usize>>,
}

impl<'a> TestSets<'a> {
    fn new(x: &'a ColoredBipartite, g: &'a Ground, l: usize) -> TestSets<'a> {
        TestSets {
            x,
            m: g.m,
            l,
            index: g.sets.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect(),
            positions: subsets(l, g.t()),
            column: (0..x.n2).map(|y| (0..x.n1).filter(|&v| x.has_edge(v, y)).collect()).collect(),
        }
    }
}

impl LocalGuide for TestSets<'_> {
    fn n(&self) -> usize {
        self.m
    }

    fn k(&self) -> usize {
        self.l
    }

    fn code(&self, _side: usize, u: &[usize]) -> Vec<u32> {
        let words = self.positions.len().div_ceil(32);
        let mut rows: HashMap<usize, Vec<u32>> = HashMap::new();
        let mut t = Vec::new();
        for (b, p) in self.positions.iter().enumerate() {
            t.clear();
            t.extend(p.iter().map(|&i| u[i]));
            t.sort_unstable();
            let y = self.index[t.as_slice()];
            for &v in &self.column[y] {
                let row = rows.entry(v).or_insert_with(|| {
                    let mut r = vec![0; words + 1];
                    r[0] = self.x.colors1[v];
                    r
                });
                row[1 + b / 32] |= 1 << (b % 32);
            }
        }
        let mut rows: Vec<Vec<u32>> = rows.into_values().collect();
        rows.sort_unstable();
        rows.concat()
    }
}

fn gamma_moves(outs: Vec<Outcome>) -> Vec<Branch> {
    outs.into_iter()
        .map(|o| {
            let c = map_choices(&o.choices, Choice::Point, Choice::Point);
            match o.payload {
                Payload::Split(p) => (c, Move::InstallGamma(Install::Partition(p))),
                Payload::Upcc { w, cc } => (c, Move::InstallGamma(Install::Upcc { w, cc })),
                Payload::Johnson(_) => unreachable!("split_or_upcc yields no Johnson payload"),
            }
        })
        .collect()
}

fn two_coloring(n: usize, w: &[usize]) -> ColoredPartition {
    ColoredPartition::from_coloring(&(0..n).map(|g| u32::from(w.contains(&g))).collect::<Vec<u32>>())
}

impl Soj {
    fn design_on_gamma(&self, s: Result<Structure>) -> Result<Vec<Branch>> {
        match s.and_then(|s| split_or_upcc(&s, alpha(3, 4), &self.opts.design)) {
            Ok(outs) => Ok(gamma_moves(outs)),
            Err(Error::Budget(_) | Error::Resource(_)) => {
                self.note("johnson-design-fallback");
                Ok(vec![(Vec::new(), Move::Discretize)])
            }
            Err(e) => Err(e),
        }
    }

    pub(crate) fn johnson_moves(&self, f: &Frame, an: &Analysis) -> Result<Vec<Branch>> {
        self.note("johnson");
        let x = &f.inst.x;
        let g = f.inst.ground.as_ref().expect("johnson case has a ground");
        let (n1, n2, m, t) = (x.n1, x.n2, g.m, g.t());
        let gamma = an.gamma.as_ref().expect("ground analyzed");
        if !gamma.is_homogeneous() {
            return Err(Error::Invariant("Gamma is not homogeneous under a primitive X2".into()));
        }
        let l = ell(n1, n2, t, self.opts.ell);
        if m <= 2 * l {
            self.note("johnson-small-m");
            return Ok(vec![(Vec::new(), Move::Discretize)]);
        }
        if let Some(up) = &g.upper {
            return self.case5(g, up, n1 + n2);
        }
        match classify(gamma) {
            Classification::Upcc => return self.case4(gamma),
            Classification::Clique => {}
            _ => return Err(Error::Invariant("Gamma is imprimitive under a primitive X2".into())),
        }
        let tuples = binomial(m, l).saturating_mul((1..=l as u128).product());
        if tuples > TEST_TUPLES {
            self.note("johnson-testsets-budget");
            return Ok(vec![(Vec::new(), Move::Discretize)]);
        }
        self.spend(tuples as u64)?;
        let ts = TestSets::new(x, g, l);
        let perms = all_perms(l);
        let sets = subsets(m, l);
        let info: Vec<(Vec<u32>, bool)> = sets
            .par_iter()
            .map(|s| {
                let codes: Vec<Vec<u32>> = perms
                    .iter()
                    .map(|p| ts.code(0, &p.iter().map(|&i| s[i]).collect::<Vec<usize>>()))
                    .collect();
                let full = codes.iter().all(|c| *c == codes[0]);
                (codes.into_iter().min().expect("orderings"), full)
            })
            .collect();
        if info.iter().any(|i| i.0 != info[0].0) {
            return self.case_a(m, l, &sets, &info, &perms);
        }
        if !info[0].1 {
            self.note("johnson-caseB1");
            return match relational_from_local_guide(&ts) {
                Ok(GuideResult::Structures(z1, _)) => self.design_on_gamma(Ok(z1)),
                Ok(GuideResult::Reject) => Err(Error::Invariant("test sets disagree with themselves".into())),
                Err(Error::FullSet(s)) => Err(Error::Invariant(format!("test set {s:?} is full in the non-full case"))),
                Err(e) => Err(e),
            };
        }
        self.case_b2(x, g, l)
    }

    fn case_a(&self, m: usize, l: usize, sets: &[Vec<usize>], info: &[(Vec<u32>, bool)], perms: &[Vec<usize>]) -> Result<Vec<Branch>> {
        self.note("johnson-caseA");
        let mut classes: BTreeMap<&[u32], Vec<Vec<usize>>> = BTreeMap::new();
        for (s, (key, _)) in sets.iter().zip(info) {
            let r = classes.entry(key.as_slice()).or_default();
            r.extend(perms.iter().map(|p| p.iter().map(|&i| s[i]).collect::<Vec<usize>>()));
        }
        let k = Structure::new(m, l, classes.into_values().collect())?;
        let d = symmetry_defect(&k, DefectMode::Strong)?;
        if 4 * d.defect < m {
            self.note("johnson-caseA1");
            return Ok(vec![(Vec::new(), Move::InstallGamma(Install::Partition(two_coloring(m, &d.witness))))]);
        }
        self.note("johnson-caseA2");
        self.design_on_gamma(Ok(k))
    }

    fn case_b2(&self, x: &ColoredBipartite, g: &Ground, l: usize) -> Result<Vec<Branch>> {
        self.note("johnson-caseB2");
        let (n1, m, t) = (x.n1, g.m, g.t());
        let hyper: Vec<Hypergraph> = (0..n1)
            .map(|v| Hypergraph::new(m, x.neighbors(v).iter().map(|&y| g.sets[y].clone()).collect()))
            .collect::<Result<_>>()?;
        let Some(supports) = hyper.iter().map(minimal_support).collect::<Option<Vec<Vec<usize>>>>() else {
            self.note("johnson-b2-fallback");
            return Ok(vec![(Vec::new(), Move::Discretize)]);
        };
        if l >= t + 3 && (n1 as u128) * binomial(m, l) <= 20_000 {
            let sets = subsets(m, l);
            let s = hyper
                .iter()
                .flat_map(|h| sets.iter().map(move |s| l - h.induced(s).largest_symmetrical().min(l)))
                .max()
                .unwrap_or(0);
            if l >= (t + 2) * (t + 3) * s {
                self.note("local-to-global");
                if let Some(v) = supports.iter().position(|sv| sv.len() > s) {
                    return Err(Error::Invariant(format!(
                        "local symmetry defect {s} on {l}-sets but global support of size {} at v{}",
                        supports[v].len(),
                        v + 1
                    )));
                }
            }
        }
        let mut y = ColoredBipartite::from_fn(n1, m, |v, p| supports[v].binary_search(&p).is_ok());
        y.colors1 = x.colors1.clone();
        y.colors2 = g.colors.clone();
        let classes = y.twin_classes();
        let big = classes.iter().max_by_key(|c| c.len()).expect("V1 nonempty");
        if 3 * big.len() <= 2 * n1 {
            self.note("johnson-b2-replace");
            return Ok(vec![(Vec::new(), Move::Replace { x: y, rel2: g.rel.clone() })]);
        }
        self.note("johnson-b2-majority");
        let s = supports[big[0]].clone();
        let choices = s.iter().map(|&p| Choice::Point(p)).collect();
        Ok(vec![(choices, Move::InstallGamma(Install::Individualize(s)))])
    }

    fn case4(&self, gamma: &CoherentConfig) -> Result<Vec<Branch>> {
        self.note("johnson-case4");
        let m = gamma.n();
        let mut out = Vec::new();
        for o in self.upcc_inner(gamma, alpha(3, 4))? {
            let c = map_choices(&o.choices, Choice::Point, Choice::Point);
            let mv = match o.payload {
                Payload::Split(p) => Move::InstallGamma(Install::Partition(p)),
                Payload::Johnson(j) if j.w.len() == m => Move::AttachUpper { m: j.m, labels: j.labels },
                Payload::Johnson(j) => Move::InstallGamma(Install::Partition(two_coloring(m, &j.w))),
                Payload::Upcc { .. } => unreachable!("UPCC procedure yields no UPCC"),
            };
            out.push((c, mv));
        }
        Ok(out)
    }

    fn case5(&self, g: &Ground, up: &Ground, n: usize) -> Result<Vec<Branch>> {
        if up.m <= ell5(n, self.opts.ell) {
            self.note("johnson-case5-small");
            return Ok(vec![(Vec::new(), Move::Discretize)]);
        }
        let n2 = g.sets.len();
        let (p, r) = case5_partition(&g.sets, &up.sets)?;
        if p.blocks().len() >= 6 && 6 * r <= n2 {
            self.note("johnson-case5");
            return Ok(vec![(Vec::new(), Move::InstallV2(Install::Partition(p)))]);
        }
        self.note("johnson-case5-fallback");
        Ok(vec![(Vec::new(), Move::Discretize)])
    }
}
