use std::collections::HashMap;

use rayon::prelude::*;

use super::certs::{compare_certificates, local_certificates, CertKind, CertOptions, CertResult};
use super::{affected_under, contains_alt, image_group, restrict_to, GiantRep};
use crate::coherent::{rank_keys, Structure};
use crate::design::{relational_from_local_guide, GuideResult, LocalGuide, Outcome, Payload};
use crate::error::{Error, Result};
use crate::partitions::{alpha, at_most, is_alpha_partition, subsets, ColoredPartition};
use crate::perm::Perm;
use crate::permgroup::PermGroup;
use crate::string_iso::{degree_of_transitivity, orbital_configuration, Ctx};

/// A canonical structure on `Gamma` produced for one string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GammaStructure {
    Coloring(ColoredPartition),
    /// `labels[a]` is the `t`-subset of `0..m` naming `w[a]`.
    Johnson {
        w: Vec<usize>,
        m: usize,
        t: usize,
        labels: Vec<Vec<usize>>,
    },
    Relational(Structure),
}

impl GammaStructure {
    pub fn from_outcome(o: &Outcome) -> Option<GammaStructure> {
        match &o.payload {
            Payload::Split(p) => Some(GammaStructure::Coloring(p.clone())),
            Payload::Johnson(j) => Some(GammaStructure::Johnson {
                w: j.w.clone(),
                m: j.m,
                t: j.t,
                labels: j.labels.clone(),
            }),
            Payload::Upcc { .. } => None,
        }
    }

    pub fn permuted(&self, p: &Perm) -> GammaStructure {
        match self {
            GammaStructure::Coloring(c) => GammaStructure::Coloring(c.permuted(p)),
            GammaStructure::Relational(s) => GammaStructure::Relational(s.permuted(p)),
            GammaStructure::Johnson { w, m, t, labels } => {
                let mut pairs: Vec<(usize, Vec<usize>)> = w.iter().map(|&v| p.apply(v)).zip(labels.iter().cloned()).collect();
                pairs.sort();
                let (w, labels) = pairs.into_iter().unzip();
                GammaStructure::Johnson { w, m: *m, t: *t, labels }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggregateKind {
    /// Colored 4/5-partitions of `Gamma`.
    Partition,
    /// Relational structures of relative symmetry defect at least 1/2.
    Kary,
    /// A color class `C` (color 0) with `F^C` a giant, `|C| > 4m/5`; the
    /// colored top action applies.
    Reduced,
}

#[derive(Clone, Debug)]
pub enum Aggregate {
    Reject,
    Found {
        kind: AggregateKind,
        step: &'static str,
        /// Every candidate structure for each string; an isomorphism maps
        /// the list for `x` onto the list for `y`.
        x: Vec<GammaStructure>,
        y: Vec<GammaStructure>,
    },
}

struct Side<'a> {
    x: &'a [u32],
    certs: Vec<CertResult>,
}

impl Side<'_> {
    fn full(&self) -> impl Iterator<Item = (&CertResult, &PermGroup)> {
        self.certs.iter().filter_map(|c| match &c.kind {
            CertKind::Full { k } => Some((c, k)),
            CertKind::NotFull { .. } => None,
        })
    }
}

fn certify<'a>(rep: &GiantRep, x: &'a [u32], k: usize, ctx: &Ctx, opts: &CertOptions) -> Result<Side<'a>> {
    let cfg = ctx.cfg.clone();
    let certs = subsets(rep.m(), k)
        .par_iter()
        .map(|a| local_certificates(rep, a, x, &Ctx::new(cfg.clone()), opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(Side { x, certs })
}

/// Step 1: a full test set `A` with a large affected set `W~(A)` under
/// `K(A)^Gamma`; the orbits of its pointwise stabilizer of `A`.
fn step_one(rep: &GiantRep, side: &Side) -> Vec<GammaStructure> {
    let m = rep.m();
    let mut out = Vec::new();
    for (c, k) in side.full() {
        let a = &c.a;
        let kg = rep.image_of_group(k);
        let wt = affected_under(&kg, a.len(), |g| restrict_to(g, a));
        if 5 * wt.len() < m {
            continue;
        }
        let nk = kg.pointwise_stab(a);
        let mut blocks = vec![a.clone()];
        let mut key = vec![(0u8, 0usize, false); m];
        let mut fixed = Vec::new();
        for o in nk.orbits() {
            if a.contains(&o[0]) {
                continue;
            }
            if o.len() == 1 {
                fixed.push(o[0]);
                continue;
            }
            let aff = o.iter().all(|p| wt.binary_search(p).is_ok());
            for &p in &o {
                key[p] = (2, o.len(), aff);
            }
            blocks.push(o);
        }
        for &p in &fixed {
            key[p] = (1, 0, false);
        }
        if !fixed.is_empty() {
            blocks.push(fixed);
        }
        let p = ColoredPartition::new(&rank_keys(&key).0, blocks).expect("orbits partition Gamma");
        if is_alpha_partition(&p, alpha(4, 5)) {
            out.push(GammaStructure::Coloring(p));
        }
    }
    out.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    out.dedup();
    out
}

/// `F^Gamma` for `F` generated by all full certificates.
fn certificate_span(rep: &GiantRep, side: &Side) -> PermGroup {
    let m = rep.m();
    let gens: Vec<Perm> = side
        .full()
        .flat_map(|(_, k)| k.generators().iter().map(|g| rep.image_of(g)).collect::<Vec<_>>())
        .collect();
    PermGroup::new(m, gens).expect("degree m")
}

enum Step2 {
    Partition(GammaStructure),
    Giant(Vec<usize>),
    Orbitals(Vec<GammaStructure>),
    Fixed(Vec<usize>),
}

fn step_two(rep: &GiantRep, side: &Side) -> Result<Step2> {
    let m = rep.m();
    let f = certificate_span(rep, side);
    let orbits = f.orbits();
    let big = orbits.iter().find(|o| !at_most(o.len(), alpha(4, 5), m));
    if let Some(c) = big {
        let fc = f.restrict_to(c);
        if degree_of_transitivity(&fc) >= 2 {
            if !contains_alt(&fc) {
                return Err(Error::Invariant(format!(
                    "doubly transitive certificate span on {} points is not a giant",
                    c.len()
                )));
            }
            return Ok(Step2::Giant(c.clone()));
        }
        let cc = orbital_configuration(&fc)?;
        let on_c: Vec<Vec<Vec<usize>>> = vec![c.iter().map(|&p| vec![p]).collect()];
        let mut out = Vec::new();
        for class in cc.config().classes() {
            let pairs: Vec<Vec<usize>> = class
                .iter()
                .map(|&i| cc.config().tuple(i))
                .filter(|t| t[0] != t[1])
                .map(|t| vec![c[t[0]], c[t[1]]])
                .collect();
            if pairs.is_empty() {
                continue;
            }
            let mut rels = on_c.clone();
            rels.push(pairs);
            out.push(GammaStructure::Relational(Structure::new(m, 2, rels)?));
        }
        out.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        return Ok(Step2::Orbitals(out));
    }
    let fixed: Vec<usize> = orbits.iter().filter(|o| o.len() == 1).map(|o| o[0]).collect();
    if 5 * (m - fixed.len()) >= m {
        let mut key = vec![(false, 0usize); m];
        let mut blocks = Vec::new();
        for o in orbits.iter().filter(|o| o.len() > 1) {
            for &p in o {
                key[p] = (true, o.len());
            }
            blocks.push(o.clone());
        }
        if !fixed.is_empty() {
            blocks.push(fixed);
        }
        let p = ColoredPartition::new(&rank_keys(&key).0, blocks).expect("orbits partition Gamma");
        return Ok(Step2::Partition(GammaStructure::Coloring(p)));
    }
    Ok(Step2::Fixed(fixed))
}

/// Tuple codes from joint classes of test sets under compared certificates.
struct Guide {
    d: usize,
    k: usize,
    codes: HashMap<(usize, Vec<usize>), Vec<u32>>,
}

impl LocalGuide for Guide {
    fn n(&self) -> usize {
        self.d
    }
    fn k(&self) -> usize {
        self.k
    }
    fn code(&self, side: usize, tuple: &[usize]) -> Vec<u32> {
        self.codes[&(side, tuple.to_vec())].clone()
    }
}

/// Step 2c: local guides on the fixed points `D` of both spans.
#[allow(clippy::too_many_arguments)]
fn local_guide(
    rep: &GiantRep,
    dx: &[usize],
    dy: &[usize],
    sx: &Side,
    sy: &Side,
    k: usize,
    ctx: &Ctx,
    opts: &CertOptions,
) -> Result<Option<(Structure, Structure)>> {
    let m = rep.m();
    let d = dx.len();
    let sides = [(dx, sx.x), (dy, sy.x)];
    // Class representatives: (side, set in Gamma), with the local automorphism
    // group of the representative on positions.
    let mut reps: Vec<(usize, Vec<usize>, Vec<Perm>)> = Vec::new();
    let mut codes = HashMap::new();
    for (side, &(dom, x)) in sides.iter().enumerate() {
        for l in subsets(d, k) {
            let a: Vec<usize> = l.iter().map(|&i| dom[i]).collect();
            let mut found = None;
            for (ri, (rs, r, _)) in reps.iter().enumerate() {
                let q = compare_certificates(rep, r, &a, sides[*rs].1, x, ctx, opts)?;
                if let Some(g) = q.rep() {
                    found = Some((ri, restrict_between(&rep.image_of(g), r, &a)));
                    break;
                }
            }
            let (ri, beta) = match found {
                Some(f) => f,
                None => {
                    let q = compare_certificates(rep, &a, &a, x, x, ctx, opts)?;
                    let grp = q.group().ok_or_else(|| Error::Invariant("identity fails a self-comparison".into()))?;
                    let local = image_group(grp, k, |g| restrict_to(&rep.image_of(g), &a)).elements();
                    reps.push((side, a.clone(), local));
                    (reps.len() - 1, Perm::identity(k))
                }
            };
            let local = &reps[ri].2;
            let binv = beta.inverse();
            for p in crate::coherent::all_perms(k) {
                // Ordering of `a` by positions `p`, pulled back to the representative.
                let back: Vec<usize> = p.iter().map(|&j| binv.apply(j)).collect();
                let best = local
                    .iter()
                    .map(|mu| back.iter().map(|&j| mu.apply(j) as u32).collect::<Vec<u32>>())
                    .min()
                    .expect("identity is local");
                let mut code = vec![ri as u32];
                code.extend(best);
                codes.insert((side, p.iter().map(|&j| l[j]).collect()), code);
            }
        }
    }
    let _ = m;
    let guide = Guide { d, k, codes };
    match relational_from_local_guide(&guide)? {
        GuideResult::Reject => Ok(None),
        GuideResult::Structures(z1, z2) => Ok(Some((lift(&z1, dx, m)?, lift(&z2, dy, m)?))),
    }
}

/// `g` restricted to a bijection from positions of `a` to positions of `b`.
fn restrict_between(g: &Perm, a: &[usize], b: &[usize]) -> Perm {
    let img = a.iter().map(|&u| b.binary_search(&g.apply(u)).expect("maps a onto b")).collect();
    Perm::from_images(img).expect("bijection")
}

/// A structure on `0..|dom|` moved onto `dom` inside `Gamma`, with `dom` as
/// an extra unary relation.
fn lift(z: &Structure, dom: &[usize], m: usize) -> Result<Structure> {
    let mut rels: Vec<Vec<Vec<usize>>> = vec![dom.iter().map(|&p| vec![p]).collect()];
    for r in &z.relations {
        rels.push(r.iter().map(|t| t.iter().map(|&i| dom[i]).collect()).collect());
    }
    Structure::new(m, z.arity, rels)
}

/// AggregateCertificates with test sets of size `k`.
pub fn aggregate_certificates(
    rep: &GiantRep,
    x: &[u32],
    y: &[u32],
    k: usize,
    ctx: &Ctx,
    opts: &CertOptions,
) -> Result<Aggregate> {
    let sx = certify(rep, x, k, ctx, opts)?;
    let sy = certify(rep, y, k, ctx, opts)?;
    let found = |kind, step, x, y| Ok(Aggregate::Found { kind, step, x, y });

    let (px, py) = (step_one(rep, &sx), step_one(rep, &sy));
    if px.is_empty() != py.is_empty() {
        return Ok(Aggregate::Reject);
    }
    if !px.is_empty() {
        ctx.count("aggregate-step1");
        return found(AggregateKind::Partition, "1", px, py);
    }
    match (step_two(rep, &sx)?, step_two(rep, &sy)?) {
        (Step2::Partition(a), Step2::Partition(b)) => {
            ctx.count("aggregate-step2a");
            found(AggregateKind::Partition, "2a", vec![a], vec![b])
        }
        (Step2::Giant(a), Step2::Giant(b)) => {
            ctx.count("aggregate-step2b1");
            let two = |c: &[usize]| {
                let colors: Vec<u32> = (0..rep.m()).map(|p| u32::from(!c.contains(&p))).collect();
                GammaStructure::Coloring(ColoredPartition::from_coloring(&colors))
            };
            found(AggregateKind::Reduced, "2b1", vec![two(&a)], vec![two(&b)])
        }
        (Step2::Orbitals(a), Step2::Orbitals(b)) if a.len() == b.len() => {
            ctx.count("aggregate-step2b2");
            found(AggregateKind::Kary, "2b2", a, b)
        }
        (Step2::Fixed(dx), Step2::Fixed(dy)) if dx.len() == dy.len() => {
            ctx.count("aggregate-step2c");
            if k > dx.len() || k < 2 {
                return Err(Error::Precondition(format!("test set size {k} exceeds |D| = {}", dx.len())));
            }
            match local_guide(rep, &dx, &dy, &sx, &sy, k, ctx, opts)? {
                None => Ok(Aggregate::Reject),
                Some((zx, zy)) => found(
                    AggregateKind::Kary,
                    "2c",
                    vec![GammaStructure::Relational(zx)],
                    vec![GammaStructure::Relational(zy)],
                ),
            }
        }
        _ => Ok(Aggregate::Reject),
    }
}
