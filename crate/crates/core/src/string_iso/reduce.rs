use std::collections::HashMap;

use num_bigint::BigUint;

use super::luks::small_quotient;
use super::StringInstance;
use crate::coherent::{classify, Classification, CoherentConfig, Config};
use crate::design::{Choice, Payload};
use crate::error::{Error, Result};
use crate::partitions::{alpha, ColoredPartition};
use crate::perm::Perm;
use crate::permgroup::{minimal_block_system, BlockSystem, Giant, GroupAction, PermGroup};
use crate::split_or_johnson::{Soj, SojOptions};

#[derive(Clone, Debug)]
pub struct ReduceOptions {
    /// Report quotients below `m^(1 + ceil(log2 m))` as [`QuotientClass::Small`].
    pub small_quotients: bool,
    pub soj: SojOptions,
}

impl Default for ReduceOptions {
    fn default() -> ReduceOptions {
        ReduceOptions {
            small_quotients: true,
            soj: SojOptions::default(),
        }
    }
}

/// How the primitive action on the maximal blocks is handled. Point sets
/// named `fixed` are block indices; `subgroup` is the preimage in `G` of
/// their pointwise stabilizer, of index at most `m^|fixed|`.
#[derive(Debug)]
pub enum QuotientClass {
    /// Enumerate the quotient.
    Small,
    /// The quotient contains the alternating group on the blocks.
    GiantQuotient { kind: Giant },
    /// After individualizing `fixed`, the blocks `j` carry a canonical
    /// Johnson scheme with `labels[a]` the `t`-subset of `0..m` for `j[a]`.
    /// `phi` maps `subgroup` to the symmetric group on `0..m`.
    JohnsonQuotient {
        m: usize,
        t: usize,
        fixed: Vec<usize>,
        j: Vec<usize>,
        labels: Vec<Vec<usize>>,
        subgroup: PermGroup,
        phi: GroupAction,
        giant: Giant,
    },
    /// A canonical colored 3/4-partition of the blocks, invariant under `subgroup`.
    Split {
        fixed: Vec<usize>,
        partition: ColoredPartition,
        subgroup: PermGroup,
    },
    /// Doubly transitive and not giant: `subgroup` fixes `degree - 1` blocks
    /// and is transitive, not doubly transitive, on the others.
    Individualize {
        degree: usize,
        fixed: Vec<usize>,
        subgroup: PermGroup,
    },
}

impl QuotientClass {
    pub fn name(&self) -> &'static str {
        match self {
            QuotientClass::Small => "SMALL",
            QuotientClass::GiantQuotient { .. } => "GIANT_QUOTIENT",
            QuotientClass::JohnsonQuotient { .. } => "JOHNSON_QUOTIENT",
            QuotientClass::Split { .. } => "SPLIT",
            QuotientClass::Individualize { .. } => "INDIVIDUALIZE",
        }
    }
}

#[derive(Debug)]
pub struct Dispatch {
    /// Maximal blocks, sorted; singletons when `G` is primitive.
    pub blocks: Vec<Vec<usize>>,
    pub quotient: GroupAction,
    pub class: QuotientClass,
}

impl Dispatch {
    pub fn m(&self) -> usize {
        self.blocks.len()
    }
}

/// The coherent configuration whose classes are the orbits of `g` on ordered pairs.
pub fn orbital_configuration(g: &PermGroup) -> Result<CoherentConfig> {
    let k = g.degree();
    let mut parent: Vec<usize> = (0..k * k).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for s in g.generators() {
        for x in 0..k {
            for y in 0..k {
                let a = find(&mut parent, x * k + y);
                let b = find(&mut parent, s.apply(x) * k + s.apply(y));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let colors: Vec<u32> = (0..k * k).map(|i| find(&mut parent, i) as u32).collect();
    Ok(CoherentConfig::trusted(Config::new(k, 2, colors)?))
}

/// The largest `t` such that `g` is `t`-transitive.
pub fn degree_of_transitivity(g: &PermGroup) -> usize {
    let k = g.degree();
    let mut h = g.clone();
    let mut t = 0;
    while t < k {
        let rest: Vec<usize> = (t..k).collect();
        if h.orbits_on(&rest).len() != 1 {
            break;
        }
        t += 1;
        h = h.point_stab(t - 1);
    }
    t
}

/// Locates the primitive quotient action of a transitive group and sorts it
/// into enumerable, giant, or Johnson, individualizing blocks when needed.
pub fn reduce_to_johnson(inst: &StringInstance, opts: &ReduceOptions) -> Result<Dispatch> {
    inst.validate()?;
    dispatch_group(&inst.group, opts)
}

pub(crate) fn dispatch_group(g: &PermGroup, opts: &ReduceOptions) -> Result<Dispatch> {
    let n = g.degree();
    let blocks = match minimal_block_system(g)? {
        BlockSystem::Primitive => (0..n).map(|p| vec![p]).collect(),
        BlockSystem::Blocks(b) => b,
    };
    let quotient = GroupAction::on_blocks(g, &blocks);
    let class = classify_quotient(&quotient, opts)?;
    Ok(Dispatch { blocks, quotient, class })
}

fn classify_quotient(quotient: &GroupAction, opts: &ReduceOptions) -> Result<QuotientClass> {
    let q = quotient.image();
    let k = q.degree();
    if opts.small_quotients && small_quotient(&q.order(), k) {
        return Ok(QuotientClass::Small);
    }
    let kind = q.is_giant();
    if kind != Giant::No {
        return Ok(QuotientClass::GiantQuotient { kind });
    }
    let stab = |fixed: &[usize]| quotient.preimage_of_subgroup(&q.pointwise_stab(fixed));
    let cc = orbital_configuration(q)?;
    match classify(&cc) {
        Classification::Upcc => {}
        Classification::Clique => {
            let degree = degree_of_transitivity(q);
            let bound = 3.0 * (k as f64).ln();
            if degree as f64 >= bound {
                return Err(Error::Invariant(format!(
                    "doubly transitive non-giant of degree {k} is {degree}-transitive"
                )));
            }
            let fixed: Vec<usize> = (0..degree - 1).collect();
            let subgroup = stab(&fixed);
            return Ok(QuotientClass::Individualize { degree, fixed, subgroup });
        }
        c => return Err(Error::Invariant(format!("orbital configuration of a primitive group classified {c:?}"))),
    }
    let soj = Soj::new(opts.soj.clone());
    let outcome = soj
        .upcc_at(&cc, alpha(3, 4), 0)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Invariant("UPCC procedure returned no outcome".into()))?;
    let mut fixed: Vec<usize> = outcome
        .choices
        .iter()
        .map(|c| match *c {
            Choice::Vertex(v) => v,
            Choice::Point(p) | Choice::Block(p) => p,
        })
        .collect();
    fixed.sort_unstable();
    fixed.dedup();
    let subgroup = stab(&fixed);
    match outcome.payload {
        Payload::Split(partition) => Ok(QuotientClass::Split {
            fixed,
            partition,
            subgroup,
        }),
        Payload::Johnson(jp) => {
            let images = subgroup
                .generators()
                .iter()
                .map(|h| ground_image(&quotient.image_of(h), &jp.w, jp.m, &jp.labels))
                .collect::<Result<Vec<Perm>>>()?;
            let phi = GroupAction::from_images(&subgroup, jp.m, images);
            let giant = phi.image().is_giant();
            Ok(QuotientClass::JohnsonQuotient {
                m: jp.m,
                t: jp.t,
                fixed,
                j: jp.w,
                labels: jp.labels,
                subgroup,
                phi,
                giant,
            })
        }
        Payload::Upcc { .. } => Err(Error::Invariant("UPCC procedure yields no UPCC".into())),
    }
}

/// The permutation of `0..m` induced by `g` on the Johnson scheme on `w`.
fn ground_image(g: &Perm, w: &[usize], m: usize, labels: &[Vec<usize>]) -> Result<Perm> {
    let pos: HashMap<usize, usize> = w.iter().enumerate().map(|(a, &v)| (v, a)).collect();
    let mut stars = vec![Vec::new(); m];
    for (a, l) in labels.iter().enumerate() {
        for &i in l {
            stars[i].push(a);
        }
    }
    let star_of: HashMap<&Vec<usize>, usize> = stars.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let moved = |a: usize| -> Result<usize> {
        pos.get(&g.apply(w[a]))
            .copied()
            .ok_or_else(|| Error::Invariant("subgroup does not preserve the Johnson part".into()))
    };
    let mut img = vec![0usize; m];
    for (i, s) in stars.iter().enumerate() {
        let mut t = s.iter().map(|&a| moved(a)).collect::<Result<Vec<usize>>>()?;
        t.sort_unstable();
        img[i] = *star_of
            .get(&t)
            .ok_or_else(|| Error::Invariant("subgroup does not map stars to stars".into()))?;
    }
    for (a, l) in labels.iter().enumerate() {
        let mut want: Vec<usize> = l.iter().map(|&i| img[i]).collect();
        want.sort_unstable();
        if labels[moved(a)?] != want {
            return Err(Error::Invariant("subgroup acts on the Johnson part outside the induced action".into()));
        }
    }
    Perm::from_images(img).map_err(|_| Error::Invariant("induced ground map is not a permutation".into()))
}

/// `|G| / |subgroup|`, the weak Luks branching of an individualization.
pub fn index_of(g: &PermGroup, h: &PermGroup) -> BigUint {
    g.order() / h.order()
}
