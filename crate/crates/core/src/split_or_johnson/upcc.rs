use std::collections::BTreeMap;

use super::{map_choices, ColoredBipartite, Soj};
use crate::coherent::{classify, rank_keys, Classification, CoherentConfig, Structure};
use crate::design::{split_or_upcc, Choice, JohnsonPart, Outcome, Payload};
use crate::error::{Error, Result};
use crate::partitions::{alpha, at_most, is_alpha_partition, Alpha, ColoredPartition};

pub(crate) enum Step {
    Split(ColoredPartition),
    /// `x` is the graph `(C2, Ci; Rj)`, to be split with `alpha`.
    Reduced {
        c2: Vec<usize>,
        ci: Vec<usize>,
        x: ColoredBipartite,
        alpha: Alpha,
    },
}

/// Individualize `x` in the UPCC and split by `c(x, .)`, or set up the
/// bipartite graph on the dominant neighborhood.
pub(crate) fn upcc_step(cc: &CoherentConfig, beta: Alpha, x: usize, soj: &Soj) -> Result<Step> {
    let n = cc.n();
    let row: Vec<u32> = (0..n).map(|y| cc.c(x, y)).collect();
    let mut by: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (y, &c) in row.iter().enumerate() {
        by.entry(c).or_default().push(y);
    }
    let Some((&i2, c2)) = by.iter().find(|(_, c)| !at_most(c.len(), beta, n)) else {
        soj.note("upcc-split");
        return Ok(Step::Split(ColoredPartition::from_coloring(&row)));
    };
    let d2 = c2.len();
    let z = c2[0];
    let diag = row[x];
    let other = |c: u32| c != diag && c != i2;
    // Least (i, j) with c(x, y) = i and c(z, y) = j for some y; canonical
    // since it only depends on c(x, z).
    let (i, j) = (0..n)
        .filter(|&y| other(row[y]) && other(cc.c(z, y)))
        .map(|y| (row[y], cc.c(z, y)))
        .min()
        .ok_or_else(|| Error::Invariant(format!("no third constituent meets the dominant one at x = {}", x + 1)))?;
    let ci = by[&i].clone();
    let bx = ColoredBipartite::from_fn(d2, ci.len(), |a, b| cc.c(c2[a], ci[b]) == j);
    let e = bx.edge_count();
    if !bx.is_semiregular() || e == 0 || e == d2 * ci.len() {
        return Err(Error::Invariant("the graph (C2, Ci; Rj) is not semiregular, nonempty and not complete".into()));
    }
    let twins = bx.twin_classes();
    if 2 * super::largest_class(&twins) > d2 {
        return Err(Error::Invariant("the graph (C2, Ci; Rj) has symmetry defect below 1/2 on C2".into()));
    }
    // Twin classes, the twin-free part of C2, Ci and the rest.
    let mut key = vec![(0u32, 0usize); n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut lone = Vec::new();
    for t in &twins {
        if t.len() >= 2 {
            let b: Vec<usize> = t.iter().map(|&a| c2[a]).collect();
            for &v in &b {
                key[v] = (3, t.len());
            }
            blocks.push(b);
        } else {
            lone.push(c2[t[0]]);
        }
    }
    for &v in &lone {
        key[v] = (2, 0);
    }
    for &v in &ci {
        key[v] = (1, 0);
    }
    let rest: Vec<usize> = (0..n).filter(|v| key[*v].0 == 0).collect();
    blocks.extend([lone, ci.clone(), rest].into_iter().filter(|b| !b.is_empty()));
    let p = ColoredPartition::new(&rank_keys(&key).0, blocks)?;
    if is_alpha_partition(&p, beta) {
        soj.note("upcc-twin-split");
        return Ok(Step::Split(p));
    }
    Ok(Step::Reduced {
        c2: c2.clone(),
        ci,
        x: bx,
        alpha: beta * Alpha::new(n as u64, d2 as u64),
    })
}

/// A partition of `C2` lifted to `V`, with `Ci` and the rest as blocks.
pub(crate) fn lift(n: usize, c2: &[usize], ci: &[usize], q: &ColoredPartition) -> Result<ColoredPartition> {
    let mut key = vec![(0u32, 0u32); n];
    for (a, &v) in c2.iter().enumerate() {
        key[v] = (2, q.colors()[a]);
    }
    for &v in ci {
        key[v] = (1, 0);
    }
    let rest: Vec<usize> = (0..n).filter(|v| key[*v].0 == 0).collect();
    let mut blocks: Vec<Vec<usize>> = q.blocks().iter().map(|b| b.iter().map(|&a| c2[a]).collect()).collect();
    blocks.push(ci.to_vec());
    blocks.push(rest);
    ColoredPartition::new(&rank_keys(&key).0, blocks)
}

impl Soj {
    pub fn upcc(&self, cc: &CoherentConfig, beta: Alpha) -> Result<Vec<Outcome>> {
        if classify(cc) != Classification::Upcc {
            return Err(Error::Precondition("configuration is not uniprimitive".into()));
        }
        if beta < alpha(2, 3) || beta >= Alpha::from_integer(1) {
            return Err(Error::Precondition(format!("beta = {beta} outside [2/3, 1)")));
        }
        self.upcc_inner(cc, beta)
    }

    /// Also accepts `beta = 1`, where every individualization splits.
    pub(crate) fn upcc_inner(&self, cc: &CoherentConfig, beta: Alpha) -> Result<Vec<Outcome>> {
        let mut out = Vec::new();
        for x in 0..cc.n() {
            out.extend(self.upcc_at(cc, beta, x)?);
        }
        Ok(out)
    }

    /// The outcomes that begin by individualizing `x`.
    pub fn upcc_at(&self, cc: &CoherentConfig, beta: Alpha, x: usize) -> Result<Vec<Outcome>> {
        let n = cc.n();
        let mut out = Vec::new();
        match upcc_step(cc, beta, x, self)? {
            Step::Split(p) => out.push(Outcome::split(p, beta, vec![Choice::Vertex(x)])),
            Step::Reduced { c2, ci, x: bx, alpha } => {
                for o in self.bipartite_inner(&bx, alpha, None)? {
                    let mut choices = vec![Choice::Vertex(x)];
                    choices.extend(map_choices(&o.choices, |v| Choice::Vertex(c2[v]), |q| Choice::Vertex(ci[q])));
                    let payload = match o.payload {
                        Payload::Split(q) => Payload::Split(lift(n, &c2, &ci, &q)?),
                        Payload::Johnson(j) => Payload::Johnson(JohnsonPart {
                            w: j.w.iter().map(|&v| c2[v]).collect(),
                            ..j
                        }),
                        Payload::Upcc { .. } => unreachable!("bipartite procedure yields no UPCC"),
                    };
                    out.push(Outcome {
                        payload,
                        alpha: beta,
                        choices,
                    });
                }
            }
        }
        for o in &out {
            o.validate(n)?;
        }
        Ok(out)
    }

    pub fn extended(&self, s: &Structure, alpha: Alpha) -> Result<Vec<Outcome>> {
        if alpha < self::alpha(3, 4) || alpha >= Alpha::from_integer(1) {
            return Err(Error::Precondition(format!("alpha = {alpha} outside [3/4, 1)")));
        }
        let n = s.n;
        let mut out = Vec::new();
        for o in split_or_upcc(s, alpha, &self.opts.design)? {
            let Payload::Upcc { w, cc } = o.payload else {
                out.push(o);
                continue;
            };
            self.note("extended-upcc");
            let beta = alpha * Alpha::new(n as u64, w.len() as u64);
            for inner in self.upcc_inner(&cc, beta)? {
                let mut choices = o.choices.clone();
                choices.extend(map_choices(&inner.choices, |v| Choice::Vertex(w[v]), Choice::Point));
                let payload = match inner.payload {
                    Payload::Split(q) => {
                        let mut key = vec![(0u32, 0u32); n];
                        for (a, &v) in w.iter().enumerate() {
                            key[v] = (1, q.colors()[a]);
                        }
                        let mut blocks: Vec<Vec<usize>> = q.blocks().iter().map(|b| b.iter().map(|&a| w[a]).collect()).collect();
                        let rest: Vec<usize> = (0..n).filter(|v| w.binary_search(v).is_err()).collect();
                        if !rest.is_empty() {
                            blocks.push(rest);
                        }
                        Payload::Split(ColoredPartition::new(&rank_keys(&key).0, blocks)?)
                    }
                    Payload::Johnson(j) => Payload::Johnson(JohnsonPart {
                        w: j.w.iter().map(|&v| w[v]).collect(),
                        ..j
                    }),
                    Payload::Upcc { .. } => unreachable!("UPCC procedure yields no UPCC"),
                };
                let lifted = Outcome { payload, alpha, choices };
                lifted.validate(n)?;
                out.push(lifted);
            }
        }
        Ok(out)
    }
}
