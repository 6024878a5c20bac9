use std::collections::HashSet;

use num_rational::Ratio;

use crate::coherent::Structure;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefectMode {
    Weak,
    Strong,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryDefect {
    pub defect: usize,
    pub relative: Ratio<u64>,
    /// A largest symmetrical set, or empty when there is none.
    pub witness: Vec<usize>,
    /// All maximal symmetrical sets, sorted.
    pub classes: Vec<Vec<usize>>,
}

/// Tests permutations of small support against a structure; only tuples
/// touching a moved point are examined.
pub struct AutChecker<'a> {
    s: &'a Structure,
    sets: Vec<HashSet<&'a [usize]>>,
    touching: Vec<Vec<(usize, usize)>>,
}

impl<'a> AutChecker<'a> {
    pub fn new(s: &'a Structure) -> AutChecker<'a> {
        let sets = s.relations.iter().map(|r| r.iter().map(|t| t.as_slice()).collect()).collect();
        let mut touching = vec![Vec::new(); s.n];
        for (ri, r) in s.relations.iter().enumerate() {
            for (ti, t) in r.iter().enumerate() {
                let mut seen: Vec<usize> = t.clone();
                seen.sort_unstable();
                seen.dedup();
                for x in seen {
                    touching[x].push((ri, ti));
                }
            }
        }
        AutChecker { s, sets, touching }
    }

    /// `moves` lists `(point, image)` for the moved points of a permutation.
    pub fn preserves(&self, moves: &[(usize, usize)]) -> bool {
        let img = |x: usize| moves.iter().find(|m| m.0 == x).map_or(x, |m| m.1);
        moves.iter().all(|&(x, _)| {
            self.touching[x].iter().all(|&(ri, ti)| {
                let u: Vec<usize> = self.s.relations[ri][ti].iter().map(|&z| img(z)).collect();
                self.sets[ri].contains(u.as_slice())
            })
        })
    }

    pub fn transposition(&self, x: usize, y: usize) -> bool {
        self.preserves(&[(x, y), (y, x)])
    }

    pub fn three_cycle(&self, x: usize, y: usize, z: usize) -> bool {
        self.preserves(&[(x, y), (y, z), (z, x)])
    }
}

fn components(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = out.len();
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let a = comp[head];
            head += 1;
            for b in 0..n {
                if label[b] == usize::MAX && edge(a, b) {
                    label[b] = out.len();
                    comp.push(b);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Maximal symmetrical sets by testing every transposition (and, in weak
/// mode, every 3-cycle) against the relations.
pub fn symmetry_defect(s: &Structure, mode: DefectMode) -> Result<SymmetryDefect> {
    let n = s.n;
    let chk = AutChecker::new(s);
    let mut strong = vec![false; n * n];
    for x in 0..n {
        for y in x + 1..n {
            let t = chk.transposition(x, y);
            strong[x * n + y] = t;
            strong[y * n + x] = t;
        }
    }
    let strong_classes = components(n, |a, b| strong[a * n + b]);
    let classes = match mode {
        DefectMode::Strong => strong_classes,
        DefectMode::Weak => {
            let mut weak = strong.clone();
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        if x < y && x < z && y != z && chk.three_cycle(x, y, z) {
                            for (a, b) in [(x, y), (y, z), (x, z)] {
                                weak[a * n + b] = true;
                                weak[b * n + a] = true;
                            }
                        }
                    }
                }
            }
            let weak_classes = components(n, |a, b| weak[a * n + b]);
            // Large weakly symmetrical sets are strongly symmetrical.
            for c in &weak_classes {
                if c.len() >= s.arity + 2 && !strong_classes.contains(c) {
                    return Err(Error::Invariant(format!(
                        "weakly symmetrical set of size {} >= k+2 is not strongly symmetrical",
                        c.len()
                    )));
                }
            }
            weak_classes
        }
    };
    let classes: Vec<Vec<usize>> = classes.into_iter().filter(|c| c.len() >= 2).collect();
    let witness = classes
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)))
        .cloned()
        .unwrap_or_default();
    let defect = n - witness.len();
    Ok(SymmetryDefect {
        defect,
        relative: Ratio::new(defect as u64, n.max(1) as u64),
        witness,
        classes,
    })
}
