use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::{symmetry_defect, DefectMode};
use crate::coherent::{all_perms, Structure};
use crate::error::{Error, Result};
use crate::partitions::subsets;

/// Local objects `X_i(L)` on the `k`-subsets of two domains of equal size.
///
/// `code(i, u)` encodes `X_i(L(u))` relabeled so that `u[p]` becomes `p`.
/// Two ordered tuples get equal codes exactly when a local isomorphism maps
/// one onto the other position by position.
pub trait LocalGuide: Sync {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn code(&self, side: usize, tuple: &[usize]) -> Vec<u32>;

    /// Local isomorphisms `X_i(L) -> X_j(L')`, as maps from the sorted `L`
    /// onto `L'`, by brute force over the `k!` bijections.
    fn isos(&self, i: usize, l: &[usize], j: usize, l2: &[usize]) -> Vec<Vec<usize>> {
        let base = self.code(i, l);
        all_perms(l2.len())
            .into_iter()
            .map(|p| p.iter().map(|&q| l2[q]).collect::<Vec<usize>>())
            .filter(|v| self.code(j, v) == base)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuideResult {
    /// Some class is represented a different number of times on the two sides.
    Reject,
    /// The class-indexed structures `Z_1`, `Z_2`; relation `q` holds the
    /// tuples of the `q`-th class in code order.
    Structures(Structure, Structure),
}

/// The canonical k-ary structures built from the equivalence classes of
/// ordered k-tuples under local isomorphism.
pub fn relational_from_local_guide(g: &dyn LocalGuide) -> Result<GuideResult> {
    let n = g.n();
    let k = g.k();
    if k < 2 || k > n {
        return Err(Error::Precondition(format!("local guide needs 2 <= k <= n, got k = {k}, n = {n}")));
    }
    let perms = all_perms(k);
    let sets = subsets(n, k);
    let mut classes: [BTreeMap<Vec<u32>, Vec<Vec<usize>>>; 2] = [BTreeMap::new(), BTreeMap::new()];
    for side in 0..2 {
        let per_set: Vec<Vec<(Vec<u32>, Vec<usize>)>> = sets
            .par_iter()
            .map(|l| {
                perms
                    .iter()
                    .map(|p| {
                        let u: Vec<usize> = p.iter().map(|&q| l[q]).collect();
                        (g.code(side, &u), u)
                    })
                    .collect()
            })
            .collect();
        for (l, tuples) in sets.iter().zip(per_set) {
            if tuples.iter().all(|(c, _)| *c == tuples[0].0) {
                return Err(Error::FullSet(l.clone()));
            }
            for (c, u) in tuples {
                classes[side].entry(c).or_default().push(u);
            }
        }
    }
    let profile = |m: &BTreeMap<Vec<u32>, Vec<Vec<usize>>>| -> HashMap<Vec<u32>, usize> {
        m.iter().map(|(c, v)| (c.clone(), v.len())).collect()
    };
    if profile(&classes[0]) != profile(&classes[1]) {
        return Ok(GuideResult::Reject);
    }
    let [c1, c2] = classes;
    let z1 = Structure::new(n, k, c1.into_values().collect())?;
    let z2 = Structure::new(n, k, c2.into_values().collect())?;
    for z in [&z1, &z2] {
        let d = symmetry_defect(z, DefectMode::Strong)?;
        if d.defect + k < n + 1 {
            return Err(Error::Invariant(format!("class structure has strong symmetry defect {} < n-k+1", d.defect)));
        }
    }
    Ok(GuideResult::Structures(z1, z2))
}
