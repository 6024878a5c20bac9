use std::collections::BTreeMap;

use super::GiantRep;
use crate::error::{Error, Result};
use crate::partitions::binomial;
use crate::perm::Perm;
use crate::permgroup::PermGroup;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitBlocks {
    pub orbit: Vec<usize>,
    pub t: usize,
    /// `(T, B_T)` for every `t`-subset `T` of `Gamma`, sorted by `T`.
    pub blocks: Vec<(Vec<usize>, Vec<usize>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardBlocks {
    pub m: usize,
    /// `T(x)` for every point, sorted.
    pub t_of: Vec<Vec<usize>>,
    pub orbits: Vec<OrbitBlocks>,
}

impl StandardBlocks {
    /// `Omega(A)`: points `x` with `T(x)` inside `a`.
    pub fn omega_of(&self, a: &[usize]) -> Vec<usize> {
        (0..self.t_of.len())
            .filter(|&x| self.t_of[x].iter().all(|p| a.contains(p)))
            .collect()
    }

    /// A single orbit whose standard blocks are singletons.
    pub fn is_primitive_shape(&self) -> bool {
        self.orbits.len() == 1 && self.orbits[0].blocks.len() == self.t_of.len()
    }

    pub fn block_of(&self, x: usize) -> &[usize] {
        let ob = self
            .orbits
            .iter()
            .find(|o| o.orbit.binary_search(&x).is_ok())
            .expect("every point lies in an orbit");
        let i = ob
            .blocks
            .binary_search_by(|(t, _)| t.as_slice().cmp(&self.t_of[x]))
            .expect("block of T(x)");
        &ob.blocks[i].1
    }
}

/// The set `P` of points moved by the 3-cycles in `l`, taken as the largest
/// component of the hypergraph of contained 3-cycles; `Alt(P) <= l` and `l`
/// fixes the complement setwise are verified.
fn alternating_part(l: &PermGroup) -> Result<Vec<usize>> {
    let m = l.degree();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut touched = vec![false; m];
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                if find(&mut parent, a) == find(&mut parent, b) && find(&mut parent, b) == find(&mut parent, c) {
                    continue;
                }
                let cyc = Perm::from_cycles(m, &[vec![a, b, c]]).expect("3-cycle");
                if l.contains(&cyc) {
                    for (u, v) in [(a, b), (b, c)] {
                        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                        parent[ru.max(rv)] = ru.min(rv);
                    }
                    touched[a] = true;
                    touched[b] = true;
                    touched[c] = true;
                }
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for p in 0..m {
        if touched[p] {
            let r = find(&mut parent, p);
            comps.entry(r).or_default().push(p);
        }
    }
    let p = comps.into_values().max_by_key(|c| c.len()).unwrap_or_default();
    if 2 * p.len() <= m {
        return Err(Error::Invariant(format!(
            "3-cycles of the stabilizer image cover only {} of {m} points",
            p.len()
        )));
    }
    for &q in &p[2..] {
        let cyc = Perm::from_cycles(m, &[vec![p[0], p[1], q]]).expect("3-cycle");
        if !l.contains(&cyc) {
            return Err(Error::Invariant("alternating group on P not contained in the stabilizer image".into()));
        }
    }
    let t: Vec<usize> = (0..m).filter(|q| p.binary_search(q).is_err()).collect();
    for g in l.generators() {
        if t.iter().any(|&q| t.binary_search(&g.apply(q)).is_err()) {
            return Err(Error::Invariant("stabilizer image does not fix T setwise".into()));
        }
    }
    Ok(t)
}

/// `T(x)` on every orbit of `G`, transported from one representative per
/// orbit, and the blocks `B_T` as its fibers.
pub fn standard_blocks(rep: &GiantRep, strict: bool) -> Result<StandardBlocks> {
    let m = rep.m();
    let n = rep.n();
    if strict && !rep.structure_regime() {
        return Err(Error::Precondition(format!(
            "m = {m} below max(9, 2 log2 n0) for n0 = {}",
            rep.largest_orbit()
        )));
    }
    let g = rep.group();
    let gen_imgs: Vec<Perm> = g.generators().iter().map(|s| rep.image_of(s)).collect();
    let mut t_of: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut orbits = Vec::new();
    for orbit in g.orbits() {
        let x = orbit[0];
        let l = rep.image_of_group(&g.point_stab(x));
        let t = alternating_part(&l)?;
        if (if strict { 4 } else { 2 }) * t.len() >= m {
            return Err(Error::Invariant(format!("|T(x)| = {} too large for m = {m}", t.len())));
        }
        t_of[x] = Some(t);
        let mut stack = vec![x];
        while let Some(y) = stack.pop() {
            let ty = t_of[y].clone().expect("visited");
            for (s, si) in g.generators().iter().zip(&gen_imgs) {
                let z = s.apply(y);
                let mut tz = si.image_of_set(&ty);
                tz.sort_unstable();
                match &t_of[z] {
                    None => {
                        t_of[z] = Some(tz);
                        stack.push(z);
                    }
                    Some(old) if *old != tz => {
                        return Err(Error::Invariant(format!("T is not equivariant at point {}", z + 1)));
                    }
                    Some(_) => {}
                }
            }
        }
        let tsize = t_of[x].as_ref().expect("set").len();
        let mut fibers: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for &y in &orbit {
            fibers.entry(t_of[y].clone().expect("orbit visited")).or_default().push(y);
        }
        if fibers.len() as u128 != binomial(m, tsize) {
            return Err(Error::Invariant(format!(
                "{} blocks on an orbit with t = {tsize}, expected C({m}, {tsize})",
                fibers.len()
            )));
        }
        // The preimage of the stabilizer of T(x) stabilizes B_T(x).
        let tx = t_of[x].clone().expect("set");
        let bx = fibers[&tx].clone();
        let h = rep.set_stabilizer(&tx);
        for s in h.generators() {
            if bx.iter().any(|&u| bx.binary_search(&s.apply(u)).is_err()) {
                return Err(Error::Invariant("stabilizer of T(x) does not stabilize its block".into()));
            }
        }
        orbits.push(OrbitBlocks {
            orbit,
            t: tsize,
            blocks: fibers.into_iter().collect(),
        });
    }
    Ok(StandardBlocks {
        m,
        t_of: t_of.into_iter().map(|t| t.expect("all orbits visited")).collect(),
        orbits,
    })
}
