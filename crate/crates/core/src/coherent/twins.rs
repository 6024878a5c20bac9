use super::CoherentConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwinKind {
    Strong,
    Weak,
}

/// `p(j^-, j, a) = p(j^-, j, b)` for every color `j` outside `skip`.
fn in_profiles_agree(cc: &CoherentConfig, a: u32, b: u32, skip: &[u32]) -> bool {
    (0..cc.rank() as u32)
        .filter(|j| !skip.contains(j))
        .all(|j| {
            let jm = cc.converse(j);
            cc.p(jm, j, a) == cc.p(jm, j, b)
        })
}

/// Whether the transposition `(x y)` is an automorphism, read off the
/// structure constants alone.
pub fn strong_twins(cc: &CoherentConfig, x: usize, y: usize) -> bool {
    if x == y {
        return false;
    }
    let l = cc.c(x, x);
    let i = cc.c(x, y);
    i == cc.converse(i) && cc.p(i, i, i) + 1 == cc.p(i, i, l) && in_profiles_agree(cc, l, i, &[l, i])
}

fn weak_not_strong(cc: &CoherentConfig, x: usize, y: usize) -> bool {
    let l = cc.c(x, x);
    let i = cc.c(x, y);
    let im = cc.converse(i);
    im != i
        && cc.p(im, im, i) == 1
        && cc.p(i, i, i) == 0
        && cc.out_degree(i) == 1
        && cc.in_degree(i) == 1
        && in_profiles_agree(cc, l, i, &[l, i, im])
}

/// Whether `(x y)` or some 3-cycle `(x y z)` is an automorphism.
pub fn weak_twins(cc: &CoherentConfig, x: usize, y: usize) -> bool {
    x != y && (strong_twins(cc, x, y) || weak_not_strong(cc, x, y))
}

/// Nontrivial twin classes. Within a vertex-color class the twin relation is
/// given by the colors of twin pairs at one representative, so classes are
/// components of those constituents; classes inside one vertex-color class
/// have equal size, which is checked.
pub fn twin_classes(cc: &CoherentConfig, kind: TwinKind) -> Result<Vec<Vec<usize>>> {
    let test = |x, y| match kind {
        TwinKind::Strong => strong_twins(cc, x, y),
        TwinKind::Weak => weak_twins(cc, x, y),
    };
    let mut out = Vec::new();
    for class in cc.vertex_classes() {
        let x = class[0];
        let mut colors: Vec<u32> = class.iter().filter(|&&y| y != x && test(x, y)).map(|&y| cc.c(x, y)).collect();
        if colors.is_empty() {
            continue;
        }
        if kind == TwinKind::Weak {
            let conv: Vec<u32> = colors.iter().map(|&i| cc.converse(i)).collect();
            colors.extend(conv);
        }
        colors.sort_unstable();
        colors.dedup();
        let mut label = vec![usize::MAX; cc.n()];
        let mut parts: Vec<Vec<usize>> = Vec::new();
        for &u in &class {
            if label[u] != usize::MAX {
                continue;
            }
            let id = parts.len();
            let mut comp = vec![u];
            label[u] = id;
            let mut head = 0;
            while head < comp.len() {
                let a = comp[head];
                head += 1;
                for &b in &class {
                    if label[b] == usize::MAX && colors.contains(&cc.c(a, b)) {
                        label[b] = id;
                        comp.push(b);
                    }
                }
            }
            comp.sort_unstable();
            parts.push(comp);
        }
        let size = parts[0].len();
        if parts.iter().any(|p| p.len() != size) {
            return Err(Error::Invariant(format!(
                "twin classes in the vertex class of {} have unequal sizes",
                x + 1
            )));
        }
        if kind == TwinKind::Weak && size >= 4 {
            for p in &parts {
                if !strong_twins(cc, p[0], p[1]) {
                    return Err(Error::Invariant("four mutual weak twins that are not strong".into()));
                }
            }
        }
        out.extend(parts.into_iter().filter(|p| p.len() > 1));
    }
    out.sort();
    Ok(out)
}
