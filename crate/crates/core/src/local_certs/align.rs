use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::{GammaStructure, GiantRep, StandardBlocks};
use crate::error::{Error, Result};
use crate::partitions::ColoredPartition;
use crate::perm::Perm;
use crate::permgroup::{factorial, Giant, PermGroup};
use crate::string_iso::{even_part, pull};

#[derive(Clone, Debug)]
pub struct Aligned {
    /// Lift of `sigma_bar`, which maps the structure of `x` onto that of `y`.
    pub sigma: Perm,
    pub sigma_bar: Perm,
    /// `phi^-1(Aut(X(x)))`.
    pub g1: PermGroup,
    /// `y^(sigma^-1)`, so that `iso_G(x, y) = iso_{G1}(x, y') sigma`.
    pub y_shifted: Vec<u32>,
    /// `G1`-invariant windows on `Omega` from the induced coloring, those
    /// over the dominant color class first.
    pub windows: Vec<Vec<usize>>,
    /// The size of the new ground set: blocks of a dominant equipartition,
    /// or the ground set of a Johnson structure.
    pub gamma_prime: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum AlignResult {
    Reject,
    Aligned(Aligned),
}

struct Matched {
    sigma_bar: Perm,
    aut_gens: Vec<Perm>,
    aut_order: BigUint,
    colors: Vec<u32>,
    gamma_prime: Option<usize>,
}

fn swap_blocks(m: usize, a: &[usize], b: &[usize]) -> Perm {
    let mut img: Vec<usize> = (0..m).collect();
    for (&u, &v) in a.iter().zip(b) {
        img[u] = v;
        img[v] = u;
    }
    Perm::from_images(img).expect("disjoint blocks")
}

fn match_colorings(px: &ColoredPartition, py: &ColoredPartition) -> Option<Matched> {
    let m = px.n();
    if py.n() != m {
        return None;
    }
    let mut img = vec![0usize; m];
    let mut gens = Vec::new();
    let mut order = BigUint::from(1u32);
    let classes = px.color_classes().len();
    if py.color_classes().len() != classes {
        return None;
    }
    for c in 0..classes as u32 {
        let mut bx = px.blocks_of(c);
        let mut by = py.blocks_of(c);
        bx.sort_by_key(|b| b.len());
        by.sort_by_key(|b| b.len());
        if bx.len() != by.len() || bx.iter().zip(&by).any(|(a, b)| a.len() != b.len()) {
            return None;
        }
        for (a, b) in bx.iter().zip(&by) {
            for (&u, &v) in a.iter().zip(b.iter()) {
                img[u] = v;
            }
            gens.extend(PermGroup::symmetric_on(m, a).generators().iter().cloned());
            order *= factorial(a.len());
        }
        let mut run = 1usize;
        for i in 1..=bx.len() {
            if i < bx.len() && bx[i].len() == bx[i - 1].len() {
                gens.push(swap_blocks(m, bx[i - 1], bx[i]));
                run += 1;
            } else {
                order *= factorial(run);
                run = 1;
            }
        }
    }
    let sigma_bar = Perm::from_images(img).ok()?;
    (px.permuted(&sigma_bar) == *py).then(|| {
        let colors = px.colors().to_vec();
        let dom = px.color_classes().into_iter().position(|c| 2 * c.len() > m);
        let gamma_prime = dom.filter(|_| px.is_equipartition()).map(|c| px.blocks_of(c as u32).len());
        Matched {
            sigma_bar,
            aut_gens: gens,
            aut_order: order,
            colors,
            gamma_prime,
        }
    })
}

fn induced_on_labels(m: usize, w: &[usize], labels: &[Vec<usize>], ground: &Perm) -> Perm {
    let index: BTreeMap<&Vec<usize>, usize> = labels.iter().enumerate().map(|(a, l)| (l, a)).collect();
    let mut img: Vec<usize> = (0..m).collect();
    for (a, l) in labels.iter().enumerate() {
        let mut t: Vec<usize> = l.iter().map(|&i| ground.apply(i)).collect();
        t.sort_unstable();
        img[w[a]] = w[index[&t]];
    }
    Perm::from_images(img).expect("labels are a bijection")
}

fn match_johnson(sx: &GammaStructure, sy: &GammaStructure, m: usize) -> Option<Matched> {
    let (GammaStructure::Johnson { w: wx, m: mx, t: tx, labels: lx }, GammaStructure::Johnson { w: wy, m: my, t: ty, labels: ly }) = (sx, sy)
    else {
        return None;
    };
    if mx != my || tx != ty || wx.len() != wy.len() {
        return None;
    }
    let by_label: BTreeMap<&Vec<usize>, usize> = ly.iter().enumerate().map(|(b, l)| (l, wy[b])).collect();
    let mut img = vec![0usize; m];
    for (a, l) in lx.iter().enumerate() {
        img[wx[a]] = *by_label.get(l)?;
    }
    let rest_x: Vec<usize> = (0..m).filter(|p| !wx.contains(p)).collect();
    let rest_y: Vec<usize> = (0..m).filter(|p| !wy.contains(p)).collect();
    for (&u, &v) in rest_x.iter().zip(&rest_y) {
        img[u] = v;
    }
    let sigma_bar = Perm::from_images(img).ok()?;
    let mm = *mx;
    let mut gens = Vec::new();
    if mm >= 2 {
        gens.push(induced_on_labels(m, wx, lx, &Perm::transposition(mm, 0, 1)));
        gens.push(induced_on_labels(m, wx, lx, &Perm::from_cycles(mm, &[(0..mm).collect()]).expect("cycle")));
    }
    gens.extend(PermGroup::symmetric_on(m, &rest_x).generators().iter().cloned());
    let order = PermGroup::new(m, gens.clone()).expect("degree m").order();
    let colors: Vec<u32> = (0..m).map(|p| u32::from(!wx.contains(&p))).collect();
    Some(Matched {
        sigma_bar,
        aut_gens: gens,
        aut_order: order,
        colors,
        gamma_prime: Some(mm),
    })
}

/// Align: map the structure of `x` onto that of `y` inside `Sym(Gamma)`,
/// reduce `G` to the preimage of `Aut(X(x))` and shift `y` accordingly.
pub fn align(rep: &GiantRep, sb: &StandardBlocks, sx: &GammaStructure, sy: &GammaStructure, y: &[u32]) -> Result<AlignResult> {
    let m = rep.m();
    let matched = match (sx, sy) {
        (GammaStructure::Coloring(px), GammaStructure::Coloring(py)) => match_colorings(px, py),
        (GammaStructure::Johnson { .. }, GammaStructure::Johnson { .. }) => match_johnson(sx, sy, m),
        (GammaStructure::Relational(_), _) | (_, GammaStructure::Relational(_)) => {
            return Err(Error::Precondition("relational structures are not aligned directly".into()))
        }
        _ => None,
    };
    let Some(Matched {
        mut sigma_bar,
        mut aut_gens,
        mut aut_order,
        colors,
        gamma_prime,
    }) = matched
    else {
        return Ok(AlignResult::Reject);
    };
    if rep.kind() == Giant::Alt {
        let odd = aut_gens.iter().find(|s| !s.is_even()).cloned();
        if !sigma_bar.is_even() {
            let Some(h) = &odd else {
                return Ok(AlignResult::Reject);
            };
            sigma_bar = h.mul(&sigma_bar);
        }
        if let Some(h0) = odd {
            aut_gens = even_part(&aut_gens, &h0);
            aut_order /= BigUint::from(2u32);
        }
    }
    let aut = PermGroup::with_order(m, aut_gens, aut_order);
    let g1 = rep.preimage(&aut);
    let sigma = rep.phi().lift(&sigma_bar).expect("aligner inside the giant image");
    let y_shifted = pull(y, &sigma);

    let class_count = colors.iter().max().map_or(0, |&c| c as usize + 1);
    let mut class_size = vec![0usize; class_count];
    for &c in &colors {
        class_size[c as usize] += 1;
    }
    let dominant = class_size.iter().position(|&s| 2 * s > m).map(|c| c as u32);
    let orbit_of: BTreeMap<usize, usize> = sb
        .orbits
        .iter()
        .enumerate()
        .flat_map(|(i, o)| o.orbit.iter().map(move |&u| (u, i)))
        .collect();
    let mut windows: BTreeMap<(bool, usize, Vec<usize>), Vec<usize>> = BTreeMap::new();
    for (u, t) in sb.t_of.iter().enumerate() {
        let mut vec = vec![0usize; class_count];
        for &p in t {
            vec[colors[p] as usize] += 1;
        }
        let inside = dominant.is_some_and(|d| t.iter().all(|&p| colors[p] == d));
        windows.entry((!inside, orbit_of[&u], vec)).or_default().push(u);
    }
    Ok(AlignResult::Aligned(Aligned {
        sigma,
        sigma_bar,
        g1,
        y_shifted,
        windows: windows.into_values().collect(),
        gamma_prime,
    }))
}
