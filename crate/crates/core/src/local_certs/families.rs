//! Constructed groups with giant representations, for tests and benchmarks.

use super::GiantRep;
use crate::perm::Perm;
use crate::permgroup::{GroupAction, PermGroup};

fn rep_from(g: PermGroup, m: usize, images: Vec<Perm>) -> GiantRep {
    GiantRep::new(GroupAction::from_images(&g, m, images)).expect("constructed image is a giant")
}

fn sym_gens(m: usize) -> Vec<Perm> {
    PermGroup::symmetric(m).generators().to_vec()
}

fn induced(n: usize, index: impl Fn(&[usize]) -> usize, points: &[Vec<usize>], s: &Perm) -> Perm {
    let mut img = vec![0usize; n];
    for (i, p) in points.iter().enumerate() {
        let q: Vec<usize> = p.iter().map(|&a| s.apply(a)).collect();
        img[i] = index(&q);
    }
    Perm::from_images(img).expect("induced action")
}

/// `Sym(m)` on itself with the identity.
pub fn natural(m: usize) -> GiantRep {
    GiantRep::natural(&PermGroup::symmetric(m)).expect("symmetric group")
}

/// `Sym(m)` on 2-subsets (colex order) mapped to `Sym(m)`.
pub fn pairs(m: usize) -> GiantRep {
    let s = PermGroup::symmetric(m);
    rep_from(s.on_subsets(2), m, s.generators().to_vec())
}

/// `Sym(m)` on the `m(m-1)` ordered pairs.
pub fn ordered_pairs(m: usize) -> GiantRep {
    let points: Vec<Vec<usize>> = (0..m).flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| vec![a, b])).collect();
    let index = |p: &[usize]| p[0] * (m - 1) + if p[1] < p[0] { p[1] } else { p[1] - 1 };
    let n = points.len();
    let gens: Vec<Perm> = sym_gens(m).iter().map(|s| induced(n, index, &points, s)).collect();
    rep_from(PermGroup::new(n, gens).expect("degree"), m, sym_gens(m))
}

/// `Sym(b) wr Sym(m)` on `m` blocks `{ib, .., ib + b - 1}`, mapped to its
/// action on the blocks.
pub fn wreath(b: usize, m: usize) -> GiantRep {
    let n = b * m;
    let mut gens: Vec<Perm> = Vec::new();
    for s in PermGroup::symmetric(b).generators() {
        gens.push(s.extend(n));
    }
    let mut images = vec![Perm::identity(m); gens.len()];
    for s in sym_gens(m) {
        let img: Vec<usize> = (0..n).map(|p| s.apply(p / b) * b + p % b).collect();
        gens.push(Perm::from_images(img).expect("block permutation"));
        images.push(s);
    }
    rep_from(PermGroup::new(n, gens).expect("degree"), m, images)
}

/// The product of `Sym(k)` on `0..k` and `Sym(r)` on `k..k+r`, projected to the first factor.
pub fn product(k: usize, r: usize) -> GiantRep {
    let n = k + r;
    let mut gens = Vec::new();
    let mut images = Vec::new();
    for s in sym_gens(k) {
        gens.push(s.extend(n));
        images.push(s);
    }
    let shift: Vec<usize> = (k..n).collect();
    for s in PermGroup::symmetric_on(n, &shift).generators() {
        gens.push(s.clone());
        images.push(Perm::identity(k));
    }
    rep_from(PermGroup::new(n, gens).expect("degree"), k, images)
}

/// The affine group of the even-weight code of length `k` (even) modulo the
/// all-ones word, `Z_2^(k-2) : Alt(k)` on `2^(k-2)` points, mapped onto `Alt(k)`.
pub fn zero_weight(k: usize) -> GiantRep {
    assert!(k >= 4 && k % 2 == 0, "length must be even and at least 4");
    let n = 1usize << (k - 2);
    // Points are even-weight words with last coordinate 0; the first k-2
    // coordinates are the index bits, the (k-1)-th is their parity.
    let word = |i: usize| -> u64 {
        let low = i as u64;
        low | (u64::from(low.count_ones() % 2 == 1) << (k - 2))
    };
    let index = |w: u64| -> usize {
        let w = if w >> (k - 1) & 1 == 1 { w ^ ((1u64 << k) - 1) } else { w };
        (w & ((1u64 << (k - 2)) - 1)) as usize
    };
    let mut gens = Vec::new();
    let mut images = Vec::new();
    for i in 1..k - 1 {
        let t = 1u64 | (1u64 << i);
        gens.push(Perm::from_images((0..n).map(|p| index(word(p) ^ t)).collect()).expect("translation"));
        images.push(Perm::identity(k));
    }
    let c3 = Perm::from_cycles(k, &[vec![0, 1, 2]]).expect("3-cycle");
    let long = Perm::from_cycles(k, &[(1..k).collect()]).expect("cycle");
    for s in [c3, long] {
        let img = (0..n)
            .map(|p| {
                let w = word(p);
                let mut v = 0u64;
                for c in 0..k {
                    if w >> c & 1 == 1 {
                        v |= 1 << s.apply(c);
                    }
                }
                index(v)
            })
            .collect();
        gens.push(Perm::from_images(img).expect("coordinate permutation"));
        images.push(s);
    }
    rep_from(PermGroup::new(n, gens).expect("degree"), k, images)
}
