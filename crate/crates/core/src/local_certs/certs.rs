use num_traits::ToPrimitive;

use super::{affected_under, contains_alt, image_group, restrict_to, GiantRep};
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::permgroup::{Giant, GroupAction, PermGroup};
use crate::string_iso::{fold, pull, Ctx, IsoCoset};

#[derive(Clone, Debug)]
pub struct CertOptions {
    /// Enforce `max{8, 2 + log2 n} < |A| <= m/10`; otherwise only `2 <= |A| < m`.
    pub strict: bool,
    /// Largest `|H^A|` enumerated while recomputing `H`.
    pub enum_cap: usize,
}

impl Default for CertOptions {
    fn default() -> CertOptions {
        CertOptions {
            strict: true,
            enum_cap: 40_320,
        }
    }
}

#[derive(Clone, Debug)]
pub enum CertKind {
    /// `K(A) <= Aut_G(x)` with `K(A)^A` a giant.
    Full { k: PermGroup },
    /// `M(A) = H^A`, not a giant, containing `Aut_G(x)_A^A`.
    NotFull { m: PermGroup },
}

#[derive(Clone, Debug)]
pub struct CertResult {
    pub a: Vec<usize>,
    pub w: Vec<usize>,
    pub kind: CertKind,
    pub rounds: usize,
    /// The test set size satisfied the theorem's bounds.
    pub theorem: bool,
}

impl CertResult {
    pub fn is_full(&self) -> bool {
        matches!(self.kind, CertKind::Full { .. })
    }
}

pub(crate) fn check_test_set(rep: &GiantRep, a: &[usize], strict: bool) -> Result<bool> {
    let m = rep.m();
    let k = a.len();
    if a.windows(2).any(|w| w[0] >= w[1]) || a.iter().any(|&p| p >= m) {
        return Err(Error::Precondition("test set must be sorted, distinct and inside Gamma".into()));
    }
    let theorem = k as f64 > 8f64.max(2.0 + (rep.n() as f64).log2()) && 10 * k <= m;
    if strict && !theorem {
        return Err(Error::Precondition(format!(
            "|A| = {k} outside (max(8, 2 + log2 {}), {m}/10]",
            rep.n()
        )));
    }
    if k < 2 || k >= m {
        return Err(Error::Precondition(format!("|A| = {k} outside [2, {m})")));
    }
    Ok(theorem)
}

/// One side of LocalCertificates: the group `H = H(W)` and window `W`.
pub(crate) struct Beard<'r> {
    rep: &'r GiantRep,
    pub a: Vec<usize>,
    pub h: PermGroup,
    pub w: Vec<usize>,
    pub rounds: usize,
}

impl<'r> Beard<'r> {
    pub fn new(rep: &'r GiantRep, a: &[usize]) -> Beard<'r> {
        Beard {
            rep,
            a: a.to_vec(),
            h: rep.set_stabilizer(a),
            w: Vec::new(),
            rounds: 0,
        }
    }

    /// `psi_A`: the image of an element of `G_A` on `A`, as positions.
    fn psi(&self, g: &Perm) -> Perm {
        restrict_to(&self.rep.image_of(g), &self.a)
    }

    pub fn action(&self) -> GroupAction {
        let imgs = self.h.generators().iter().map(|g| self.psi(g)).collect();
        GroupAction::from_images(&self.h, self.a.len(), imgs)
    }

    pub fn image(&self) -> PermGroup {
        image_group(&self.h, self.a.len(), |g| self.psi(g))
    }

    pub fn affected(&self) -> Vec<usize> {
        affected_under(&self.h, self.a.len(), |g| self.psi(g))
    }

    /// The next window, if the loop continues: `H^A` giant and `aff` not inside `W`.
    pub fn next_window(&self) -> Option<Vec<usize>> {
        if !contains_alt(&self.image()) {
            return None;
        }
        let aff = self.affected();
        let grows = aff.iter().any(|p| self.w.binary_search(p).is_err());
        grows.then_some(aff)
    }

    /// Elements of `H^A` with their lifts, and `N = ker psi_A`.
    pub fn lifted_image(&self, cap: usize) -> Result<(PermGroup, Vec<Perm>)> {
        let act = self.action();
        let order = act.image().order();
        if order.to_usize().filter(|&o| o <= cap).is_none() {
            return Err(Error::Resource(format!("|H^A| = {order} exceeds the enumeration cap {cap}")));
        }
        let lifts = act
            .image()
            .elements()
            .iter()
            .map(|s| act.lift(s).expect("element of the image"))
            .collect();
        Ok((act.kernel().clone(), lifts))
    }

    /// `H(W')` from `H(W)` by the window recursion over `N sigma`.
    pub fn recompute(&mut self, ctx: &Ctx, x: &[u32], w: Vec<usize>, cap: usize) -> Result<()> {
        let n = self.h.degree();
        let k = self.a.len();
        let (kernel, lifts) = self.lifted_image(cap)?;
        if k >= 5 {
            for orbit in self.h.orbits_on(&w) {
                if kernel.orbits_on(&orbit).iter().any(|o| o.len() * k > orbit.len()) {
                    return Err(Error::Invariant(format!(
                        "kernel orbit longer than {}/{k} inside an affected orbit",
                        orbit.len()
                    )));
                }
            }
        }
        let mut parts = Vec::with_capacity(lifts.len());
        for s in &lifts {
            parts.push(ctx.solve(&kernel, &w, x, &pull(x, s))?.shifted(s));
        }
        let c = fold(n, &parts);
        let (grp, _) = c.parts().ok_or_else(|| Error::Invariant("identity is no automorphism".into()))?;
        self.h = grp.clone();
        self.w = w;
        self.rounds += 1;
        Ok(())
    }
}

/// LocalCertificates for the test set `a` (sorted) and the string `x`.
pub fn local_certificates(rep: &GiantRep, a: &[usize], x: &[u32], ctx: &Ctx, opts: &CertOptions) -> Result<CertResult> {
    let theorem = check_test_set(rep, a, opts.strict)?;
    let n = rep.n();
    if x.len() != n {
        return Err(Error::Precondition("string length differs from the degree".into()));
    }
    let mut b = Beard::new(rep, a);
    while let Some(w) = b.next_window() {
        b.recompute(ctx, x, w, opts.enum_cap)?;
    }
    let img = b.image();
    let kind = if contains_alt(&img) {
        let outside: Vec<usize> = (0..n).filter(|p| b.w.binary_search(p).is_err()).collect();
        let k = b.h.pointwise_stab(&outside);
        if k.generators().iter().any(|g| (0..n).any(|u| x[g.apply(u)] != x[u])) {
            return Err(Error::Invariant("certificate element is no automorphism".into()));
        }
        let ka = image_group(&k, a.len(), |g| restrict_to(&rep.image_of(g), a));
        if !contains_alt(&ka) {
            return Err(Error::Invariant(format!(
                "stabilizer of the unaffected points does not map onto a giant on |A| = {}",
                a.len()
            )));
        }
        CertKind::Full { k }
    } else {
        CertKind::NotFull { m: img }
    };
    Ok(CertResult {
        a: a.to_vec(),
        w: b.w,
        kind,
        rounds: b.rounds,
        theorem,
    })
}

/// An element of `G` mapping `a` onto `a2`, in order on `a` unless an odd
/// fix is needed for an alternating image.
pub(crate) fn set_mapper(rep: &GiantRep, a: &[usize], a2: &[usize]) -> Perm {
    let m = rep.m();
    let rest: Vec<usize> = (0..m).filter(|p| !a.contains(p)).collect();
    let rest2: Vec<usize> = (0..m).filter(|p| !a2.contains(p)).collect();
    let mut img = vec![0usize; m];
    for (&u, &v) in a.iter().zip(a2).chain(rest.iter().zip(&rest2)) {
        img[u] = v;
    }
    let mut p = Perm::from_images(img).expect("bijection");
    if rep.kind() == Giant::Alt && !p.is_even() {
        let swap = if rest2.len() >= 2 { (rest2[0], rest2[1]) } else { (a2[0], a2[1]) };
        p = p.mul(&Perm::transposition(m, swap.0, swap.1));
    }
    rep.phi().lift(&p).expect("giant image")
}

/// `u -> x(u) + 1` on `w`, `0` (the star) elsewhere.
fn starred(x: &[u32], w: &[usize]) -> Vec<u32> {
    let mut z = vec![0u32; x.len()];
    for &u in w {
        z[u] = x[u] + 1;
    }
    z
}

/// The elements of `G` taking `a` to `a2` and `x` on `W(A)` to `x2` on
/// `W(A2)`, with both windows grown in lockstep; empty when the two runs
/// diverge.
pub fn compare_certificates(
    rep: &GiantRep,
    a: &[usize],
    a2: &[usize],
    x: &[u32],
    x2: &[u32],
    ctx: &Ctx,
    opts: &CertOptions,
) -> Result<IsoCoset> {
    let n = rep.n();
    if a.len() != a2.len() {
        return Ok(IsoCoset::empty(n));
    }
    check_test_set(rep, a, opts.strict)?;
    check_test_set(rep, a2, opts.strict)?;
    let mut b1 = Beard::new(rep, a);
    let mut b2 = Beard::new(rep, a2);
    let mut q = IsoCoset::new(b1.h.clone(), set_mapper(rep, a, a2));
    loop {
        let (g1, g2) = (contains_alt(&b1.image()), contains_alt(&b2.image()));
        let (w1, w2) = (b1.next_window(), b2.next_window());
        if g1 != g2 || w1.is_some() != w2.is_some() {
            return Ok(IsoCoset::empty(n));
        }
        let (Some(w1), Some(w2)) = (w1, w2) else {
            break;
        };
        if w1.len() != w2.len() {
            return Ok(IsoCoset::empty(n));
        }
        let (z1, z2) = (starred(x, &w1), starred(x2, &w2));
        let (kernel, lifts) = b1.lifted_image(opts.enum_cap)?;
        let pi0 = q.rep().expect("nonempty").clone();
        let full: Vec<usize> = (0..n).collect();
        let mut parts = Vec::with_capacity(lifts.len());
        for s in &lifts {
            let pi = s.mul(&pi0);
            parts.push(ctx.solve(&kernel, &full, &z1, &pull(&z2, &pi))?.shifted(&pi));
        }
        q = fold(n, &parts);
        if q.is_empty() {
            return Ok(q);
        }
        b1.recompute(ctx, x, w1, opts.enum_cap)?;
        b2.recompute(ctx, x2, w2, opts.enum_cap)?;
    }
    Ok(q)
}
