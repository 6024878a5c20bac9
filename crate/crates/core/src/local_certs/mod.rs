//! Giant representations: affected points, standard blocks, local
//! certificates and their aggregation, the top action, Align, and the
//! master algorithm built on top of Luks's framework.

mod aggregate;
mod align;
mod blocks;
mod certs;
pub mod families;
mod master;
mod top;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::permgroup::{factorial, Giant, GroupAction, PermGroup};

pub use aggregate::{aggregate_certificates, Aggregate, AggregateKind, GammaStructure};
pub use align::{align, AlignResult, Aligned};
pub use blocks::{standard_blocks, OrbitBlocks, StandardBlocks};
pub use certs::{compare_certificates, local_certificates, CertKind, CertOptions, CertResult};
pub use master::{master, master_hook, process_johnson_action, MasterOptions, MasterReport};
pub use top::{top_action, TopAnswer, TopMode};

/// A homomorphism `phi: G -> Sym(Gamma)` whose image contains `Alt(Gamma)`.
#[derive(Debug)]
pub struct GiantRep {
    phi: GroupAction,
    kind: Giant,
}

impl GiantRep {
    pub fn new(phi: GroupAction) -> Result<GiantRep> {
        let kind = phi.image().is_giant();
        if kind == Giant::No {
            return Err(Error::Precondition(format!(
                "image of order {} on {} points is not a giant",
                phi.image().order(),
                phi.target_degree()
            )));
        }
        Ok(GiantRep { phi, kind })
    }

    /// `phi` the identity of a giant `g`.
    pub fn natural(g: &PermGroup) -> Result<GiantRep> {
        GiantRep::new(GroupAction::from_images(g, g.degree(), g.generators().to_vec()))
    }

    pub fn group(&self) -> &PermGroup {
        self.phi.source()
    }

    pub fn phi(&self) -> &GroupAction {
        &self.phi
    }

    pub fn kind(&self) -> Giant {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.group().degree()
    }

    pub fn m(&self) -> usize {
        self.phi.target_degree()
    }

    pub fn kernel(&self) -> &PermGroup {
        self.phi.kernel()
    }

    pub fn largest_orbit(&self) -> usize {
        self.group().orbits().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `max{8, 2 + log2 n0}` for the largest orbit length `n0`.
    pub fn regime_bound(&self) -> f64 {
        8f64.max(2.0 + (self.largest_orbit().max(1) as f64).log2())
    }

    /// `m > max{8, 2 + log2 n0}`.
    pub fn in_regime(&self) -> bool {
        self.m() as f64 > self.regime_bound()
    }

    /// `m >= max{9, 2 log2 n0}`, where the structure of `G` is controlled.
    pub fn structure_regime(&self) -> bool {
        self.m() as f64 >= 9f64.max(2.0 * (self.largest_orbit().max(1) as f64).log2())
    }

    pub fn image_of(&self, g: &Perm) -> Perm {
        self.phi.image_of(g)
    }

    /// `H^phi` for `H <= G`.
    pub fn image_of_group(&self, h: &PermGroup) -> PermGroup {
        image_group(h, self.m(), |g| self.image_of(g))
    }

    pub fn preimage(&self, l: &PermGroup) -> PermGroup {
        self.phi.preimage_of_subgroup(l)
    }

    /// `G_A`, the preimage of the setwise stabilizer of `a` in `G^phi`.
    pub fn set_stabilizer(&self, a: &[usize]) -> PermGroup {
        self.preimage(&giant_set_stab(self.m(), self.kind, a))
    }

    /// `phi` restricted to a subgroup whose image is still a giant.
    pub fn restrict(&self, h: &PermGroup) -> Result<GiantRep> {
        let imgs = h.generators().iter().map(|g| self.image_of(g)).collect();
        GiantRep::new(GroupAction::from_images(h, self.m(), imgs))
    }
}

/// The group generated by the images of `h`'s generators under `f`.
pub(crate) fn image_group(h: &PermGroup, k: usize, f: impl Fn(&Perm) -> Perm) -> PermGroup {
    let gens = h.generators().iter().map(f).collect();
    PermGroup::new(k, gens).expect("images have the target degree")
}

/// Contains the alternating group of its degree.
pub(crate) fn contains_alt(g: &PermGroup) -> bool {
    g.is_giant() != Giant::No
}

/// `(Sym(a) x Sym(rest))`, intersected with `Alt(m)` when `kind` is `Alt`.
pub(crate) fn giant_set_stab(m: usize, kind: Giant, a: &[usize]) -> PermGroup {
    let inside: Vec<bool> = (0..m).map(|p| a.contains(&p)).collect();
    let rest: Vec<usize> = (0..m).filter(|&p| !inside[p]).collect();
    let mut gens = PermGroup::symmetric_on(m, a).generators().to_vec();
    gens.extend(PermGroup::symmetric_on(m, &rest).generators().iter().cloned());
    let mut order = factorial(a.len()) * factorial(rest.len());
    if kind == Giant::Alt {
        if let Some(h0) = gens.iter().find(|s| !s.is_even()).cloned() {
            gens = crate::string_iso::even_part(&gens, &h0);
            order /= BigUint::from(2u32);
        }
    }
    PermGroup::with_order(m, gens, order)
}

/// Restriction of a permutation of `0..m` to an invariant sorted set,
/// as a permutation of positions.
pub(crate) fn restrict_to(p: &Perm, set: &[usize]) -> Perm {
    let img = set
        .iter()
        .map(|&s| set.binary_search(&p.apply(s)).expect("set is invariant"))
        .collect();
    Perm::from_images(img).expect("restriction is a bijection")
}

/// Points of `h`'s orbits on which the point stabilizer's image under
/// `f` (into `Sym(k)`) does not contain `Alt(k)`.
pub(crate) fn affected_under(h: &PermGroup, k: usize, f: impl Fn(&Perm) -> Perm) -> Vec<usize> {
    if !contains_alt(&image_group(h, k, &f)) {
        return (0..h.degree()).collect();
    }
    let mut out = Vec::new();
    for orbit in h.orbits() {
        let hx = h.point_stab(orbit[0]);
        if !contains_alt(&image_group(&hx, k, &f)) {
            out.extend(orbit);
        }
    }
    out.sort_unstable();
    out
}

/// `aff(H, phi)`: points whose stabilizer in `H` does not map onto a giant.
pub fn affected_points(rep: &GiantRep, h: &PermGroup) -> Vec<usize> {
    affected_under(h, rep.m(), |g| rep.image_of(g))
}
