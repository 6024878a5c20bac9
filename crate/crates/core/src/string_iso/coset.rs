use num_bigint::BigUint;
use num_traits::Zero;

use crate::perm::Perm;
use crate::permgroup::PermGroup;

/// Either empty or the right coset `{g * rep : g in group}`.
#[derive(Clone, Debug)]
pub struct IsoCoset {
    n: usize,
    inner: Option<(PermGroup, Perm)>,
}

impl IsoCoset {
    pub fn empty(n: usize) -> IsoCoset {
        IsoCoset { n, inner: None }
    }

    pub fn new(group: PermGroup, rep: Perm) -> IsoCoset {
        IsoCoset {
            n: group.degree(),
            inner: Some((group, rep)),
        }
    }

    pub fn whole(group: &PermGroup) -> IsoCoset {
        IsoCoset::new(group.clone(), Perm::identity(group.degree()))
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_none()
    }

    pub fn group(&self) -> Option<&PermGroup> {
        self.inner.as_ref().map(|(g, _)| g)
    }

    pub fn rep(&self) -> Option<&Perm> {
        self.inner.as_ref().map(|(_, r)| r)
    }

    pub fn parts(&self) -> Option<(&PermGroup, &Perm)> {
        self.inner.as_ref().map(|(g, r)| (g, r))
    }

    pub fn size(&self) -> BigUint {
        match &self.inner {
            None => BigUint::zero(),
            Some((g, _)) => g.order(),
        }
    }

    pub fn contains(&self, tau: &Perm) -> bool {
        match &self.inner {
            None => false,
            Some((g, r)) => g.contains(&tau.mul(&r.inverse())),
        }
    }

    /// The coset multiplied on the right by `sigma`.
    pub fn shifted(self, sigma: &Perm) -> IsoCoset {
        match self.inner {
            None => self,
            Some((g, r)) => IsoCoset::new(g, r.mul(sigma)),
        }
    }

    /// Set equality.
    pub fn same_set(&self, other: &IsoCoset) -> bool {
        match (&self.inner, &other.inner) {
            (None, None) => true,
            (Some((g, _)), Some((h, s))) => g.order() == h.order() && self.contains(s) && h.is_subgroup_of(g),
            _ => false,
        }
    }

    /// Every element, for small cosets in tests.
    pub fn elements(&self) -> Vec<Perm> {
        match &self.inner {
            None => Vec::new(),
            Some((g, r)) => g.elements().into_iter().map(|e| e.mul(r)).collect(),
        }
    }
}

/// The smallest subcoset containing every given coset: with `rho` the first
/// representative, the group is generated by all groups and all `rho_i * rho^-1`.
pub fn fold(n: usize, parts: &[IsoCoset]) -> IsoCoset {
    let present: Vec<(&PermGroup, &Perm)> = parts.iter().filter_map(|c| c.parts()).collect();
    let Some(&(g0, rho)) = present.first() else {
        return IsoCoset::empty(n);
    };
    let rho_inv = rho.inverse();
    let mut gens: Vec<Perm> = g0.generators().to_vec();
    for &(g, r) in &present[1..] {
        gens.extend(g.generators().iter().cloned());
        gens.push(r.mul(&rho_inv));
    }
    if gens.len() == g0.generators().len() {
        return IsoCoset::new(g0.clone(), rho.clone());
    }
    let group = g0.join(&gens[g0.generators().len()..]);
    IsoCoset::new(group, rho.clone())
}
