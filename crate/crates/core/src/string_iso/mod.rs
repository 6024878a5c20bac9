//! Isomorphism of strings under a permutation group, after Luks.

mod coset;
mod format;
mod luks;
pub(crate) mod reduce;

use std::cell::{Cell, RefCell};
use std::rc::Rc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::permgroup::PermGroup;

pub use coset::{fold, IsoCoset};
pub use format::{intern, parse_instance};
pub(crate) use luks::{chain_over, even_part, giant_direct, pull_back};
pub use luks::{brute_force_iso, chain_rule, find_transversal, strong_luks, weak_luks};
pub use reduce::{degree_of_transitivity, index_of, orbital_configuration, reduce_to_johnson, Dispatch, QuotientClass, ReduceOptions};

/// An instance of `iso_{G sigma}^Delta(x, y)`.
#[derive(Clone, Debug)]
pub struct StringInstance {
    pub group: PermGroup,
    pub shift: Perm,
    /// Sorted, invariant under `group`.
    pub window: Vec<usize>,
    pub x: Vec<u32>,
    pub y: Vec<u32>,
}

impl StringInstance {
    pub fn new(group: PermGroup, x: Vec<u32>, y: Vec<u32>) -> StringInstance {
        let n = group.degree();
        StringInstance {
            shift: Perm::identity(n),
            window: (0..n).collect(),
            group,
            x,
            y,
        }
    }

    pub fn with_window(mut self, window: Vec<usize>) -> StringInstance {
        let mut w = window;
        w.sort_unstable();
        w.dedup();
        self.window = w;
        self
    }

    pub fn with_shift(mut self, shift: Perm) -> StringInstance {
        self.shift = shift;
        self
    }

    pub fn degree(&self) -> usize {
        self.group.degree()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.degree();
        if self.x.len() != n || self.y.len() != n {
            return Err(Error::Precondition(format!(
                "strings of lengths {} and {} on a domain of size {n}",
                self.x.len(),
                self.y.len()
            )));
        }
        if self.shift.degree() != n {
            return Err(Error::Precondition("shift has the wrong degree".into()));
        }
        let mut inside = vec![false; n];
        for &p in &self.window {
            if p >= n {
                return Err(Error::Precondition(format!("window point {p} out of range")));
            }
            inside[p] = true;
        }
        for g in self.group.generators() {
            if self.window.iter().any(|&p| !inside[g.apply(p)]) {
                return Err(Error::Precondition("window is not invariant under the group".into()));
            }
        }
        Ok(())
    }

    /// True iff `tau` lies in the ambient coset and maps `x` to `y` on the window.
    pub fn is_isomorphism(&self, tau: &Perm) -> bool {
        self.group.contains(&tau.mul(&self.shift.inverse()))
            && self.window.iter().all(|&u| self.x[u] == self.y[tau.apply(u)])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoConfig {
    /// Groups of at most this order are handled by enumeration.
    pub brute_cutoff: u64,
    /// Largest index accepted by [`weak_luks`] with an explicit subgroup.
    pub branch_cap: usize,
    /// Abort after this many recursive calls.
    pub budget: Option<u64>,
}

impl Default for IsoConfig {
    fn default() -> IsoConfig {
        IsoConfig {
            brute_cutoff: 10_000,
            branch_cap: 100_000,
            budget: None,
        }
    }
}

/// Counters collected during one computation.
#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct Stats {
    pub calls: u64,
    pub max_depth: u64,
    pub brute_force: u64,
    pub chain_steps: u64,
    pub weak_branches: u64,
    pub strong_leaves: u64,
    pub giant_direct: u64,
    pub restrictions: u64,
}

/// Handler for transitive faithful subproblems; `Ok(None)` defers to Luks.
pub type Hook = Rc<dyn Fn(&Ctx, &PermGroup, &[u32], &[u32]) -> Result<Option<IsoCoset>>>;

/// Recursion context: configuration, counters, and an optional handler for
/// transitive faithful subproblems that takes precedence over Luks reductions.
pub struct Ctx {
    pub cfg: IsoConfig,
    stats: RefCell<Stats>,
    depth: Cell<u64>,
    hook: Option<Hook>,
    pub extra: RefCell<Vec<(String, u64)>>,
}

impl Ctx {
    pub fn new(cfg: IsoConfig) -> Ctx {
        Ctx {
            cfg,
            stats: RefCell::new(Stats::default()),
            depth: Cell::new(0),
            hook: None,
            extra: RefCell::new(Vec::new()),
        }
    }

    pub fn with_hook(cfg: IsoConfig, hook: impl Fn(&Ctx, &PermGroup, &[u32], &[u32]) -> Result<Option<IsoCoset>> + 'static) -> Ctx {
        let mut c = Ctx::new(cfg);
        c.hook = Some(Rc::new(hook));
        c
    }

    pub fn stats(&self) -> Stats {
        self.stats.borrow().clone()
    }

    pub(crate) fn bump(&self, f: impl FnOnce(&mut Stats)) {
        f(&mut self.stats.borrow_mut());
    }

    /// Named counter, for callers layered on top of this engine.
    pub fn count(&self, name: &str) {
        let mut e = self.extra.borrow_mut();
        match e.iter_mut().find(|(k, _)| k == name) {
            Some((_, v)) => *v += 1,
            None => e.push((name.to_string(), 1)),
        }
    }

    pub(crate) fn enter(&self) -> Result<DepthGuard<'_>> {
        let d = self.depth.get() + 1;
        self.depth.set(d);
        let mut s = self.stats.borrow_mut();
        s.calls += 1;
        s.max_depth = s.max_depth.max(d);
        if let Some(b) = self.cfg.budget {
            if s.calls > b {
                self.depth.set(d - 1);
                return Err(Error::Budget(b));
            }
        }
        Ok(DepthGuard(self))
    }

    /// Window isomorphism `iso_G^Delta(x, y)` for a group `g` (no shift).
    pub fn solve(&self, g: &PermGroup, delta: &[usize], x: &[u32], y: &[u32]) -> Result<IsoCoset> {
        luks::solve(self, g, delta, x, y)
    }

    pub(crate) fn hook(&self) -> Option<Hook> {
        self.hook.clone()
    }

    /// Named counters in first-use order.
    pub fn counters(&self) -> Vec<(String, u64)> {
        self.extra.borrow().clone()
    }
}

pub(crate) struct DepthGuard<'a>(&'a Ctx);

impl Drop for DepthGuard<'_> {
    fn drop(&mut self) {
        self.0.depth.set(self.0.depth.get() - 1);
    }
}

/// `y^(sigma^-1)`, i.e. `u -> y(u^sigma)`.
pub fn pull(y: &[u32], sigma: &Perm) -> Vec<u32> {
    (0..y.len()).map(|u| y[sigma.apply(u)]).collect()
}

/// `iso_{G sigma}^Delta(x, y)`, normalizing the shift first.
pub fn iso(inst: &StringInstance, cfg: &IsoConfig) -> Result<IsoCoset> {
    let ctx = Ctx::new(cfg.clone());
    iso_with(&ctx, inst)
}

pub fn iso_with(ctx: &Ctx, inst: &StringInstance) -> Result<IsoCoset> {
    inst.validate()?;
    let y = pull(&inst.y, &inst.shift);
    Ok(ctx.solve(&inst.group, &inst.window, &inst.x, &y)?.shifted(&inst.shift))
}
