use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::{fold, pull, Ctx, IsoCoset, IsoConfig, StringInstance};
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::permgroup::{
    is_block_system, minimal_block_system, search_element, search_subgroup, BlockSystem, Giant, GroupAction, PermGroup,
};

fn letters_on(delta: &[usize], s: &[u32]) -> Vec<u32> {
    let mut v: Vec<u32> = delta.iter().map(|&u| s[u]).collect();
    v.sort_unstable();
    v
}

fn agrees(delta: &[usize], x: &[u32], y: &[u32], tau: &Perm) -> bool {
    delta.iter().all(|&u| x[u] == y[tau.apply(u)])
}

fn is_small(ctx: &Ctx, g: &PermGroup) -> bool {
    g.order() <= BigUint::from(ctx.cfg.brute_cutoff)
}

pub(crate) fn solve(ctx: &Ctx, g: &PermGroup, delta: &[usize], x: &[u32], y: &[u32]) -> Result<IsoCoset> {
    let _guard = ctx.enter()?;
    let n = g.degree();
    if delta.is_empty() {
        return Ok(IsoCoset::whole(g));
    }
    if letters_on(delta, x) != letters_on(delta, y) {
        return Ok(IsoCoset::empty(n));
    }
    let fixes_x = g
        .generators()
        .iter()
        .all(|s| delta.iter().all(|&u| x[s.apply(u)] == x[u]));
    if fixes_x {
        let same = delta.iter().all(|&u| x[u] == y[u]);
        return Ok(if same { IsoCoset::whole(g) } else { IsoCoset::empty(n) });
    }
    if is_small(ctx, g) {
        return brute(ctx, g, delta, x, y);
    }
    let mut orbits = g.orbits_on(delta);
    if orbits.len() > 1 {
        orbits.sort_by_key(|o| (o.len(), o[0]));
        return chain_over(ctx, g, &orbits, x, y);
    }
    if delta.len() == n {
        return solve_faithful(ctx, g, x, y);
    }
    ctx.bump(|s| s.restrictions += 1);
    let a = GroupAction::restriction(g, delta);
    let xb: Vec<u32> = delta.iter().map(|&u| x[u]).collect();
    let yb: Vec<u32> = delta.iter().map(|&u| y[u]).collect();
    let c = solve_faithful(ctx, a.image(), &xb, &yb)?;
    Ok(pull_back(&a, &c))
}

/// Lifts a coset of the image of `a` to the source group.
pub(crate) fn pull_back(a: &GroupAction, c: &IsoCoset) -> IsoCoset {
    match c.parts() {
        None => IsoCoset::empty(a.source().degree()),
        Some((h, r)) => {
            let group = a.preimage_of_subgroup(h);
            let rep = a.lift(r).expect("representative lies in the image");
            IsoCoset::new(group, rep)
        }
    }
}

/// `g` transitive on its whole domain.
fn solve_faithful(ctx: &Ctx, g: &PermGroup, x: &[u32], y: &[u32]) -> Result<IsoCoset> {
    let full: Vec<usize> = (0..g.degree()).collect();
    if is_small(ctx, g) {
        return brute(ctx, g, &full, x, y);
    }
    if let Some(hook) = ctx.hook() {
        if let Some(c) = hook(ctx, g, x, y)? {
            return Ok(c);
        }
    }
    luks_transitive(ctx, g, x, y)
}

/// Luks reductions for a transitive group on its whole domain.
pub(crate) fn luks_transitive(ctx: &Ctx, g: &PermGroup, x: &[u32], y: &[u32]) -> Result<IsoCoset> {
    let kind = g.is_giant();
    if kind != Giant::No {
        return Ok(giant_direct(ctx, g.degree(), kind, x, y));
    }
    match minimal_block_system(g)? {
        BlockSystem::Primitive => weak_point(ctx, g, x, y),
        BlockSystem::Blocks(blocks) => {
            let a = GroupAction::on_blocks(g, &blocks);
            if small_quotient(&a.image().order(), blocks.len()) {
                strong_enum(ctx, &a, &blocks, x, y)
            } else {
                weak_block(ctx, &a, &blocks, x, y)
            }
        }
    }
}

/// `|Q| < m^(1 + ceil(log2 m))`.
pub fn small_quotient(order: &BigUint, m: usize) -> bool {
    let lg = (usize::BITS - (m.max(1) - 1).leading_zeros()) as u32;
    let bound = BigUint::from(m).pow(1 + lg);
    *order < bound
}

/// The giant case: isomorphism depends only on letter multiplicities.
pub(crate) fn giant_direct(ctx: &Ctx, m: usize, kind: Giant, x: &[u32], y: &[u32]) -> IsoCoset {
    ctx.bump(|s| s.giant_direct += 1);
    let mut by_x: HashMap<u32, Vec<usize>> = HashMap::new();
    let mut by_y: HashMap<u32, Vec<usize>> = HashMap::new();
    for u in 0..m {
        by_x.entry(x[u]).or_default().push(u);
        by_y.entry(y[u]).or_default().push(u);
    }
    let mut img = vec![0usize; m];
    for (a, xs) in &by_x {
        let Some(ys) = by_y.get(a) else {
            return IsoCoset::empty(m);
        };
        if ys.len() != xs.len() {
            return IsoCoset::empty(m);
        }
        for (&u, &v) in xs.iter().zip(ys) {
            img[u] = v;
        }
    }
    let mut rep = Perm::from_images(img).expect("letter classes match");
    let mut classes: Vec<Vec<usize>> = by_x.into_values().filter(|c| c.len() > 1).collect();
    classes.sort();
    let mut gens = Vec::new();
    let mut order = BigUint::from(1u32);
    for c in &classes {
        gens.extend(PermGroup::symmetric_on(m, c).generators().iter().cloned());
        order *= crate::permgroup::factorial(c.len());
    }
    if kind == Giant::Alt {
        if !rep.is_even() {
            let Some(c) = classes.first() else {
                return IsoCoset::empty(m);
            };
            rep = Perm::transposition(m, c[0], c[1]).mul(&rep);
        }
        if let Some(h0) = gens.iter().find(|s| !s.is_even()).cloned() {
            gens = even_part(&gens, &h0);
            order /= BigUint::from(2u32);
        }
    }
    IsoCoset::new(PermGroup::with_order(m, gens, order), rep)
}

/// Generators of the even elements of `<gens>` from one odd generator `h0`.
pub(crate) fn even_part(gens: &[Perm], h0: &Perm) -> Vec<Perm> {
    let h0i = h0.inverse();
    let mut out = Vec::new();
    for s in gens {
        if s.is_even() {
            out.push(s.clone());
            out.push(h0.mul(s).mul(&h0i));
        } else {
            out.push(s.mul(&h0i));
            out.push(h0.mul(s));
        }
    }
    out
}

/// Exhaustive enumeration of `g`.
fn brute(ctx: &Ctx, g: &PermGroup, delta: &[usize], x: &[u32], y: &[u32]) -> Result<IsoCoset> {
    ctx.bump(|s| s.brute_force += 1);
    let n = g.degree();
    let hits: Vec<Perm> = g.elements().into_iter().filter(|t| agrees(delta, x, y, t)).collect();
    let Some(rep) = hits.iter().min().cloned() else {
        return Ok(IsoCoset::empty(n));
    };
    let ri = rep.inverse();
    let mut aut = PermGroup::trivial(n);
    for h in &hits {
        let a = h.mul(&ri);
        if !aut.contains(&a) {
            aut = aut.join(&[a]);
        }
    }
    let aut = PermGroup::with_order(n, aut.generators().to_vec(), BigUint::from(hits.len()));
    Ok(IsoCoset::new(aut, rep))
}

/// Chain Rule over consecutive invariant windows.
pub(crate) fn chain_over(ctx: &Ctx, g: &PermGroup, pieces: &[Vec<usize>], x: &[u32], y: &[u32]) -> Result<IsoCoset> {
    let n = g.degree();
    let mut grp = g.clone();
    let mut sigma = Perm::identity(n);
    for piece in pieces {
        ctx.bump(|s| s.chain_steps += 1);
        let ys = pull(y, &sigma);
        let c = ctx.solve(&grp, piece, x, &ys)?;
        match c.parts() {
            None => return Ok(IsoCoset::empty(n)),
            Some((h, r)) => {
                sigma = r.mul(&sigma);
                grp = h.clone();
            }
        }
    }
    Ok(IsoCoset::new(grp, sigma))
}

/// Weak Luks reduction to the stabilizer `h` of an object `p0` in a transitive
/// action on `count` objects; `trans(q)` maps `p0` to `q` and `act` gives the
/// action of an element. `inv_x`, `inv_y` are invariants of each object.
#[allow(clippy::too_many_arguments)]
fn weak_over(
    ctx: &Ctx,
    g: &PermGroup,
    h: &PermGroup,
    count: usize,
    trans: &dyn Fn(usize) -> Perm,
    act: &dyn Fn(&Perm) -> Perm,
    inv_x: &[Vec<u32>],
    inv_y: &[Vec<u32>],
    x: &[u32],
    y: &[u32],
) -> Result<IsoCoset> {
    let n = g.degree();
    let full: Vec<usize> = (0..n).collect();
    let mut rep = None;
    for q in 0..count {
        if inv_x[0] != inv_y[q] {
            continue;
        }
        ctx.bump(|s| s.weak_branches += 1);
        let t = trans(q);
        let c = ctx.solve(h, &full, x, &pull(y, &t))?;
        if let Some(r) = c.rep() {
            rep = Some(r.mul(&t));
            break;
        }
    }
    let Some(rep) = rep else {
        return Ok(IsoCoset::empty(n));
    };
    let ah = ctx.solve(h, &full, x, x)?;
    let (ah, _) = ah.parts().expect("automorphisms form a group");
    let mut gens: Vec<Perm> = ah.generators().to_vec();
    let mut moves: Vec<Perm> = gens.iter().map(act).collect();
    let mut covered = orbit(count, &moves, 0);
    let mut dead = vec![false; count];
    for q in 1..count {
        if covered[q] || dead[q] {
            continue;
        }
        if inv_x[0] != inv_x[q] {
            dead[q] = true;
            continue;
        }
        ctx.bump(|s| s.weak_branches += 1);
        let t = trans(q);
        let c = ctx.solve(h, &full, x, &pull(x, &t))?;
        match c.rep() {
            Some(r) => {
                let e = r.mul(&t);
                moves.push(act(&e));
                gens.push(e);
                covered = orbit(count, &moves, 0);
            }
            None => {
                let o = orbit(count, &moves, q);
                for (d, &inside) in dead.iter_mut().zip(&o) {
                    *d |= inside;
                }
            }
        }
    }
    let len = covered.iter().filter(|&&c| c).count();
    let aut = PermGroup::with_order(n, gens, ah.order() * BigUint::from(len));
    Ok(IsoCoset::new(aut, rep))
}

fn orbit(count: usize, moves: &[Perm], start: usize) -> Vec<bool> {
    let mut seen = vec![false; count];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(p) = stack.pop() {
        for m in moves {
            let q = m.apply(p);
            if !seen[q] {
                seen[q] = true;
                stack.push(q);
            }
        }
    }
    seen
}

/// Primitive, not giant: reduce to a point stabilizer.
fn weak_point(ctx: &Ctx, g: &PermGroup, x: &[u32], y: &[u32]) -> Result<IsoCoset> {
    let n = g.degree();
    let chain = g.chain_with_prefix(&[0]);
    let h = PermGroup::from_bsgs(chain.tail(1));
    let inv_x: Vec<Vec<u32>> = x.iter().map(|&a| vec![a]).collect();
    let inv_y: Vec<Vec<u32>> = y.iter().map(|&a| vec![a]).collect();
    weak_over(
        ctx,
        g,
        &h,
        n,
        &|q| chain.transversal(0, q),
        &|e| e.clone(),
        &inv_x,
        &inv_y,
        x,
        y,
    )
}

fn block_letters(blocks: &[Vec<usize>], s: &[u32]) -> Vec<Vec<u32>> {
    blocks.iter().map(|b| letters_on(b, s)).collect()
}

/// Large primitive quotient on blocks: reduce to the stabilizer of block 0.
fn weak_block(ctx: &Ctx, a: &GroupAction, blocks: &[Vec<usize>], x: &[u32], y: &[u32]) -> Result<IsoCoset> {
    let q = a.image();
    let qchain = q.chain_with_prefix(&[0]);
    let qstab = PermGroup::from_bsgs(qchain.tail(1));
    let h = a.preimage_of_subgroup(&qstab);
    weak_over(
        ctx,
        a.source(),
        &h,
        blocks.len(),
        &|k| a.lift(&qchain.transversal(0, k)).expect("transversal lies in the image"),
        &|e| a.image_of(e),
        &block_letters(blocks, x),
        &block_letters(blocks, y),
        x,
        y,
    )
}

/// Strong Luks reduction: enumerate the quotient with pruning, solving in the
/// kernel for each candidate.
fn strong_enum(ctx: &Ctx, a: &GroupAction, blocks: &[Vec<usize>], x: &[u32], y: &[u32]) -> Result<IsoCoset> {
    let g = a.source();
    let n = g.degree();
    let full: Vec<usize> = (0..n).collect();
    let ker = a.kernel();
    let q = a.image();
    let bx = block_letters(blocks, x);
    let by = block_letters(blocks, y);
    let err: RefCell<Option<Error>> = RefCell::new(None);
    let mut rep = None;
    search_element(
        q,
        &[],
        |base, imgs| {
            let l = imgs.len() - 1;
            bx[base[l]] == by[imgs[l]]
        },
        |qe| {
            if err.borrow().is_some() {
                return false;
            }
            ctx.bump(|s| s.strong_leaves += 1);
            let l = a.lift(qe).expect("element of the quotient");
            match ctx.solve(ker, &full, x, &pull(y, &l)) {
                Ok(c) => match c.rep() {
                    Some(r) => {
                        rep = Some(r.mul(&l));
                        true
                    }
                    None => false,
                },
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    false
                }
            }
        },
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let Some(rep) = rep else {
        return Ok(IsoCoset::empty(n));
    };
    let an = ctx.solve(ker, &full, x, x)?;
    let (an, _) = an.parts().expect("automorphisms form a group");
    let err: RefCell<Option<Error>> = RefCell::new(None);
    let mut lifted: HashMap<Perm, Perm> = HashMap::new();
    let top = search_subgroup(
        q,
        &[],
        |base, imgs| {
            let l = imgs.len() - 1;
            bx[base[l]] == bx[imgs[l]]
        },
        |qe| {
            if err.borrow().is_some() {
                return false;
            }
            ctx.bump(|s| s.strong_leaves += 1);
            let l = a.lift(qe).expect("element of the quotient");
            match ctx.solve(ker, &full, x, &pull(x, &l)) {
                Ok(c) => match c.rep() {
                    Some(r) => {
                        lifted.insert(qe.clone(), r.mul(&l));
                        true
                    }
                    None => false,
                },
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    false
                }
            }
        },
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let mut gens = an.generators().to_vec();
    gens.extend(top.generators().iter().map(|t| lifted[t].clone()));
    let aut = PermGroup::with_order(n, gens, an.order() * top.order());
    Ok(IsoCoset::new(aut, rep))
}

/// Right coset representatives of `h` in `g`, by closure under the generators.
pub fn find_transversal(g: &PermGroup, h: &PermGroup, cap: usize) -> Result<Vec<Perm>> {
    let index = g.order() / h.order();
    let index = index
        .to_usize()
        .filter(|&i| i <= cap)
        .ok_or_else(|| Error::Resource(format!("index {} exceeds the branching cap {cap}", g.order() / h.order())))?;
    let mut reps = vec![Perm::identity(g.degree())];
    let mut head = 0;
    while head < reps.len() && reps.len() < index {
        let t = reps[head].clone();
        head += 1;
        for s in g.generators() {
            let c = t.mul(s);
            if !reps.iter().any(|r| h.contains(&c.mul(&r.inverse()))) {
                reps.push(c);
            }
        }
    }
    Ok(reps)
}

/// Weak Luks reduction to a subgroup `h`: the union over right cosets of `h`.
pub fn weak_luks(inst: &StringInstance, h: &PermGroup, cfg: &IsoConfig) -> Result<IsoCoset> {
    inst.validate()?;
    if !h.is_subgroup_of(&inst.group) {
        return Err(Error::Precondition("H is not a subgroup of G".into()));
    }
    let ctx = Ctx::new(cfg.clone());
    let y = pull(&inst.y, &inst.shift);
    let mut parts = Vec::new();
    for t in find_transversal(&inst.group, h, cfg.branch_cap)? {
        ctx.bump(|s| s.weak_branches += 1);
        parts.push(ctx.solve(h, &inst.window, &inst.x, &pull(&y, &t))?.shifted(&t));
    }
    Ok(fold(inst.degree(), &parts).shifted(&inst.shift))
}

/// Chain Rule on two invariant windows.
pub fn chain_rule(inst: &StringInstance, d1: &[usize], d2: &[usize], cfg: &IsoConfig) -> Result<IsoCoset> {
    for d in [d1, d2] {
        inst.clone().with_window(d.to_vec()).validate()?;
    }
    let ctx = Ctx::new(cfg.clone());
    let y = pull(&inst.y, &inst.shift);
    let c = chain_over(&ctx, &inst.group, &[d1.to_vec(), d2.to_vec()], &inst.x, &y)?;
    Ok(c.shifted(&inst.shift))
}

/// Strong Luks reduction along an invariant partition of the window.
pub fn strong_luks(inst: &StringInstance, blocks: &[Vec<usize>], cfg: &IsoConfig) -> Result<IsoCoset> {
    inst.validate()?;
    let g = &inst.group;
    let n = g.degree();
    let mut cover: Vec<usize> = blocks.iter().flatten().copied().collect();
    cover.sort_unstable();
    if cover != inst.window {
        return Err(Error::Precondition("blocks do not partition the window".into()));
    }
    let ctx = Ctx::new(cfg.clone());
    let y = pull(&inst.y, &inst.shift);
    let delta = &inst.window;
    let (a, local, inner) = if delta.len() == n {
        (GroupAction::on_blocks(g, blocks), blocks.to_vec(), None)
    } else {
        let r = GroupAction::restriction(g, delta);
        let index: HashMap<usize, usize> = delta.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let local: Vec<Vec<usize>> = blocks.iter().map(|b| b.iter().map(|p| index[p]).collect()).collect();
        (GroupAction::on_blocks(r.image(), &local), local, Some(r))
    };
    if !is_block_system(a.source(), &local) {
        return Err(Error::Precondition("partition is not invariant".into()));
    }
    let c = match &inner {
        None => strong_enum(&ctx, &a, &local, &inst.x, &y)?,
        Some(r) => {
            let xb: Vec<u32> = delta.iter().map(|&u| inst.x[u]).collect();
            let yb: Vec<u32> = delta.iter().map(|&u| y[u]).collect();
            pull_back(r, &strong_enum(&ctx, &a, &local, &xb, &yb)?)
        }
    };
    Ok(c.shifted(&inst.shift))
}

/// Exhaustive `iso`, for groups up to the configured cutoff.
pub fn brute_force_iso(inst: &StringInstance, cfg: &IsoConfig) -> Result<IsoCoset> {
    inst.validate()?;
    if !is_small(&Ctx::new(cfg.clone()), &inst.group) {
        return Err(Error::Resource(format!(
            "group order {} exceeds the enumeration cutoff {}",
            inst.group.order(),
            cfg.brute_cutoff
        )));
    }
    let ctx = Ctx::new(cfg.clone());
    let y = pull(&inst.y, &inst.shift);
    Ok(brute(&ctx, &inst.group, &inst.window, &inst.x, &y)?.shifted(&inst.shift))
}
