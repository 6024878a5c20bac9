use super::{align, standard_blocks, AlignResult, GammaStructure, GiantRep, StandardBlocks};
use crate::error::Result;
use crate::partitions::ColoredPartition;
use crate::perm::Perm;
use crate::permgroup::{Giant, GroupAction, PermGroup};
use crate::string_iso::{fold, pull, pull_back, Ctx, IsoCoset};

#[derive(Clone, Debug)]
pub enum TopMode {
    /// Is `iso_G(x, y)^phi` a giant coset?
    Coset,
    /// Is `Aut_G(x)^phi` a giant? If so, the isomorphisms.
    Aut,
    /// Color classes `cx`, `cy` of size above `m/2` on which the top action
    /// is processed first.
    Colored { cx: Vec<usize>, cy: Vec<usize> },
}

#[derive(Clone, Debug)]
pub enum TopAnswer {
    Yes(IsoCoset),
    No,
}

/// `(0 1 2)` and an `(m-1)`- or `m`-cycle of odd length: generators of `Alt(m)`.
fn alternating_generators(m: usize) -> Vec<Perm> {
    if m < 3 {
        return Vec::new();
    }
    let c3 = Perm::from_cycles(m, &[vec![0, 1, 2]]).expect("3-cycle");
    let long: Vec<usize> = if m % 2 == 1 { (0..m).collect() } else { (1..m).collect() };
    vec![c3, Perm::from_cycles(m, &[long]).expect("cycle")]
}

/// Lifts `targets` and the identity through `phi`, one kernel instance each;
/// `None` when some element of the generated group does not lift to an isomorphism.
fn lifted(ctx: &Ctx, phi: &GroupAction, targets: &[Perm], x: &[u32], y: &[u32]) -> Result<Option<IsoCoset>> {
    let n = phi.source().degree();
    let kernel = phi.kernel();
    let full: Vec<usize> = (0..n).collect();
    let mut parts = Vec::with_capacity(targets.len() + 1);
    let id = Perm::identity(phi.target_degree());
    for s in std::iter::once(&id).chain(targets) {
        let sigma = phi.lift(s).expect("target inside the image");
        let c = ctx.solve(kernel, &full, x, &pull(y, &sigma))?.shifted(&sigma);
        if c.is_empty() {
            return Ok(None);
        }
        parts.push(c);
    }
    Ok(Some(fold(n, &parts)))
}

/// Decides whether `iso_G(x, y)^phi` contains a coset of `Alt(Gamma)`.
fn giant_coset(ctx: &Ctx, rep: &GiantRep, x: &[u32], y: &[u32]) -> Result<TopAnswer> {
    let m = rep.m();
    let gens = alternating_generators(m);
    if rep.kind() == Giant::Alt {
        return Ok(lifted(ctx, rep.phi(), &gens, x, y)?.map_or(TopAnswer::No, TopAnswer::Yes));
    }
    let even = rep.preimage(&PermGroup::alternating(m));
    let imgs = even.generators().iter().map(|g| rep.image_of(g)).collect();
    let phi1 = GroupAction::from_images(&even, m, imgs);
    let tau = rep.phi().lift(&Perm::transposition(m, 0, 1)).expect("odd element of a symmetric image");
    let mut parts = Vec::new();
    if let Some(c) = lifted(ctx, &phi1, &gens, x, y)? {
        parts.push(c);
    }
    if let Some(c) = lifted(ctx, &phi1, &gens, x, &pull(y, &tau))? {
        parts.push(c.shifted(&tau));
    }
    if parts.is_empty() {
        return Ok(TopAnswer::No);
    }
    Ok(TopAnswer::Yes(fold(rep.n(), &parts)))
}

/// The top action: lifting generators of the giant reduces the question to
/// instances under `ker phi`.
pub fn top_action(rep: &GiantRep, x: &[u32], y: &[u32], mode: &TopMode, ctx: &Ctx) -> Result<TopAnswer> {
    match mode {
        TopMode::Coset => giant_coset(ctx, rep, x, y),
        TopMode::Aut => match giant_coset(ctx, rep, x, x)? {
            TopAnswer::No => Ok(TopAnswer::No),
            TopAnswer::Yes(_) => match giant_coset(ctx, rep, x, y)? {
                TopAnswer::Yes(c) => Ok(TopAnswer::Yes(c)),
                TopAnswer::No => Ok(TopAnswer::Yes(IsoCoset::empty(rep.n()))),
            },
        },
        TopMode::Colored { cx, cy } => {
            let sb = standard_blocks(rep, false)?;
            Ok(TopAnswer::Yes(colored(ctx, rep, &sb, cx, cy, x, y)?))
        }
    }
}

fn two_colors(m: usize, c: &[usize]) -> GammaStructure {
    let colors: Vec<u32> = (0..m).map(|p| u32::from(!c.contains(&p))).collect();
    GammaStructure::Coloring(ColoredPartition::from_coloring(&colors))
}

/// The colored top action: align on `(C, rest)`, then the window `Omega(C)`
/// under the restricted giant representation onto `Sym(C)`, then the rest.
pub(crate) fn colored(
    ctx: &Ctx,
    rep: &GiantRep,
    sb: &StandardBlocks,
    cx: &[usize],
    cy: &[usize],
    x: &[u32],
    y: &[u32],
) -> Result<IsoCoset> {
    let n = rep.n();
    let m = rep.m();
    ctx.count("top-colored");
    let al = match align(rep, sb, &two_colors(m, cx), &two_colors(m, cy), y)? {
        AlignResult::Reject => return Ok(IsoCoset::empty(n)),
        AlignResult::Aligned(al) => al,
    };
    let window = sb.omega_of(cx);
    let rest: Vec<usize> = (0..n).filter(|p| window.binary_search(p).is_err()).collect();
    let g1 = &al.g1;
    let first = window_top(ctx, rep, g1, &window, cx, x, &al.y_shifted)?;
    let Some((h, r)) = first.parts() else {
        return Ok(IsoCoset::empty(n));
    };
    let yr = pull(&al.y_shifted, r);
    let second = ctx.solve(h, &rest, x, &yr)?;
    let Some((h2, r2)) = second.parts() else {
        return Ok(IsoCoset::empty(n));
    };
    Ok(IsoCoset::new(h2.clone(), r2.mul(r)).shifted(&al.sigma))
}

/// `iso_{G1}^{Omega(C)}(x, y)` by the top action of the restriction to the
/// window onto `Sym(C)`, or by plain recursion when it does not apply.
fn window_top(
    ctx: &Ctx,
    rep: &GiantRep,
    g1: &PermGroup,
    window: &[usize],
    c: &[usize],
    x: &[u32],
    y: &[u32],
) -> Result<IsoCoset> {
    let res = GroupAction::restriction(g1, window);
    let mut src = Vec::new();
    let mut imgs = Vec::new();
    let mut defined = true;
    for g in g1.generators() {
        let (r, i) = (res.image_of(g), super::restrict_to(&rep.image_of(g), c));
        if r.is_identity() {
            defined &= i.is_identity();
        } else {
            src.push(r);
            imgs.push(i);
        }
    }
    let src = PermGroup::with_order(window.len(), src, res.image().order());
    let psi = GroupAction::from_images(&src, c.len(), imgs);
    if defined && c.len() >= 3 && window.len() > 1 && psi.verify() {
        if let Ok(sub) = GiantRep::new(psi) {
            let xw: Vec<u32> = window.iter().map(|&u| x[u]).collect();
            let yw: Vec<u32> = window.iter().map(|&u| y[u]).collect();
            if let TopAnswer::Yes(cw) = top_action(&sub, &xw, &yw, &TopMode::Aut, ctx)? {
                ctx.count("top-aut-giant");
                return Ok(pull_back(&res, &cw));
            }
        }
    }
    ctx.count("top-aut-undecided");
    ctx.solve(g1, window, x, y)
}
