use std::time::Instant;

use serde::Serialize;

use super::aggregate::{aggregate_certificates, Aggregate, AggregateKind, GammaStructure};
use super::certs::CertOptions;
use super::top::colored;
use super::{align, standard_blocks, AlignResult, GiantRep, StandardBlocks};
use crate::coherent::Structure;
use crate::design::{symmetry_defect, DefectMode};
use crate::error::{Error, Result};
use crate::partitions::alpha;
use crate::permgroup::{Giant, GroupAction, PermGroup};
use crate::split_or_johnson::{Soj, SojOptions};
use crate::string_iso::reduce::dispatch_group;
use crate::string_iso::{
    chain_over, find_transversal, fold, giant_direct, iso_with, pull, pull_back, Ctx, IsoConfig, IsoCoset, QuotientClass,
    ReduceOptions, Stats, StringInstance,
};

#[derive(Clone, Debug)]
pub struct MasterOptions {
    pub iso: IsoConfig,
    pub reduce: ReduceOptions,
    /// Giant quotients on at most this many points are enumerated by Luks;
    /// default `ceil(log2 n)^3` capped at `ell_cap`.
    pub ell: Option<usize>,
    pub ell_cap: usize,
    /// Require the theorem regimes; outside them the instance is left to Luks.
    pub strict: bool,
    pub cert: CertOptions,
    /// Test set size for local certificates; default the least integer
    /// above `max{8, 2 + log2 n}`, or 3 when not strict.
    pub test_set: Option<usize>,
    pub soj: SojOptions,
}

impl Default for MasterOptions {
    fn default() -> MasterOptions {
        MasterOptions {
            iso: IsoConfig::default(),
            reduce: ReduceOptions::default(),
            ell: None,
            ell_cap: 12,
            strict: true,
            cert: CertOptions::default(),
            test_set: None,
            soj: SojOptions::default(),
        }
    }
}

impl MasterOptions {
    /// Every path taken regardless of size: no small quotients, `ell` as
    /// given, regimes not enforced. Results stay exact.
    pub fn exploratory(ell: usize) -> MasterOptions {
        let mut o = MasterOptions {
            ell: Some(ell),
            strict: false,
            ..MasterOptions::default()
        };
        o.reduce.small_quotients = false;
        o.cert.strict = false;
        o
    }

    fn ell_for(&self, n: usize) -> usize {
        self.ell.unwrap_or_else(|| {
            let lg = (usize::BITS - (n.max(2) - 1).leading_zeros()) as usize;
            (lg * lg * lg).min(self.ell_cap)
        })
    }

    fn test_set_for(&self, rep: &GiantRep) -> usize {
        self.test_set.unwrap_or_else(|| {
            if self.strict {
                8f64.max(2.0 + (rep.n() as f64).log2()).floor() as usize + 1
            } else {
                3.min(rep.m().saturating_sub(1))
            }
        })
    }
}

/// Counters from one run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct MasterReport {
    pub stats: Stats,
    pub counters: Vec<(String, u64)>,
    pub elapsed_ms: f64,
}

/// Keeps budget exhaustion fatal; any other failure of an optional route
/// is counted and the caller falls back to an exact reduction.
fn soft<T>(ctx: &Ctx, name: &str, r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ Error::Budget(_)) => Err(e),
        Err(_) => {
            ctx.count(name);
            Ok(None)
        }
    }
}

/// A hook for [`Ctx::with_hook`] running the master algorithm on every
/// transitive subproblem.
pub fn master_hook(opts: MasterOptions) -> impl Fn(&Ctx, &PermGroup, &[u32], &[u32]) -> Result<Option<IsoCoset>> + 'static {
    move |ctx, g, x, y| hook(ctx, g, x, y, &opts)
}

/// `iso(inst)` by the master algorithm, with its report.
pub fn master(inst: &StringInstance, opts: &MasterOptions) -> Result<(IsoCoset, MasterReport)> {
    let start = Instant::now();
    let ctx = Ctx::with_hook(opts.iso.clone(), master_hook(opts.clone()));
    let c = iso_with(&ctx, inst)?;
    let report = MasterReport {
        stats: ctx.stats(),
        counters: ctx.counters(),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((c, report))
}

fn hook(ctx: &Ctx, g: &PermGroup, x: &[u32], y: &[u32], opts: &MasterOptions) -> Result<Option<IsoCoset>> {
    ctx.count("master");
    let Some(d) = soft(ctx, "reduce-failed", dispatch_group(g, &opts.reduce))? else {
        return Ok(None);
    };
    ctx.count(d.class.name());
    let n = g.degree();
    let weak = |ctx: &Ctx, h: &PermGroup, part: &dyn Fn(&Ctx, &[u32]) -> Result<IsoCoset>| -> Result<Option<IsoCoset>> {
        let Some(reps) = soft(ctx, "transversal-capped", find_transversal(g, h, opts.iso.branch_cap))? else {
            return Ok(None);
        };
        let mut parts = Vec::with_capacity(reps.len());
        for t in &reps {
            parts.push(part(ctx, &pull(y, t))?.shifted(t));
        }
        Ok(Some(fold(n, &parts)))
    };
    let full: Vec<usize> = (0..n).collect();
    match d.class {
        QuotientClass::Small => Ok(None),
        QuotientClass::GiantQuotient { .. } => process_johnson_action(ctx, d.quotient, x, y, opts),
        QuotientClass::JohnsonQuotient {
            giant, subgroup, phi, j, ..
        } => {
            if giant == Giant::No {
                ctx.count("johnson-not-giant");
                return Ok(None);
            }
            let mut window: Vec<usize> = j.iter().flat_map(|&b| d.blocks[b].iter().copied()).collect();
            window.sort_unstable();
            weak(ctx, &subgroup, &|ctx: &Ctx, yt: &[u32]| johnson_window(ctx, &subgroup, &phi, &window, x, yt, opts))
        }
        QuotientClass::Split { subgroup, .. } | QuotientClass::Individualize { subgroup, .. } => {
            weak(ctx, &subgroup, &|ctx: &Ctx, yt: &[u32]| ctx.solve(&subgroup, &full, x, yt))
        }
    }
}

/// Chain Rule with the window carrying the Johnson quotient first, that
/// window handled through `phi`.
fn johnson_window(
    ctx: &Ctx,
    h: &PermGroup,
    phi: &GroupAction,
    window: &[usize],
    x: &[u32],
    y: &[u32],
    opts: &MasterOptions,
) -> Result<IsoCoset> {
    let n = h.degree();
    let res = GroupAction::restriction(h, window);
    let psi = GroupAction::from_images(res.image(), phi.target_degree(), phi.gen_images().to_vec());
    let xw: Vec<u32> = window.iter().map(|&u| x[u]).collect();
    let yw: Vec<u32> = window.iter().map(|&u| y[u]).collect();
    let first = match process_johnson_action(ctx, psi, &xw, &yw, opts)? {
        Some(c) => pull_back(&res, &c),
        None => ctx.solve(h, window, x, y)?,
    };
    let Some((h1, r1)) = first.parts() else {
        return Ok(IsoCoset::empty(n));
    };
    let rest: Vec<usize> = (0..n).filter(|p| window.binary_search(p).is_err()).collect();
    let second = ctx.solve(h1, &rest, x, &pull(y, r1))?;
    Ok(match second.parts() {
        None => IsoCoset::empty(n),
        Some((h2, r2)) => IsoCoset::new(h2.clone(), r2.mul(r1)),
    })
}

/// The master algorithm for `G = phi.source()` with a giant image of
/// `phi`; `None` leaves the instance to Luks.
pub fn process_johnson_action(
    ctx: &Ctx,
    phi: GroupAction,
    x: &[u32],
    y: &[u32],
    opts: &MasterOptions,
) -> Result<Option<IsoCoset>> {
    let n = phi.source().degree();
    let m = phi.target_degree();
    if m <= opts.ell_for(n) {
        ctx.count("quotient-enumerated");
        return Ok(None);
    }
    let Some(rep) = soft(ctx, "not-giant", GiantRep::new(phi))? else {
        return Ok(None);
    };
    if opts.strict && !rep.structure_regime() {
        ctx.count("below-regime");
        return Ok(None);
    }
    let Some(sb) = soft(ctx, "standard-blocks-failed", standard_blocks(&rep, opts.strict))? else {
        return Ok(None);
    };
    if sb.is_primitive_shape() {
        if sb.orbits[0].t <= 1 {
            let kind = rep.group().is_giant();
            if kind == Giant::No {
                return Ok(None);
            }
            ctx.count("letter-multiset");
            return Ok(Some(giant_direct(ctx, n, kind, x, y)));
        }
        return primitive_johnson(ctx, &rep, &sb, x, y, opts);
    }
    imprimitive(ctx, &rep, &sb, x, y, opts)
}

/// The `t`-uniform hypergraphs on `Gamma` colored by the letters on the
/// singleton standard blocks; all orderings of each edge are listed.
fn hypergraphs(sb: &StandardBlocks, x: &[u32], y: &[u32]) -> Result<(Structure, Structure)> {
    let m = sb.m;
    let t = sb.orbits[0].t;
    let mut letters: Vec<u32> = x.iter().chain(y).copied().collect();
    letters.sort_unstable();
    letters.dedup();
    let perms = crate::coherent::all_perms(t);
    let build = |s: &[u32]| {
        let mut rels = vec![Vec::new(); letters.len()];
        for (tset, b) in &sb.orbits[0].blocks {
            let li = letters.binary_search(&s[b[0]]).expect("letter");
            for p in &perms {
                rels[li].push(p.iter().map(|&i| tset[i]).collect());
            }
        }
        Structure::new(m, t, rels)
    };
    Ok((build(x)?, build(y)?))
}

fn primitive_johnson(
    ctx: &Ctx,
    rep: &GiantRep,
    sb: &StandardBlocks,
    x: &[u32],
    y: &[u32],
    opts: &MasterOptions,
) -> Result<Option<IsoCoset>> {
    let m = rep.m();
    let (hx, hy) = hypergraphs(sb, x, y)?;
    let Some(dx) = soft(ctx, "defect-failed", symmetry_defect(&hx, DefectMode::Strong))? else {
        return Ok(None);
    };
    let Some(dy) = soft(ctx, "defect-failed", symmetry_defect(&hy, DefectMode::Strong))? else {
        return Ok(None);
    };
    if 2 * dx.witness.len() > m || 2 * dy.witness.len() > m {
        if dx.witness.len() != dy.witness.len() {
            return Ok(Some(IsoCoset::empty(rep.n())));
        }
        return colored(ctx, rep, sb, &dx.witness, &dy.witness, x, y).map(Some);
    }
    ctx.count("design-lemma");
    designed(ctx, rep, sb, &hx, &[hy], x, y, opts)
}

/// Extended Design Lemma on the relational structures, then Align.
#[allow(clippy::too_many_arguments)]
fn designed(
    ctx: &Ctx,
    rep: &GiantRep,
    sb: &StandardBlocks,
    sx: &Structure,
    sys: &[Structure],
    x: &[u32],
    y: &[u32],
    opts: &MasterOptions,
) -> Result<Option<IsoCoset>> {
    let soj = Soj::new(opts.soj.clone());
    let Some(ox) = soft(ctx, "design-failed", soj.extended(sx, alpha(3, 4)))? else {
        return Ok(None);
    };
    let Some(first) = ox.iter().find_map(GammaStructure::from_outcome) else {
        return Ok(None);
    };
    let mut ys = Vec::new();
    for s in sys {
        let Some(oy) = soft(ctx, "design-failed", soj.extended(s, alpha(3, 4)))? else {
            return Ok(None);
        };
        ys.extend(oy.iter().filter_map(GammaStructure::from_outcome));
    }
    align_all(ctx, rep, sb, &first, &ys, x, y)
}

fn align_all(
    ctx: &Ctx,
    rep: &GiantRep,
    sb: &StandardBlocks,
    sx: &GammaStructure,
    ys: &[GammaStructure],
    x: &[u32],
    y: &[u32],
) -> Result<Option<IsoCoset>> {
    let n = rep.n();
    let order = rep.group().order();
    let mut parts = Vec::new();
    for sy in ys {
        let Some(r) = soft(ctx, "align-failed", align(rep, sb, sx, sy, y))? else {
            return Ok(None);
        };
        let AlignResult::Aligned(al) = r else {
            continue;
        };
        if al.g1.order() >= order {
            ctx.count("align-no-progress");
            return Ok(None);
        }
        ctx.count("aligned");
        parts.push(chain_over(ctx, &al.g1, &al.windows, x, &al.y_shifted)?.shifted(&al.sigma));
    }
    Ok(Some(fold(n, &parts)))
}

fn imprimitive(
    ctx: &Ctx,
    rep: &GiantRep,
    sb: &StandardBlocks,
    x: &[u32],
    y: &[u32],
    opts: &MasterOptions,
) -> Result<Option<IsoCoset>> {
    let k = opts.test_set_for(rep);
    let mut cert = opts.cert.clone();
    cert.strict = opts.strict;
    let Some(agg) = soft(ctx, "aggregate-failed", aggregate_certificates(rep, x, y, k, ctx, &cert))? else {
        return Ok(None);
    };
    let (kind, sx, sy) = match agg {
        Aggregate::Reject => {
            ctx.count("aggregate-reject");
            return Ok(Some(IsoCoset::empty(rep.n())));
        }
        Aggregate::Found { kind, x: sx, y: sy, .. } => (kind, sx, sy),
    };
    let Some(first) = sx.first() else {
        return Ok(None);
    };
    match kind {
        AggregateKind::Partition => align_all(ctx, rep, sb, first, &sy, x, y),
        AggregateKind::Reduced => {
            let class0 = |s: &GammaStructure| match s {
                GammaStructure::Coloring(p) => p.color_classes()[0].clone(),
                _ => unreachable!("reduced outcomes are colorings"),
            };
            colored(ctx, rep, sb, &class0(first), &class0(&sy[0]), x, y).map(Some)
        }
        AggregateKind::Kary => {
            let rel = |s: &GammaStructure| match s {
                GammaStructure::Relational(r) => r.clone(),
                _ => unreachable!("k-ary outcomes are relational"),
            };
            let ys: Vec<Structure> = sy.iter().map(rel).collect();
            designed(ctx, rep, sb, &rel(first), &ys, x, y, opts)
        }
    }
}
