use rayon::prelude::*;

use super::{symmetry_defect, Choice, DefectMode, DesignOptions, Outcome, Payload};
use crate::coherent::{classify, refine_kdim, Classification, CoherentConfig, Config, Structure};
use crate::error::{Error, Result};
use crate::partitions::{at_most, ColoredPartition, Alpha};

/// Ordered sequences of `s` distinct points of `0..n`, lexicographically.
fn sequences(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..s {
        let mut next = Vec::new();
        for q in &out {
            for x in (0..n).filter(|x| !q.contains(x)) {
                let mut r = q.clone();
                r.push(x);
                next.push(r);
            }
        }
        out = next;
    }
    out
}

/// Lines 02-11 for one individualized sequence.
fn attempt(init: &Config, seq: &[usize], alpha: Alpha, opts: &DesignOptions) -> Result<Option<Outcome>> {
    let n = init.n();
    let cfg = refine_kdim(&init.individualize(seq), &opts.wl)?;
    let colors: Vec<u32> = (0..n).map(|x| cfg.vertex_color(x)).collect();
    let choices: Vec<Choice> = seq.iter().map(|&v| Choice::Vertex(v)).collect();
    let classes = cfg.vertex_classes();
    let Some(big) = classes.iter().find(|c| !at_most(c.len(), alpha, n)) else {
        return Ok(Some(Outcome::split(ColoredPartition::from_coloring(&colors), alpha, choices)));
    };
    let star = CoherentConfig::trusted(cfg.skeleton(2)?.induced(big));
    debug_assert!(star.verify().is_ok());
    match classify(&star) {
        Classification::Clique => Ok(None),
        Classification::HomogeneousImprimitive { blocks, .. } => {
            let mut parts: Vec<Vec<usize>> = classes.iter().filter(|c| *c != big).cloned().collect();
            parts.extend(blocks.iter().map(|b| b.iter().map(|&i| big[i]).collect::<Vec<_>>()));
            let p = ColoredPartition::new(&colors, parts)?;
            Ok(Some(Outcome::split(p, alpha, choices)))
        }
        Classification::Upcc => Ok(Some(Outcome {
            payload: Payload::Upcc {
                w: big.clone(),
                cc: star,
            },
            alpha,
            choices,
        })),
        Classification::NonHomogeneous => Err(Error::Invariant("induced configuration on a color class is not homogeneous".into())),
    }
}

/// Split-or-UPCC on a `k`-ary structure (`k` = its arity). Returns the
/// outcome of every successful sequence of the least successful length, in
/// lexicographic order of the sequence.
pub fn split_or_upcc(s: &Structure, alpha: Alpha, opts: &DesignOptions) -> Result<Vec<Outcome>> {
    let n = s.n;
    let k = s.arity;
    if alpha < Alpha::new(1, 2) || alpha >= Alpha::from_integer(1) {
        return Err(Error::Precondition(format!("alpha = {alpha} outside [1/2, 1)")));
    }
    // The guarantee needs k <= n/2; smaller domains still run, and a miss
    // surfaces as the invariant error below.
    if k < 2 || k > n {
        return Err(Error::Precondition(format!("need 2 <= k <= n, got k = {k}, n = {n}")));
    }
    let d = symmetry_defect(s, DefectMode::Strong)?;
    if !at_most(d.witness.len(), alpha, n) {
        return Err(Error::Precondition(format!(
            "relative strong symmetry defect {} is below 1 - {alpha}",
            d.relative
        )));
    }
    let init = s.initial_config()?;
    let mut steps = 0u64;
    for size in 0..k {
        let seqs = sequences(n, size);
        steps += seqs.len() as u64;
        if steps > opts.max_steps {
            return Err(Error::Budget(opts.max_steps));
        }
        let found: Vec<Option<Outcome>> = seqs.par_iter().map(|q| attempt(&init, q, alpha, opts)).collect::<Result<_>>()?;
        let found: Vec<Outcome> = found.into_iter().flatten().collect();
        if !found.is_empty() {
            for o in &found {
                o.validate(n)?;
            }
            return Ok(found);
        }
    }
    Err(Error::Invariant(format!("no sequence of at most {} vertices splits or yields a UPCC", k - 1)))
}

/// The relaxation to `alpha' >= alpha`: a largest strongly symmetrical set
/// `U` with `alpha n < |U| <= alpha' n` gives the coloring `(U, rest)`; UPCC
/// outcomes smaller than `alpha' n` become the coloring `(W, rest)`.
pub fn split_or_upcc_relaxed(s: &Structure, alpha: Alpha, alpha2: Alpha, opts: &DesignOptions) -> Result<Vec<Outcome>> {
    let n = s.n;
    if alpha2 < alpha || alpha2 >= Alpha::from_integer(1) {
        return Err(Error::Precondition(format!("need {alpha} <= alpha' < 1, got {alpha2}")));
    }
    let u = symmetry_defect(s, DefectMode::Strong)?.witness;
    if !at_most(u.len(), alpha2, n) {
        return Err(Error::Precondition(format!("symmetrical set of size {} exceeds {alpha2} of {n}", u.len())));
    }
    let two_coloring = |w: &[usize]| {
        let colors: Vec<u32> = (0..n).map(|x| u32::from(w.contains(&x))).collect();
        ColoredPartition::from_coloring(&colors)
    };
    if !at_most(u.len(), alpha, n) {
        return Ok(vec![Outcome::split(two_coloring(&u), alpha2, Vec::new())]);
    }
    let mut out = split_or_upcc(s, alpha, opts)?;
    for o in &mut out {
        o.alpha = alpha2;
        if let Payload::Upcc { w, .. } = &o.payload {
            if !crate::partitions::at_least(w.len(), alpha2, n) {
                o.payload = Payload::Split(two_coloring(w));
            }
        }
        o.validate(n)?;
    }
    Ok(out)
}
