use std::collections::HashMap;

use rayon::prelude::*;

use super::{rank_keys, CoherentConfig, Config, Structure};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct WlOptions {
    /// Upper bound on the estimated working memory of k-dimensional refinement, in bytes.
    pub memory_budget: usize,
}

impl Default for WlOptions {
    fn default() -> WlOptions {
        WlOptions {
            memory_budget: 2 << 30,
        }
    }
}

/// Classical (2-dimensional) WL refinement to the coarsest stable coloring.
///
/// Cheap rounds refine vertex colors by the colored neighborhoods and push
/// them onto pairs; full rounds use all triangles `(x, z, y)`. Both are
/// implied by stability, so the fixpoint is the usual one. Colors are ranked
/// by sorted signatures each round.
pub fn wl_refine(c: &Config) -> Result<CoherentConfig> {
    if c.arity() != 2 {
        return Err(Error::Precondition(format!("wl_refine needs a binary configuration, got arity {}", c.arity())));
    }
    c.validate()?;
    let n = c.n();
    let mut col = c.colors().to_vec();
    let mut rank = c.rank();
    loop {
        loop {
            let before = rank;
            (col, rank) = vertex_round(n, &col);
            if rank == before {
                break;
            }
        }
        if rank == n * n {
            break;
        }
        let before = rank;
        (col, rank) = full_round(n, &col);
        if rank == before {
            break;
        }
    }
    Ok(CoherentConfig::trusted(Config::from_ranked(n, 2, col, rank)))
}

fn vertex_round(n: usize, col: &[u32]) -> (Vec<u32>, usize) {
    let vc: Vec<u32> = (0..n).map(|x| col[x * n + x]).collect();
    let sigs: Vec<(u32, Vec<(u32, u32, u32)>)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut s: Vec<(u32, u32, u32)> = (0..n).map(|u| (col[x * n + u], col[u * n + x], vc[u])).collect();
            s.sort_unstable();
            (vc[x], s)
        })
        .collect();
    let (nv, _) = rank_keys(&sigs);
    let keys: Vec<(u32, u32, u32)> = (0..n * n).map(|i| (col[i], nv[i / n], nv[i % n])).collect();
    rank_keys(&keys)
}

fn full_round(n: usize, col: &[u32]) -> (Vec<u32>, usize) {
    let sigs: Vec<(u32, Vec<(u64, u32)>)> = (0..n * n)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i / n, i % n);
            let mut s: Vec<u64> = (0..n)
                .map(|z| ((col[x * n + z] as u64) << 32) | col[z * n + y] as u64)
                .collect();
            s.sort_unstable();
            let mut runs: Vec<(u64, u32)> = Vec::new();
            for v in s {
                match runs.last_mut() {
                    Some((w, c)) if *w == v => *c += 1,
                    _ => runs.push((v, 1)),
                }
            }
            (col[i], runs)
        })
        .collect();
    rank_keys(&sigs)
}

/// k-dimensional WL on a structure of arity at most `k`.
pub fn wl_refine_kdim(s: &Structure, k: usize, opts: &WlOptions) -> Result<Config> {
    if k < 2 {
        return Err(Error::Precondition("dimension must be at least 2".into()));
    }
    if k > s.n.max(1) || s.arity > k {
        return Err(Error::Precondition(format!(
            "dimension {k} needs arity <= {k} <= n, got arity {} and n {}",
            s.arity, s.n
        )));
    }
    budget(s.n, k, opts)?;
    let padded = Structure::new(s.n, k, s.relations.clone())?;
    refine_kdim(&padded.initial_config()?, opts)
}

fn budget(n: usize, k: usize, opts: &WlOptions) -> Result<()> {
    let tuples = (n as u128).saturating_pow(k as u32);
    let need = tuples.saturating_mul(16 + 4 * (k as u128) * (n as u128));
    if need > opts.memory_budget as u128 {
        return Err(Error::Resource(format!(
            "{k}-dimensional refinement on {n} points needs about {need} bytes, budget {}",
            opts.memory_budget
        )));
    }
    Ok(())
}

/// Refines a k-ary configuration to stability; `k = 2` is [`wl_refine`].
pub fn refine_kdim(c: &Config, opts: &WlOptions) -> Result<Config> {
    if c.arity() == 2 {
        return Ok(wl_refine(c)?.config().clone());
    }
    budget(c.n(), c.arity(), opts)?;
    c.validate()?;
    let n = c.n();
    let k = c.arity();
    let mut col = c.colors().to_vec();
    let mut rank = c.rank();
    let pw: Vec<usize> = (0..k).map(|j| n.pow((k - 1 - j) as u32)).collect();
    loop {
        let sigs: Vec<(u32, Vec<u32>)> = (0..col.len())
            .into_par_iter()
            .map(|i| {
                let t = digits(i, n, k);
                let mut rows: Vec<Vec<u32>> = (0..n)
                    .map(|y| {
                        (0..k)
                            .map(|j| col[(i as isize + (y as isize - t[j] as isize) * pw[j] as isize) as usize])
                            .collect()
                    })
                    .collect();
                rows.sort_unstable();
                (col[i], rows.concat())
            })
            .collect();
        let (next, r) = rank_keys(&sigs);
        if r == rank {
            col = next;
            break;
        }
        col = next;
        rank = r;
    }
    Ok(Config::from_ranked(n, k, col, rank))
}

fn digits(mut i: usize, n: usize, k: usize) -> Vec<usize> {
    let mut t = vec![0; k];
    for slot in t.iter_mut().rev() {
        *slot = i % n;
        i /= n;
    }
    t
}

/// Axioms (i)-(iii) and stability: for tuples of one color, the number of `y`
/// realizing each color vector `(c(x_1^y), .., c(x_k^y))` is the same.
pub fn check_k_coherent(c: &Config) -> Result<()> {
    c.validate()?;
    let n = c.n();
    let k = c.arity();
    let mut profile: Vec<Option<HashMap<Vec<u32>, u32>>> = vec![None; c.rank()];
    for i in 0..c.colors().len() {
        let t = c.tuple(i);
        let mut counts: HashMap<Vec<u32>, u32> = HashMap::new();
        for y in 0..n {
            let v: Vec<u32> = (0..k)
                .map(|j| {
                    let mut u = t.clone();
                    u[j] = y;
                    c.color(&u)
                })
                .collect();
            *counts.entry(v).or_default() += 1;
        }
        let ci = c.colors()[i] as usize;
        match &profile[ci] {
            None => profile[ci] = Some(counts),
            Some(p) if *p != counts => {
                return Err(Error::Axiom {
                    axiom: "iv",
                    detail: format!("tuples of color {ci} see different substitution counts"),
                })
            }
            _ => {}
        }
    }
    Ok(())
}
