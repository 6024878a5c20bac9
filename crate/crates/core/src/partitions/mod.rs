//! Colored partitions, tuple colorings and Johnson schemes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Ratio;

use crate::coherent::{rank_keys, CoherentConfig, Config};
use crate::error::{Error, Result};
use crate::perm::Perm;


/// Thresholds are exact rationals.
pub type Alpha = Ratio<u64>;

pub fn alpha(num: u64, den: u64) -> Alpha {
    Ratio::new(num, den)
}

/// `a <= alpha * n`, exactly.
pub fn at_most(a: usize, alpha: Alpha, n: usize) -> bool {
    (a as u128) * (*alpha.denom() as u128) <= (*alpha.numer() as u128) * (n as u128)
}

/// `a >= alpha * n`, exactly.
pub fn at_least(a: usize, alpha: Alpha, n: usize) -> bool {
    (a as u128) * (*alpha.denom() as u128) >= (*alpha.numer() as u128) * (n as u128)
}

/// A vertex coloring with a partition of each color class. Kept normalized:
/// colors ranked by value, every block sorted, blocks sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColoredPartition {
    colors: Vec<u32>,
    blocks: Vec<Vec<usize>>,
}

impl ColoredPartition {
    /// `blocks` must partition `0..n` and each block must be monochromatic.
    pub fn new(colors: &[u32], blocks: Vec<Vec<usize>>) -> Result<ColoredPartition> {
        let n = colors.len();
        let mut seen = vec![false; n];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::Precondition("empty block".into()));
            }
            for &x in b {
                if x >= n || seen[x] {
                    return Err(Error::Precondition(format!("vertex {} repeated or out of range", x + 1)));
                }
                seen[x] = true;
                if colors[x] != colors[b[0]] {
                    return Err(Error::Precondition(format!("block containing {} has two colors", x + 1)));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Precondition("blocks do not cover every vertex".into()));
        }
        let (colors, _) = rank_keys(colors);
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort();
        Ok(ColoredPartition { colors, blocks })
    }

    /// Each color class is a single block.
    pub fn from_coloring(colors: &[u32]) -> ColoredPartition {
        let mut by: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (x, &c) in colors.iter().enumerate() {
            by.entry(c).or_default().push(x);
        }
        ColoredPartition::new(colors, by.into_values().collect()).expect("classes partition the set")
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn color_classes(&self) -> Vec<Vec<usize>> {
        let mut by: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (x, &c) in self.colors.iter().enumerate() {
            by.entry(c).or_default().push(x);
        }
        by.into_values().collect()
    }

    /// Blocks of color `c`.
    pub fn blocks_of(&self, c: u32) -> Vec<&Vec<usize>> {
        self.blocks.iter().filter(|b| self.colors[b[0]] == c).collect()
    }

    /// `rho`, the largest block size.
    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Color classes of size at least 2 have no singleton blocks.
    pub fn is_admissible(&self) -> bool {
        let mut class_size = BTreeMap::<u32, usize>::new();
        for &c in &self.colors {
            *class_size.entry(c).or_default() += 1;
        }
        self.blocks.iter().all(|b| b.len() >= 2 || class_size[&self.colors[b[0]]] < 2)
    }

    pub fn is_equipartition(&self) -> bool {
        let mut size = BTreeMap::<u32, usize>::new();
        self.blocks
            .iter()
            .all(|b| *size.entry(self.colors[b[0]]).or_insert(b.len()) == b.len())
    }

    pub fn permuted(&self, p: &Perm) -> ColoredPartition {
        let mut colors = vec![0; self.n()];
        for (x, &c) in self.colors.iter().enumerate() {
            colors[p.apply(x)] = c;
        }
        let blocks = self.blocks.iter().map(|b| b.iter().map(|&x| p.apply(x)).collect()).collect();
        ColoredPartition::new(&colors, blocks).expect("transported partition")
    }

    /// `class <id> size <s>:` then one line of 1-based points per block.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (id, class) in self.color_classes().iter().enumerate() {
            let _ = writeln!(s, "class {id} size {}:", class.len());
            for b in self.blocks_of(id as u32) {
                let pts: Vec<String> = b.iter().map(|x| (x + 1).to_string()).collect();
                let _ = writeln!(s, "  {}", pts.join(" "));
            }
        }
        s
    }
}

/// Encodes block sizes into the colors.
pub fn refine_to_equipartition(p: &ColoredPartition) -> ColoredPartition {
    let mut size = vec![0usize; p.n()];
    for b in &p.blocks {
        for &x in b {
            size[x] = b.len();
        }
    }
    let keys: Vec<(u32, usize)> = (0..p.n()).map(|x| (p.colors[x], size[x])).collect();
    let (colors, _) = rank_keys(&keys);
    ColoredPartition {
        colors,
        blocks: p.blocks.clone(),
    }
}

pub fn is_alpha_partition(p: &ColoredPartition, alpha: Alpha) -> bool {
    p.is_admissible() && at_most(p.max_block(), alpha, p.n())
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Colex rank of a sorted subset: `sum_i C(T_i, i + 1)`.
pub fn colex_rank(t: &[usize]) -> usize {
    t.iter().enumerate().map(|(i, &x)| binomial(x, i + 1) as usize).sum()
}

/// All `t`-subsets of `0..m` in colex order, so `subsets(m, t)[colex_rank(T)] == T`.
pub fn subsets(m: usize, t: usize) -> Vec<Vec<usize>> {
    crate::graph::subsets(m, t)
}

/// Colors the `t`-subsets (colex order) by their intersection vector with
/// the color classes of `gamma_colors`.
pub fn coloring_on_tsubsets(gamma_colors: &[u32], t: usize) -> Vec<u32> {
    let m = gamma_colors.len();
    let (ranked, k) = rank_keys(gamma_colors);
    let keys: Vec<Vec<usize>> = subsets(m, t)
        .iter()
        .map(|s| {
            let mut v = vec![0usize; k];
            for &g in s {
                v[ranked[g] as usize] += 1;
            }
            v
        })
        .collect();
    let (out, _) = rank_keys(&keys);
    debug_assert!(tuple_coloring_bounds(&ranked, t, &out).is_ok());
    out
}

/// Both items of the effect-on-tuples bound for an induced coloring.
pub fn tuple_coloring_bounds(gamma_colors: &[u32], t: usize, induced: &[u32]) -> Result<()> {
    let m = gamma_colors.len();
    if t == 0 || 2 * t > m {
        return Ok(());
    }
    let total = binomial(m, t);
    let mut class_sizes = BTreeMap::<u32, u128>::new();
    for &c in gamma_colors {
        *class_sizes.entry(c).or_default() += 1;
    }
    let mut counts = BTreeMap::<u32, u128>::new();
    for &c in induced {
        *counts.entry(c).or_default() += 1;
    }
    // The exceptional classes are those of subsets inside one color class.
    let subs = subsets(m, t);
    let mut pure = BTreeMap::<u32, u32>::new();
    for (i, s) in subs.iter().enumerate() {
        if s.iter().all(|&g| gamma_colors[g] == gamma_colors[s[0]]) {
            pure.insert(induced[i], gamma_colors[s[0]]);
        }
    }
    for (&c, &size) in &counts {
        match pure.get(&c) {
            Some(&dc) => {
                let d = class_sizes[&dc];
                // size / total <= (d / m)^t
                let lhs = size * (m as u128).pow(t as u32);
                let rhs = d.pow(t as u32) * total;
                if lhs > rhs {
                    return Err(Error::Invariant(format!("class inside a color class exceeds its (|D|/m)^t share: {size} of {total}")));
                }
            }
            None => {
                if 3 * size > 2 * total {
                    return Err(Error::Invariant(format!("mixed tuple class of size {size} exceeds 2/3 of {total}")));
                }
            }
        }
    }
    Ok(())
}

/// `C(m1,t1) C(m2,t2) <= (2/3) C(m,t)` for all admissible splits with `m <= max_m`.
/// Returns the first counterexample `(m1, m2, t1, t2)`.
pub fn verify_binomial_inequality(max_m: usize) -> Option<(usize, usize, usize, usize)> {
    for m in 2..=max_m {
        for m1 in 1..m {
            let m2 = m - m1;
            for t in 2..=m / 2 {
                for t1 in 1..t {
                    let t2 = t - t1;
                    if 3 * binomial(m1, t1) * binomial(m2, t2) > 2 * binomial(m, t) {
                        return Some((m1, m2, t1, t2));
                    }
                }
            }
        }
    }
    None
}

/// `C(m,t)^r <= (2/3)^(r-1) C(mr,tr)` for `m >= 2t`, `t >= 1`. Returns the
/// first counterexample `(m, t, r)`.
pub fn verify_rfold_inequality(max_m: usize, max_r: u32) -> Option<(usize, usize, u32)> {
    for m in 2..=max_m {
        for t in 1..=m / 2 {
            for r in 1..=max_r {
                let lhs = 3u128.pow(r - 1) * binomial(m, t).pow(r);
                let rhs = 2u128.pow(r - 1) * binomial(m * r as usize, t * r as usize);
                if lhs > rhs {
                    return Some((m, t, r));
                }
            }
        }
    }
    None
}

/// The Johnson scheme on the `t`-subsets of an `m`-set; vertex `v` is the
/// subset of colex rank `v`.
#[derive(Clone, Debug)]
pub struct JohnsonScheme {
    pub m: usize,
    pub t: usize,
    pub labels: Vec<Vec<usize>>,
    pub cc: CoherentConfig,
}

pub fn johnson_scheme(m: usize, t: usize) -> Result<JohnsonScheme> {
    if t < 2 || m < 2 * t + 1 {
        return Err(Error::Precondition(format!("Johnson scheme needs t >= 2 and m >= 2t+1, got m={m} t={t}")));
    }
    let labels = subsets(m, t);
    let cc = CoherentConfig::new(distance_config(&labels))?;
    Ok(JohnsonScheme { m, t, labels, cc })
}

fn distance_config(labels: &[Vec<usize>]) -> Config {
    let n = labels.len();
    let mut colors = vec![0u32; n * n];
    for a in 0..n {
        for b in 0..n {
            colors[a * n + b] = labels[a].iter().filter(|g| !labels[b].contains(g)).count() as u32;
        }
    }
    Config::new(n, 2, colors).expect("sizes match")
}

impl JohnsonScheme {
    pub fn n(&self) -> usize {
        self.labels.len()
    }
}

/// `labels` is a bijection onto the `t`-subsets of `0..m` (each sorted) with
/// `m >= 2t+1`, `t >= 2`.
pub fn is_johnson_bijection(m: usize, labels: &[Vec<usize>]) -> bool {
    let Some(t) = labels.first().map(Vec::len) else {
        return false;
    };
    if t < 2 || m < 2 * t + 1 || labels.len() as u128 != binomial(m, t) {
        return false;
    }
    let mut seen = vec![false; labels.len()];
    labels.iter().all(|l| {
        if l.len() != t || l.windows(2).any(|w| w[0] >= w[1]) || l.iter().any(|&g| g >= m) {
            return false;
        }
        let r = colex_rank(l);
        !std::mem::replace(&mut seen[r], true)
    })
}

/// Whether `cc`'s colors are exactly `|T1 \ T2|` under the labeling.
pub fn is_johnson_labeling(cc: &CoherentConfig, m: usize, labels: &[Vec<usize>]) -> bool {
    labels.len() == cc.n() && is_johnson_bijection(m, labels) && distance_config(labels).same_partition(cc.config())
}
