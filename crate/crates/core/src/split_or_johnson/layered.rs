//! The bipartite instance with its carried structure: a pair coloring on
//! `V2`, and optionally a ground set `Gamma` with `V2` as `t`-subsets of it
//! (and a second ground `Gamma'` under `Gamma`). Refinement runs 2-dim WL on
//! the disjoint union of all layers.

use crate::coherent::{rank_keys, wl_refine, CoherentConfig, Config};
use crate::error::Result;
use crate::partitions::{binomial, ColoredPartition};

use super::ColoredBipartite;

#[derive(Clone, Debug)]
pub(crate) struct Ground {
    pub m: usize,
    /// The sorted subset of `0..m` labeling each element of the layer below.
    pub sets: Vec<Vec<usize>>,
    pub colors: Vec<u32>,
    /// Pair colors on `0..m`, row-major.
    pub rel: Option<Vec<u32>>,
    pub upper: Option<Box<Ground>>,
}

impl Ground {
    pub fn new(m: usize, sets: Vec<Vec<usize>>) -> Ground {
        Ground {
            m,
            sets,
            colors: vec![0; m],
            rel: None,
            upper: None,
        }
    }

    /// Labels `t`-sets, onto `C(m, t)`, with `t >= 2` and `m >= 2t + 1`.
    pub fn is_johnson(&self) -> bool {
        let t = self.sets.first().map_or(0, Vec::len);
        t >= 2 && self.m > 2 * t && crate::partitions::is_johnson_bijection(self.m, &sorted_by_colex(&self.sets))
    }

    pub fn t(&self) -> usize {
        self.sets.first().map_or(0, Vec::len)
    }

    /// Drops the points below every set and the points in every set, and
    /// complements the labels when they are more than half of the rest.
    /// `None` unless the result is again a nontrivial Johnson labeling.
    fn recognized(self) -> Option<Ground> {
        let k = self.sets.len();
        let mut count = vec![0usize; self.m];
        for s in &self.sets {
            for &g in s {
                count[g] += 1;
            }
        }
        let keep: Vec<usize> = (0..self.m).filter(|&g| count[g] > 0 && count[g] < k).collect();
        let pos = position_map(self.m, &keep);
        let mut sets: Vec<Vec<usize>> = self
            .sets
            .iter()
            .map(|s| s.iter().filter(|&&g| pos[g] != usize::MAX).map(|&g| pos[g]).collect())
            .collect();
        let m = keep.len();
        let t = sets.first().map_or(0, Vec::len);
        if sets.iter().any(|s| s.len() != t) || binomial(m, t) != k as u128 {
            return None;
        }
        if 2 * t > m {
            sets = sets.iter().map(|s| (0..m).filter(|g| !s.contains(g)).collect()).collect();
        }
        let g = Ground {
            m,
            sets,
            colors: keep.iter().map(|&g| self.colors[g]).collect(),
            rel: self.rel.as_ref().map(|r| restrict_rel(r, self.m, &keep)),
            upper: self.upper.and_then(|u| u.restricted_below(&keep)),
        };
        g.is_johnson().then_some(g)
    }

    /// The layer below shrank to `keep`.
    fn restricted_below(self, keep: &[usize]) -> Option<Box<Ground>> {
        let g = Ground {
            sets: keep.iter().map(|&i| self.sets[i].clone()).collect(),
            ..self
        };
        g.recognized().map(Box::new)
    }
}

fn sorted_by_colex(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut v = sets.to_vec();
    v.sort_by_key(|s| crate::partitions::colex_rank(s));
    v
}

fn position_map(n: usize, keep: &[usize]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; n];
    for (i, &x) in keep.iter().enumerate() {
        pos[x] = i;
    }
    pos
}

pub(crate) fn restrict_rel(rel: &[u32], n: usize, keep: &[usize]) -> Vec<u32> {
    keep.iter().flat_map(|&a| keep.iter().map(move |&b| rel[a * n + b])).collect()
}

/// Extra structure installed on a layer.
#[derive(Clone, Debug)]
pub enum Install {
    Partition(ColoredPartition),
    /// A uniprimitive configuration on the sorted subset `w`.
    Upcc { w: Vec<usize>, cc: CoherentConfig },
    /// The listed elements get distinct colors by position.
    Individualize(Vec<usize>),
}

impl Install {
    /// New point colors and pair colors, refining the given ones.
    fn apply(&self, n: usize, colors: &mut Vec<u32>, rel: &mut Option<Vec<u32>>) {
        let base = rel.clone().unwrap_or_else(|| vec![0; n * n]);
        let (point, pair): (Vec<u64>, Vec<u64>) = match self {
            Install::Partition(p) => {
                let mut block = vec![0usize; n];
                for (i, b) in p.blocks().iter().enumerate() {
                    for &x in b {
                        block[x] = i;
                    }
                }
                (
                    (0..n).map(|x| u64::from(p.colors()[x])).collect(),
                    (0..n * n).map(|i| u64::from(block[i / n] == block[i % n])).collect(),
                )
            }
            Install::Upcc { w, cc } => {
                let pos = position_map(n, w);
                (
                    (0..n).map(|x| u64::from(pos[x] != usize::MAX)).collect(),
                    (0..n * n)
                        .map(|i| {
                            let (a, b) = (pos[i / n], pos[i % n]);
                            if a == usize::MAX || b == usize::MAX {
                                0
                            } else {
                                1 + u64::from(cc.c(a, b))
                            }
                        })
                        .collect(),
                )
            }
            Install::Individualize(seq) => {
                let pos = position_map(n, seq);
                ((0..n).map(|x| if pos[x] == usize::MAX { 0 } else { 1 + pos[x] as u64 }).collect(), vec![0; n * n])
            }
        };
        let pk: Vec<(u32, u64)> = colors.iter().copied().zip(point).collect();
        *colors = rank_keys(&pk).0;
        let rk: Vec<(u32, u64)> = base.into_iter().zip(pair).collect();
        *rel = Some(rank_keys(&rk).0);
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Layered {
    pub x: ColoredBipartite,
    pub rel2: Option<Vec<u32>>,
    /// Stable identities of the `V2` elements.
    pub ids2: Vec<u64>,
    pub ground: Option<Ground>,
}

pub(crate) struct Analysis {
    /// Vertex colors of `V1`, ranked.
    pub colors1: Vec<u32>,
    /// `c(x, y)` for `x` in `V1`, `y` in `V2`, row-major.
    pub cross: Vec<u32>,
    pub x2: CoherentConfig,
    pub gamma: Option<CoherentConfig>,
    pub upper: Option<CoherentConfig>,
    pub rank: usize,
}

impl Layered {
    pub fn new(x: ColoredBipartite, ids2: Vec<u64>) -> Layered {
        Layered {
            x,
            rel2: None,
            ids2,
            ground: None,
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.x.n1, self.x.n2];
        let mut g = self.ground.as_ref();
        while let Some(gr) = g {
            s.push(gr.m);
            g = gr.upper.as_deref();
        }
        s
    }

    fn grounds(&self) -> Vec<&Ground> {
        let mut out = Vec::new();
        let mut g = self.ground.as_ref();
        while let Some(gr) = g {
            out.push(gr);
            g = gr.upper.as_deref();
        }
        out
    }

    pub fn analyze(&self) -> Result<Analysis> {
        let sizes = self.sizes();
        let grounds = self.grounds();
        let total: usize = sizes.iter().sum();
        let mut layer = Vec::with_capacity(total);
        let mut local = Vec::with_capacity(total);
        for (l, &s) in sizes.iter().enumerate() {
            layer.extend(std::iter::repeat_n(l, s));
            local.extend(0..s);
        }
        // Membership of an element of layer `l >= 1` in a point of layer `l + 1`.
        let member: Vec<Vec<Vec<bool>>> = grounds
            .iter()
            .map(|g| {
                g.sets
                    .iter()
                    .map(|s| {
                        let mut row = vec![false; g.m];
                        for &p in s {
                            row[p] = true;
                        }
                        row
                    })
                    .collect()
            })
            .collect();
        let vertex_color = |l: usize, a: usize| -> u32 {
            match l {
                0 => self.x.colors1[a],
                1 => self.x.colors2[a],
                _ => grounds[l - 2].colors[a],
            }
        };
        let within = |l: usize, a: usize, b: usize| -> u32 {
            let rel = match l {
                0 => None,
                1 => self.rel2.as_ref(),
                _ => grounds[l - 2].rel.as_ref(),
            };
            rel.map_or(0, |r| 1 + r[a * sizes[l] + b])
        };
        let keys: Vec<(u8, u8, u8, u32)> = (0..total * total)
            .map(|i| {
                let (u, v) = (i / total, i % total);
                let (lu, lv, a, b) = (layer[u], layer[v], local[u], local[v]);
                if u == v {
                    return (0, lu as u8, 0, vertex_color(lu, a));
                }
                let code = if lu == lv {
                    within(lu, a, b)
                } else if lu + lv == 1 {
                    let (x, y) = if lu == 0 { (a, b) } else { (b, a) };
                    u32::from(self.x.has_edge(x, y))
                } else if lu >= 1 && lv == lu + 1 {
                    u32::from(member[lu - 1][a][b])
                } else if lv >= 1 && lu == lv + 1 {
                    u32::from(member[lv - 1][b][a])
                } else {
                    0
                };
                (1, lu as u8, lv as u8, code)
            })
            .collect();
        let (colors, rank) = rank_keys(&keys);
        let cc = wl_refine(&Config::from_ranked(total, 2, colors, rank))?;
        let (n1, n2) = (self.x.n1, self.x.n2);
        let v1_colors: Vec<u32> = (0..n1).map(|x| cc.c(x, x)).collect();
        let cross = (0..n1 * n2).map(|i| cc.c(i / n2, n1 + i % n2)).collect();
        let mut offset = n1;
        let mut range = |s: usize| {
            let r: Vec<usize> = (offset..offset + s).collect();
            offset += s;
            r
        };
        let v2 = range(n2);
        let x2 = CoherentConfig::trusted(cc.config().induced(&v2));
        let gamma = sizes.get(2).map(|&m| CoherentConfig::trusted(cc.config().induced(&range(m))));
        let upper = sizes.get(3).map(|&m| CoherentConfig::trusted(cc.config().induced(&range(m))));
        Ok(Analysis {
            colors1: rank_keys(&v1_colors).0,
            cross,
            x2,
            gamma,
            upper,
            rank: cc.rank(),
        })
    }

    /// Carries the refined colors into the instance.
    pub fn absorb(&mut self, an: &Analysis) {
        let vc = |cc: &CoherentConfig| rank_keys(&(0..cc.n()).map(|x| cc.c(x, x)).collect::<Vec<u32>>()).0;
        self.x.colors1 = an.colors1.clone();
        self.x.colors2 = vc(&an.x2);
        self.rel2 = Some(an.x2.config().colors().to_vec());
        if let (Some(g), Some(cc)) = (self.ground.as_mut(), an.gamma.as_ref()) {
            g.colors = vc(cc);
            g.rel = Some(cc.config().colors().to_vec());
            if let (Some(u), Some(cc)) = (g.upper.as_mut(), an.upper.as_ref()) {
                u.colors = vc(cc);
                u.rel = Some(cc.config().colors().to_vec());
            }
        }
    }

    pub fn restrict_v1(&mut self, keep: &[usize]) {
        let all: Vec<usize> = (0..self.x.n2).collect();
        self.x = self.x.induced(keep, &all);
    }

    /// Keeps the `V2` elements `keep` (sorted) and re-recognizes the ground.
    pub fn restrict_v2(&mut self, keep: &[usize]) {
        let n2 = self.x.n2;
        let all: Vec<usize> = (0..self.x.n1).collect();
        self.x = self.x.induced(&all, keep);
        self.rel2 = self.rel2.as_ref().map(|r| restrict_rel(r, n2, keep));
        self.ids2 = keep.iter().map(|&i| self.ids2[i]).collect();
        self.ground = self.ground.take().and_then(|g| {
            let sets = keep.iter().map(|&i| g.sets[i].clone()).collect();
            Ground { sets, ..g }.recognized()
        });
    }

    pub fn install_v2(&mut self, ins: &Install) {
        ins.apply(self.x.n2, &mut self.x.colors2, &mut self.rel2);
    }

    pub fn install_gamma(&mut self, ins: &Install) {
        let g = self.ground.as_mut().expect("ground present");
        ins.apply(g.m, &mut g.colors, &mut g.rel);
    }

    /// Labels every point of `Gamma` by a `t'`-subset of a new ground of size `m`.
    pub fn attach_upper(&mut self, m: usize, labels: Vec<Vec<usize>>) {
        let g = self.ground.as_mut().expect("ground present");
        g.upper = Some(Box::new(Ground::new(m, labels)));
    }
}
