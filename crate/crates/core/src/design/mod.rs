//! The Design Lemma: symmetry defect, Split-or-UPCC and local guides.

mod defect;
mod guide;
mod split;

use std::fmt::Write as _;

use crate::coherent::{classify, Classification, CoherentConfig, WlOptions};
use crate::error::{Error, Result};
use crate::partitions::{at_least, is_alpha_partition, is_johnson_bijection, Alpha, ColoredPartition};
use crate::perm::Perm;

pub use defect::{symmetry_defect, AutChecker, DefectMode, SymmetryDefect};
pub use guide::{relational_from_local_guide, GuideResult, LocalGuide};
pub use split::{split_or_upcc, split_or_upcc_relaxed};


/// An individualized item. Points and blocks live outside the vertex set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Choice {
    Vertex(usize),
    Point(usize),
    Block(usize),
}

/// A Johnson scheme on `w`: `w[i]` is labeled by the `t`-subset `labels[i]` of `0..m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JohnsonPart {
    pub w: Vec<usize>,
    pub m: usize,
    pub t: usize,
    pub labels: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub enum Payload {
    Split(ColoredPartition),
    /// A uniprimitive configuration on the sorted set `w`, indexed by position.
    Upcc { w: Vec<usize>, cc: CoherentConfig },
    Johnson(JohnsonPart),
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub payload: Payload,
    pub alpha: Alpha,
    pub choices: Vec<Choice>,
}

impl PartialEq for Outcome {
    fn eq(&self, other: &Outcome) -> bool {
        self.alpha == other.alpha
            && self.choices == other.choices
            && match (&self.payload, &other.payload) {
                (Payload::Split(a), Payload::Split(b)) => a == b,
                (Payload::Upcc { w: wa, cc: a }, Payload::Upcc { w: wb, cc: b }) => wa == wb && a.config() == b.config(),
                (Payload::Johnson(a), Payload::Johnson(b)) => a == b,
                _ => false,
            }
    }
}

impl Outcome {
    pub fn split(p: ColoredPartition, alpha: Alpha, choices: Vec<Choice>) -> Outcome {
        Outcome {
            payload: Payload::Split(p),
            alpha,
            choices,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self.payload {
            Payload::Split(_) => "SPLIT",
            Payload::Upcc { .. } => "UPCC",
            Payload::Johnson(_) => "JOHNSON",
        }
    }

    /// The postcondition for a domain of `n` vertices.
    pub fn validate(&self, n: usize) -> Result<()> {
        let fail = |why: String| Err(Error::Invariant(format!("{} outcome after {:?}: {why}", self.tag(), self.choices)));
        match &self.payload {
            Payload::Split(p) => {
                if p.n() != n || !is_alpha_partition(p, self.alpha) {
                    return fail(format!("not a {}-partition of {n} points", self.alpha));
                }
            }
            Payload::Upcc { w, cc } => {
                if cc.n() != w.len() || classify(cc) != Classification::Upcc {
                    return fail("configuration is not uniprimitive".into());
                }
                if !at_least(w.len(), self.alpha, n) {
                    return fail(format!("|W| = {} below {} of {n}", w.len(), self.alpha));
                }
            }
            Payload::Johnson(j) => {
                if j.w.len() != j.labels.len() || !is_johnson_bijection(j.m, &j.labels) {
                    return fail(format!("labeling is not onto the {}-subsets of {}", j.t, j.m));
                }
                if !at_least(j.w.len(), self.alpha, n) {
                    return fail(format!("|W| = {} below {} of {n}", j.w.len(), self.alpha));
                }
            }
        }
        Ok(())
    }

    /// Transport along a relabeling of the vertices.
    pub fn permuted(&self, p: &Perm) -> Outcome {
        let choices = self
            .choices
            .iter()
            .map(|c| match *c {
                Choice::Vertex(v) => Choice::Vertex(p.apply(v)),
                other => other,
            })
            .collect();
        let payload = match &self.payload {
            Payload::Split(q) => Payload::Split(q.permuted(p)),
            Payload::Upcc { w, cc } => {
                let (w2, local) = transport(w, p);
                Payload::Upcc { w: w2, cc: cc.permuted(&local) }
            }
            Payload::Johnson(j) => {
                let (w2, local) = transport(&j.w, p);
                let mut labels = vec![Vec::new(); j.labels.len()];
                for (i, l) in j.labels.iter().enumerate() {
                    labels[local.apply(i)] = l.clone();
                }
                Payload::Johnson(JohnsonPart {
                    w: w2,
                    m: j.m,
                    t: j.t,
                    labels,
                })
            }
        };
        Outcome {
            payload,
            alpha: self.alpha,
            choices,
        }
    }

    /// Dump with a `choices:` header, then the payload.
    pub fn dump(&self) -> String {
        let mut s = String::from("choices:");
        for c in &self.choices {
            let _ = match c {
                Choice::Vertex(v) => write!(s, " v{}", v + 1),
                Choice::Point(v) => write!(s, " p{}", v + 1),
                Choice::Block(v) => write!(s, " b{}", v + 1),
            };
        }
        let _ = writeln!(s, "\n{} alpha {}", self.tag(), self.alpha);
        match &self.payload {
            Payload::Split(p) => s.push_str(&p.dump()),
            Payload::Upcc { w, cc } => {
                let pts: Vec<String> = w.iter().map(|x| (x + 1).to_string()).collect();
                let _ = writeln!(s, "on {}", pts.join(" "));
                s.push_str(&cc.config().dump());
            }
            Payload::Johnson(j) => {
                let _ = writeln!(s, "m {} t {}", j.m, j.t);
                for (x, l) in j.w.iter().zip(&j.labels) {
                    let pts: Vec<String> = l.iter().map(|g| (g + 1).to_string()).collect();
                    let _ = writeln!(s, "{} {{{}}}", x + 1, pts.join(","));
                }
            }
        }
        s
    }
}

/// The image of a sorted subset, with the induced relabeling of positions.
fn transport(w: &[usize], p: &Perm) -> (Vec<usize>, Perm) {
    let mut w2: Vec<usize> = w.iter().map(|&x| p.apply(x)).collect();
    w2.sort_unstable();
    let local: Vec<usize> = w.iter().map(|&x| w2.binary_search(&p.apply(x)).expect("image present")).collect();
    (w2, Perm::from_images(local).expect("bijection"))
}

/// Outcome lists compared as sets.
pub fn normalize(mut v: Vec<Outcome>) -> Vec<Outcome> {
    v.sort_by(|a, b| a.choices.cmp(&b.choices).then_with(|| a.dump().cmp(&b.dump())));
    v
}

#[derive(Clone, Debug)]
pub struct DesignOptions {
    pub wl: WlOptions,
    /// Maximum number of individualize-and-refine runs per call.
    pub max_steps: u64,
}

impl Default for DesignOptions {
    fn default() -> DesignOptions {
        DesignOptions {
            wl: WlOptions::default(),
            max_steps: 200_000,
        }
    }
}
