use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;

use crate::error::{Error, Result};

/// A permutation of `{0, .., n-1}`. Points act on the right: `x^(ab) = (x^a)^b`,
/// so `a.mul(&b)` applies `a` first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<u32>,
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm {
            images: (0..n as u32).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::Parse(format!("image list is not a bijection on {n} points")));
            }
            seen[x] = true;
        }
        Ok(Perm {
            images: images.into_iter().map(|x| x as u32).collect(),
        })
    }

    pub(crate) fn from_images_unchecked(images: Vec<u32>) -> Perm {
        debug_assert!(Perm::from_images(images.iter().map(|&x| x as usize).collect()).is_ok());
        Perm { images }
    }

    /// Builds a permutation from 0-based cycles.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Perm> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cyc in cycles {
            for (i, &a) in cyc.iter().enumerate() {
                if a >= n || touched[a] {
                    return Err(Error::Parse(format!("bad cycle point {}", a + 1)));
                }
                touched[a] = true;
                images[a] = cyc[(i + 1) % cyc.len()];
            }
        }
        Perm::from_images(images)
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Perm {
        let mut p = Perm::identity(n);
        p.images.swap(a, b);
        p
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self` followed by `other`.
    pub fn mul(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm {
            images: self.images.iter().map(|&x| other.images[x as usize]).collect(),
        }
    }

    /// In-place `self = self * other`.
    pub fn mul_assign(&mut self, other: &Perm) {
        for x in self.images.iter_mut() {
            *x = other.images[*x as usize];
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm { images: inv }
    }

    /// `other^-1 * self * other`.
    pub fn conjugate(&self, other: &Perm) -> Perm {
        let mut out = vec![0u32; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            out[other.images[i] as usize] = other.images[x as usize];
        }
        Perm { images: out }
    }

    pub fn pow(&self, mut e: u64) -> Perm {
        let mut base = self.clone();
        let mut acc = Perm::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] || self.apply(s) == s {
                seen[s] = true;
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                cyc.push(x);
                x = self.apply(x);
            }
            out.push(cyc);
        }
        out
    }

    pub fn is_even(&self) -> bool {
        self.cycles().iter().map(|c| c.len() - 1).sum::<usize>() % 2 == 0
    }

    pub fn order(&self) -> BigUint {
        self.cycles()
            .iter()
            .fold(BigUint::from(1u32), |acc, c| acc.lcm(&BigUint::from(c.len())))
    }

    pub fn first_moved(&self) -> Option<usize> {
        self.images.iter().enumerate().find(|(i, &x)| *i as u32 != x).map(|(i, _)| i)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.degree()).filter(|&i| self.apply(i) != i).collect()
    }

    /// Embeds into a larger degree, fixing the new points.
    pub fn extend(&self, n: usize) -> Perm {
        let mut images = self.images.clone();
        images.extend(self.degree() as u32..n as u32);
        Perm { images }
    }

    /// Restriction to an invariant point list; the result acts on positions `0..points.len()`.
    pub fn restrict(&self, points: &[usize], index_of: &[u32]) -> Perm {
        Perm {
            images: points.iter().map(|&p| index_of[self.apply(p)]).collect(),
        }
    }

    pub fn image_of_set(&self, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().map(|&x| self.apply(x)).collect();
        out.sort_unstable();
        out
    }

    /// Parses one line: cycle notation `(1 2 3)(4 5)` or a 1-based image list.
    pub fn parse(n: usize, text: &str) -> Result<Perm> {
        let t = text.trim();
        if t.is_empty() || t == "()" {
            return Ok(Perm::identity(n));
        }
        if t.starts_with('(') {
            let mut cycles = Vec::new();
            for chunk in t.split(')') {
                let chunk = chunk.trim();
                if chunk.is_empty() {
                    continue;
                }
                let body = chunk
                    .strip_prefix('(')
                    .ok_or_else(|| Error::Parse(format!("malformed cycle in {t:?}")))?;
                let pts = parse_points(body, n)?;
                if pts.len() > 1 {
                    cycles.push(pts);
                }
            }
            Perm::from_cycles(n, &cycles)
        } else {
            let pts = parse_points(t, n)?;
            if pts.len() != n {
                return Err(Error::Parse(format!("image list has {} entries, expected {n}", pts.len())));
            }
            Perm::from_images(pts)
        }
    }

    /// 1-based image list, space separated.
    pub fn to_image_string(&self) -> String {
        self.images
            .iter()
            .map(|x| (x + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn parse_points(s: &str, n: usize) -> Result<Vec<usize>> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|w| !w.is_empty())
        .map(|w| {
            let v: usize = w
                .parse()
                .map_err(|_| Error::Parse(format!("bad point {w:?}")))?;
            if v == 0 || v > n {
                return Err(Error::Parse(format!("point {v} outside 1..={n}")));
            }
            Ok(v - 1)
        })
        .collect()
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            write!(f, "(")?;
            for (i, x) in c.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", x + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_both_formats() {
        let a = Perm::parse(5, "(1 2 3)(4 5)").unwrap();
        let b = Perm::parse(5, "2 3 1 5 4").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "(1 2 3)(4 5)");
        assert_eq!(a.to_image_string(), "2 3 1 5 4");
        assert!(Perm::parse(3, "1 1 2").is_err());
        assert!(Perm::parse(3, "(1 4)").is_err());
    }

    #[test]
    fn composition_is_right_action() {
        let a = Perm::parse(3, "(1 2)").unwrap();
        let b = Perm::parse(3, "(2 3)").unwrap();
        let ab = a.mul(&b);
        assert_eq!(ab.apply(0), b.apply(a.apply(0)));
        assert!(ab.mul(&ab.inverse()).is_identity());
        assert_eq!(ab.conjugate(&b), b.inverse().mul(&ab).mul(&b));
    }

    #[test]
    fn order_and_parity() {
        let p = Perm::parse(5, "(1 2 3)(4 5)").unwrap();
        assert_eq!(p.order(), BigUint::from(6u32));
        assert!(!p.is_even());
        assert!(p.pow(6).is_identity());
    }
}
