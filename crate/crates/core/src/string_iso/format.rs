use super::StringInstance;
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::permgroup::PermGroup;

/// Dense integer codes for symbols, in order of the given alphabet.
pub fn intern(alphabet: &[String], word: &[String]) -> Result<Vec<u32>> {
    word.iter()
        .map(|w| {
            alphabet
                .iter()
                .position(|a| a == w)
                .map(|i| i as u32)
                .ok_or_else(|| Error::Parse(format!("symbol {w:?} is not in the alphabet")))
        })
        .collect()
}

fn tokens(rest: &str, n: usize) -> Vec<String> {
    let parts: Vec<&str> = rest.split_whitespace().collect();
    if parts.len() == 1 && parts[0].chars().count() == n && n > 1 {
        parts[0].chars().map(|c| c.to_string()).collect()
    } else {
        parts.into_iter().map(str::to_string).collect()
    }
}

fn points(rest: &str, n: usize) -> Result<Vec<usize>> {
    rest.split_whitespace()
        .map(|t| {
            let p: usize = t.parse().map_err(|_| Error::Parse(format!("bad point {t:?}")))?;
            if p == 0 || p > n {
                return Err(Error::Parse(format!("point {p} out of range 1..={n}")));
            }
            Ok(p - 1)
        })
        .collect()
}

/// Parses the line-oriented instance format; points are 1-based.
///
/// ```text
/// degree 4
/// alphabet a b
/// x aabb
/// y bbaa
/// gen: (1 2 3 4)
/// gen: (1 2)
/// window 1 2 3 4
/// shift (1 3)
/// ```
///
/// `window` and `shift` are optional. Without `alphabet` the symbols are
/// ordered as they first appear in `x` then `y`.
pub fn parse_instance(text: &str) -> Result<StringInstance> {
    let mut n = None;
    let mut alphabet: Option<Vec<String>> = None;
    let (mut xs, mut ys) = (None, None);
    let mut gens = Vec::new();
    let mut window = None;
    let mut shift = None;
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let need = |n: Option<usize>| n.ok_or_else(|| Error::Parse(format!("`{key}` before `degree`")));
        match key.trim_end_matches(':') {
            "degree" => {
                n = Some(rest.parse().map_err(|_| Error::Parse(format!("bad degree {rest:?}")))?);
            }
            "alphabet" => alphabet = Some(rest.split_whitespace().map(str::to_string).collect()),
            "x" => xs = Some(tokens(rest, need(n)?)),
            "y" => ys = Some(tokens(rest, need(n)?)),
            "gen" => gens.push(Perm::parse(need(n)?, rest)?),
            "window" => window = Some(points(rest, need(n)?)?),
            "shift" => shift = Some(Perm::parse(need(n)?, rest)?),
            other => return Err(Error::Parse(format!("unknown key {other:?}"))),
        }
    }
    let n = n.ok_or_else(|| Error::Parse("missing `degree`".into()))?;
    let xs = xs.ok_or_else(|| Error::Parse("missing `x`".into()))?;
    let ys = ys.ok_or_else(|| Error::Parse("missing `y`".into()))?;
    let alphabet = alphabet.unwrap_or_else(|| {
        let mut a: Vec<String> = Vec::new();
        for s in xs.iter().chain(&ys) {
            if !a.contains(s) {
                a.push(s.clone());
            }
        }
        a
    });
    let x = intern(&alphabet, &xs)?;
    let y = intern(&alphabet, &ys)?;
    let group = PermGroup::new(n, gens)?;
    let mut inst = StringInstance::new(group, x, y);
    if let Some(w) = window {
        inst = inst.with_window(w);
    }
    if let Some(s) = shift {
        inst = inst.with_shift(s);
    }
    inst.validate().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(inst)
}
